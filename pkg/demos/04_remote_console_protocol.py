"""Remote console protocol.

Start the mattress service in-process, connect a TCP client, and drive
the same newline-delimited JSON schema the browser console uses:
activate, subscribe to snapshots, change firmness, read status.
"""

import asyncio

from bedsim import FirmnessMode, Simulation, get_profile
from bedsim import protocol
from bedsim.server import MattressServer


async def main():
    sim = Simulation(get_profile("adult_supine_80"))
    server = MattressServer(sim, port=7470, ws_port=7471)
    server_task = asyncio.create_task(server.serve())
    await asyncio.sleep(0.2)

    reader, writer = await asyncio.open_connection("127.0.0.1", 7470)

    async def request(msg):
        writer.write(protocol.encode(msg))
        await writer.drain()
        while True:
            reply = protocol.decode(await reader.readline())
            if not isinstance(reply, protocol.Snapshot):
                return reply

    print("->", protocol.encode(protocol.Hello()).decode().strip())
    print("<-", await request(protocol.Hello()))
    print("<-", await request(protocol.GetStatus()))
    print("<-", await request(protocol.Activate(FirmnessMode.STANDARD)))
    print("<-", await request(protocol.Subscribe(rate_hz=5)))

    snapshots = 0
    while snapshots < 3:
        msg = protocol.decode(await reader.readline())
        if isinstance(msg, protocol.Snapshot):
            snapshots += 1
            total = sum(sum(row) for row in msg.pressures)
            print(f"<- snapshot tick={msg.tick} total={total:.2f} kgf")

    print("<-", await request(protocol.SetMode(FirmnessMode.MEDIUM)))
    print("<-", await request(protocol.GetStatus()))

    writer.close()
    await writer.wait_closed()
    server.stop()
    try:
        await asyncio.wait_for(server_task, timeout=2)
    except asyncio.TimeoutError:
        server_task.cancel()


asyncio.run(main())

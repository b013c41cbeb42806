import asyncio
import socket

import numpy as np
import pytest

from bedsim import protocol
from bedsim.morphology import FirmnessMode
from bedsim.plant import get_profile
from bedsim.server import MattressServer
from bedsim.sim import Simulation


def free_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


class Client:
    def __init__(self, reader, writer):
        self.reader = reader
        self.writer = writer

    @classmethod
    async def connect(cls, port):
        for _ in range(50):
            try:
                reader, writer = await asyncio.open_connection("127.0.0.1", port)
                return cls(reader, writer)
            except OSError:
                await asyncio.sleep(0.05)
        raise RuntimeError("server did not come up")

    async def send_raw(self, data: bytes):
        self.writer.write(data)
        await self.writer.drain()

    async def recv(self, timeout=5.0):
        line = await asyncio.wait_for(self.reader.readline(), timeout)
        assert line, "connection closed unexpectedly"
        return protocol.decode(line)

    async def recv_reply(self, timeout=5.0):
        """Next non-snapshot message (snapshots interleave with replies)."""
        while True:
            msg = await self.recv(timeout)
            if not isinstance(msg, protocol.Snapshot):
                return msg

    async def request(self, msg, timeout=5.0):
        await self.send_raw(protocol.encode(msg))
        return await self.recv_reply(timeout)

    async def close(self):
        self.writer.close()
        try:
            await self.writer.wait_closed()
        except (ConnectionResetError, BrokenPipeError):
            pass


async def with_server(body, profile="adult_supine_80", fast=True, max_ticks=None):
    sim = Simulation(get_profile(profile))
    server = MattressServer(
        sim, port=free_port(), ws_port=free_port(), fast=fast, max_ticks=max_ticks
    )
    task = asyncio.create_task(server.serve())
    try:
        return await asyncio.wait_for(body(server), timeout=30)
    finally:
        server.stop()
        try:
            await asyncio.wait_for(task, timeout=5)
        except (asyncio.TimeoutError, asyncio.CancelledError):
            task.cancel()


class TestSessions:
    def test_activate_and_status_round_trip(self):
        async def body(server):
            client = await Client.connect(server.port)
            assert await client.request(protocol.Hello()) == protocol.Ack("hello")
            status = await client.request(protocol.GetStatus())
            assert isinstance(status, protocol.Status)
            assert not status.active
            assert status.weight_kgf == pytest.approx(80.0, abs=0.5)
            assert await client.request(
                protocol.Activate(FirmnessMode.STANDARD)
            ) == protocol.Ack("activate")
            status = await client.request(protocol.GetStatus())
            assert status.active and status.mode is FirmnessMode.STANDARD
            await client.close()

        asyncio.run(with_server(body))

    def test_reply_order_matches_request_order(self):
        async def body(server):
            client = await Client.connect(server.port)
            await client.send_raw(
                protocol.encode(protocol.Hello())
                + protocol.encode(protocol.Activate(FirmnessMode.MEDIUM))
                + protocol.encode(protocol.Deactivate())
            )
            assert await client.recv_reply() == protocol.Ack("hello")
            assert await client.recv_reply() == protocol.Ack("activate")
            assert await client.recv_reply() == protocol.Ack("deactivate")
            await client.close()

        asyncio.run(with_server(body))

    def test_gate_rejection_surfaces_as_protocol_error(self):
        async def body(server):
            client = await Client.connect(server.port)
            reply = await client.request(protocol.Activate(FirmnessMode.STANDARD))
            assert isinstance(reply, protocol.Error)
            assert reply.code == "gate_rejected"
            assert "10.0" in reply.message
            await client.close()

        asyncio.run(with_server(body, profile="child_supine_10"))

    def test_malformed_frame_leaves_sessions_functional(self):
        async def body(server):
            alice = await Client.connect(server.port)
            bob = await Client.connect(server.port)
            await alice.send_raw(b"\x01this is not json\n")
            err = await alice.recv_reply()
            assert isinstance(err, protocol.Error) and err.code == "bad_frame"
            # Alice's session survived; Bob never noticed.
            assert await alice.request(protocol.Hello()) == protocol.Ack("hello")
            assert isinstance(await bob.request(protocol.GetStatus()), protocol.Status)
            await alice.close()
            await bob.close()

        asyncio.run(with_server(body))

    def test_version_mismatch_error(self):
        async def body(server):
            client = await Client.connect(server.port)
            await client.send_raw(b'{"v":9,"type":"get_status"}\n')
            err = await client.recv_reply()
            assert isinstance(err, protocol.Error) and err.code == "bad_version"
            await client.close()

        asyncio.run(with_server(body))

    def test_mode_change_visible_to_all_clients(self):
        async def body(server):
            alice = await Client.connect(server.port)
            bob = await Client.connect(server.port)
            await alice.request(protocol.Activate(FirmnessMode.STANDARD))
            await bob.request(protocol.SetMode(FirmnessMode.SOFT))
            for client in (alice, bob):
                status = await client.request(protocol.GetStatus())
                assert status.mode is FirmnessMode.SOFT
            await alice.close()
            await bob.close()

        asyncio.run(with_server(body))

    def test_dropped_session_leaves_simulation_running(self):
        async def body(server):
            client = await Client.connect(server.port)
            await client.request(protocol.Activate(FirmnessMode.STANDARD))
            await client.close()
            survivor = await Client.connect(server.port)
            status = await survivor.request(protocol.GetStatus())
            assert status.active
            await survivor.close()

        asyncio.run(with_server(body))


class TestSnapshots:
    def test_subscription_rate_cap_in_ticks(self):
        # tick_dt 0.05 s -> 20 ticks/s; 5 Hz means >= 4 ticks between frames.
        async def body(server):
            client = await Client.connect(server.port)
            assert await client.request(protocol.Subscribe(rate_hz=5)) == protocol.Ack(
                "subscribe"
            )
            ticks = []
            while len(ticks) < 6:
                msg = await client.recv()
                if isinstance(msg, protocol.Snapshot):
                    ticks.append(msg.tick)
            gaps = np.diff(ticks)
            assert np.all(gaps >= 4)
            await client.request(protocol.Unsubscribe())
            await client.close()

        asyncio.run(with_server(body))

    def test_snapshot_arrays_are_consistent(self):
        async def body(server):
            client = await Client.connect(server.port)
            await client.request(protocol.Activate(FirmnessMode.STANDARD))
            await client.request(protocol.Subscribe(rate_hz=20))
            msg = await client.recv()
            while not isinstance(msg, protocol.Snapshot):
                msg = await client.recv()
            pressures = np.array(msg.pressures)
            support = np.array(msg.support)
            assert pressures.shape == (18, 9)
            assert np.array(msg.extensions).shape == (18, 9)
            assert support.sum() == 53
            assert pressures.sum() == pytest.approx(80.0, abs=0.1)
            await client.close()

        asyncio.run(with_server(body))

    def test_websocket_transport_speaks_the_same_schema(self):
        from websockets.asyncio.client import connect as ws_connect

        async def body(server):
            for _ in range(50):
                try:
                    ws = await ws_connect(f"ws://127.0.0.1:{server.ws_port}")
                    break
                except OSError:
                    await asyncio.sleep(0.05)
            async with ws:
                await ws.send(protocol.encode(protocol.Hello()).decode())
                reply = protocol.decode(await ws.recv())
                assert reply == protocol.Ack("hello")
                await ws.send(protocol.encode(protocol.GetStatus()).decode())
                status = protocol.decode(await ws.recv())
                assert isinstance(status, protocol.Status)

        asyncio.run(with_server(body))


class TestThrottleIndependence:
    def test_fast_and_throttled_runs_agree(self):
        async def run_one(fast):
            sim = Simulation(get_profile("adult_supine_80"))
            sim.perturb((3, 2), 5.0)
            sim.activate(FirmnessMode.STANDARD)
            server = MattressServer(
                sim, port=free_port(), ws_port=free_port(), fast=fast, max_ticks=25
            )
            await server.serve()
            return sim

        fast_sim = asyncio.run(run_one(True))
        slow_sim = asyncio.run(run_one(False))
        assert fast_sim.tick_index == slow_sim.tick_index == 25
        assert np.array_equal(fast_sim.forces.values, slow_sim.forces.values)
        assert np.array_equal(fast_sim.bank.extension, slow_sim.bank.extension)

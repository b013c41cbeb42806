"""Network service: the tick loop plus framed sessions over TCP and WebSocket.

All mutating requests funnel through one ordered queue and are applied by
the simulation owner between ticks, so concurrent clients see a single
serialized command stream. Snapshot fan-out is latest-wins per session: a
slow consumer only ever loses intermediate frames, never control replies.
"""

from __future__ import annotations

import asyncio
import contextlib
import logging
from dataclasses import dataclass, field

from websockets.asyncio.server import serve as ws_serve
from websockets.exceptions import ConnectionClosed

from . import protocol
from .sim import Simulation

log = logging.getLogger(__name__)

DEFAULT_PORT = 7470
DEFAULT_WS_PORT = 7471


@dataclass
class _Subscription:
    interval_ticks: int
    next_tick: int = 0


@dataclass(eq=False)
class _Session:
    send_line: object  # async callable(bytes) -> None
    subscription: _Subscription | None = None
    latest: protocol.Snapshot | None = None
    wakeup: asyncio.Event = field(default_factory=asyncio.Event)


class MattressServer:
    """Hosts one Simulation behind the wire protocol."""

    def __init__(
        self,
        sim: Simulation,
        host: str = "127.0.0.1",
        port: int = DEFAULT_PORT,
        ws_port: int = DEFAULT_WS_PORT,
        fast: bool = False,
        max_ticks: int | None = None,
    ):
        self.sim = sim
        self.host = host
        self.port = port
        self.ws_port = ws_port
        self.fast = fast
        self.max_ticks = max_ticks
        self.commands: asyncio.Queue[tuple[protocol.Message, asyncio.Future]] = asyncio.Queue()
        self.sessions: set[_Session] = set()
        self.stopping = asyncio.Event()

    # -- tick loop --------------------------------------------------------

    async def _tick_loop(self) -> None:
        dt = self.sim.control_cfg.tick_dt
        while not self.stopping.is_set():
            while not self.commands.empty():
                msg, future = self.commands.get_nowait()
                if not future.done():
                    future.set_result(self.sim.apply_message(msg))
            self.sim.step()
            self._fan_out()
            if self.max_ticks is not None and self.sim.tick_index >= self.max_ticks:
                self.stopping.set()
                break
            if not self.fast:
                await asyncio.sleep(dt)
            else:
                await asyncio.sleep(0)  # let sessions run

    def _fan_out(self) -> None:
        snapshot = None
        for session in self.sessions:
            sub = session.subscription
            if sub is None or self.sim.tick_index < sub.next_tick:
                continue
            if snapshot is None:
                snapshot = self.sim.snapshot()
            sub.next_tick = self.sim.tick_index + sub.interval_ticks
            session.latest = snapshot  # latest wins; unsent older one is dropped
            session.wakeup.set()

    def _subscribe(self, session: _Session, rate_hz: float) -> None:
        per_second = 1.0 / self.sim.control_cfg.tick_dt
        interval = max(1, round(per_second / rate_hz))
        session.subscription = _Subscription(interval_ticks=interval)

    # -- sessions ---------------------------------------------------------

    async def _snapshot_sender(self, session: _Session) -> None:
        while True:
            await session.wakeup.wait()
            session.wakeup.clear()
            snapshot, session.latest = session.latest, None
            if snapshot is not None:
                await session.send_line(protocol.encode(snapshot))

    async def _handle_line(self, session: _Session, line: bytes) -> None:
        try:
            msg = protocol.decode(line)
        except protocol.ProtocolError as exc:
            await session.send_line(protocol.encode(protocol.Error(exc.code, exc.message)))
            return
        if isinstance(msg, protocol.Subscribe):
            self._subscribe(session, msg.rate_hz)
            await session.send_line(protocol.encode(protocol.Ack("subscribe")))
            return
        if isinstance(msg, protocol.Unsubscribe):
            session.subscription = None
            await session.send_line(protocol.encode(protocol.Ack("unsubscribe")))
            return
        future: asyncio.Future = asyncio.get_running_loop().create_future()
        await self.commands.put((msg, future))
        reply = await future
        await session.send_line(protocol.encode(reply))

    async def _run_session(self, session: _Session, read_line) -> None:
        self.sessions.add(session)
        sender = asyncio.create_task(self._snapshot_sender(session))
        try:
            while True:
                line = await read_line()
                if line is None:
                    break
                await self._handle_line(session, line)
        except (ConnectionResetError, ConnectionClosed, asyncio.IncompleteReadError):
            pass
        finally:
            sender.cancel()
            self.sessions.discard(session)

    async def _tcp_session(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter):
        lock = asyncio.Lock()

        async def send_line(data: bytes) -> None:
            async with lock:
                writer.write(data)
                await writer.drain()

        async def read_line():
            line = await reader.readline()
            return line if line else None

        session = _Session(send_line=send_line)
        try:
            await self._run_session(session, read_line)
        finally:
            writer.close()
            with contextlib.suppress(Exception):
                await writer.wait_closed()

    async def _ws_session(self, websocket) -> None:
        async def send_line(data: bytes) -> None:
            await websocket.send(data.decode("utf-8"))

        aiter = websocket.__aiter__()

        async def read_line():
            try:
                frame = await aiter.__anext__()
            except StopAsyncIteration:
                return None
            return frame.encode("utf-8") if isinstance(frame, str) else frame

        await self._run_session(_Session(send_line=send_line), read_line)

    # -- lifecycle --------------------------------------------------------

    async def serve(self) -> None:
        tcp_server = await asyncio.start_server(self._tcp_session, self.host, self.port)
        async with ws_serve(self._ws_session, self.host, self.ws_port):
            log.info("listening on tcp://%s:%d and ws://%s:%d",
                     self.host, self.port, self.host, self.ws_port)
            ticker = asyncio.create_task(self._tick_loop())
            try:
                await self.stopping.wait()
            finally:
                ticker.cancel()
                with contextlib.suppress(asyncio.CancelledError):
                    await ticker
                tcp_server.close()
                await tcp_server.wait_closed()

    def stop(self) -> None:
        self.stopping.set()

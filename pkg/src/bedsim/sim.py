"""Single-owner simulation loop.

One Simulation instance owns the plant, actuator bank, and control state,
and is the only thing that mutates them. Remote requests are applied
between ticks through apply_message, which maps protocol messages onto
controller operations and returns the reply message.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import protocol
from .control import (
    ControlConfig,
    ControlState,
    deactivate,
    set_mode,
    tick,
    validate_loop_stability,
)
from .control import activate as _activate
from .errors import BedsimError, GateRejectedError, NoContactError, ValidationError
from .grid import PressureMap, total_weight
from .morphology import SQUARE3, FirmnessMode, StructuringElement
from .plant import (
    ActuatorBank,
    BodyProfile,
    PlantConfig,
    SensorModel,
    profile_from_dict,
    read_sensors,
    resolve_profile,
    solve_equilibrium,
)


@dataclass(frozen=True)
class TraceRow:
    tick: int
    max_abs_deviation: float
    total_force: float


class Simulation:
    """The simulated mattress plus its bedding controller, stepped tick by tick."""

    def __init__(
        self,
        profile: BodyProfile,
        control_cfg: ControlConfig | None = None,
        plant_cfg: PlantConfig | None = None,
        sensor: SensorModel | None = None,
        se: StructuringElement = SQUARE3,
        seed: int = 0,
    ):
        self.control_cfg = control_cfg or ControlConfig()
        self.plant_cfg = plant_cfg or PlantConfig()
        self.sensor = sensor or SensorModel()
        self.se = se
        self.seed = seed
        self.state = ControlState()
        self.profile = profile
        self.bank = ActuatorBank.at_extension(profile.grid, self.plant_cfg.neutral_extension)
        validate_loop_stability(self.plant_cfg, self.bank, self.control_cfg)
        self.sink, self.forces = solve_equilibrium(profile, self.bank, self.plant_cfg)
        self.tick_index = 0
        self.last_max_dev = 0.0

    # -- controller-facing operations ------------------------------------

    def readings(self) -> PressureMap:
        return read_sensors(self.forces, self.sensor, self._tick_seed())

    def _tick_seed(self) -> int:
        return self.seed + self.tick_index

    def activate(self, mode: FirmnessMode) -> ControlState:
        self.state = _activate(self.readings(), mode, self.control_cfg, self.se)
        return self.state

    def set_mode(self, mode: FirmnessMode) -> ControlState:
        try:
            self.state = set_mode(self.state, mode, self.readings(), self.control_cfg, self.se)
        except NoContactError:
            self.state = deactivate(self.state)
            raise
        return self.state

    def deactivate(self) -> ControlState:
        self.state = deactivate(self.state)
        return self.state

    def load_body(self, profile: BodyProfile) -> None:
        """Swap the body; control drops back to inactive and the plant re-settles."""
        self.profile = profile
        self.bank = ActuatorBank.at_extension(profile.grid, self.plant_cfg.neutral_extension)
        self.state = ControlState()
        self.sink, self.forces = solve_equilibrium(profile, self.bank, self.plant_cfg)

    def perturb(self, cell: tuple[int, int], delta_mm: float) -> None:
        """Displace one shaft (test disturbances); clamped to travel limits."""
        ext = self.bank.extension.copy()
        i, j = cell
        ext[i, j] = np.clip(ext[i, j] + delta_mm, 0.0, self.bank.travel_max)
        self.bank = ActuatorBank(
            self.bank.grid, ext, self.bank.direction, self.bank.travel_max, self.bank.speed
        )
        self.sink, self.forces = solve_equilibrium(self.profile, self.bank, self.plant_cfg)
        if self.state.active and self.state.converged:
            # A disturbance reopens the loop; demand a fresh in-band run.
            self.state = replace(self.state, converged=False, in_band_streak=0)

    def step(self) -> TraceRow:
        """Advance one control tick."""
        result = tick(
            self.profile,
            self.bank,
            self.forces,
            self.state,
            self.control_cfg,
            self.plant_cfg,
            self.sensor,
            seed=self._tick_seed(),
        )
        self.bank = result.bank
        self.state = result.state
        self.sink = result.sink
        self.forces = result.forces
        self.tick_index += 1
        self.last_max_dev = result.max_abs_deviation
        return TraceRow(
            tick=self.tick_index,
            max_abs_deviation=result.max_abs_deviation,
            total_force=float(result.forces.values.sum()),
        )

    # -- protocol-facing operations --------------------------------------

    def status(self) -> protocol.Status:
        return protocol.Status(
            weight_kgf=total_weight(self.readings()),
            mode=self.state.mode,
            active=self.state.active,
            converged=self.state.converged,
            tick=self.tick_index,
            excluded_count=len(self.state.excluded),
        )

    def snapshot(self) -> protocol.Snapshot:
        support = (
            self.state.support_set.bits
            if self.state.support_set is not None
            else np.zeros(self.profile.grid.shape, dtype=np.uint8)
        )
        return protocol.Snapshot(
            tick=self.tick_index,
            pressures=tuple(tuple(round(float(v), 4) for v in row) for row in self.forces.values),
            extensions=tuple(tuple(round(float(v), 2) for v in row) for row in self.bank.extension),
            support=tuple(tuple(int(b) for b in row) for row in support),
        )

    def apply_message(self, msg: protocol.Message) -> protocol.Message:
        """Handle one client request; always returns exactly one reply message."""
        try:
            if isinstance(msg, protocol.Hello):
                return protocol.Ack("hello")
            if isinstance(msg, protocol.GetStatus):
                return self.status()
            if isinstance(msg, protocol.Activate):
                self.activate(msg.mode)
                return protocol.Ack("activate")
            if isinstance(msg, protocol.SetMode):
                self.set_mode(msg.mode)
                return protocol.Ack("set_mode")
            if isinstance(msg, protocol.Deactivate):
                self.deactivate()
                return protocol.Ack("deactivate")
            if isinstance(msg, protocol.LoadBody):
                if msg.profile_name is not None:
                    profile = resolve_profile(msg.profile_name)
                else:
                    profile = profile_from_dict(msg.profile)
                self.load_body(profile)
                return protocol.Ack("load_body")
        except GateRejectedError as exc:
            return protocol.Error("gate_rejected", f"weight {exc.weight_kgf:.1f} kgf outside gate")
        except NoContactError as exc:
            return protocol.Error("no_contact", str(exc))
        except ValidationError as exc:
            return protocol.Error("bad_request", str(exc))
        except BedsimError as exc:
            return protocol.Error("bad_request", str(exc))
        return protocol.Error("bad_request", f"unexpected message {type(msg).__name__}")

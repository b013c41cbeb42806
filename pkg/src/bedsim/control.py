"""Bedding-controller algorithm.

Activation gates on measured body weight, freezes a support set and a
per-cell uniform target, then drives each in-set actuator bang-bang with
a deadband until every reading sits inside the band. Support cells whose
actuator tops out while reading nothing (morphology-recruited cells with
no body overhead) are excluded and the target rebalanced over the rest.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError, GateRejectedError, NoContactError
from .grid import BinaryMap, PressureMap, binarize, total_weight
from .morphology import SQUARE3, FirmnessMode, StructuringElement, support_region
from .plant import (
    ActuatorBank,
    BodyProfile,
    Direction,
    PlantConfig,
    SensorModel,
    read_sensors,
    solve_equilibrium,
    step_actuators,
)


@dataclass(frozen=True)
class ControlConfig:
    threshold: float = 0.05          # kgf, binarization and exclusion detection
    deadband: float = 0.05           # kgf, half-width of the STOP band
    weight_gate: tuple[float, float] = (20.0, 180.0)  # kgf, inclusive
    tick_dt: float = 0.05            # s
    converge_ticks: int = 5
    limiter_exclude_ticks: int = 10

    def __post_init__(self):
        if self.threshold <= 0:
            raise ConfigError("threshold must be positive")
        if self.deadband <= 0:
            raise ConfigError("deadband must be positive")
        lo, hi = self.weight_gate
        if not lo < hi:
            raise ConfigError(f"weight gate must have min < max, got {self.weight_gate}")
        if self.tick_dt <= 0:
            raise ConfigError("tick_dt must be positive")
        if self.converge_ticks < 1 or self.limiter_exclude_ticks < 1:
            raise ConfigError("tick counters must be at least 1")


@dataclass(frozen=True)
class ControlState:
    active: bool = False
    mode: FirmnessMode = FirmnessMode.STANDARD
    support_set: BinaryMap | None = None
    target: float = 0.0
    frozen_weight: float = 0.0
    excluded: frozenset[tuple[int, int]] = frozenset()
    converged: bool = False
    tick_count: int = 0
    in_band_streak: int = 0
    limiter_streaks: dict[tuple[int, int], int] = field(default_factory=dict)

    def controlled_cells(self) -> list[tuple[int, int]]:
        """Support cells still under control (not excluded)."""
        if self.support_set is None:
            return []
        return [c for c in self.support_set.cells() if c not in self.excluded]


def check_gate(weight: float, cfg: ControlConfig) -> bool:
    """True iff the measured body weight permits activation (inclusive bounds)."""
    lo, hi = cfg.weight_gate
    return lo <= weight <= hi


def activate(
    readings: PressureMap,
    mode: FirmnessMode,
    cfg: ControlConfig,
    se: StructuringElement = SQUARE3,
) -> ControlState:
    """Gate-check, freeze the support set for the mode, and compute the target."""
    pressed = binarize(readings, cfg.threshold)
    if pressed.count() == 0:
        raise NoContactError("no pressed cells; nobody on the mattress")
    weight = total_weight(readings)
    if not check_gate(weight, cfg):
        raise GateRejectedError(weight, cfg.weight_gate)
    region = support_region(pressed, mode, se)
    return ControlState(
        active=True,
        mode=mode,
        support_set=region,
        target=weight / region.count(),
        frozen_weight=weight,
    )


def compute_commands(
    readings: PressureMap, state: ControlState, cfg: ControlConfig
) -> np.ndarray:
    """Per-cell drive commands from the deadband law.

    Deviation at or beyond the band edge moves the shaft: too much
    pressure drives down (CCW), too little drives up (CW). Cells outside
    the support set, excluded cells, and everything after convergence
    are STOP.
    """
    commands = np.zeros(readings.grid.shape, dtype=np.int8)
    if not state.active or state.converged or state.support_set is None:
        return commands
    for i, j in state.controlled_cells():
        deviation = readings.values[i, j] - state.target
        if deviation >= cfg.deadband:
            commands[i, j] = Direction.CCW
        elif deviation <= -cfg.deadband:
            commands[i, j] = Direction.CW
    return commands


def deactivate(state: ControlState) -> ControlState:
    """Stop controlling; actuators hold their positions."""
    return replace(
        state,
        active=False,
        converged=False,
        support_set=None,
        target=0.0,
        frozen_weight=0.0,
        excluded=frozenset(),
        in_band_streak=0,
        limiter_streaks={},
    )


def set_mode(
    state: ControlState,
    mode: FirmnessMode,
    readings: PressureMap,
    cfg: ControlConfig,
    se: StructuringElement = SQUARE3,
) -> ControlState:
    """Re-freeze the support set and target for a new firmness mode.

    Equivalent to a fresh activation against the current readings; the
    convergence flag is cleared. Raises like activate; on no-contact the
    caller should deactivate.
    """
    return activate(readings, mode, cfg, se)


@dataclass(frozen=True)
class TickResult:
    bank: ActuatorBank
    state: ControlState
    sink: float
    forces: PressureMap
    readings: PressureMap
    commands: np.ndarray
    max_abs_deviation: float


def tick(
    profile: BodyProfile,
    bank: ActuatorBank,
    forces: PressureMap,
    state: ControlState,
    cfg: ControlConfig,
    plant_cfg: PlantConfig,
    sensor: SensorModel,
    seed: int = 0,
) -> TickResult:
    """One closed-loop step: read, command, move, re-settle.

    Also applies limiter exclusion and convergence detection against the
    pre-move readings.
    """
    readings = read_sensors(forces, sensor, seed)
    commands = compute_commands(readings, state, cfg)

    # Convergence: every controlled cell inside the open deadband.
    max_dev = 0.0
    state = replace(state, tick_count=state.tick_count + 1)
    if state.active and not state.converged:
        controlled = state.controlled_cells()
        deviations = [abs(readings.values[i, j] - state.target) for i, j in controlled]
        max_dev = max(deviations, default=0.0)
        if controlled and max_dev < cfg.deadband:
            streak = state.in_band_streak + 1
            state = replace(state, in_band_streak=streak)
            if streak >= cfg.converge_ticks:
                state = replace(state, converged=True)
                commands = np.zeros_like(commands)
        else:
            state = replace(state, in_band_streak=0)

    new_bank, limiter_hits = step_actuators(bank.with_direction(commands), cfg.tick_dt)
    sink, new_forces = solve_equilibrium(profile, new_bank, plant_cfg)

    if state.active and not state.converged:
        state = _apply_limiter_exclusion(state, new_bank, readings, limiter_hits, cfg)

    if state.active and state.converged:
        max_dev = max(
            (abs(readings.values[i, j] - state.target) for i, j in state.controlled_cells()),
            default=0.0,
        )

    return TickResult(new_bank, state, sink, new_forces, readings, commands, max_dev)


def _apply_limiter_exclusion(
    state: ControlState,
    bank: ActuatorBank,
    readings: PressureMap,
    limiter_hits: np.ndarray,
    cfg: ControlConfig,
) -> ControlState:
    """Track cells pinned at full travel with no pressure; drop persistent ones."""
    streaks = dict(state.limiter_streaks)
    newly_excluded = []
    for cell in state.controlled_cells():
        i, j = cell
        stuck = (
            limiter_hits[i, j]
            and bank.extension[i, j] >= bank.travel_max
            and readings.values[i, j] < cfg.threshold
        )
        if stuck:
            streaks[cell] = streaks.get(cell, 0) + 1
            if streaks[cell] >= cfg.limiter_exclude_ticks:
                newly_excluded.append(cell)
        else:
            streaks.pop(cell, None)
    if not newly_excluded:
        return replace(state, limiter_streaks=streaks)
    excluded = state.excluded | frozenset(newly_excluded)
    remaining = state.support_set.count() - len(excluded)
    if remaining == 0:
        raise NoContactError("every support cell was excluded")
    for cell in newly_excluded:
        streaks.pop(cell, None)
    return replace(
        state,
        excluded=excluded,
        target=state.frozen_weight / remaining,
        limiter_streaks=streaks,
        in_band_streak=0,  # target moved; demand a fresh consecutive run
    )


def validate_loop_stability(
    plant_cfg: PlantConfig, bank: ActuatorBank, cfg: ControlConfig
) -> None:
    """Reject configurations that can limit-cycle.

    One tick moves a shaft speed*dt mm and changes that cell's force by
    at most spring_k*speed*dt; that step must fit inside the deadband or
    a cell can jump across the band and oscillate forever.
    """
    step_force = plant_cfg.spring_k * bank.speed * cfg.tick_dt
    if step_force >= cfg.deadband:
        raise ConfigError(
            f"per-tick force step {step_force:g} kgf >= deadband {cfg.deadband:g} kgf; "
            "reduce tick_dt or spring_k, or widen the deadband"
        )

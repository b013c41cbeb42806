"""Simulated physical mattress.

The body is a rigid mass with a single vertical degree of freedom resting
on one independent linear spring per cell. Cell force is
``k * max(0, extension - clearance + sink)`` where ``clearance`` is the
gap between the body underside and the actuator-zero plane; cells with no
body overhead (ABSENT, stored as NaN) never carry force. The total-force
curve in the sink depth is continuous, nondecreasing, and piecewise
linear, so static equilibrium reduces to a 1-D root find.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from enum import IntEnum
from pathlib import Path

import numpy as np

from .errors import ConfigError, NoBodyError, ValidationError
from .grid import G_N_PER_KGF, GridSpec, PressureMap

DEFAULT_TRAVEL_MAX_MM = 60.0
ACTUATOR_SPEED_MM_S = 10.0


class Direction(IntEnum):
    """Actuator drive command. CW raises the shaft, CCW lowers it."""

    CCW = -1
    STOP = 0
    CW = 1


@dataclass(frozen=True)
class BodyProfile:
    """Per-cell body-underside clearance (mm, NaN = no body) plus total weight."""

    name: str
    weight: float
    grid: GridSpec
    clearance: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.asarray(self.clearance, dtype=np.float64)
        if arr.shape != self.grid.shape:
            raise ValidationError(
                f"clearance shape {arr.shape} does not match grid {self.grid.shape}"
            )
        if self.weight <= 0:
            raise ValidationError(f"body weight must be positive, got {self.weight}")
        negative = np.argwhere(arr < 0)
        if negative.size:
            i, j = negative[0]
            raise ValidationError(f"negative clearance {arr[i, j]} at cell ({i}, {j})")
        if not np.any(np.isfinite(arr)):
            raise NoBodyError(f"profile {self.name!r} has no occupied cells")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "clearance", arr)

    @property
    def contact_mask(self) -> np.ndarray:
        """Cells with a body overhead."""
        return np.isfinite(self.clearance)


@dataclass(frozen=True)
class ActuatorBank:
    """Per-cell shaft extension and commanded direction, with hard travel limits."""

    grid: GridSpec
    extension: np.ndarray = field(repr=False)
    direction: np.ndarray = field(repr=False)
    travel_max: float = DEFAULT_TRAVEL_MAX_MM
    speed: float = ACTUATOR_SPEED_MM_S

    def __post_init__(self):
        ext = np.asarray(self.extension, dtype=np.float64).copy()
        cmd = np.asarray(self.direction, dtype=np.int8).copy()
        if ext.shape != self.grid.shape or cmd.shape != self.grid.shape:
            raise ValidationError("actuator arrays must match the grid shape")
        if self.travel_max <= 0:
            raise ConfigError(f"travel_max must be positive, got {self.travel_max}")
        if np.any(ext < 0) or np.any(ext > self.travel_max):
            raise ValidationError("extension outside [0, travel_max]")
        if not np.all(np.isin(cmd, (-1, 0, 1))):
            raise ValidationError("direction entries must be CW/CCW/STOP")
        ext.setflags(write=False)
        cmd.setflags(write=False)
        object.__setattr__(self, "extension", ext)
        object.__setattr__(self, "direction", cmd)

    @classmethod
    def at_extension(
        cls, grid: GridSpec, extension_mm: float, travel_max: float = DEFAULT_TRAVEL_MAX_MM
    ) -> "ActuatorBank":
        return cls(
            grid,
            np.full(grid.shape, float(extension_mm)),
            np.zeros(grid.shape, dtype=np.int8),
            travel_max=travel_max,
        )

    def with_direction(self, direction: np.ndarray) -> "ActuatorBank":
        return replace(self, direction=np.asarray(direction, dtype=np.int8))


@dataclass(frozen=True)
class PlantConfig:
    """Contact-mechanics parameters."""

    spring_k: float = 0.05          # kgf per mm of cell compression
    neutral_extension: float = 20.0  # mm, start-of-run shaft position
    solver_tolerance: float = 1e-6   # mm, bisection bracket width

    def __post_init__(self):
        if self.spring_k <= 0:
            raise ConfigError(f"spring_k must be positive, got {self.spring_k}")
        if not 0 <= self.neutral_extension <= DEFAULT_TRAVEL_MAX_MM:
            raise ConfigError(
                f"neutral_extension must lie in [0, {DEFAULT_TRAVEL_MAX_MM}], "
                f"got {self.neutral_extension}"
            )
        if self.solver_tolerance <= 0:
            raise ConfigError("solver_tolerance must be positive")


@dataclass(frozen=True)
class SensorModel:
    """Linear force sensor with saturation, ADC quantization, and optional noise."""

    saturation_n: float = 100.0
    adc_bits: int = 10
    noise_sigma: float = 0.0  # kgf; 0 disables noise
    g: float = G_N_PER_KGF

    def __post_init__(self):
        if self.saturation_n != 100.0:
            raise ConfigError("sensor saturation is fixed at 100 N")
        if not 8 <= self.adc_bits <= 16:
            raise ConfigError(f"adc_bits must be in [8, 16], got {self.adc_bits}")
        if self.noise_sigma < 0:
            raise ConfigError("noise_sigma must be nonnegative")


def solve_equilibrium(
    profile: BodyProfile, bank: ActuatorBank, cfg: PlantConfig
) -> tuple[float, PressureMap]:
    """Settle the body: find the sink depth balancing spring forces against weight.

    Returns the sink depth (mm) and the per-cell force map at equilibrium.
    The root is bracketed and bisected to ``cfg.solver_tolerance``, then
    refined exactly on the final linear segment so the force sum matches
    the body weight to float round-off.
    """
    if profile.grid != bank.grid:
        raise ValidationError("profile and actuator bank use different grids")
    mask = profile.contact_mask
    if not np.any(mask):
        raise NoBodyError("profile has no occupied cells")
    weight = profile.weight
    k = cfg.spring_k

    offset = bank.extension[mask] - profile.clearance[mask]  # compression at sink 0

    def total_force(d: float) -> float:
        return k * float(np.maximum(0.0, offset + d).sum())

    lo = float(-offset.max()) - 1.0           # below first contact: F = 0
    hi = float(-offset.min()) + weight / k + 1.0
    while hi - lo > cfg.solver_tolerance:
        mid = 0.5 * (lo + hi)
        if total_force(mid) >= weight:
            hi = mid
        else:
            lo = mid

    # Exact solve on the segment the bracket landed in.
    active = offset + hi > 0
    n_active = int(active.sum())
    if n_active > 0:
        d = weight / (k * n_active) - float(offset[active].mean())
        if total_force(d) >= weight - 1e-12 and d <= hi + cfg.solver_tolerance:
            hi = d

    forces = np.zeros(profile.grid.shape)
    forces[mask] = k * np.maximum(0.0, offset + hi)
    return hi, PressureMap(profile.grid, forces)


def read_sensors(forces: PressureMap, model: SensorModel, seed: int = 0) -> PressureMap:
    """Sensor readout: kgf -> N, noise, 0-100 N clamp, ADC quantization, back to kgf."""
    newtons = forces.values * model.g
    if model.noise_sigma > 0:
        rng = np.random.default_rng(seed)
        newtons = newtons + rng.normal(0.0, model.noise_sigma * model.g, newtons.shape)
    newtons = np.clip(newtons, 0.0, model.saturation_n)
    levels = (1 << model.adc_bits) - 1
    q = np.rint(newtons / model.saturation_n * levels)
    reading_n = q / levels * model.saturation_n
    return PressureMap(forces.grid, reading_n / model.g)


def step_actuators(bank: ActuatorBank, dt: float) -> tuple[ActuatorBank, np.ndarray]:
    """Advance shafts one tick at the single synchronous speed.

    Returns the new bank and a per-cell limiter-hit mask: cells still
    commanded into a hard stop this tick.
    """
    if dt <= 0:
        raise ConfigError(f"dt must be positive, got {dt}")
    target = bank.extension + bank.direction * bank.speed * dt
    clamped = np.clip(target, 0.0, bank.travel_max)
    limiter_hit = (bank.direction != 0) & (target != clamped)
    # Also flag cells commanded past a limit they already sit on.
    limiter_hit |= (bank.direction == Direction.CW) & (bank.extension >= bank.travel_max)
    limiter_hit |= (bank.direction == Direction.CCW) & (bank.extension <= 0.0)
    return replace(bank, extension=clamped), limiter_hit


# ---------------------------------------------------------------------------
# Profile documents and the built-in registry
# ---------------------------------------------------------------------------

GAP_CLEARANCE_MM = 45.0


def _profile_from_cells(
    name: str,
    weight: float,
    grid: GridSpec,
    contact: dict[int, tuple[int, ...]],
    gaps: dict[int, tuple[int, ...]],
) -> BodyProfile:
    clearance = np.full(grid.shape, np.nan)
    for row, cols in contact.items():
        for col in cols:
            clearance[row, col] = 0.0
    for row, cols in gaps.items():
        for col in cols:
            clearance[row, col] = GAP_CLEARANCE_MM
    return BodyProfile(name, weight, grid, clearance)


def _adult_supine_80() -> BodyProfile:
    # 53 baseline-contact cells: head, wide shoulders, torso, hips,
    # split legs, heels. Neck/knee gaps are 1 row (bridged by closing);
    # the lumbar gap is 3 rows, so only dilation reaches its edge rows.
    contact = {
        0: (3, 4, 5),
        1: (3, 4, 5),
        3: (1, 2, 3, 4, 5, 6, 7),
        4: (2, 3, 4, 5, 6),
        5: (2, 3, 4, 5, 6),
        6: (4, 5),
        10: (2, 3, 4, 5, 6),
        11: (2, 3, 4, 5, 6),
        12: (1, 2, 6, 7),
        13: (1, 2, 6, 7),
        15: (1, 2, 6, 7),
        16: (1, 2, 6, 7),
        17: (1, 7),
    }
    gaps = {
        2: (3, 4, 5),            # neck
        7: (3, 4, 5),            # lumbar
        8: (3, 4, 5),
        9: (3, 4, 5),
        14: (1, 2, 6, 7),        # knee
    }
    return _profile_from_cells("adult_supine_80", 80.0, GridSpec(), contact, gaps)


def _child_supine_10() -> BodyProfile:
    # Small light body, below the activation gate.
    contact = {
        2: (4,),
        3: (3, 4, 5),
        4: (3, 4, 5),
        5: (3, 4, 5),
        6: (3, 4, 5),
        7: (3, 5),
        8: (3, 5),
    }
    return _profile_from_cells("child_supine_10", 10.0, GridSpec(), contact, {})


_REGISTRY_BUILDERS = {
    "adult_supine_80": _adult_supine_80,
    "child_supine_10": _child_supine_10,
}


def builtin_profiles() -> list[str]:
    return sorted(_REGISTRY_BUILDERS)


def get_profile(name: str) -> BodyProfile:
    try:
        return _REGISTRY_BUILDERS[name]()
    except KeyError:
        raise ValidationError(
            f"unknown profile {name!r}; built-ins: {', '.join(builtin_profiles())}"
        ) from None


def profile_to_dict(profile: BodyProfile) -> dict:
    clearance = [
        [None if not np.isfinite(v) else float(v) for v in row]
        for row in profile.clearance
    ]
    return {
        "name": profile.name,
        "weight_kgf": profile.weight,
        "grid": {"rows": profile.grid.rows, "cols": profile.grid.cols},
        "clearance_mm": clearance,
    }


def profile_from_dict(doc: dict) -> BodyProfile:
    try:
        grid = GridSpec(rows=int(doc["grid"]["rows"]), cols=int(doc["grid"]["cols"]))
        name = str(doc["name"])
        weight = float(doc["weight_kgf"])
        rows = doc["clearance_mm"]
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed profile document: {exc}") from exc
    if len(rows) != grid.rows or any(len(r) != grid.cols for r in rows):
        raise ValidationError("clearance_mm dimensions do not match the declared grid")
    clearance = np.array(
        [[np.nan if v is None else float(v) for v in row] for row in rows]
    )
    return BodyProfile(name, weight, grid, clearance)


def load_profile(path: str | Path) -> BodyProfile:
    """Load a profile document (JSON) from disk."""
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"profile file is not valid JSON: {exc}") from exc
    return profile_from_dict(doc)


def save_profile(profile: BodyProfile, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(profile_to_dict(profile), indent=2) + "\n", encoding="utf-8"
    )


def resolve_profile(spec: str | dict) -> BodyProfile:
    """A registry name, a path to a profile file, or an inline document."""
    if isinstance(spec, dict):
        return profile_from_dict(spec)
    if spec in _REGISTRY_BUILDERS:
        return get_profile(spec)
    return load_profile(spec)

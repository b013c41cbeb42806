"""Grid data types and the pressure-map arithmetic.

All pressures are kilogram-force (kgf). Maps are immutable after
construction; operations are pure functions returning new values.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, NoContactError, ValidationError

DEFAULT_THRESHOLD_KGF = 0.05
G_N_PER_KGF = 9.80665


@dataclass(frozen=True)
class GridSpec:
    """Mattress cell grid: rows run head to foot."""

    rows: int = 18
    cols: int = 9
    cell_pitch_mm: float = 100.0

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValidationError(f"grid must be at least 1x1, got {self.rows}x{self.cols}")
        if self.cell_pitch_mm <= 0:
            raise ValidationError(f"cell pitch must be positive, got {self.cell_pitch_mm}")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    @property
    def cell_count(self) -> int:
        return self.rows * self.cols


def _frozen_array(values, shape, dtype) -> np.ndarray:
    arr = np.asarray(values, dtype=dtype)
    if arr.shape != shape:
        raise ValidationError(f"array shape {arr.shape} does not match grid {shape}")
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class PressureMap:
    """Per-cell force readings in kgf, nonnegative and finite."""

    grid: GridSpec
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = _frozen_array(self.values, self.grid.shape, np.float64)
        if not np.all(np.isfinite(arr)):
            raise ValidationError("pressure map contains non-finite values")
        if np.any(arr < 0):
            i, j = np.argwhere(arr < 0)[0]
            raise ValidationError(f"negative pressure {arr[i, j]} at cell ({i}, {j})")
        object.__setattr__(self, "values", arr)

    @classmethod
    def zeros(cls, grid: GridSpec) -> "PressureMap":
        return cls(grid, np.zeros(grid.shape))


@dataclass(frozen=True)
class BinaryMap:
    """Thresholded support map: entries are exactly 0 or 1."""

    grid: GridSpec
    bits: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = _frozen_array(self.bits, self.grid.shape, np.uint8)
        if not np.all((arr == 0) | (arr == 1)):
            raise ValidationError("binary map entries must be 0 or 1")
        object.__setattr__(self, "bits", arr)

    @classmethod
    def zeros(cls, grid: GridSpec) -> "BinaryMap":
        return cls(grid, np.zeros(grid.shape, dtype=np.uint8))

    def count(self) -> int:
        return int(self.bits.sum())

    def cells(self) -> list[tuple[int, int]]:
        """Set-bit coordinates in row-major order."""
        return [(int(i), int(j)) for i, j in np.argwhere(self.bits == 1)]


@dataclass(frozen=True)
class SupportSummary:
    """Total weight W, pressed-cell count P, and uniform target W / P."""

    total_weight: float
    pressed_count: int
    target: float


def total_weight(pmap: PressureMap) -> float:
    """Full-body weight: sum of all cell readings, kgf."""
    return float(pmap.values.sum())


def binarize(pmap: PressureMap, threshold: float = DEFAULT_THRESHOLD_KGF) -> BinaryMap:
    """Threshold a pressure map; the boundary is inclusive (value == threshold -> 1)."""
    if threshold <= 0:
        raise ConfigError(f"binarization threshold must be positive, got {threshold}")
    return BinaryMap(pmap.grid, (pmap.values >= threshold).astype(np.uint8))


def pressed_count(bmap: BinaryMap) -> int:
    """Number of pressed cells."""
    return bmap.count()


def uniform_target(total: float, count: int) -> float:
    """Per-cell uniform support value: total weight over pressed-cell count."""
    if count == 0:
        raise NoContactError("cannot compute a uniform target for an empty support set")
    if count < 0:
        raise ConfigError(f"pressed count must be nonnegative, got {count}")
    if total < 0:
        raise ConfigError(f"total weight must be nonnegative, got {total}")
    return total / count


def summarize(pmap: PressureMap, threshold: float = DEFAULT_THRESHOLD_KGF) -> SupportSummary:
    """Weight, pressed count, and uniform target for one map, mutually consistent."""
    w = total_weight(pmap)
    p = pressed_count(binarize(pmap, threshold))
    if p == 0:
        raise NoContactError("no cell reaches the contact threshold")
    return SupportSummary(total_weight=w, pressed_count=p, target=uniform_target(w, p))

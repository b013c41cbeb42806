"""Binary morphology on support maps and the firmness-mode region computation.

Border convention is zero-padding: the mattress edge has no sensors, so
off-grid cells read as 0. Structuring elements must contain the origin,
which makes dilation extensive and erosion anti-extensive; the controller
relies on the resulting guarantee that every firmness mode's support
region contains the pressed set.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import NoContactError, ValidationError
from .grid import BinaryMap


@dataclass(frozen=True)
class StructuringElement:
    """Neighborhood offsets (row_delta, col_delta) defining a morphological operator."""

    offsets: frozenset[tuple[int, int]]
    name: str = ""

    def __post_init__(self):
        offsets = frozenset((int(r), int(c)) for r, c in self.offsets)
        if not offsets:
            raise ValidationError("structuring element must have at least one offset")
        if (0, 0) not in offsets:
            raise ValidationError("structuring element must contain the origin (0, 0)")
        object.__setattr__(self, "offsets", offsets)

    def reflect(self) -> "StructuringElement":
        return StructuringElement(
            frozenset((-r, -c) for r, c in self.offsets),
            name=f"{self.name}~" if self.name else "",
        )


SQUARE3 = StructuringElement(
    frozenset((r, c) for r in (-1, 0, 1) for c in (-1, 0, 1)), name="square3"
)
CROSS3 = StructuringElement(
    frozenset({(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)}), name="cross3"
)

ELEMENTS = {"square3": SQUARE3, "cross3": CROSS3}


class FirmnessMode(Enum):
    STANDARD = "standard"
    MEDIUM = "medium"
    SOFT = "soft"


def _shift(bits: np.ndarray, dr: int, dc: int) -> np.ndarray:
    """Shift with zero fill; out[i, j] = bits[i - dr, j - dc] where defined."""
    out = np.zeros_like(bits)
    rows, cols = bits.shape
    src_r = slice(max(0, -dr), min(rows, rows - dr))
    src_c = slice(max(0, -dc), min(cols, cols - dc))
    dst_r = slice(max(0, dr), min(rows, rows + dr))
    dst_c = slice(max(0, dc), min(cols, cols + dc))
    out[dst_r, dst_c] = bits[src_r, src_c]
    return out


def dilate(bmap: BinaryMap, se: StructuringElement) -> BinaryMap:
    """Cell is set iff some input cell hits it through an SE offset."""
    acc = np.zeros(bmap.grid.shape, dtype=np.uint8)
    for dr, dc in se.offsets:
        acc |= _shift(bmap.bits, dr, dc)
    return BinaryMap(bmap.grid, acc)


def erode(bmap: BinaryMap, se: StructuringElement) -> BinaryMap:
    """Cell survives iff every SE offset lands on a set input cell (off-grid fails)."""
    acc = np.ones(bmap.grid.shape, dtype=np.uint8)
    for dr, dc in se.offsets:
        acc &= _shift(bmap.bits, -dr, -dc)
    return BinaryMap(bmap.grid, acc)


def close(bmap: BinaryMap, se: StructuringElement) -> BinaryMap:
    """Dilation followed by erosion; bridges narrow concavities.

    Computed on a zero-padded copy so dilated bits just off the grid edge
    still feed the erosion. Composing the grid-clipped operators instead
    would drop border cells and break extensivity (close(b) must contain b).
    """
    reach = max(max(abs(r), abs(c)) for r, c in se.offsets)
    rows, cols = bmap.grid.shape
    from .grid import GridSpec

    padded_grid = GridSpec(rows + 2 * reach, cols + 2 * reach, bmap.grid.cell_pitch_mm)
    padded = np.zeros(padded_grid.shape, dtype=np.uint8)
    padded[reach : reach + rows, reach : reach + cols] = bmap.bits
    closed = erode(dilate(BinaryMap(padded_grid, padded), se), se)
    return BinaryMap(bmap.grid, closed.bits[reach : reach + rows, reach : reach + cols])


def open_(bmap: BinaryMap, se: StructuringElement) -> BinaryMap:
    """Erosion followed by dilation; removes isolated speckles."""
    return dilate(erode(bmap, se), se)


def support_region(
    pressed: BinaryMap, mode: FirmnessMode, se: StructuringElement = SQUARE3
) -> BinaryMap:
    """Support set for a firmness mode.

    Standard keeps the pressed set; Medium closes it; Soft additionally
    dilates, expanding the boundary by one SE ring. The result always
    contains the pressed set.
    """
    if pressed.count() == 0:
        raise NoContactError("support region requires at least one pressed cell")
    if mode is FirmnessMode.STANDARD:
        return pressed
    closed = close(pressed, se)
    if mode is FirmnessMode.MEDIUM:
        return closed
    return dilate(closed, se)

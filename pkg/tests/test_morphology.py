import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from bedsim.errors import NoContactError, ValidationError
from bedsim.grid import BinaryMap, GridSpec
from bedsim.morphology import (
    CROSS3,
    SQUARE3,
    FirmnessMode,
    StructuringElement,
    close,
    dilate,
    erode,
    open_,
    support_region,
)


def bmap(bits):
    bits = np.asarray(bits, dtype=np.uint8)
    return BinaryMap(GridSpec(*bits.shape), bits)


# --- independent set-definition oracles -------------------------------------


def brute_dilate(bits, se):
    rows, cols = bits.shape
    out = np.zeros_like(bits)
    for i in range(rows):
        for j in range(cols):
            for dr, dc in se.offsets:
                si, sj = i - dr, j - dc
                if 0 <= si < rows and 0 <= sj < cols and bits[si, sj]:
                    out[i, j] = 1
                    break
    return out


def brute_erode(bits, se):
    rows, cols = bits.shape
    out = np.zeros_like(bits)
    for i in range(rows):
        for j in range(cols):
            ok = True
            for dr, dc in se.offsets:
                si, sj = i + dr, j + dc
                if not (0 <= si < rows and 0 <= sj < cols and bits[si, sj]):
                    ok = False
                    break
            out[i, j] = 1 if ok else 0
    return out


def random_maps(n, shape=(18, 9), seed=1234, density=0.3):
    rng = np.random.default_rng(seed)
    return [(rng.random(shape) < density).astype(np.uint8) for _ in range(n)]


binary_grids = arrays(np.uint8, (18, 9), elements=st.integers(0, 1))


class TestStructuringElement:
    def test_builtins(self):
        assert len(SQUARE3.offsets) == 9
        assert CROSS3.offsets == frozenset({(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)})

    def test_requires_origin(self):
        with pytest.raises(ValidationError):
            StructuringElement(frozenset({(1, 0)}))

    def test_requires_nonempty(self):
        with pytest.raises(ValidationError):
            StructuringElement(frozenset())


class TestDilate:
    def test_single_bit_square3_makes_a_block(self):
        bits = np.zeros((18, 9), dtype=np.uint8)
        bits[5, 4] = 1
        out = dilate(bmap(bits), SQUARE3).bits
        expected = np.zeros_like(bits)
        expected[4:7, 3:6] = 1
        assert np.array_equal(out, expected)

    def test_all_zero(self):
        out = dilate(BinaryMap.zeros(GridSpec()), SQUARE3)
        assert out.count() == 0

    def test_two_crosses_bridge_a_gap(self):
        bits = np.zeros((18, 9), dtype=np.uint8)
        bits[3, 3] = 1
        bits[5, 3] = 1
        out = dilate(bmap(bits), CROSS3).bits
        assert np.array_equal(out, brute_dilate(bits, CROSS3))
        assert out[4, 3] == 1

    @pytest.mark.parametrize("se", [SQUARE3, CROSS3], ids=lambda s: s.name)
    def test_matches_oracle_on_all_4x3_patterns(self, se):
        for pattern in itertools.product((0, 1), repeat=12):
            bits = np.array(pattern, dtype=np.uint8).reshape(4, 3)
            assert np.array_equal(dilate(bmap(bits), se).bits, brute_dilate(bits, se))

    @pytest.mark.parametrize("se", [SQUARE3, CROSS3], ids=lambda s: s.name)
    def test_matches_oracle_on_random_maps(self, se):
        for bits in random_maps(1000):
            assert np.array_equal(dilate(bmap(bits), se).bits, brute_dilate(bits, se))


class TestErode:
    def test_all_ones_keeps_interior_only(self):
        bits = np.ones((18, 9), dtype=np.uint8)
        out = erode(bmap(bits), SQUARE3).bits
        expected = np.zeros_like(bits)
        expected[1:17, 1:8] = 1
        assert np.array_equal(out, expected)

    def test_single_bit_vanishes(self):
        bits = np.zeros((18, 9), dtype=np.uint8)
        bits[5, 4] = 1
        assert erode(bmap(bits), SQUARE3).count() == 0

    def test_block_erodes_to_center(self):
        bits = np.zeros((18, 9), dtype=np.uint8)
        bits[4:7, 3:6] = 1
        out = erode(bmap(bits), SQUARE3).bits
        expected = np.zeros_like(bits)
        expected[5, 4] = 1
        assert np.array_equal(out, expected)

    @pytest.mark.parametrize("se", [SQUARE3, CROSS3], ids=lambda s: s.name)
    def test_matches_oracle_on_all_4x3_patterns(self, se):
        for pattern in itertools.product((0, 1), repeat=12):
            bits = np.array(pattern, dtype=np.uint8).reshape(4, 3)
            assert np.array_equal(erode(bmap(bits), se).bits, brute_erode(bits, se))

    @pytest.mark.parametrize("se", [SQUARE3, CROSS3], ids=lambda s: s.name)
    def test_matches_oracle_on_random_maps(self, se):
        for bits in random_maps(1000, seed=99):
            assert np.array_equal(erode(bmap(bits), se).bits, brute_erode(bits, se))


class TestCloseOpen:
    def test_close_all_zero(self):
        assert close(BinaryMap.zeros(GridSpec()), SQUARE3).count() == 0

    def test_close_fills_one_row_gap_between_wide_runs(self):
        # Brute-force oracle result: cross3 closes a 1-row gap where the
        # runs on both sides are at least 3 cells wide (the lateral arms
        # of the erosion probe need dilated support).
        bits = np.zeros((18, 9), dtype=np.uint8)
        bits[2:5, 3:6] = 1
        bits[6:9, 3:6] = 1
        out = close(bmap(bits), CROSS3).bits
        assert out[5, 4] == 1
        # A width-1 run leaves its gap open under cross3: the erosion
        # probe's lateral arms find nothing dilated beside the gap cell.
        thin = np.zeros((18, 9), dtype=np.uint8)
        thin[2:5, 4] = 1
        thin[6:9, 4] = 1
        assert close(bmap(thin), CROSS3).bits[5, 4] == 0

    def test_open_removes_speckle(self):
        bits = np.zeros((18, 9), dtype=np.uint8)
        bits[5, 4] = 1
        assert open_(bmap(bits), SQUARE3).count() == 0

    def test_open_keeps_block(self):
        bits = np.zeros((18, 9), dtype=np.uint8)
        bits[4:7, 3:6] = 1
        assert np.array_equal(open_(bmap(bits), SQUARE3).bits, bits)

    def test_open_all_zero(self):
        assert open_(BinaryMap.zeros(GridSpec()), SQUARE3).count() == 0

    @given(bits=binary_grids)
    @settings(max_examples=200)
    def test_close_idempotent_and_extensive(self, bits):
        original = bmap(bits)
        once = close(original, SQUARE3)
        assert np.all(once.bits >= original.bits)
        assert np.array_equal(close(once, SQUARE3).bits, once.bits)

    @given(bits=binary_grids)
    @settings(max_examples=200)
    def test_open_idempotent_and_antiextensive(self, bits):
        original = bmap(bits)
        once = open_(original, SQUARE3)
        assert np.all(once.bits <= original.bits)
        assert np.array_equal(open_(once, SQUARE3).bits, once.bits)

    @given(bits=binary_grids)
    @settings(max_examples=200)
    def test_dilate_extensive_erode_antiextensive(self, bits):
        original = bmap(bits)
        assert np.all(dilate(original, SQUARE3).bits >= original.bits)
        assert np.all(erode(original, SQUARE3).bits <= original.bits)


class TestDuality:
    @pytest.mark.parametrize("se", [SQUARE3, CROSS3], ids=lambda s: s.name)
    def test_erosion_is_dual_to_dilation_away_from_borders(self, se):
        # Set bits confined to the interior so zero-padding plays no role.
        rng = np.random.default_rng(7)
        for _ in range(200):
            bits = np.zeros((18, 9), dtype=np.uint8)
            bits[2:16, 2:7] = (rng.random((14, 5)) < 0.4).astype(np.uint8)
            eroded = erode(bmap(bits), se).bits
            complement_dilated = 1 - dilate(bmap(1 - bits), se.reflect()).bits
            interior = np.zeros((18, 9), dtype=bool)
            interior[1:17, 1:8] = True
            assert np.array_equal(eroded[interior], complement_dilated[interior])


class TestSupportRegion:
    def test_standard_keeps_pressed_set(self, canonical_forces):
        from bedsim.grid import binarize

        pressed = binarize(canonical_forces, 0.05)
        out = support_region(pressed, FirmnessMode.STANDARD, SQUARE3)
        assert np.array_equal(out.bits, pressed.bits)
        assert out.count() == 53

    def test_medium_fills_gap_rows(self, canonical_forces, adult_profile):
        from bedsim.grid import binarize

        pressed = binarize(canonical_forces, 0.05)
        out = support_region(pressed, FirmnessMode.MEDIUM, SQUARE3)
        oracle = brute_erode(
            np.pad(brute_dilate(np.pad(pressed.bits, 1), SQUARE3), 0), SQUARE3
        )[1:-1, 1:-1]
        assert np.array_equal(out.bits, oracle)
        assert out.count() > 53
        # Recruited cells sit under the body: neck row 2, knee row 14.
        assert out.bits[2, 4] == 1
        assert out.bits[14, 1] == 1

    def test_soft_adds_a_boundary_ring(self, canonical_forces):
        from bedsim.grid import binarize

        pressed = binarize(canonical_forces, 0.05)
        medium = support_region(pressed, FirmnessMode.MEDIUM, SQUARE3)
        soft = support_region(pressed, FirmnessMode.SOFT, SQUARE3)
        assert np.array_equal(soft.bits, brute_dilate(medium.bits, SQUARE3))
        assert soft.count() > medium.count()

    def test_empty_input_rejected(self):
        with pytest.raises(NoContactError):
            support_region(BinaryMap.zeros(GridSpec()), FirmnessMode.MEDIUM, SQUARE3)

    @given(bits=binary_grids)
    @settings(max_examples=200)
    def test_mode_monotonicity(self, bits):
        pressed = bmap(bits)
        if pressed.count() == 0:
            return
        sizes = [
            support_region(pressed, mode, SQUARE3).count()
            for mode in (FirmnessMode.STANDARD, FirmnessMode.MEDIUM, FirmnessMode.SOFT)
        ]
        assert sizes[0] <= sizes[1] <= sizes[2]

    @given(bits=binary_grids)
    @settings(max_examples=200)
    def test_every_mode_contains_the_pressed_set(self, bits):
        pressed = bmap(bits)
        if pressed.count() == 0:
            return
        for mode in FirmnessMode:
            region = support_region(pressed, mode, SQUARE3)
            assert np.all(region.bits >= pressed.bits)

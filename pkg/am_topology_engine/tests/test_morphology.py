"""
Thresholds, motion sets, sweeps, extremes, families and OMRT fields.
"""
import math
from decimal import Decimal
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import ndimage

from src.core.errors import InvalidThresholdError
from src.cubical.complex import complex_of, euler
from src.cubical.homology import betti
from src.measure.overlap import overlap_field_fft
from src.morphology.motion import (
    as_manufactured, as_manufactured_nonuniform, extreme_max_od, extreme_min_ud, family,
    motion_set, motion_set_nonuniform, sweep, sweep_direct, symmetric_difference_volume,
)
from src.morphology.omrt import OmrtField, RadialBump
from src.morphology.thresholds import (
    LAMBDA_CEILING, as_fraction, count_threshold, format_lambda, full_containment_lambda,
    parse_lambda_list,
)
from src.voxel.grid import VoxelGrid
from src.voxel.mmn import MmnSpec, circumradius, make_mmn, parse_mmn_spec
from src.voxel.scenes import grid_lattice, notched_bar, solid_box

from conftest import brute_overlap, brute_sweep, mmn_grids, occupancy_grids, random_grid

CUBE = make_mmn(MmnSpec(shape="cube", radius=1))


# ==================== thresholds ====================

def test_lambda_parsing_is_exact():
    assert as_fraction("0.95") == Fraction(19, 20)
    assert as_fraction("3/4") == Fraction(3, 4)
    assert as_fraction(0) == 0
    assert format_lambda(Fraction(19, 20)) == "19/20"


@pytest.mark.parametrize("bad", [0.95, "1", "-0.1", "abc", "1/0"])
def test_lambda_rejects(bad):
    with pytest.raises(InvalidThresholdError):
        as_fraction(bad)


def test_lambda_list_must_ascend():
    assert parse_lambda_list("0, 1/4, 0.5") == [0, Fraction(1, 4), Fraction(1, 2)]
    with pytest.raises(InvalidThresholdError):
        parse_lambda_list("0.5,0.5")
    with pytest.raises(InvalidThresholdError):
        parse_lambda_list("0.9,0.5")
    with pytest.raises(InvalidThresholdError):
        parse_lambda_list(" , ")


def test_count_threshold():
    assert count_threshold(Fraction(19, 20), 27) == 25
    assert count_threshold(Fraction(8, 27), 27) == 8
    assert count_threshold(Fraction(0), 27) == 0
    assert full_containment_lambda(27) == Fraction(26, 27)


# ==================== motion sets ====================

def test_motion_set_comparison_is_strict():
    design = solid_box((6, 6, 6), (1, 1, 1), (3, 3, 3))
    field = overlap_field_fft(design, CUBE)
    assert field.values[1, 1, 1] == 8
    assert not motion_set(field, Fraction(8, 27)).grid.occupancy[1, 1, 1]
    assert motion_set(field, Fraction(7, 27)).grid.occupancy[1, 1, 1]


def test_motion_set_carries_the_design_frame():
    design = VoxelGrid(np.ones((4, 4, 4), dtype=bool), spacing=0.1, origin=(1.0, 2.0, 3.0))
    motion = motion_set(overlap_field_fft(design, CUBE), "1/2", frame=design)
    assert motion.grid.same_frame(design)
    assert motion.lam == Fraction(1, 2)


@given(occupancy_grids(max_side=7), mmn_grids(), st.sampled_from(["0", "1/4", "1/2", "3/4", "0.95"]))
@settings(max_examples=50, deadline=None)
def test_sweep_matches_direct_and_brute_force(design, mmn, lam):
    motion = motion_set(overlap_field_fft(design, mmn), lam, frame=design)
    fast = sweep(motion, mmn)
    assert fast == sweep_direct(motion, mmn)
    assert np.array_equal(fast.occupancy, brute_sweep(motion.grid.occupancy, mmn))


# ==================== extremes ====================

@given(occupancy_grids(max_side=6), mmn_grids())
@settings(max_examples=40, deadline=None)
def test_extremes_match_brute_force(design, mmn):
    field = overlap_field_fft(design, mmn)
    om = brute_overlap(design, mmn)
    assert np.array_equal(extreme_min_ud(design, mmn, field).occupancy,
                          brute_sweep(om == mmn.volume, mmn))
    assert np.array_equal(extreme_max_od(design, mmn, field).occupancy,
                          brute_sweep(om > 0, mmn))


@pytest.mark.parametrize("seed", range(3))
def test_extremes_match_scipy_morphology(seed):
    design = random_grid(np.random.default_rng(seed), (32, 32, 32), 0.6)
    structure = np.ones((3, 3, 3), dtype=bool)
    opening = ndimage.binary_opening(design.occupancy, structure=structure, border_value=0)
    double = ndimage.binary_dilation(ndimage.binary_dilation(design.occupancy, structure), structure)
    assert np.array_equal(extreme_min_ud(design, CUBE).occupancy, opening)
    assert np.array_equal(extreme_max_od(design, CUBE).occupancy, double)


@given(occupancy_grids(max_side=8), mmn_grids())
@settings(max_examples=40, deadline=None)
def test_min_ud_extreme_is_idempotent(design, mmn):
    opened = extreme_min_ud(design, mmn)
    assert extreme_min_ud(opened, mmn) == opened


@pytest.mark.parametrize("part", ["lattice", "box", "random"])
def test_containment_chain(part):
    design = {
        "lattice": grid_lattice(2, 3),
        "box": solid_box((12, 10, 8), (2, 2, 2), (9, 7, 5)),
        "random": random_grid(np.random.default_rng(7), (14, 14, 14), 0.55),
    }[part]
    mmn = make_mmn(MmnSpec(shape="sphere", radius=1))
    field = overlap_field_fft(design, mmn)
    low = extreme_min_ud(design, mmn, field).occupancy
    high = extreme_max_od(design, mmn, field).occupancy
    assert not np.any(low & ~design.occupancy)
    assert not np.any(design.occupancy & ~high)
    for lam in ["0", "1/8", "1/4", "1/3", "1/2", "2/3", "3/4", "0.9", "5/6"]:
        shape = as_manufactured(design, mmn, lam, field).occupancy
        assert not np.any(low & ~shape)
        assert not np.any(shape & ~high)


# ==================== family ====================

@given(occupancy_grids(max_side=8), mmn_grids())
@settings(max_examples=40, deadline=None)
def test_family_is_nested(design, mmn):
    lams = ["0", "1/4", "1/2", "3/4", full_containment_lambda(mmn.volume)]
    members = family(design, mmn, sorted(as_fraction(x) for x in set(map(str, lams))), workers=2)
    for (_, bigger), (_, smaller) in zip(members, members[1:]):
        assert not np.any(smaller.occupancy & ~bigger.occupancy)


def test_family_rejects_unsorted_lambdas():
    with pytest.raises(InvalidThresholdError):
        family(solid_box((5, 5, 5), (1, 1, 1), (3, 3, 3)), CUBE, ["0.9", "0.5"])


def test_family_shares_one_field():
    design = grid_lattice(2, 2)
    field = overlap_field_fft(design, CUBE)
    members = family(design, CUBE, ["0", "0.5", "0.95"], field=field, workers=1)
    assert [lam for lam, _ in members] == [0, Fraction(1, 2), Fraction(19, 20)]
    assert members[1][1] == as_manufactured(design, CUBE, "0.5", field)


def test_symmetric_difference_volume():
    design = solid_box((5, 5, 5), (1, 1, 1), (3, 3, 3))
    other = solid_box((5, 5, 5), (1, 1, 1), (3, 3, 4))
    assert symmetric_difference_volume(design, other) == 9


SWEEP_LAMBDAS = ["0", "1/4", "1/2", "2/3", "19/20", "26/27"]


def _chi_sweep(design):
    members = family(design, CUBE, SWEEP_LAMBDAS, workers=2)
    summaries = [betti(shape) for _, shape in members]
    for (_, shape), summary in zip(members, summaries):
        assert summary.chi == euler(complex_of(shape))
        assert summary.chi == summary.b0 - summary.b1 + summary.b2
    return summaries


def test_lattice_chi_sweep():
    design = grid_lattice()
    assert betti(design).betti == (1, 20, 0)
    summaries = _chi_sweep(design)
    # lambda = 0 closes every through-hole.
    assert summaries[0].betti == (1, 0, 0)
    # Full containment keeps only the 3-voxel border ring; the 1-voxel bars go.
    assert summaries[-1].betti == (1, 1, 0)
    assert summaries[-1].chi > betti(design).chi


def test_notched_bar_chi_sweep_disconnects():
    design = notched_bar()
    assert betti(design).betti == (1, 0, 0)
    summaries = _chi_sweep(design)
    assert summaries[0].betti == (1, 0, 0)
    assert summaries[SWEEP_LAMBDAS.index("1/2")].b0 == 1
    for s in summaries[SWEEP_LAMBDAS.index("19/20"):]:
        assert s.betti == (2, 0, 0) and s.chi == 2


# ==================== OMRT ====================

def test_uniform_omrt_reduces_to_uniform_threshold():
    design = random_grid(np.random.default_rng(1), (10, 10, 10), 0.6)
    field = overlap_field_fft(design, CUBE)
    for lam in ["0", "1/3", "0.95"]:
        uniform = motion_set(field, lam, frame=design).grid
        assert motion_set_nonuniform(field, OmrtField.uniform(lam), frame=design).grid == uniform
    zero_bump = OmrtField.uniform("1/2").with_bump((5, 5, 5), 3.0, Fraction(0))
    assert motion_set_nonuniform(field, zero_bump).grid.occupancy.tolist() == \
        motion_set(field, "1/2").grid.occupancy.tolist()


def test_bump_changes_stay_inside_its_support():
    design = random_grid(np.random.default_rng(2), (14, 14, 14), 0.6)
    field = overlap_field_fft(design, CUBE)
    center, radius = (7, 7, 7), 2.5
    omrt = OmrtField.uniform("1/2").with_bump(center, radius, Fraction(-1, 4))

    moved = motion_set_nonuniform(field, omrt, frame=design).grid.occupancy
    base = motion_set(field, "1/2", frame=design).grid.occupancy
    for point in np.argwhere(moved != base):
        assert math.dist(point, center) < radius

    shape = as_manufactured_nonuniform(design, CUBE, omrt, field).occupancy
    reference = as_manufactured(design, CUBE, "1/2", field).occupancy
    for point in np.argwhere(shape != reference):
        assert math.dist(point, center) <= radius + circumradius(CUBE)


def test_lowering_the_threshold_only_adds_material():
    design = random_grid(np.random.default_rng(4), (12, 12, 12), 0.5)
    field = overlap_field_fft(design, CUBE)
    lowered = OmrtField.uniform("3/4").with_bump((6, 6, 6), 4.0, Fraction(-1, 2))
    base = as_manufactured(design, CUBE, "3/4", field).occupancy
    shape = as_manufactured_nonuniform(design, CUBE, lowered, field).occupancy
    assert not np.any(base & ~shape)


def test_omrt_is_clamped():
    raised = OmrtField.uniform("0.9").with_bump((2, 2, 2), 2.0, Fraction(1))
    values = raised.evaluate((5, 5, 5))
    assert values.max() == pytest.approx(float(LAMBDA_CEILING))
    assert raised.value_at((2, 2, 2)) == pytest.approx(float(LAMBDA_CEILING))
    assert values[0, 0, 4] == pytest.approx(0.9)

    lowered = OmrtField.uniform("1/2").with_bump((2, 2, 2), 2.0, Fraction(-2))
    assert lowered.evaluate((5, 5, 5)).min() == 0.0


def test_bumps_at_one_center_merge():
    omrt = OmrtField.uniform("0.95")
    omrt = omrt.with_bump((1, 1, 1), 2.0, Fraction(-1, 16))
    omrt = omrt.with_bump((1, 1, 1), 3.0, Fraction(-1, 16))
    omrt = omrt.with_bump((4, 1, 1), 1.5, Fraction(1, 16))
    assert omrt.term_count == 3
    merged = omrt.bumps[0]
    assert merged.radius == 3.0 and merged.coefficient == Fraction(-1, 8)
    assert omrt.to_dict()["bumps"][0]["coefficient"] == "-1/8"


def test_bump_profile():
    bump = RadialBump((0, 0, 0), 2.0, Fraction(1, 4))
    assert bump.value_at((0, 0, 0)) == 1.0
    assert bump.value_at((1, 0, 0)) == pytest.approx(0.25)
    assert bump.value_at((2, 0, 0)) == 0.0
    assert bump.support((10, 10, 10)) == (slice(0, 3),) * 3
    assert RadialBump((20, 0, 0), 2.0, Fraction(1)).support((10, 10, 10)) is None
    with pytest.raises(ValueError):
        RadialBump((0, 0, 0), 0.0, Fraction(1))


def test_bump_center_tie_is_not_admitted():
    occupancy = np.ones((5, 5), dtype=bool)
    occupancy[2, 3] = False
    design = VoxelGrid(occupancy)
    diamond = make_mmn(parse_mmn_spec("diamond:1", 2))
    field = overlap_field_fft(design, diamond)
    assert field.mmn_measure == 5 and field.values[2, 2] == 4

    # 17/20 - 1/20 is exactly 4/5, and 4 > 4/5 * 5 is false.
    omrt = OmrtField.uniform("0.85").with_bump((2, 2), 2.0, Fraction(-1, 20))
    assert not omrt.admits((2, 2), 4, 5)
    assert not motion_set_nonuniform(field, omrt).grid.occupancy[2, 2]
    assert not motion_set(field, "4/5").grid.occupancy[2, 2]


def test_exact_bump_values():
    bump = RadialBump((0, 0, 0), 2.0, Fraction(1, 4))
    assert bump.exact_value_at((0, 0, 0)) == 1
    assert bump.exact_value_at((1, 0, 0)) == Fraction(1, 4)
    assert bump.exact_value_at((0, 2, 0)) == 0
    assert isinstance(bump.exact_value_at((1, 1, 0)), Decimal)
    assert float(bump.exact_value_at((1, 1, 0))) == pytest.approx(bump.value_at((1, 1, 0)))


def test_nonuniform_motion_set_matches_pointwise_exact_rule():
    design = random_grid(np.random.default_rng(8), (9, 9, 9), 0.55)
    field = overlap_field_fft(design, CUBE)
    omrt = (OmrtField.uniform("0.7")
            .with_bump((4, 4, 4), 2.0, Fraction(-1, 27))
            .with_bump((2, 6, 4), 3.0, Fraction(1, 9))
            .with_bump((6, 2, 2), 1.0, Fraction(-2, 27)))
    moved = motion_set_nonuniform(field, omrt).grid.occupancy
    for point in np.ndindex(*field.dims):
        assert moved[point] == omrt.admits(point, int(field.values[point]), field.mmn_measure), point

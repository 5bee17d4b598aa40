import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quenchtopo.errors import PlaneMismatch
from quenchtopo.gauge import KGrid
from quenchtopo.models import ModelSpec, d_vector, eigensystem
from quenchtopo.overlap import (general_overlap_sq, overlap_at, overlap_closed_form,
                                overlap_direct, symmetry_check)

GRID = KGrid(1024)
PAIRS = [
    (ModelSpec.qwz(1, n=3), ModelSpec.qwz(5, n=1)),
    (ModelSpec.qwz(5, n=2), ModelSpec.qwz(5, n=1)),
    (ModelSpec.qwz(1, n=1, t_so=0.5), ModelSpec.qwz(1, n=4, t_so=0.5)),
    (ModelSpec.qwz(1, n=2, plane="yz"), ModelSpec.qwz(5, n=2, plane="yz")),
    (ModelSpec.ssh(0.3, n=2), ModelSpec.ssh(2.0, n=1)),
    (ModelSpec.qwz(-1, n=2), ModelSpec.qwz(-5, n=1)),
]


@pytest.mark.parametrize("spec_i,spec_f", PAIRS)
def test_closed_form_matches_direct(spec_i, spec_f):
    closed = overlap_closed_form(spec_i, spec_f, GRID)
    direct = overlap_direct(spec_i, spec_f, GRID)
    general = overlap_closed_form(spec_i, spec_f, GRID, method="general")
    assert np.max(np.abs(closed.c_plus_sq - direct.c_plus_sq)) < 1e-12
    assert np.max(np.abs(general.c_plus_sq - direct.c_plus_sq)) < 1e-12
    assert np.allclose(direct.c_plus_sq + direct.c_minus_sq, 1, atol=1e-12)


def _random_state(rng):
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    return v / np.linalg.norm(v)


@settings(max_examples=200)
@given(st.integers(0, 2 ** 32 - 1))
def test_general_formula_for_arbitrary_states(seed):
    rng = np.random.default_rng(seed)
    up_i, up_f = _random_state(rng), _random_state(rng)
    low_i = np.array([-np.conj(up_i[1]), np.conj(up_i[0])])
    truth = abs(np.vdot(up_f, low_i)) ** 2
    assert abs(general_overlap_sq(up_i[None], up_f[None])[0] - truth) < 1e-12


def test_identity_quench_is_empty():
    spec = ModelSpec.qwz(1, n=2)
    prof = overlap_closed_form(spec, spec, GRID)
    assert np.max(prof.c_plus_sq) < 1e-24


def test_opposite_models_fully_excite():
    # d_z of opposite sign everywhere, no d_x: the lower band flips
    prof = overlap_direct(ModelSpec.qwz(1, n=0), ModelSpec.qwz(5, n=0), GRID)
    assert np.allclose(prof.c_plus_sq, 1)


@pytest.mark.parametrize("spec_i,spec_f", PAIRS[:4])
def test_qwz_profiles_are_even(spec_i, spec_f):
    assert symmetry_check(overlap_direct(spec_i, spec_f, GRID)) < 1e-10


def test_cross_plane_pair_rejected_then_allowed():
    spec_i, spec_f = ModelSpec.qwz(1, n=1), ModelSpec.ssh(0.5)
    with pytest.raises(PlaneMismatch):
        overlap_direct(spec_i, spec_f, GRID)
    prof = overlap_direct(spec_i, spec_f, GRID, allow_cross_plane=True)
    assert np.all(np.isnan(prof.delta_angle)) and prof.plane == "cross"
    low_i = eigensystem(d_vector(spec_i, GRID.k)).vec_minus
    up_f = eigensystem(d_vector(spec_f, GRID.k)).vec_plus
    truth = np.abs(np.sum(np.conj(up_f) * low_i, axis=-1)) ** 2
    assert np.allclose(prof.c_plus_sq, truth, atol=1e-12)
    closed = overlap_closed_form(spec_i, spec_f, GRID, allow_cross_plane=True)
    assert np.allclose(closed.c_plus_sq, truth, atol=1e-12)


def test_flat_models_share_any_plane():
    # n = 0 QWZ only uses sigma_z, so it pairs with a yz model
    prof = overlap_direct(ModelSpec.qwz(20, n=0), ModelSpec.qwz(1, n=1, plane="yz"), GRID)
    assert prof.plane == "yz"


def test_yz_and_xz_forms_have_equal_magnitudes():
    for plane_pair in (("xz", "xz"), ("yz", "yz")):
        a = overlap_direct(ModelSpec.qwz(1, n=3, plane=plane_pair[0]),
                           ModelSpec.qwz(5, n=1, plane=plane_pair[1]), GRID)
        b = overlap_direct(ModelSpec.qwz(1, n=3), ModelSpec.qwz(5, n=1), GRID)
        assert np.max(np.abs(a.c_plus_sq - b.c_plus_sq)) < 1e-12


def test_gauge_invariance_of_magnitudes():
    rng = np.random.default_rng(11)
    spec_i, spec_f = ModelSpec.ssh(0.2, n=3), ModelSpec.ssh(1.7, n=1)
    low_i = eigensystem(d_vector(spec_i, GRID.k)).vec_minus
    up_f = eigensystem(d_vector(spec_f, GRID.k)).vec_plus
    phase = np.exp(1j * rng.uniform(0, 2 * np.pi, size=(2, GRID.n_points, 1)))
    base = np.abs(np.sum(np.conj(up_f) * low_i, axis=-1)) ** 2
    rotated = np.abs(np.sum(np.conj(up_f * phase[0]) * (low_i * phase[1]), axis=-1)) ** 2
    assert np.max(np.abs(base - rotated)) < 1e-12
    assert np.max(np.abs(overlap_direct(spec_i, spec_f, GRID).c_plus_sq - base)) < 1e-12


def test_overlap_at_matches_grid_profile():
    spec_i, spec_f = PAIRS[0]
    prof = overlap_direct(spec_i, spec_f, GRID)
    assert np.allclose(overlap_at(spec_i, spec_f, GRID.k), prof.c_plus_sq, atol=1e-14)


def test_unknown_method():
    with pytest.raises(ValueError):
        overlap_closed_form(*PAIRS[0], GRID, method="magic")


def test_changing_only_spin_orbit_never_fully_excites():
    prof = overlap_direct(ModelSpec.qwz(5, n=1, t_so=1), ModelSpec.qwz(5, n=1, t_so=3), GRID)
    assert 0 < prof.c_plus_sq.max() < 1

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quenchtopo.errors import GridError, UnwrapFailure
from quenchtopo.gauge import (AngleKind, KGrid, adaptive_winding, angle_from_vectors,
                              angle_profile, skew_polarization, total_advance,
                              unwrap_sequence, winding_number, wrap)
from quenchtopo.models import ModelSpec, d_vector, eigensystem


def test_grid_is_mirror_symmetric_and_avoids_zone_edges():
    for n in (64, 1000, 4096):
        k = KGrid(n).k
        assert np.array_equal(k[::-1], -k)
        assert k.min() > -np.pi and k.max() < np.pi
        assert np.allclose(np.diff(k), 2 * np.pi / n)


def test_grid_validation():
    with pytest.raises(GridError):
        KGrid(32)
    with pytest.raises(GridError):
        KGrid(100.5)


@pytest.mark.parametrize("n_points", [64, 96, 100, 4096])
@pytest.mark.parametrize("n", [1, 2, 3, 4, 6])
def test_harmonic_admissibility_matches_brute_force(n_points, n):
    # sin(n k_j) vanishes iff n (2j + 1 - N) / N is an integer
    k = KGrid(n_points).k
    hits = np.isclose(np.sin(n * k), 0, atol=1e-9)
    assert KGrid(n_points).admits(n) == (not hits.any())


def test_inadmissible_grid_raises():
    grid = KGrid(100)
    assert not grid.admits(4)
    with pytest.raises(GridError):
        angle_profile(ModelSpec.qwz(1, n=4), grid)


@given(st.floats(-50, 50), st.sampled_from([np.pi, 2 * np.pi, 1.0]))
def test_wrap_range(x, period):
    w = wrap(x, period)
    assert -period / 2 - 1e-12 <= w < period / 2 + 1e-12
    assert abs(np.round((x - w) / period) * period - (x - w)) < 1e-9


@settings(max_examples=60)
@given(st.lists(st.integers(-3, 3), min_size=2, max_size=60), st.integers(0, 2 ** 16))
def test_unwrap_removes_integer_jumps(jumps, seed):
    rng = np.random.default_rng(seed)
    smooth = np.cumsum(rng.uniform(-0.7, 0.7, size=len(jumps)))
    raw = smooth + np.pi * np.asarray(jumps)
    out = unwrap_sequence(raw, np.pi, max_step=np.pi / 4)
    assert np.allclose(out - out[0], smooth - smooth[0], atol=1e-12)
    assert np.allclose(np.round((out - raw) / np.pi) * np.pi, out - raw, atol=1e-12)


def test_unwrap_refuses_ambiguous_steps():
    with pytest.raises(UnwrapFailure):
        unwrap_sequence(np.array([0.0, 1.0]), np.pi, max_step=np.pi / 4)


def test_theta_angle_at_quarter_zone():
    # d = (1, 5) here; the lower band's half angle is -arctan(|d| + d_z) mod pi
    spec = ModelSpec.qwz(5, t_s=2, t_so=1, n=1)
    k = np.array([np.pi / 2])
    vec = eigensystem(d_vector(spec, k)).vec_minus
    theta = angle_from_vectors(vec, "xz")[0]
    expected = -np.arctan(np.sqrt(26) + 5)
    assert abs(wrap(theta - expected, np.pi)) < 1e-12


def test_angle_is_phase_blind():
    spec = ModelSpec.ssh(0.3, n=2)
    k = KGrid(256).k
    vec = eigensystem(d_vector(spec, k)).vec_minus
    phases = np.exp(1j * np.random.default_rng(0).uniform(0, 2 * np.pi, size=k.size))
    assert np.allclose(angle_from_vectors(vec, "xy"),
                       angle_from_vectors(vec * phases[:, None], "xy"), atol=1e-12)


QWZ_GRID = [ModelSpec.qwz(m, t_s=2, t_so=t, n=n)
            for m in (1, 5) for n in range(5) for t in (0.5, 1, 3)]


@pytest.mark.parametrize("spec", QWZ_GRID, ids=lambda s: s.describe())
def test_qwz_winding_equals_phase_diagram(spec):
    w, res = winding_number(angle_profile(spec, KGrid(4096)))
    expected = spec.n if abs(spec.m) < 2 * spec.t_s else 0
    assert abs(w) == expected and res < 1e-3
    assert abs(abs(skew_polarization(spec, KGrid(4096))) - expected) < 1e-3


@pytest.mark.parametrize("t1,n", [(0.0, 1), (0.5, 2), (0.9, 3), (1.5, 1), (3.0, 4)])
def test_ssh_winding_equals_discrete_count(t1, n):
    spec = ModelSpec.ssh(t1, n=n)
    # discrete oracle: winding of t1 + t2 exp(i n k) around the origin
    z = t1 + np.exp(1j * n * KGrid(4096).k)
    oracle = np.sum(wrap(np.diff(np.angle(np.append(z, z[0]))), 2 * np.pi)) / (2 * np.pi)
    profile = angle_profile(spec, KGrid(4096))
    assert winding_number(profile)[0] == round(oracle)
    assert profile.kind is AngleKind.PHASE


def test_coarse_grid_fails_then_adaptive_recovers():
    spec = ModelSpec.qwz(1.9, t_s=1, t_so=0.02, n=4)
    with pytest.raises(UnwrapFailure):
        angle_profile(spec, KGrid(64))
    w, res, grid = adaptive_winding(spec, 64)
    assert abs(w) == 4 and grid.n_points > 64


def test_seam_closure_makes_advance_a_multiple_of_pi():
    angle = np.linspace(0, 0.1, 100)
    assert total_advance(angle) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(UnwrapFailure):
        total_advance(np.linspace(0, 0.5 * np.pi, 100))


def test_total_advance_closes_seam():
    k = KGrid(128).k
    assert np.isclose(total_advance(np.pi * (k + np.pi) / (2 * np.pi) * 2), 2 * np.pi)


@pytest.mark.parametrize("spec", [ModelSpec.qwz(1, n=3), ModelSpec.ssh(0.4, n=2),
                                  ModelSpec.qwz(5, n=4, t_so=3)])
def test_refinement_stability(spec):
    assert winding_number(angle_profile(spec, KGrid(2048)))[0] == \
        winding_number(angle_profile(spec, KGrid(4096)))[0]

"""Projection of the pre-quench lower band onto the post-quench bands.

``c_plus_sq(k) = |<psi_f^+(k)|psi_i^-(k)>|^2`` is the upper-band occupation
right after the quench. It is computed two ways: by inner products of
numerically diagonalised eigenvectors, and in closed form from the band
angles of :mod:`quenchtopo.gauge`.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import PlaneMismatch
from .gauge import angle_from_vectors, unwrap_sequence
from .models import PLANES, d_vector, eigensystem

ACTIVE_ATOL = 1e-12


class Provenance(str, Enum):
    CLOSED_FORM = "closed_form"
    DIRECT = "direct"


@dataclass(frozen=True, eq=False)
class OverlapProfile:
    grid: object
    c_plus_sq: np.ndarray
    c_minus_sq: np.ndarray
    delta_angle: np.ndarray
    provenance: Provenance
    plane: str
    spec_i: object = None
    spec_f: object = None

    @property
    def k(self):
        return self.grid.k


def active_axes(spec, k):
    """Pauli indices whose d-component is not identically zero on ``k``."""
    d = d_vector(spec, k)
    ia, ib = PLANES[spec.plane]
    axes = set()
    if np.max(np.abs(d.d_a)) > ACTIVE_ATOL:
        axes.add(ia)
    if np.max(np.abs(d.d_b)) > ACTIVE_ATOL:
        axes.add(ib)
    return axes


def common_plane(spec_i, spec_f, k, allow_cross_plane=False):
    """Plane shared by both models, or ``None`` for an allowed cross-plane pair."""
    axes = active_axes(spec_i, k) | active_axes(spec_f, k)
    if len(axes) <= 2:
        for plane in (spec_f.plane, spec_i.plane):
            if axes <= set(PLANES[plane]):
                return plane
        return next(p for p, ab in PLANES.items() if axes <= set(ab))
    if allow_cross_plane:
        return None
    raise PlaneMismatch(f"{spec_i.describe()} and {spec_f.describe()} span all three Pauli "
                        "matrices; the CP theorem only covers same-plane pairs")


def _delta_angle(bands_i, bands_f, plane):
    if plane is None:
        return None
    theta_i = unwrap_sequence(angle_from_vectors(bands_i.vec_minus, plane), np.pi,
                              max_step=np.pi / 4)
    theta_f = unwrap_sequence(angle_from_vectors(bands_f.vec_minus, plane), np.pi,
                              max_step=np.pi / 4)
    return theta_i - theta_f


def _bands(spec_i, spec_f, grid):
    for spec in (spec_i, spec_f):
        grid.check_harmonic(spec.harmonic)
    k = grid.k
    return eigensystem(d_vector(spec_i, k)), eigensystem(d_vector(spec_f, k))


def direct_probabilities(bands_i, bands_f):
    """``(|c+|^2, |c-|^2)`` from inner products of eigenvectors."""
    c_plus = np.sum(np.conj(bands_f.vec_plus) * bands_i.vec_minus, axis=-1)
    c_minus = np.sum(np.conj(bands_f.vec_minus) * bands_i.vec_minus, axis=-1)
    return np.abs(c_plus) ** 2, np.abs(c_minus) ** 2


def overlap_direct(spec_i, spec_f, grid, allow_cross_plane=False):
    """Overlap profile from numerically diagonalised eigenvectors.

    Cross-plane pairs raise :class:`PlaneMismatch` unless
    ``allow_cross_plane`` is set, in which case probabilities are returned
    with a NaN ``delta_angle`` (no exact CP count exists for them).
    """
    plane = common_plane(spec_i, spec_f, grid.k, allow_cross_plane)
    bands_i, bands_f = _bands(spec_i, spec_f, grid)
    c_plus_sq, c_minus_sq = direct_probabilities(bands_i, bands_f)
    delta = _delta_angle(bands_i, bands_f, plane)
    if delta is None:
        delta = np.full(grid.n_points, np.nan)
    return OverlapProfile(grid, c_plus_sq, c_minus_sq, delta, Provenance.DIRECT,
                          plane or "cross", spec_i, spec_f)


def mixing_parameters(vec_plus):
    """``(theta, alpha, beta)`` with ``vec_plus = (cos theta e^{i alpha}, sin theta e^{i beta})``."""
    v0, v1 = vec_plus[..., 0], vec_plus[..., 1]
    return np.arctan2(np.abs(v1), np.abs(v0)), np.angle(v0), np.angle(v1)


def general_overlap_sq(vec_plus_i, vec_plus_f):
    """Occupation of the final upper band for arbitrary two-component states.

    Both arguments are upper-band vectors; the initial lower band is their
    orthogonal complement. Valid for any pair of Pauli planes.
    """
    th_i, a_i, b_i = mixing_parameters(vec_plus_i)
    th_f, a_f, b_f = mixing_parameters(vec_plus_f)
    relative = 0.5 * ((a_i - b_i) - (a_f - b_f))
    return (np.sin(th_f - th_i) ** 2
            + np.sin(2 * th_f) * np.sin(2 * th_i) * np.sin(relative) ** 2)


def overlap_closed_form(spec_i, spec_f, grid, method="auto", allow_cross_plane=False):
    """Overlap profile from band angles.

    ``method="auto"`` uses ``sin^2(theta_f - theta_i)`` for planes containing
    sigma_z and ``sin^2`` of the half relative-phase difference for the xy
    plane. ``method="general"`` evaluates the full two-angle expression,
    which reduces to either special case.
    """
    if method not in ("auto", "general"):
        raise ValueError(f"method: expected 'auto' or 'general', got {method!r}")
    plane = common_plane(spec_i, spec_f, grid.k, allow_cross_plane)
    bands_i, bands_f = _bands(spec_i, spec_f, grid)
    delta = _delta_angle(bands_i, bands_f, plane)
    if method == "general" or plane is None:
        c_plus_sq = general_overlap_sq(bands_i.vec_plus, bands_f.vec_plus)
    else:
        # both kinds reduce to sin^2 of the difference of half Bloch angles
        c_plus_sq = np.sin(delta) ** 2
    if delta is None:
        delta = np.full(grid.n_points, np.nan)
    return OverlapProfile(grid, c_plus_sq, 1.0 - c_plus_sq, delta, Provenance.CLOSED_FORM,
                          plane or "cross", spec_i, spec_f)


def overlap_at(spec_i, spec_f, k):
    """``|c+(k)|^2`` at arbitrary momenta (no grid or plane checks)."""
    k = np.asarray(k, dtype=float)
    bands_i = eigensystem(d_vector(spec_i, k))
    bands_f = eigensystem(d_vector(spec_f, k))
    return direct_probabilities(bands_i, bands_f)[0]


def symmetry_check(profile):
    """Largest ``|c_plus_sq(k) - c_plus_sq(-k)|`` over the mirror-symmetric grid."""
    c = np.asarray(profile.c_plus_sq)
    return float(np.max(np.abs(c - c[::-1])))


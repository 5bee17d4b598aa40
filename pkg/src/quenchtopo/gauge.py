"""Branch-continuous band angles and winding numbers.

The lower-band eigenvector of a two-Pauli model is a point on a great circle
of the Bloch sphere. Half of its polar angle within the model plane is the
mixing angle ``theta`` for planes containing sigma_z, or half the relative
phase ``(alpha - beta) / 2`` for the xy plane. Both are read from the
eigenvector through expectation values, which makes them blind to the
per-k phase of the raw eigenvectors. Over one Brillouin zone either angle
advances by ``nu * pi``.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .errors import GridError, NonIntegerWinding, UnwrapFailure
from .models import BandPair, ModelSpec, PLANES, d_vector, d_vector_derivative, eigensystem

DEFAULT_POINTS = 4096
MAX_POINTS = 2 ** 20
WINDING_TOL = 0.01


class AngleKind(str, Enum):
    THETA = "theta"
    PHASE = "phase"


@dataclass(frozen=True)
class KGrid:
    """Uniform Brillouin-zone grid offset by half a step from +-pi.

    ``k_j = -pi + (j + 1/2) 2 pi / N``. The grid is exactly mirror symmetric:
    ``k[N - 1 - j] == -k[j]``.
    """

    n_points: int = DEFAULT_POINTS

    def __post_init__(self):
        if isinstance(self.n_points, bool) or int(self.n_points) != self.n_points:
            raise GridError(f"grid_n: must be an integer, got {self.n_points!r}")
        if self.n_points < 64:
            raise GridError(f"grid_n: must be >= 64, got {self.n_points}")

    @property
    def k(self):
        j = np.arange(self.n_points)
        return (2 * j + 1 - self.n_points) * np.pi / self.n_points

    @property
    def spacing(self):
        return 2 * np.pi / self.n_points

    def admits(self, n):
        """True when no sample satisfies ``sin(n k) = 0``."""
        if n == 0:
            return True
        odd = 2 * np.arange(self.n_points, dtype=np.int64) + 1 - self.n_points
        return not np.any((int(n) * odd) % self.n_points == 0)

    def check_harmonic(self, n):
        if n is not None and not self.admits(n):
            raise GridError(f"grid_n={self.n_points} samples a zero of sin({n} k); "
                            "pick N with an even N / gcd(n, N)")

    def refined(self):
        return KGrid(2 * self.n_points)


@dataclass(frozen=True, eq=False)
class AngleProfile:
    grid: KGrid
    kind: AngleKind
    plane: str
    angle: np.ndarray
    bands: BandPair
    spec: Optional[ModelSpec] = None

    @property
    def k(self):
        return self.grid.k


def angle_kind(plane):
    return AngleKind.THETA if "z" in plane else AngleKind.PHASE


def wrap(x, period):
    """Map ``x`` into ``[-period/2, period/2)``."""
    return x - period * np.floor(np.asarray(x) / period + 0.5)


def angle_from_vectors(vecs, plane):
    """Half Bloch angle of unit vectors (last axis), in ``(-pi/2, pi/2]``.

    For planes containing z this is the mixing angle ``theta`` of
    ``(cos theta, sin theta)``-type states; for the xy plane it is half the
    azimuth, i.e. half the relative phase between the two components.
    """
    v0, v1 = vecs[..., 0], vecs[..., 1]
    cross = np.conj(v0) * v1
    s = (2 * cross.real, 2 * cross.imag, np.abs(v0) ** 2 - np.abs(v1) ** 2)
    if angle_kind(plane) is AngleKind.THETA:
        ia = PLANES[plane][0]
        return 0.5 * np.arctan2(s[ia], s[2])
    return 0.5 * np.arctan2(s[1], s[0])


def unwrap_sequence(raw, period, max_step=None):
    """Remove jumps of ``period`` so consecutive samples differ by less than ``max_step``.

    Each output equals its input plus an integer multiple of ``period``.
    ``max_step`` defaults to ``period / 2``; a corrected step at or beyond it
    cannot be told apart from an alias and raises :class:`UnwrapFailure`.
    """
    raw = np.asarray(raw, dtype=float)
    if raw.size < 2:
        return raw.copy()
    limit = period / 2 if max_step is None else max_step
    steps = np.diff(raw)
    jumps = np.round(steps / period)
    corrected = steps - period * jumps
    worst = np.max(np.abs(corrected))
    if worst >= limit:
        j = int(np.argmax(np.abs(corrected)))
        raise UnwrapFailure(f"step {corrected[j]:.4g} rad at sample {j} exceeds {limit:.4g}; "
                            "refine the grid")
    offsets = np.concatenate([[0.0], -np.cumsum(jumps)])
    return raw + period * offsets


def angle_profile(spec, grid, max_step=np.pi / 4):
    """Continuous lower-band angle of ``spec`` over ``grid``.

    ``max_step`` is the largest tolerated change between neighbouring samples
    (the half-period pi/2 is the hard ambiguity limit; the default keeps a
    factor-two margin so aliasing is caught before it happens).
    """
    grid.check_harmonic(spec.harmonic)
    bands = eigensystem(d_vector(spec, grid.k))
    raw = angle_from_vectors(bands.vec_minus, spec.plane)
    angle = unwrap_sequence(raw, np.pi, max_step=max_step)
    return AngleProfile(grid=grid, kind=angle_kind(spec.plane), plane=spec.plane,
                        angle=angle, bands=bands, spec=spec)


def total_advance(angle, period=np.pi, max_step=None):
    """Net change of a continuous periodic-domain sequence, closing the seam at k = +-pi."""
    angle = np.asarray(angle, dtype=float)
    closure = wrap(angle[0] - angle[-1], period)
    limit = period / 2 if max_step is None else max_step
    if abs(closure) >= limit:
        raise UnwrapFailure(f"seam step {closure:.4g} rad exceeds {limit:.4g}; refine the grid")
    return angle[-1] - angle[0] + closure


def winding_number(profile, tol=WINDING_TOL):
    """Integer winding of a profile and its distance from the nearest integer."""
    w_raw = total_advance(profile.angle) / np.pi
    w = int(np.round(w_raw))
    residual = float(abs(w_raw - w))
    if residual > tol:
        raise NonIntegerWinding(f"winding {w_raw:.6f} is {residual:.3g} from an integer")
    return w, residual


def skew_polarization(spec, grid):
    """Winding as a quadrature of the angle's k-derivative.

    Independent of eigenvectors and unwrapping: the integrand comes straight
    from the d-vector and its derivative. The midpoint rule on the periodic
    grid converges geometrically, so the return value is a float whose
    distance from an integer measures the discretisation error.
    """
    k = grid.k
    d = d_vector(spec, k)
    dd = d_vector_derivative(spec, k)
    cross = d.d_a * dd.d_b - d.d_b * dd.d_a
    rate = 0.5 * cross / d.norm2
    if angle_kind(spec.plane) is AngleKind.THETA:
        rate = -rate
    return float(np.sum(rate) * grid.spacing / np.pi)


def refine_until(fn, grid, max_points=MAX_POINTS):
    """Call ``fn(grid)``, doubling the grid on :class:`UnwrapFailure` up to ``max_points``."""
    while True:
        try:
            return fn(grid)
        except UnwrapFailure:
            if grid.n_points * 2 > max_points:
                raise
            grid = grid.refined()


def adaptive_winding(spec, n_points=DEFAULT_POINTS, max_points=MAX_POINTS):
    """Winding number with automatic grid doubling; returns ``(w, residual, grid)``."""
    def run(grid):
        w, res = winding_number(angle_profile(spec, grid))
        return w, res, grid
    return refine_until(run, KGrid(n_points), max_points)

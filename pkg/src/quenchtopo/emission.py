"""Spontaneous-emission readout of the post-quench occupation.

After the quench, the upper band holds ``|c+(k)|^2`` of the particles and
decays radiatively. The emitted power at momentum k is

    I(k) = omega(k) * A(k) * |c+(k)|^4,   A(k) = omega(k)^3 r(k)^2

with the global constant ``4 e^2 / (3 hbar c^3)`` set to one. A
spectrometer sees ``I(omega)``, which superposes every k with the same gap.
When ``omega(k)`` is monotone on ``[0, pi]`` the two roots ``+-k1`` of each
frequency are known and the occupation can be read back bin by bin.

Two omega-domain intensities are kept per bin:

* ``intensity`` is the bin-averaged power per unit frequency; it is
  integrated exactly in k, so the total emitted power is conserved.
* ``density`` is the spectral density sampled at the bin centre; this is
  what :func:`invert_spectrum` uses, since the gap has square-root van Hove
  edges where a bin average and a point value differ at first order.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import ConfigError, MultiMinimum, RootFindFailure, SingularK
from .models import Family, d_vector, d_vector_derivative, gap_frequency
from .overlap import overlap_at
from .peaks import Thresholds, count_transitions

DEFAULT_BINS = 512
BISECT_TOL = 1e-10
SINGULAR_DX = 1e-12
QUAD_NODES = 16


@dataclass(frozen=True, eq=False)
class EmissionSpectrum:
    k: np.ndarray
    omega_k: np.ndarray
    dipole_k: np.ndarray
    intensity_k: np.ndarray
    omega_edges: np.ndarray
    omega_centers: np.ndarray
    k_centers: np.ndarray
    intensity: np.ndarray
    density: np.ndarray
    bin_width: float
    monotone: bool
    direction: int
    c_plus_4: Optional[np.ndarray] = None

    @property
    def omega_range(self):
        return float(self.omega_edges[0]), float(self.omega_edges[-1])

    def total_power(self):
        return float(np.sum(self.intensity) * self.bin_width)


def _require_qwz(spec_f):
    if spec_f.family is not Family.QWZ1D:
        raise ConfigError(f"emission needs a QWZ final model, got {spec_f.describe()}")


def dipole_element(spec_f, k):
    """Interband position matrix element ``<psi_-|r|psi_+>`` of the final QWZ model."""
    _require_qwz(spec_f)
    k = np.asarray(k, dtype=float)
    if spec_f.n == 0:
        return np.zeros_like(k)
    d = d_vector(spec_f, k)
    d_x, d_z = d.d_a, d.d_b
    abs_dx = np.abs(d_x)
    if np.any(abs_dx < SINGULAR_DX):
        raise SingularK(f"d_x vanishes at k={np.asarray(k)[abs_dx < SINGULAR_DX].ravel()[0]:.6g}")
    n, nk = spec_f.n, spec_f.n * k
    omega2 = 4.0 * d.norm2
    numer = (2 * n * d_x * d_z * spec_f.t_so * np.cos(nk)
             - 4 * n * d_x ** 2 * spec_f.t_s * np.sin(nk))
    return numer / (omega2 * abs_dx)


def emission_weight(spec_f, k):
    """Power emitted per fully occupied k state: ``omega * omega^3 r^2``."""
    omega = gap_frequency(d_vector(spec_f, k))
    return omega ** 4 * dipole_element(spec_f, k) ** 2


def intensity_k(spec_i, spec_f, k):
    """Emitted power ``I(k)`` for the quench ``spec_i -> spec_f``."""
    c_plus_sq = overlap_at(spec_i, spec_f, k)
    return emission_weight(spec_f, k) * c_plus_sq ** 2


def omega_of_k(spec_f, k):
    return gap_frequency(d_vector(spec_f, k))


def omega_slope(spec_f, k):
    """``d omega / dk`` (omega = 2 |d|)."""
    d = d_vector(spec_f, k)
    dd = d_vector_derivative(spec_f, k)
    return 2.0 * (d.d_a * dd.d_a + d.d_b * dd.d_b) / np.sqrt(d.norm2)


def half_zone_direction(spec_f, grid):
    """+1 (-1) if omega strictly increases (decreases) on ``[0, pi]``.

    Checked on the grid's positive half plus both end points. Raises
    :class:`MultiMinimum` otherwise.
    """
    k = np.concatenate([[0.0], grid.k[grid.k > 0], [np.pi]])
    steps = np.diff(omega_of_k(spec_f, k))
    if np.all(steps > 0):
        return 1
    if np.all(steps < 0):
        return -1
    raise MultiMinimum(f"{spec_f.describe()}: omega(k) is not monotone on [0, pi]; "
                       "the same frequency comes from more than one |k|")


def bisect_k(spec_f, omega, direction, tol=BISECT_TOL):
    """Solve ``omega(k1) = omega`` for k1 in ``[0, pi]`` (vectorised bisection)."""
    omega = np.asarray(omega, dtype=float)
    ends = omega_of_k(spec_f, np.array([0.0, np.pi]))
    w_lo, w_hi = min(ends), max(ends)
    slack = 1e-12 * w_hi
    if np.any(omega < w_lo - slack) or np.any(omega > w_hi + slack):
        bad = omega[(omega < w_lo - slack) | (omega > w_hi + slack)].ravel()[0]
        raise RootFindFailure(f"omega={bad:.6g} outside [{w_lo:.6g}, {w_hi:.6g}]")
    lo = np.zeros_like(omega)
    hi = np.full_like(omega, np.pi)
    while np.max(hi - lo, initial=0.0) > tol:
        mid = 0.5 * (lo + hi)
        below = direction * (omega_of_k(spec_f, mid) - omega) < 0
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return 0.5 * (lo + hi)


def _bin_power(spec_i, spec_f, k_lo, k_hi):
    """Exact power in each ``[k_lo, k_hi]`` strip plus its mirror image."""
    x, w = leggauss(QUAD_NODES)
    half = 0.5 * (k_hi - k_lo)
    mid = 0.5 * (k_hi + k_lo)
    nodes = mid[:, None] + half[:, None] * x[None, :]
    flat = nodes.ravel()
    both = intensity_k(spec_i, spec_f, flat) + intensity_k(spec_i, spec_f, -flat)
    return half * (both.reshape(nodes.shape) @ w)


def spectrum(spec_i, spec_f, grid, n_bins=DEFAULT_BINS):
    """Forward model: k-resolved emission and its frequency-binned spectrum."""
    _require_qwz(spec_f)
    if n_bins < 1:
        raise ConfigError(f"bins: must be >= 1, got {n_bins}")
    direction = half_zone_direction(spec_f, grid)
    k = grid.k
    omega_k = omega_of_k(spec_f, k)
    dipole_k = dipole_element(spec_f, k)
    power_k = intensity_k(spec_i, spec_f, k)

    w_ends = omega_of_k(spec_f, np.array([0.0, np.pi]))
    w_min, w_max = float(min(w_ends)), float(max(w_ends))
    edges = np.linspace(w_min, w_max, n_bins + 1)
    width = (w_max - w_min) / n_bins
    centers = 0.5 * (edges[1:] + edges[:-1])

    k_edges = bisect_k(spec_f, edges[1:-1], direction)
    k_edges = np.concatenate([[0.0], k_edges, [np.pi]] if direction > 0
                             else [[np.pi], k_edges, [0.0]])
    k_lo = np.minimum(k_edges[:-1], k_edges[1:])
    k_hi = np.maximum(k_edges[:-1], k_edges[1:])
    intensity = _bin_power(spec_i, spec_f, k_lo, k_hi) / width

    k_centers = bisect_k(spec_f, centers, direction)
    slope = np.abs(omega_slope(spec_f, k_centers))
    density = (intensity_k(spec_i, spec_f, k_centers)
               + intensity_k(spec_i, spec_f, -k_centers)) / slope
    return EmissionSpectrum(k=k, omega_k=omega_k, dipole_k=dipole_k, intensity_k=power_k,
                            omega_edges=edges, omega_centers=centers, k_centers=k_centers,
                            intensity=intensity, density=density, bin_width=width,
                            monotone=True, direction=direction)


def printed_kernel(spec_f, k1):
    """Alternative inversion weight ``(4 d_x d_z t_so cos k - 4 d_x^2 t_s sin k)^2 / d_x^2``.

    Kept for comparison only. It is not the inverse of :func:`intensity_k`
    (first-term coefficient 4 instead of 2, no omega^4 factor, no Jacobian)
    and vanishes inside the band, so it fails the round trip.
    """
    d = d_vector(spec_f, k1)
    lin = (4 * d.d_a * d.d_b * spec_f.t_so * np.cos(k1)
           - 4 * d.d_a ** 2 * spec_f.t_s * np.sin(k1))
    return lin ** 2 / d.d_a ** 2


def invert_spectrum(spec, spec_f, normalize=False, kernel="exact", tol=BISECT_TOL):
    """Recover ``|c+(omega)|^4`` at each bin centre from the spectral density.

    Each centre frequency is mapped back to ``k1`` in ``[0, pi]`` by
    bisection and divided by the emission weight and the Jacobian of
    ``k -> omega`` summed over ``+-k1``. Bins where the weight vanishes
    return 0. With ``normalize`` the result is scaled to a maximum of 1,
    for spectra recorded in arbitrary units. ``kernel="printed"`` swaps in
    :func:`printed_kernel` and always normalises.
    """
    if kernel not in ("exact", "printed"):
        raise ConfigError(f"kernel: expected 'exact' or 'printed', got {kernel!r}")
    if not spec.monotone:
        raise MultiMinimum("spectrum carries no monotonicity certificate")
    density = np.asarray(spec.density, dtype=float)
    if not np.any(density):
        return np.zeros_like(density)
    k1 = bisect_k(spec_f, spec.omega_centers, spec.direction, tol)
    if kernel == "exact":
        weight = 2.0 * emission_weight(spec_f, k1) / np.abs(omega_slope(spec_f, k1))
    else:
        weight = printed_kernel(spec_f, k1)
        normalize = True
    safe = weight > 0
    recovered = np.zeros_like(density)
    recovered[safe] = density[safe] / weight[safe]
    if normalize and recovered.max() > 0:
        recovered = recovered / recovered.max()
    return recovered


def count_cp_spectrum(recovered, thresholds=None):
    """Count 0<->1 transitions of the recovered occupation along omega.

    Each complete peak in k maps onto two transitions over ``[0, pi]``
    because ``|c+|^2`` is even in k, so for a trivial final model the count
    equals the initial winding number; an odd winding leaves one peak cut
    by the zone edge, which shows up as an odd count.
    """
    return count_transitions(recovered, thresholds or Thresholds())


def analyse(spec_i, spec_f, grid, n_bins=DEFAULT_BINS, thresholds=None):
    """Forward spectrum, inversion and transition count in one call."""
    spec = spectrum(spec_i, spec_f, grid, n_bins)
    recovered = invert_spectrum(spec, spec_f)
    return replace(spec, c_plus_4=recovered), count_cp_spectrum(recovered, thresholds)

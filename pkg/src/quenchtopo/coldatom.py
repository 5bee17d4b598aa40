"""Synthetic spin-resolved density measurement of a quenched atomic gas.

Atoms in a Raman-dressed optical lattice realise a QWZ-type model in the
yz plane, ``d_y = 2 t_so sin(ka)``, ``d_z = delta/2 - 2 t_s cos(ka)``. After
the quench, a spin-resolved time-of-flight image gives ``n_up(q)`` and
``n_down(q)``; the ratio ``n_up / (n_up + n_down)`` estimates ``|c+(q)|^2``.
Here the images are drawn from a binomial law and run through the peak
counter.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import binom

from .errors import ConfigError, ZeroShots
from .models import ModelSpec, analytic_topological_number
from .overlap import overlap_direct
from .peaks import count_cp_peaks, with_inference

PREPARED_M_SCALE = 1e6


@dataclass(frozen=True)
class ColdAtomSpec:
    """Lattice parameters in natural units (hbar = 1); k is measured in 1/a."""

    delta: float
    t_s: float = 2.0
    t_so: float = 0.5
    a: float = 1.0
    n: int = 1

    def __post_init__(self):
        for name in ("t_s", "t_so", "a"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name}: must be > 0, got {getattr(self, name)}")
        if not np.isfinite(self.delta):
            raise ConfigError(f"delta: must be finite, got {self.delta}")


def effective_model(spec):
    """Bloch model of the dressed lattice, in the yz plane."""
    return ModelSpec.qwz(m=spec.delta / 2, t_s=spec.t_s, t_so=2 * spec.t_so, n=spec.n,
                         plane="yz")


def prepared_state_model(t_s=2.0, plane="yz"):
    """Deep-trivial model whose lower band is the fully polarised spin-down state."""
    return ModelSpec.qwz(m=PREPARED_M_SCALE * t_s, t_s=t_s, t_so=1.0, n=0, plane=plane)


@dataclass(frozen=True, eq=False)
class DensityProfile:
    q: np.ndarray
    n_up: np.ndarray
    n_down: np.ndarray
    shots: np.ndarray
    seed: int

    def __post_init__(self):
        if not np.array_equal(self.n_up + self.n_down, self.shots):
            raise ConfigError("densities: n_up + n_down must equal shots at every point")
        if np.any(self.n_up < 0) or np.any(self.n_down < 0):
            raise ConfigError("densities: counts must be nonnegative")


def _as_model(spec):
    return effective_model(spec) if isinstance(spec, ColdAtomSpec) else spec


def draw_spin_up(p, shots, seed):
    """Binomial spin-up counts from a counter-based stream.

    Point j always uses the j-th uniform of the Philox stream keyed by
    ``seed``, so any subset of points can be regenerated independently.
    """
    p = np.clip(np.asarray(p, dtype=float), 0.0, 1.0)
    u = np.random.Generator(np.random.Philox(key=int(seed))).random(p.shape)
    counts = binom.ppf(u, shots, p)
    return np.clip(np.nan_to_num(counts), 0, shots).astype(np.int64)


def synthesize_densities(spec_i, spec_f, grid, shots, seed):
    """Shot-noise-limited ``n_up``, ``n_down`` on ``grid`` after the quench."""
    if isinstance(shots, bool) or int(shots) != shots or shots < 1:
        raise ConfigError(f"shots: must be an integer >= 1, got {shots!r}")
    shots = int(shots)
    profile = overlap_direct(_as_model(spec_i), _as_model(spec_f), grid)
    n_up = draw_spin_up(profile.c_plus_sq, shots, seed)
    total = np.full(grid.n_points, shots, dtype=np.int64)
    return DensityProfile(q=grid.k, n_up=n_up, n_down=total - n_up, shots=total, seed=int(seed))


def infer_overlap(densities):
    """``n_up / (n_up + n_down)`` per momentum."""
    total = np.asarray(densities.n_up) + np.asarray(densities.n_down)
    if np.any(total == 0):
        raise ZeroShots(f"{int(np.count_nonzero(total == 0))} points carry no atoms")
    return np.asarray(densities.n_up, dtype=float) / total


def end_to_end(spec_i, spec_f, grid, shots, seed, thresholds=None):
    """Densities to candidate initial winding numbers.

    Returns the peak-counter :class:`~quenchtopo.peaks.CPReport` with
    ``inferred_initial_candidates`` filled from the final model's winding.
    """
    model_i, model_f = _as_model(spec_i), _as_model(spec_f)
    dens = synthesize_densities(model_i, model_f, grid, shots, seed)
    report = count_cp_peaks(infer_overlap(dens), thresholds, positions=dens.q)
    return with_inference(report, analytic_topological_number(model_f))


def success_rate(spec_i, spec_f, grid, shots, seeds, thresholds=None):
    """Fraction of seeded runs whose inference is correct.

    A run is correct when the peak count equals ``|nu_i - nu_f|`` (so the
    true initial number is among the candidates). The overlap is computed
    once and every seed redraws only the noise.
    """
    model_i, model_f = _as_model(spec_i), _as_model(spec_f)
    nu_i = analytic_topological_number(model_i)
    nu_f = analytic_topological_number(model_f)
    p = overlap_direct(model_i, model_f, grid).c_plus_sq
    good = 0
    seeds = list(seeds)
    for seed in seeds:
        n_up = draw_spin_up(p, shots, seed)
        report = with_inference(count_cp_peaks(n_up / shots, thresholds), nu_f)
        good += (report.peak_count == abs(nu_i - nu_f)
                 and nu_i in report.inferred_initial_candidates)
    return good / len(seeds)

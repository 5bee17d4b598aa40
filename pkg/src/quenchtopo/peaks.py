"""Counting complete peaks (CPs) of the post-quench occupation.

A complete peak is an excursion of ``|c+(k)|^2`` from 0 up to 1 and back
to 0. Two counters are provided:

* :func:`count_cp_exact` reads the net advance of the continuous angle
  difference, which is ``|nu_i - nu_f| * pi`` over one zone.
* :func:`count_cp_peaks` works on sampled (possibly noisy) occupations with
  a low/high hysteresis band, the way a measurement would be analysed.
  Excursions that climb above ``suspect_low`` but never reach the high band
  are reported as false-CP flags instead of being counted.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import ConfigError, NonIntegerWinding
from .gauge import WINDING_TOL, total_advance

LOW, MID, HIGH = -1, 0, 1


@dataclass(frozen=True)
class Thresholds:
    eps_hi: float = 0.02
    eps_lo: float = 0.02
    suspect_low: float = 0.5

    def __post_init__(self):
        if not 0 <= self.eps_lo < 0.5:
            raise ConfigError(f"eps_lo: must lie in [0, 0.5), got {self.eps_lo}")
        if not 0 <= self.eps_hi < 0.5:
            raise ConfigError(f"eps_hi: must lie in [0, 0.5), got {self.eps_hi}")
        if not self.eps_lo < self.suspect_low <= 1 - self.eps_hi:
            raise ConfigError(f"suspect_low: must lie in (eps_lo, 1 - eps_hi], got {self.suspect_low}")

    def classify(self, samples):
        samples = np.asarray(samples, dtype=float)
        return np.where(samples <= self.eps_lo, LOW,
                        np.where(samples >= 1 - self.eps_hi, HIGH, MID))


@dataclass(frozen=True)
class CPReport:
    exact_count: Optional[int] = None
    exact_residual: Optional[float] = None
    peak_count: Optional[int] = None
    false_cp_flags: tuple = ()
    agreement: Optional[bool] = None
    inferred_initial_candidates: Optional[frozenset] = None
    extra: dict = field(default_factory=dict, compare=False)

    @property
    def delta_n(self):
        return self.exact_count if self.exact_count is not None else self.peak_count

    def to_dict(self):
        cands = self.inferred_initial_candidates
        out = {
            "exact_count": self.exact_count,
            "exact_residual": self.exact_residual,
            "peak_count": self.peak_count,
            "false_cp_flags": [{"location": float(x), "height": float(h)}
                               for x, h in self.false_cp_flags],
            "agreement": self.agreement,
            "inferred_initial_candidates": None if cands is None else sorted(cands),
        }
        out.update(self.extra)
        return out


def count_cp_exact(profile, tol=WINDING_TOL):
    """Exact CP count from the net advance of ``profile.delta_angle``.

    Accepts an :class:`~quenchtopo.overlap.OverlapProfile` or a bare array of
    continuous angle differences sampled over one zone.
    """
    delta = getattr(profile, "delta_angle", profile)
    delta = np.asarray(delta, dtype=float)
    if not np.all(np.isfinite(delta)):
        raise NonIntegerWinding("delta_angle is undefined (cross-plane quench?)")
    raw = abs(total_advance(delta)) / np.pi
    count = int(np.round(raw))
    residual = float(abs(raw - count))
    if residual >= tol:
        raise NonIntegerWinding(f"angle advance {raw:.6f} pi is {residual:.3g} from an integer")
    return CPReport(exact_count=count, exact_residual=residual)


def count_cp_peaks(samples, thresholds=None, positions=None):
    """Hysteresis CP counter over one period of samples.

    The sequence is treated as periodic, so a peak straddling the zone edge
    is counted once. Returns a :class:`CPReport` with ``peak_count`` and
    ``false_cp_flags`` as ``(location, height)`` pairs, where location is
    taken from ``positions`` (sample index if omitted).
    """
    th = thresholds or Thresholds()
    samples = np.asarray(samples, dtype=float)
    if positions is None:
        positions = np.arange(samples.size, dtype=float)
    positions = np.asarray(positions, dtype=float)
    labels = th.classify(samples)
    lows = np.flatnonzero(labels == LOW)
    if lows.size == 0:
        return CPReport(peak_count=0)

    # rotate so the sequence starts on a low; excursions are the gaps between lows
    shift = lows[0]
    values = np.roll(samples, -shift)
    is_low = np.roll(labels, -shift) == LOW
    is_high = np.roll(labels, -shift) == HIGH
    low_at = np.flatnonzero(is_low)
    starts = low_at + 1
    ends = np.append(low_at[1:], samples.size)
    starts, ends = starts[ends > starts], ends[ends > starts]
    if starts.size == 0:
        return CPReport(peak_count=0)
    # lows inside a reduceat window never win against excursion samples
    peak = np.maximum.reduceat(values, starts)
    reached = np.logical_or.reduceat(is_high, starts)
    count = int(np.count_nonzero(reached))
    flags = []
    for s0, e0 in zip(starts[~reached & (peak >= th.suspect_low)],
                      ends[~reached & (peak >= th.suspect_low)]):
        j = s0 + int(np.argmax(values[s0:e0]))
        flags.append((float(positions[(j + shift) % samples.size]), float(values[j])))
    return CPReport(peak_count=count, false_cp_flags=tuple(flags))


def count_transitions(samples, thresholds=None):
    """Number of low<->high switches in an open (non-periodic) sequence."""
    th = thresholds or Thresholds()
    labels = th.classify(samples)
    events = labels[labels != MID]
    if events.size == 0:
        return 0
    return int(np.count_nonzero(np.diff(events) != 0))


def count_cp(profile, thresholds=None):
    """Run both counters on an overlap profile and compare them."""
    exact = count_cp_exact(profile)
    peaks = count_cp_peaks(profile.c_plus_sq, thresholds, positions=profile.k)
    return replace(peaks, exact_count=exact.exact_count, exact_residual=exact.exact_residual,
                   agreement=exact.exact_count == peaks.peak_count)


def infer_initial(report, nu_final, nonnegative=True):
    """Initial winding numbers compatible with the CP count and the final winding.

    The occupation cannot tell ``nu_f + dn`` from ``nu_f - dn``; both are
    kept unless the family forbids negative windings.
    """
    dn = report.delta_n
    if dn is None:
        raise ValueError("report carries neither an exact nor a peak count")
    candidates = {nu_final + dn, nu_final - dn}
    if nonnegative:
        candidates = {c for c in candidates if c >= 0}
    return frozenset(candidates)


def with_inference(report, nu_final, nonnegative=True):
    return replace(report, inferred_initial_candidates=infer_initial(report, nu_final, nonnegative))

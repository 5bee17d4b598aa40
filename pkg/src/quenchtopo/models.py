"""Two-band Bloch model families and their spectra.

Every model is written as ``H(k) = d_a(k) sigma_a + d_b(k) sigma_b`` with
exactly two Pauli components, identified by a plane tag:

========  ==========  ==========
plane     sigma_a     sigma_b
========  ==========  ==========
``xz``    sigma_x     sigma_z
``yz``    sigma_y     sigma_z
``xy``    sigma_x     sigma_y
========  ==========  ==========

Units are natural (hbar = 1), so a gap energy doubles as a frequency.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .errors import ConfigError, CriticalPoint, GaplessPoint, Unsupported

GAP_FLOOR = 1e-14
CRITICAL_RTOL = 1e-9
PHASE_FIX_THRESHOLD = 1e-8

# plane tag -> (pauli index of d_a, pauli index of d_b); x=0, y=1, z=2
PLANES = {"xz": (0, 2), "yz": (1, 2), "xy": (0, 1)}

PAULI = np.array([
    [[0, 1], [1, 0]],
    [[0, -1j], [1j, 0]],
    [[1, 0], [0, -1]],
], dtype=complex)


class Family(str, Enum):
    QWZ1D = "qwz"
    SSH = "ssh"
    GENERIC = "generic"


@dataclass(frozen=True)
class ModelSpec:
    """Parameters of one two-band model.

    Use the constructors :meth:`qwz`, :meth:`ssh`, :meth:`tabulated` and
    :meth:`from_function` rather than filling fields by hand.
    """

    family: Family
    m: float = 0.0
    t_s: float = 0.0
    t_so: float = 0.0
    n: int = 0
    t1: float = 0.0
    t2: float = 0.0
    plane: str = "xz"
    table: Optional[tuple] = field(default=None, repr=False)
    func: Optional[Callable] = field(default=None, repr=False, compare=False)
    label: str = ""

    def __post_init__(self):
        if self.plane not in PLANES:
            raise ConfigError(f"plane: expected one of {sorted(PLANES)}, got {self.plane!r}")
        if self.family is Family.QWZ1D:
            if not self.t_s > 0:
                raise ConfigError(f"t_s: must be > 0, got {self.t_s}")
            if not self.t_so > 0:
                raise ConfigError(f"t_so: must be > 0, got {self.t_so}")
            if self.plane not in ("xz", "yz"):
                raise ConfigError(f"plane: QWZ models live in xz or yz, got {self.plane!r}")
            _check_harmonic(self.n)
            if not np.isfinite(self.m):
                raise ConfigError(f"m: must be finite, got {self.m}")
        elif self.family is Family.SSH:
            if not self.t1 >= 0:
                raise ConfigError(f"t1: must be >= 0, got {self.t1}")
            if not self.t2 > 0:
                raise ConfigError(f"t2: must be > 0, got {self.t2}")
            if self.plane != "xy":
                raise ConfigError(f"plane: SSH models live in xy, got {self.plane!r}")
            _check_harmonic(self.n)
        elif self.family is Family.GENERIC:
            if (self.table is None) == (self.func is None):
                raise ConfigError("generic model needs exactly one of a table or a function")
        else:  # pragma: no cover
            raise ConfigError(f"family: unknown {self.family!r}")

    @classmethod
    def qwz(cls, m, t_s=2.0, t_so=1.0, n=1, plane="xz"):
        _check_harmonic(n)
        return cls(Family.QWZ1D, m=float(m), t_s=float(t_s), t_so=float(t_so),
                   n=int(n), plane=plane)

    @classmethod
    def ssh(cls, t1, t2=1.0, n=1):
        _check_harmonic(n)
        return cls(Family.SSH, t1=float(t1), t2=float(t2), n=int(n), plane="xy")

    @classmethod
    def tabulated(cls, k, d_a, d_b, plane, label=""):
        """Model defined by d-vector samples over one period, interpolated linearly."""
        k = np.asarray(k, dtype=float)
        d_a = np.asarray(d_a, dtype=float)
        d_b = np.asarray(d_b, dtype=float)
        if not (k.ndim == 1 and k.shape == d_a.shape == d_b.shape and k.size >= 2):
            raise ConfigError("table: k, d_a, d_b must be 1-D arrays of equal length >= 2")
        if not np.all(np.diff(k) > 0):
            raise ConfigError("table: k must be strictly increasing")
        if k[-1] - k[0] >= 2 * np.pi:
            raise ConfigError("table: k must span less than one period (2*pi)")
        if not (np.all(np.isfinite(d_a)) and np.all(np.isfinite(d_b))):
            raise ConfigError("table: d components must be finite")
        return cls(Family.GENERIC, plane=plane, label=label,
                   table=(tuple(k), tuple(d_a), tuple(d_b)))

    @classmethod
    def from_function(cls, func, plane, label=""):
        """Model defined by ``func(k) -> (d_a, d_b)``; func must be 2*pi periodic."""
        return cls(Family.GENERIC, plane=plane, func=func, label=label)

    @property
    def harmonic(self):
        """Harmonic index for QWZ/SSH families, ``None`` otherwise."""
        return self.n if self.family in (Family.QWZ1D, Family.SSH) else None

    def describe(self):
        if self.family is Family.QWZ1D:
            return (f"qwz(m={self.m:g}, t_s={self.t_s:g}, t_so={self.t_so:g}, "
                    f"n={self.n}, plane={self.plane})")
        if self.family is Family.SSH:
            return f"ssh(t1={self.t1:g}, t2={self.t2:g}, n={self.n})"
        return f"generic({self.label or 'unnamed'}, plane={self.plane})"

    def to_dict(self):
        if self.family is Family.QWZ1D:
            return {"family": "qwz", "m": self.m, "t_s": self.t_s, "t_so": self.t_so,
                    "n": self.n, "plane": self.plane}
        if self.family is Family.SSH:
            return {"family": "ssh", "t1": self.t1, "t2": self.t2, "n": self.n}
        return {"family": "generic", "plane": self.plane, "label": self.label}


def _check_harmonic(n):
    if isinstance(n, bool) or int(n) != n or n < 0:
        raise ConfigError(f"n: must be an integer >= 0, got {n!r}")


@dataclass(frozen=True, eq=False)
class DVector:
    """Two nonzero d-vector components and the plane they span."""

    d_a: np.ndarray
    d_b: np.ndarray
    plane: str

    @property
    def norm2(self):
        return self.d_a ** 2 + self.d_b ** 2

    def cartesian(self):
        """Return ``(d_x, d_y, d_z)`` arrays."""
        out = [np.zeros_like(self.d_a), np.zeros_like(self.d_a), np.zeros_like(self.d_a)]
        ia, ib = PLANES[self.plane]
        out[ia] = self.d_a
        out[ib] = self.d_b
        return tuple(out)


@dataclass(frozen=True, eq=False)
class BandPair:
    """Energies and unit eigenvectors of the two bands (vectors on the last axis)."""

    E_plus: np.ndarray
    E_minus: np.ndarray
    vec_plus: np.ndarray
    vec_minus: np.ndarray


def qwz_d_vector(spec, k):
    k = np.asarray(k, dtype=float)
    nk = spec.n * k
    return DVector(spec.t_so * np.sin(nk), spec.m - 2.0 * spec.t_s * np.cos(nk), spec.plane)


def ssh_d_vector(spec, k):
    k = np.asarray(k, dtype=float)
    nk = spec.n * k
    return DVector(spec.t1 + spec.t2 * np.cos(nk), spec.t2 * np.sin(nk), "xy")


def _generic_d_vector(spec, k):
    k = np.asarray(k, dtype=float)
    if spec.func is not None:
        d_a, d_b = spec.func(k)
        return DVector(np.broadcast_to(np.asarray(d_a, float), k.shape).copy(),
                       np.broadcast_to(np.asarray(d_b, float), k.shape).copy(), spec.plane)
    tk, ta, tb = (np.asarray(t) for t in spec.table)
    period = 2 * np.pi
    return DVector(np.interp(k, tk, ta, period=period),
                   np.interp(k, tk, tb, period=period), spec.plane)


def d_vector(spec, k):
    """d-vector of ``spec`` at momenta ``k`` (scalar or array)."""
    if spec.family is Family.QWZ1D:
        return qwz_d_vector(spec, k)
    if spec.family is Family.SSH:
        return ssh_d_vector(spec, k)
    return _generic_d_vector(spec, k)


def d_vector_derivative(spec, k, step=1e-5):
    """dk-derivative of the d-vector; analytic for QWZ/SSH, central differences otherwise."""
    k = np.asarray(k, dtype=float)
    n = spec.n
    if spec.family is Family.QWZ1D:
        return DVector(n * spec.t_so * np.cos(n * k), 2.0 * n * spec.t_s * np.sin(n * k), spec.plane)
    if spec.family is Family.SSH:
        return DVector(-n * spec.t2 * np.sin(n * k), n * spec.t2 * np.cos(n * k), "xy")
    hi = d_vector(spec, k + step)
    lo = d_vector(spec, k - step)
    return DVector((hi.d_a - lo.d_a) / (2 * step), (hi.d_b - lo.d_b) / (2 * step), spec.plane)


def hamiltonian(d):
    """Stack of 2x2 Bloch matrices, shape ``d.d_a.shape + (2, 2)``."""
    ia, ib = PLANES[d.plane]
    return (np.asarray(d.d_a)[..., None, None] * PAULI[ia]
            + np.asarray(d.d_b)[..., None, None] * PAULI[ib])


def fix_gauge(vecs, threshold=PHASE_FIX_THRESHOLD):
    """Rotate each vector so its first component above ``threshold`` is real positive."""
    vecs = np.array(vecs, dtype=complex)
    first_big = np.abs(vecs[..., 0]) > threshold
    pivot = np.where(first_big, vecs[..., 0], vecs[..., 1])
    phase = pivot / np.abs(pivot)
    return vecs * np.conj(phase)[..., None]


def check_gapped(d, gap_floor=GAP_FLOOR, k=None):
    norm2 = d.norm2
    bad = norm2 < gap_floor
    if np.any(bad):
        where = ""
        if k is not None:
            where = f" at k={np.broadcast_to(k, bad.shape)[bad].ravel()[0]:.6g}"
        raise GaplessPoint(f"gap closes{where}: |d|^2={norm2[bad].ravel()[0]:.3g} < {gap_floor:g}")
    return norm2


def eigensystem(d, gap_floor=GAP_FLOOR):
    """Diagonalize ``H = d . sigma`` numerically.

    Eigenvectors come back in the raw gauge of :func:`fix_gauge`; downstream
    physics must not depend on that choice.
    """
    norm2 = check_gapped(d, gap_floor)
    energy = np.sqrt(norm2)
    _, vecs = np.linalg.eigh(hamiltonian(d))
    # eigh sorts ascending: column 0 is the lower band
    return BandPair(E_plus=energy, E_minus=-energy,
                    vec_plus=fix_gauge(vecs[..., :, 1]),
                    vec_minus=fix_gauge(vecs[..., :, 0]))


def gap_frequency(d, gap_floor=GAP_FLOOR):
    """Interband transition frequency ``E_+ - E_-`` (hbar = 1)."""
    return 2.0 * np.sqrt(check_gapped(d, gap_floor))


def analytic_topological_number(spec, rtol=CRITICAL_RTOL):
    """Winding number from the phase diagram of the QWZ or SSH family."""
    if spec.family is Family.QWZ1D:
        if abs(abs(spec.m) - 2 * spec.t_s) <= rtol * 2 * spec.t_s:
            raise CriticalPoint(f"{spec.describe()}: |m| = 2 t_s is a phase boundary")
        return spec.n if abs(spec.m) < 2 * spec.t_s else 0
    if spec.family is Family.SSH:
        if abs(spec.t1 - spec.t2) <= rtol * spec.t2:
            raise CriticalPoint(f"{spec.describe()}: t1 = t2 is a phase boundary")
        return spec.n if spec.t1 < spec.t2 else 0
    raise Unsupported("analytic classification needs a QWZ or SSH model; "
                      "use gauge.winding_number for generic d-vectors")


def load_tabulated(path, label=None):
    """Read a ``k,d_a,d_b,plane`` CSV into a generic :class:`ModelSpec`."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        missing = {"k", "d_a", "d_b", "plane"} - set(reader.fieldnames or ())
        if missing:
            raise ConfigError(f"{path}: missing columns {sorted(missing)}")
        rows = list(reader)
    if not rows:
        raise ConfigError(f"{path}: no data rows")
    planes = {r["plane"].strip() for r in rows}
    if len(planes) != 1:
        raise ConfigError(f"{path}: plane column must be constant, got {sorted(planes)}")
    try:
        k = [float(r["k"]) for r in rows]
        d_a = [float(r["d_a"]) for r in rows]
        d_b = [float(r["d_b"]) for r in rows]
    except ValueError as exc:
        raise ConfigError(f"{path}: non-numeric entry ({exc})") from None
    return ModelSpec.tabulated(k, d_a, d_b, planes.pop(), label=label or path.stem)

"""Reading the winding number of a 1D two-band model from a sudden quench.

The upper-band occupation left by a quench between two gapped models has
``|nu_i - nu_f|`` complete peaks across the Brillouin zone. The package
computes that occupation, counts its peaks, and emulates two readouts of
it: spontaneous emission spectra and spin-resolved atom densities.
"""
from .errors import (ConfigError, CriticalPoint, GaplessPoint, GridError, MultiMinimum,
                     NonIntegerWinding, NumericalFailure, PlaneMismatch, QuenchTopoError,
                     RootFindFailure, SingularK, UnwrapFailure, Unsupported, ZeroShots)
from .models import Family, ModelSpec, analytic_topological_number, d_vector, eigensystem
from .gauge import KGrid, angle_profile, skew_polarization, winding_number
from .overlap import overlap_closed_form, overlap_direct
from .peaks import CPReport, Thresholds, count_cp, count_cp_exact, count_cp_peaks, infer_initial

__version__ = "0.1.0"

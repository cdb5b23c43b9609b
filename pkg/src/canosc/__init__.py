"""Essential-spectrum edges of half-line canonical systems by oscillation theory."""

__version__ = "0.1.0"

from .bounds import (TailPolicy, TailStats, consistency_report, discrete_spectrum, tail_stats, thm11_interval,
                     thm13_interval, thm14_upper)
from .interval import INF, Bracket, bracket_min, bracket_ratio
from .model import (FAMILY_NAMES, AnalyticTail, CoefficientField, DomainError, HMatrix, builtin_family,
                    diagonal_part, from_phi_g, grid_field, read_grid_csv, to_phi_g, trace_normalize)
from .prufer import PruferSolver, PruferState, PruferTrajectory, StepPolicy, StiffnessError, integrate
from .schrodinger import (ShootingPolicy, ShootingRun, negative_spectrum_finite, riccati_crosscheck, s_bracket,
                          shoot_zero_energy)
from .spectrum import ClassifyPolicy, OscillationVerdict, SpectralEstimate, Verdict, classify, m_estimate
from .transforms import diagonal_to_dirac, prepare, rotate, schrodinger_to_canonical

__all__ = [
    "__version__",
    "AnalyticTail", "Bracket", "ClassifyPolicy", "CoefficientField", "DomainError", "FAMILY_NAMES", "HMatrix",
    "INF", "OscillationVerdict", "PruferSolver", "PruferState", "PruferTrajectory", "ShootingPolicy",
    "ShootingRun", "SpectralEstimate", "StepPolicy", "StiffnessError", "TailPolicy", "TailStats", "Verdict",
    "bracket_min", "bracket_ratio", "builtin_family", "classify", "consistency_report", "diagonal_part",
    "diagonal_to_dirac", "discrete_spectrum", "from_phi_g", "grid_field", "integrate", "m_estimate",
    "negative_spectrum_finite", "prepare", "read_grid_csv", "riccati_crosscheck", "rotate", "s_bracket",
    "schrodinger_to_canonical", "shoot_zero_energy", "tail_stats", "thm11_interval", "thm13_interval",
    "thm14_upper", "to_phi_g", "trace_normalize",
]

"""Construction and verification of (m, n)-extensions of Hamiltonian systems."""
from ._kernels import BACKEND
from .errors import (ChartMismatchError, HamextError, MomentumPowerError, ParseError, PoleError,
                     SamplingError, SystemConfigError, UnboundSymbolError)
from .extension import (Construction, ExtensionSpec, TableOneFunctions, check_cg, construct,
                        extended_hamiltonian, first_integral_operator, first_integral_pd,
                        gn_closed, gn_recursive, lambda_of, table_one)
from .phasespace import (CanonicalChart, MomentumPoly, equal_numeric, numeric_difference,
                         poisson, xl_apply)
from .symexpr import parse
from .systems import SystemDef, calogero, get_system, load_system, oscillator, three_sphere
from .verify import bracket_residual, conservation_drift, fd_bracket_oracle, integrate

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "HamextError", "ParseError", "PoleError", "SamplingError", "SystemConfigError",
    "UnboundSymbolError", "ChartMismatchError", "MomentumPowerError", "ExtensionSpec",
    "TableOneFunctions", "Construction", "check_cg", "construct", "extended_hamiltonian",
    "first_integral_operator", "first_integral_pd", "gn_closed", "gn_recursive", "lambda_of",
    "table_one", "CanonicalChart", "MomentumPoly", "equal_numeric", "numeric_difference",
    "poisson", "xl_apply", "parse", "SystemDef", "calogero", "get_system", "load_system",
    "oscillator", "three_sphere", "bracket_residual", "conservation_drift",
    "fd_bracket_oracle", "integrate",
]

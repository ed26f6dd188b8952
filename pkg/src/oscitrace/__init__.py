"""Asymptotics of degenerate oscillatory integrals and semiclassical trace coefficients.

Submodules: specfun, symbols, distributions, amplitudes, residues, quadrature,
trace, flow, cli. Errors live in :mod:`oscitrace.errors`.
"""

__version__ = "0.1.0"

from .dims import ProblemDims  # noqa: E402
from .errors import OscitraceError  # noqa: E402

__all__ = ["ProblemDims", "OscitraceError", "__version__"]

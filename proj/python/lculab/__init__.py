"""Multi-product formula laboratory.

Exact extrapolation coefficients, Lie-Trotter-Suzuki schedules, statevector
simulation of the non-deterministic combination protocol, and the closed-form
cost model, all backed by the C++ core.
"""

from ._core import *  # noqa: F401,F403
from ._core import __doc__ as _core_doc  # noqa: F401

__version__ = "0.1.0"

"""X-secure T-private information retrieval over graph-replicated storage.

The package splits into: exact prime-field arithmetic (``field``), storage
patterns and their combinatorics (``storage``), dual-GRS coefficients
(``grs``), the retrieval protocol (``scheme``), exact capacity bounds
(``capacity``), guarantee verifiers (``verify``), the session harness
(``simnet``), bundled reference patterns (``fixtures``), and figure/CSV
rendering (``report``).
"""

from .capacity import capacity_report
from .scheme import Demand, build_instance, composite_retrieve
from .simnet import SessionConfig, run_session
from .storage import validate

__version__ = "0.1.0"

__all__ = [
    "Demand",
    "SessionConfig",
    "build_instance",
    "capacity_report",
    "composite_retrieve",
    "run_session",
    "validate",
    "__version__",
]

"""Zipf's law as a mixture of geometric and of zero-truncated Poisson laws."""

__version__ = "0.1.0"

from .errors import (
    DegenerateSample,
    DomainError,
    EmptyInput,
    InvariantViolation,
    NonConvergence,
    NonFiniteMoment,
    ParseError,
    PatternMismatch,
    ZipfMixError,
)
from .specfun import *  # noqa: F401,F403
from .distributions import *  # noqa: F401,F403
from .distributions import DEFAULT_SEED
from .mixtures import *  # noqa: F401,F403
from .inference import *  # noqa: F401,F403
from .gof import *  # noqa: F401,F403
from .corpus import *  # noqa: F401,F403

"""Secrecy-capacity toolkit for cost-constrained discrete memoryless wiretap channels."""

__version__ = "0.1.0"

from .errors import (
    AbsoluteContinuityError,
    BudgetBelowMinCostError,
    DimensionMismatchError,
    GapNotEstablishedError,
    MalformedChannelFileError,
    MessageOutOfRangeError,
    SizeOverflowError,
    StateSpaceTooLargeError,
    UnknownSymbolError,
    ValidationError,
    WiretapError,
)
from .probability import (
    CondPmf,
    JointPmf,
    Pmf,
    conditional_mutual_information,
    empirical_pmf,
    entropy,
    is_typical,
    kl_divergence,
    mutual_information,
    total_variation,
)

__all__ = [
    "AbsoluteContinuityError",
    "BudgetBelowMinCostError",
    "CondPmf",
    "DimensionMismatchError",
    "GapNotEstablishedError",
    "JointPmf",
    "MalformedChannelFileError",
    "MessageOutOfRangeError",
    "Pmf",
    "SizeOverflowError",
    "StateSpaceTooLargeError",
    "UnknownSymbolError",
    "ValidationError",
    "WiretapError",
    "conditional_mutual_information",
    "empirical_pmf",
    "entropy",
    "is_typical",
    "kl_divergence",
    "mutual_information",
    "total_variation",
    "__version__",
]

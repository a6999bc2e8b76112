"""Exception types shared across the toolkit.

Every failure mode that callers are expected to handle gets its own class so
that the CLI can map it to a stable exit code and tests can assert on the
exact condition rather than on message text.
"""


class WiretapError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(WiretapError):
    """Malformed numerical input: bad shapes, negative masses, bad sums."""


class AbsoluteContinuityError(WiretapError):
    """KL divergence requested for p not absolutely continuous w.r.t. q."""


class UnknownSymbolError(WiretapError):
    """A sequence contains a symbol outside the declared alphabet."""


class DimensionMismatchError(WiretapError):
    """Distribution and channel alphabet sizes do not line up."""


class MalformedChannelFileError(WiretapError):
    """A channel description file failed structural validation."""


class BudgetBelowMinCostError(WiretapError):
    """The cost budget is below the cheapest input letter, so no input
    distribution is feasible."""


class MessageOutOfRangeError(WiretapError):
    """Encoder asked to send a message index outside the codebook."""


class SizeOverflowError(WiretapError):
    """Requested codebook would exceed the configured memory bound."""


class StateSpaceTooLargeError(WiretapError):
    """Exact output-sequence enumeration would exceed the configured cap."""


class GapNotEstablishedError(WiretapError):
    """The optimizer failed to separate the two-layer value from the
    single-layer benchmark by the required margin."""

"""Exception taxonomy shared across the engine."""


class MatchsegError(Exception):
    """Base class for all engine errors."""


# --- feature / mask file formats ---

class BadMagic(MatchsegError):
    pass


class UnsupportedVersion(MatchsegError):
    pass


class TruncatedFile(MatchsegError):
    pass


class NonFiniteValue(MatchsegError):
    pass


class EmptyResult(MatchsegError):
    """No patch survived mask-to-grid projection."""


# --- similarity matrices ---

class DimMismatch(MatchsegError):
    pass


class IndexOutOfRange(MatchsegError):
    pass


class GridTooLarge(MatchsegError):
    """Full grid-by-grid similarity requested above the materialization cap."""


# --- matching ---

class EmptyMatch(MatchsegError):
    """Every candidate match was filtered out; no correspondence found."""


# --- segmenter backends ---

class UnknownImage(MatchsegError):
    pass


class DuplicateImage(MatchsegError):
    pass


class BackendUnavailable(MatchsegError):
    """External segmenter unreachable; safe to retry."""


class ProtocolError(MatchsegError):
    """Malformed message on the segmenter wire protocol."""


# --- transport / scoring ---

class InfeasibleWeights(MatchsegError):
    pass


class EmptySupport(MatchsegError):
    pass


class ZeroArea(MatchsegError):
    pass

"""Exception types shared across the toolkit."""


class ScribeforgeError(Exception):
    """Base class for toolkit-specific errors."""


class VocabularyError(ScribeforgeError, ValueError):
    """A character or token is not covered by the working alphabet/bank."""

    def __init__(self, message, characters=()):
        super().__init__(message)
        self.characters = tuple(characters)


class AlignmentInfeasibleError(ScribeforgeError, ValueError):
    """The transcript cannot be emitted within the available timesteps."""


class ProbMatrixFormatError(ScribeforgeError, ValueError):
    """A probability-matrix file is malformed or violates its invariants."""


class CorpusDecodeError(ScribeforgeError, ValueError):
    """Corpus input is not valid UTF-8; carries the failing byte offset."""

    def __init__(self, message, byte_offset):
        super().__init__(message)
        self.byte_offset = byte_offset


class EmptyCorpusError(ScribeforgeError, ValueError):
    """No usable line remains after alphabet filtering."""

"""Exception types shared across the package."""


class TgtcError(Exception):
    """Base class for all package-specific errors."""


class ParseError(TgtcError):
    """A file or record could not be parsed."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DuplicateIdError(TgtcError):
    """Two documents share the same id."""


class EmptyCorpusError(TgtcError):
    """The corpus file contains no documents."""


class EmptyVocabularyError(TgtcError):
    """No token survived the document-frequency filter."""


class DegenerateSplitError(TgtcError):
    """Split assignment left the train or validation set unusable."""


class InvalidDimError(TgtcError):
    """Requested embedding dimension is not positive."""


class MissingEmbeddingError(TgtcError):
    """An embedding file lacks a row for a corpus document."""


class FormatError(TgtcError):
    """An artifact file violates its schema."""


class InvalidWindowError(TgtcError):
    """Sliding-window size is not positive."""


class ZeroDegreeError(TgtcError):
    """A graph node has zero degree (unreachable with self-loops)."""


class ShapeError(TgtcError):
    """Matrix shapes do not conform."""


class EmptyMaskError(TgtcError):
    """A loss mask selects no nodes."""


class NotNormalizedError(TgtcError):
    """An operation requires the symmetric-normalized adjacency."""


class EmptyEvalError(TgtcError):
    """An evaluation subset is empty."""


class UndefinedAUCError(TgtcError):
    """ROC-AUC is undefined when only one class is present."""


class NonFiniteGradientError(TgtcError):
    """A gradient contains NaN or infinity."""


class DivergedError(TgtcError):
    """Optimization produced a non-finite loss."""


class VersionError(TgtcError):
    """An artifact file has an unknown or incompatible format version."""

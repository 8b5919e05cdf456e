"""Exception types shared across the toolkit."""


class McrmixError(Exception):
    """Base class for all toolkit errors."""


class DimMismatch(McrmixError):
    """Operand shapes are incompatible."""


class InsufficientSamples(McrmixError):
    """Too few samples for the requested statistic."""


class SingularCovariance(McrmixError):
    """Covariance is numerically singular and no ridge was given."""


class EmptyClass(McrmixError):
    """Some class index has no samples."""


class NotZeroMean(McrmixError):
    """Input violates the zero-mean precondition."""


class PriorMismatch(McrmixError):
    """Class priors disagree between sources."""


class NonFiniteObjective(McrmixError):
    """Objective evaluated to NaN."""


class TooManySources(McrmixError):
    """Grid search supports at most three sources."""


class LengthMismatch(McrmixError):
    """Sequences differ in length."""


class ZeroMarginal(McrmixError):
    """A class has zero probability mass."""


class BadMagic(McrmixError):
    """File does not start with the expected magic bytes."""


class TruncatedFile(McrmixError):
    """File payload does not match what its header claims."""


class OversizeMatrix(McrmixError):
    """Matrix exceeds the format's size limit."""


class LabelOutOfRange(McrmixError):
    """A label is not inside {0, ..., n_classes - 1}."""


class SchemaVersionMismatch(McrmixError):
    """Model document was written with an unsupported format version."""


class MalformedDocument(McrmixError):
    """Model document is syntactically or semantically invalid."""


class RaggedRows(McrmixError):
    """CSV rows have inconsistent lengths."""


class NonNumericCell(McrmixError):
    """CSV cell could not be parsed as a number."""

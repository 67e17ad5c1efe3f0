"""City commercial-credit index construction and PCA cross-checking."""

__version__ = "0.1.0"

from .errors import CeiError, DataError, DegenerateError, NumericError, UsageError  # noqa: E402
from .model import (  # noqa: E402
    AffineTransform,
    ClassLevel,
    DataMatrix,
    Direction,
    IndexNode,
    IndexSystem,
    Ranking,
    ValueKind,
    WeightVector,
    bundled_cei2012_weights,
    restrict_and_renormalize,
    validate_index_system,
)

"""GAN and Dropout-GAN social bot detection on tabular account features."""

from . import baselines, checkpoint, dataio, dropoutgan, evalmetrics, features, gan, nncore
from .errors import (
    BotGanError,
    ConfigError,
    DomainError,
    FormatError,
    ManifestError,
    NumericError,
    ParseError,
    ShapeError,
)

__version__ = "0.1.0"

__all__ = [
    "baselines", "checkpoint", "dataio", "dropoutgan", "evalmetrics", "features", "gan", "nncore",
    "BotGanError", "ConfigError", "DomainError", "FormatError", "ManifestError", "NumericError",
    "ParseError", "ShapeError",
]

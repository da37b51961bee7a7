"""gp00: simulator and numerical toolkit for squeezed-state quantum key exchange."""

__version__ = "0.1.0"

from . import analysis, cli, encoding, numerics, postprocessing, protocol, states

__all__ = [
    "__version__",
    "analysis",
    "cli",
    "encoding",
    "numerics",
    "postprocessing",
    "protocol",
    "states",
]

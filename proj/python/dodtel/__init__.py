"""DoD-stabilized cut-cell DG for the telegraph equation and its heat limit."""

from ._dodtel import *  # noqa: F401,F403
from ._dodtel import __doc__  # noqa: F401

__version__ = "0.1.0"

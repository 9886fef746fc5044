"""Python bindings for the bogo library."""

from ._bogo import *  # noqa: F401,F403
from ._bogo import __doc__  # noqa: F401

__version__ = "0.1.0"

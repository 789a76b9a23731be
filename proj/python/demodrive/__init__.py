"""Deterministic 2D driving sim plus a DDPG-from-demonstrations training lab."""

from ._demodrive import *  # noqa: F401,F403
from ._demodrive import __doc__  # noqa: F401

__version__ = "0.1.0"

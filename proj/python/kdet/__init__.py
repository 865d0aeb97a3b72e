"""Fredholm determinants of 2F1-type kernels, Painleve sigma forms and Schlesinger flows."""

from ._kdet import *  # noqa: F401,F403
from ._kdet import KdetError

__all__ = [name for name in dir() if not name.startswith("_")]

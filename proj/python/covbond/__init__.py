"""Structural one-period loss models for covered bonds."""

from covbond._core import *  # noqa: F401,F403
from covbond._core import __doc__  # noqa: F401

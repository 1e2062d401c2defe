"""Monotone cyclic feedback systems: Lyapunov function, cones, Floquet splitting, transversality."""

from ._core import *  # noqa: F401,F403
from ._core import McfsError, __version__  # noqa: F401

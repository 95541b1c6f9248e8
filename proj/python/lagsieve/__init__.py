"""Laguerre sieve estimation of incubation period and generation time densities."""

from ._lagsieve import *  # noqa: F401,F403
from ._lagsieve import __version__  # noqa: F401

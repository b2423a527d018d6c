"""Trappified delegated blind computation: traps, analysis, compilers and a test harness."""

from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]

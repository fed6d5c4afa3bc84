"""normlab: exact-arithmetic workbench for digit expansions of real numbers."""

__version__ = "0.1.0"

"""Monte Carlo laboratory for truncated long-range percolation on oriented
graphs, the associated renormalization constructions, and the long-range
contact process."""

from . import bondfield, contact, harness, oriented, renorm, sequences, starlat, stats

__all__ = ["bondfield", "contact", "harness", "oriented", "renorm",
           "sequences", "starlat", "stats"]

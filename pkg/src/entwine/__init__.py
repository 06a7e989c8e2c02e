"""Optimal pure-state decompositions and entanglement of formation."""

__version__ = "0.1.0"

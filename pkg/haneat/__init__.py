"""haneat: NEAT with evolvable per-node activation functions."""

__version__ = "0.1.0"

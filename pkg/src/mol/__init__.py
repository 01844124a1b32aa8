"""Multi-objective evolutionary curricula for command-conditioned locomotion."""

__version__ = "0.1.0"

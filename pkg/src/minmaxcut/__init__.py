"""Minmax and lp-norm graph k-partitioning: exact oracle, FPT dynamic program,
approximation scheme, Gomory-Hu baseline and the clique-reduction gadget."""

__version__ = "0.1.0"

"""Information loss of deterministic memoryless systems.

Absolute loss ``H(X|Y)`` of piecewise bijective maps, relative loss via
information dimension, reconstruction error bounds, and a gallery of worked
systems with a command-line front end.
"""

from .distributions import discrete, gaussian, mixed, piecewise_uniform, uniform
from .loss import (bound_chain, cascade_loss, infinite_loss_probe, loss_monte_carlo, loss_via_differential_entropy,
                   loss_via_partition)
from .pbf import Branch, Pbf, compose, cubic_map, square_law
from .reconstruct import map_error_probability, map_result, suboptimal_reconstructor

__version__ = "0.1.0"

__all__ = [
    "Branch", "Pbf", "bound_chain", "cascade_loss", "compose", "cubic_map", "discrete", "gaussian",
    "infinite_loss_probe", "loss_monte_carlo", "loss_via_differential_entropy", "loss_via_partition",
    "map_error_probability", "map_result", "mixed", "piecewise_uniform", "square_law", "suboptimal_reconstructor",
    "uniform",
]

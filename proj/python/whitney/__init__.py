"""Linear extension operator for L^{2,p} on the fractal set E."""

import json

from ._whitney import (
    ConfigError,
    ConsistencyError,
    ConvergenceError,
    CzDecomposition,
    Error,
    Extension,
    FractalSet,
    GeometryError,
    TreeSolution,
    bump_data,
    extend,
    level_weights,
    minimal_grid_energy,
    minimize_tree,
)
from . import _whitney

__all__ = [
    "ConfigError",
    "ConsistencyError",
    "ConvergenceError",
    "CzDecomposition",
    "Error",
    "Extension",
    "FractalSet",
    "GeometryError",
    "TreeSolution",
    "bump_data",
    "extend",
    "geometry",
    "level_weights",
    "minimal_grid_energy",
    "minimize_tree",
    "verify",
]


def geometry(decomposition):
    return json.loads(decomposition.geometry())


def verify(**config):
    """Runs the verification suite; keys as in the CLI's "verify" config block."""
    return json.loads(_whitney.verify(json.dumps(config)))

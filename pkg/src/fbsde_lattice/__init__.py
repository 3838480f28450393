"""Fully coupled forward-backward stochastic difference equations on finite lattices."""
from .lattice import Lattice, NoiseModel, NodeId, build_lattice, cond_exp, cond_exp_noise, expectation
from .spaces import AdaptedProcess, WeightConfig, weighted_norm_sq
from .coefficients import CoefficientSet, DomMonCert, DrivingTerms, LevelMatrices, Lipschitz
from .fbsde import FBSDESolution, SolverOptions, solve

__all__ = [
    "AdaptedProcess", "CoefficientSet", "DomMonCert", "DrivingTerms", "FBSDESolution", "Lattice",
    "LevelMatrices", "Lipschitz", "NodeId", "NoiseModel", "SolverOptions", "WeightConfig",
    "build_lattice", "cond_exp", "cond_exp_noise", "expectation", "solve", "weighted_norm_sq",
]

__version__ = "0.1.0"

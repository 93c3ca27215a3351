"""Neural solvers for static boundary-value problems trained on finite-difference residuals."""

from .mesh import Grid1D, Grid2D, uniform_1d, uniform_2d
from .network import MlpParams, MlpSpec, init, predict
from .problems import ProblemSpec, get_problem
from .trainer import TrainConfig, TrainHistory, evaluate, train_finnet, train_pinn

__all__ = [
    "Grid1D", "Grid2D", "uniform_1d", "uniform_2d",
    "MlpParams", "MlpSpec", "init", "predict",
    "ProblemSpec", "get_problem",
    "TrainConfig", "TrainHistory", "evaluate", "train_finnet", "train_pinn",
]

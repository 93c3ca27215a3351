"""FinNet and PINN training loops.

Each epoch evaluates the network on all training points with the batched
numpy route, records the loss on a fresh scalar tape, sweeps the tape
backward to get dL/d(network output), and pushes that through the network
with the batched vector-Jacobian product.

FinNet epoch:

1. u_hat = v(G)
2. L = MSE(u_hat[B], g(B))
3. overwrite u_hat[B] with g(B) as constants
4. finite-difference derivatives of the overwritten field
5. L += MSE(F(x, u, Du, D2u), 0) over interior points
6. one Adam step
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import autodiff as ad
from . import optimizer as adam
from . import stencil
from .autodiff import Tape, Var
from .mesh import Grid1D, Grid2D, uniform_1d, uniform_2d
from .network import MlpParams, MlpSpec, batch_backward, batch_forward, init, jet_backward, jet_forward, predict
from .problems import PINN_HIDDEN, ProblemSpec, get_problem
from .stencil import Field

DIVERGENCE_LIMIT = 1e12
METHODS = ("finnet", "pinn")


@dataclass
class TrainConfig:
    problem: str = "ode1"
    method: str = "finnet"
    epochs: int = 5000
    lr: float = 0.01
    seed: int = 0
    mesh_n: int = 101
    hidden: tuple[int, ...] = (16, 16)
    epsilon: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if int(self.epochs) < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if not self.lr > 0:
            raise ValueError(f"lr must be positive, got {self.lr}")
        if int(self.seed) < 0:
            raise ValueError(f"seed must be non-negative, got {self.seed}")
        self.epochs = int(self.epochs)
        self.seed = int(self.seed)
        self.mesh_n = int(self.mesh_n)
        self.hidden = tuple(int(w) for w in self.hidden)

    @classmethod
    def paper_defaults(cls, problem: str, method: str = "finnet", **overrides) -> "TrainConfig":
        """Per-problem architecture, learning rate, epochs and mesh size."""
        d = get_problem(problem).defaults
        hidden = PINN_HIDDEN if method == "pinn" else d.hidden
        base = dict(problem=problem, method=method, epochs=d.epochs, lr=d.lr, mesh_n=d.mesh_n, hidden=hidden)
        base.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**base)


@dataclass
class TrainHistory:
    loss: list[float] = field(default_factory=list)
    mse: list[float] = field(default_factory=list)
    wall_time: list[float] = field(default_factory=list)
    diverged_at: int | None = None

    def __len__(self) -> int:
        return len(self.loss)

    def record(self, loss: float, mse: float, elapsed: float) -> None:
        self.loss.append(loss)
        self.mse.append(mse)
        self.wall_time.append(elapsed)


class DivergenceError(RuntimeError):
    def __init__(self, epoch: int, loss: float, history: TrainHistory, params: MlpParams):
        super().__init__(f"training diverged at epoch {epoch} (loss={loss!r})")
        self.epoch = epoch
        self.history = history
        self.params = params


def make_grid(problem: ProblemSpec, n: int) -> Grid1D | Grid2D:
    a, b = problem.domain
    if problem.dim == 1:
        return uniform_1d(a, b, n, problem.boundary)
    return uniform_2d(a, b, n)


@dataclass
class FinNetLoss:
    tape: Tape
    total: Var
    boundary: Var
    residual: Var
    field: Field
    substituted: Field


def _derivatives(problem: ProblemSpec, sub: Field, k: int):
    grid = sub.grid
    need = problem.required_derivatives
    if grid.dim == 1:
        du = stencil.d1_best(sub, k) if "d1" in need else None
        d2u = stencil.d2_central(sub, k) if "d2" in need else None
        return du, d2u
    ij = divmod(k, grid.ny)
    du = stencil.grad_2d(sub, ij) if "grad" in need else None
    d2u = stencil.laplacian_2d(sub, ij) if "lap" in need else None
    return du, d2u


def finnet_loss(problem: ProblemSpec, grid, u_pred: Sequence[float], tape: Tape | None = None) -> FinNetLoss:
    """Build the FinNet loss on a tape from network outputs at every grid point."""
    if problem.dim != grid.dim:
        raise ValueError(f"problem {problem.name} is {problem.dim}-D but grid is {grid.dim}-D")
    tape = Tape() if tape is None else tape
    X = grid.coords()
    field_ = Field.from_values(tape, grid, u_pred)
    B = list(grid.boundary_ids)
    gB = problem.g(X[B])

    boundary = ad.mean_square([field_.values[k] - g for k, g in zip(B, gB.tolist())])
    sub = field_.substitute(B, gB.tolist())
    residuals = []
    for k in grid.interior_ids:
        du, d2u = _derivatives(problem, sub, k)
        residuals.append(problem.residual(tuple(X[k]), sub.values[k], du, d2u))
    residual = ad.mean_square(residuals)
    total = boundary + residual
    return FinNetLoss(tape, total, boundary, residual, field_, sub)


def _check_finite(epoch: int, loss: float, history: TrainHistory, params: MlpParams) -> None:
    if not math.isfinite(loss) or loss > DIVERGENCE_LIMIT:
        history.diverged_at = epoch
        raise DivergenceError(epoch, loss, history, params)


def _adam(config: TrainConfig) -> adam.AdamState:
    return adam.AdamState(lr=config.lr, beta1=config.beta1, beta2=config.beta2, eps=config.adam_eps)


def train_finnet(problem: ProblemSpec, grid, spec: MlpSpec, config: TrainConfig,
                 params: MlpParams | None = None) -> tuple[MlpParams, TrainHistory]:
    if problem.dim != grid.dim or spec.input_dim != grid.dim:
        raise ValueError("problem, grid and network dimensions disagree")
    params = init(spec, config.seed) if params is None else params
    state = _adam(config)
    X = grid.coords()
    u_true = problem.u_exact(X)
    history = TrainHistory()
    start = time.perf_counter()
    for epoch in range(config.epochs):
        u_hat, acts = batch_forward(params, X)
        loss = finnet_loss(problem, grid, u_hat.tolist())
        value = loss.total.value
        history.record(value, float(np.mean((u_hat - u_true) ** 2)), time.perf_counter() - start)
        _check_finite(epoch, value, history, params)
        grads = ad.backward(loss.tape, loss.total)
        g_u = np.array([grads[v.node_id] for v in loss.field.values])
        params, state = adam.step(state, params, batch_backward(params, acts, g_u))
    return params, history


@dataclass
class PinnLoss:
    tape: Tape
    total: Var
    boundary: Var
    residual: Var
    u: list[Var]
    du: list[Var | None]
    d2u: list[Var | None]
    ub: list[Var]


def pinn_loss(problem: ProblemSpec, colloc: np.ndarray, u, du, d2u,
              bpoints: np.ndarray, ub, tape: Tape | None = None) -> PinnLoss:
    """Residual MSE over collocation points plus boundary MSE, from jet values."""
    tape = Tape() if tape is None else tape
    need = problem.required_derivatives
    u_v = [tape.var(x) for x in u]
    du_v = [tape.var(x) for x in du] if "d1" in need else [None] * len(u_v)
    d2u_v = [tape.var(x) for x in d2u] if "d2" in need else [None] * len(u_v)
    residuals = [problem.residual((float(x),), a, b, c) for x, a, b, c in zip(colloc, u_v, du_v, d2u_v)]
    residual = ad.mean_square(residuals)
    ub_v = [tape.var(x) for x in ub]
    gB = problem.g(bpoints).tolist()
    boundary = ad.mean_square([v - g for v, g in zip(ub_v, gB)])
    return PinnLoss(tape, boundary + residual, boundary, residual, u_v, du_v, d2u_v, ub_v)


def _grad_or_zero(grads: list[float], vs: list[Var | None]) -> np.ndarray:
    return np.array([grads[v.node_id] if v is not None else 0.0 for v in vs])


def pinn_points(problem: ProblemSpec, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Collocation points (grid interior) and boundary points for a 1-D problem."""
    grid = make_grid(problem, n)
    return grid.points[1:-1], grid.points[list(grid.boundary_ids)]


def train_pinn(problem: ProblemSpec, colloc: Sequence[float], spec: MlpSpec, config: TrainConfig,
               bpoints: Sequence[float] | None = None,
               params: MlpParams | None = None) -> tuple[MlpParams, TrainHistory]:
    """Autodiff-residual baseline for the 1-D problems; no stencils, no substitution."""
    if problem.dim != 1 or spec.input_dim != 1:
        raise ValueError("the PINN baseline covers 1-D problems only")
    colloc = np.asarray(colloc, dtype=float)
    if bpoints is None:
        a, b = problem.domain
        bpoints = {"left": [a], "right": [b], "both": [a, b]}[problem.boundary]
    bpoints = np.asarray(bpoints, dtype=float)
    params = init(spec, config.seed) if params is None else params
    state = _adam(config)
    eval_pts = np.concatenate([colloc, bpoints])
    u_true = problem.u_exact(eval_pts)
    history = TrainHistory()
    start = time.perf_counter()
    for epoch in range(config.epochs):
        u, du, d2u, cache = jet_forward(params, colloc)
        ub, acts = batch_forward(params, bpoints)
        loss = pinn_loss(problem, colloc, u.tolist(), du.tolist(), d2u.tolist(), bpoints, ub.tolist())
        value = loss.total.value
        pred = np.concatenate([u, ub])
        history.record(value, float(np.mean((pred - u_true) ** 2)), time.perf_counter() - start)
        _check_finite(epoch, value, history, params)
        grads = ad.backward(loss.tape, loss.total)
        gj = jet_backward(params, cache, _grad_or_zero(grads, loss.u),
                          _grad_or_zero(grads, loss.du), _grad_or_zero(grads, loss.d2u))
        gb = batch_backward(params, acts, _grad_or_zero(grads, loss.ub))
        total = MlpParams([a + b for a, b in zip(gj.weights, gb.weights)],
                          [a + b for a, b in zip(gj.biases, gb.biases)])
        params, state = adam.step(state, params, total)
    return params, history


def evaluate(params: MlpParams, problem: ProblemSpec, points) -> tuple[np.ndarray, float]:
    """Predictions at a grid or arbitrary points, and their MSE against the exact solution."""
    X = points.coords() if isinstance(points, (Grid1D, Grid2D)) else np.asarray(points, dtype=float)
    pred = predict(params, X)
    exact = problem.u_exact(X)
    return pred, float(np.mean((pred - exact) ** 2))


def run(config: TrainConfig) -> tuple[MlpParams, TrainHistory, ProblemSpec, Grid1D | Grid2D]:
    """Train per config; returns params, history, problem and the evaluation grid."""
    kwargs = {"epsilon": config.epsilon} if config.problem == "eikonal" else {}
    problem = get_problem(config.problem, **kwargs)
    grid = make_grid(problem, config.mesh_n)
    spec = MlpSpec(problem.dim, config.hidden)
    if config.method == "finnet":
        params, history = train_finnet(problem, grid, spec, config)
    else:
        colloc, bpts = pinn_points(problem, config.mesh_n)
        params, history = train_pinn(problem, colloc, spec, config, bpts)
    return params, history, problem, grid

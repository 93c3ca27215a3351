"""Boundary-value problems with residual, boundary data and exact solution.

Residuals take ``(point, u, du, d2u)`` where, in 1-D, ``du`` and ``d2u`` are
the first and second derivative estimates and, in 2-D, ``du`` is the pair
``(ux, uy)`` and ``d2u`` the Laplacian. Arguments a residual does not use may
be ``None``. The same residual serves finite-difference estimates (FinNet)
and autodiff jet coefficients (PINN).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import autodiff as ad
from .autodiff import Var

Residual = Callable[..., Var]


@dataclass(frozen=True)
class Defaults:
    hidden: tuple[int, ...]
    lr: float
    epochs: int
    mesh_n: int


PINN_HIDDEN = (32, 32, 32, 32)


@dataclass(frozen=True)
class ProblemSpec:
    name: str
    dim: int
    domain: tuple[float, float]
    boundary_g: Callable[[np.ndarray], np.ndarray]
    exact: Callable[[np.ndarray], np.ndarray]
    residual: Residual
    # subset of {"d1", "d2"} in 1-D, {"grad", "lap"} in 2-D
    required_derivatives: frozenset[str]
    # 1-D only: which interval ends carry Dirichlet data
    boundary: str = "both"
    defaults: Defaults = field(default=Defaults((16, 16), 0.01, 5000, 101))
    params: dict = field(default_factory=dict)

    def g(self, points) -> np.ndarray:
        return self.boundary_g(_pts(points, self.dim))

    def u_exact(self, points) -> np.ndarray:
        return self.exact(_pts(points, self.dim))


def _pts(points, dim: int) -> np.ndarray:
    X = np.asarray(points, dtype=float)
    if X.ndim == 0:
        X = X.reshape(1, 1)
    elif X.ndim == 1:
        X = X[:, None] if dim == 1 else X[None, :]
    if X.shape[1] != dim:
        raise ValueError(f"expected points of dimension {dim}, got shape {X.shape}")
    return X


def ode1_exact(X: np.ndarray) -> np.ndarray:
    x = X[:, 0]
    return x - 1.0 + 2.0 * np.exp(-x)


def ode1_residual(pt, u, du, d2u=None) -> Var:
    # u' + u - x
    return ad.lincomb((du, u), (1.0, 1.0), -pt[0])


def ode_first_order() -> ProblemSpec:
    return ProblemSpec(
        name="ode1",
        dim=1,
        domain=(0.0, 1.0),
        boundary_g=ode1_exact,
        exact=ode1_exact,
        residual=ode1_residual,
        required_derivatives=frozenset({"d1"}),
        boundary="left",
        defaults=Defaults((16, 16), 0.01, 5000, 101),
    )


def ode2_exact(X: np.ndarray) -> np.ndarray:
    x = X[:, 0]
    return (np.cos(x) + np.sin(x) + np.exp(-x)) / 2.0


def ode2_residual(pt, u, du, d2u) -> Var:
    # u'' + u - e^{-x}
    return ad.lincomb((d2u, u), (1.0, 1.0), -float(np.exp(-pt[0])))


def ode_second_order() -> ProblemSpec:
    return ProblemSpec(
        name="ode2",
        dim=1,
        domain=(0.0, 1.0),
        boundary_g=ode2_exact,
        exact=ode2_exact,
        residual=ode2_residual,
        required_derivatives=frozenset({"d2"}),
        boundary="both",
        defaults=Defaults((16, 16), 0.01, 5000, 101),
    )


def laplace_exact(X: np.ndarray) -> np.ndarray:
    return X[:, 0] * X[:, 1]


def laplace_residual(pt, u, du, lap) -> Var:
    return lap


def laplace_2d() -> ProblemSpec:
    return ProblemSpec(
        name="laplace",
        dim=2,
        domain=(-1.0, 1.0),
        boundary_g=laplace_exact,
        exact=laplace_exact,
        residual=laplace_residual,
        required_derivatives=frozenset({"lap"}),
        defaults=Defaults((8, 8), 0.01, 8000, 32),
    )


def eikonal_exact(X: np.ndarray) -> np.ndarray:
    return 1.0 - np.sqrt(X[:, 0] ** 2 + X[:, 1] ** 2)


def eikonal_2d(epsilon: float = 1e-4) -> ProblemSpec:
    eps = float(epsilon)

    def residual(pt, u, du, lap) -> Var:
        # |Du| - 1 - eps * Laplacian(u)
        return ad.lincomb((ad.norm_smooth(*du), lap), (1.0, -eps), -1.0)

    return ProblemSpec(
        name="eikonal",
        dim=2,
        domain=(-1.0, 1.0),
        boundary_g=eikonal_exact,
        exact=eikonal_exact,
        residual=residual,
        required_derivatives=frozenset({"grad", "lap"}),
        defaults=Defaults((64, 64, 64, 64), 0.001, 5000, 32),
        params={"epsilon": eps},
    )


PROBLEMS: dict[str, Callable[..., ProblemSpec]] = {
    "ode1": ode_first_order,
    "ode2": ode_second_order,
    "laplace": laplace_2d,
    "eikonal": eikonal_2d,
}


def get_problem(name: str, **kwargs) -> ProblemSpec:
    try:
        factory = PROBLEMS[name]
    except KeyError:
        raise KeyError(f"unknown problem {name!r}; choose from {sorted(PROBLEMS)}") from None
    return factory(**kwargs)


"""Error and derivative diagnostics for trained networks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import Grid1D, Grid2D
from .network import MlpParams, predict


@dataclass(frozen=True)
class DerivativeStats:
    mean: float
    variance: float
    order: int
    count: int


def mse(pred, exact) -> float:
    a = np.asarray(pred, dtype=float).ravel()
    b = np.asarray(exact, dtype=float).ravel()
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.size} vs {b.size}")
    if a.size == 0:
        raise ValueError("mse of empty vectors")
    return float(np.mean((a - b) ** 2))


def fd_derivatives_1d(values: np.ndarray, h: float, order: int) -> np.ndarray:
    """Central differences at indices 1..n-2."""
    u = np.asarray(values, dtype=float)
    if u.size < 3:
        raise ValueError("need at least 3 points for a central difference")
    if order == 1:
        return (u[2:] - u[:-2]) / (2.0 * h)
    if order == 2:
        return (u[2:] - 2.0 * u[1:-1] + u[:-2]) / h**2
    raise ValueError(f"order must be 1 or 2, got {order}")


def derivative_stats(values: np.ndarray, h: float, order: int) -> DerivativeStats:
    d = fd_derivatives_1d(values, h, order)
    return DerivativeStats(float(d.mean()), float(d.var()), order, int(d.size))


def interior_derivative_stats(params: MlpParams, grid: Grid1D | Grid2D, order: int) -> DerivativeStats:
    """Mean and population variance of an FD derivative of the network over interior points.

    1-D: u' (order 1) or u'' (order 2) by central differences at every point
    with two neighbours. 2-D: |grad u| (order 1) or the 5-point Laplacian
    (order 2) at interior grid points.
    """
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order}")
    u = predict(params, grid.coords())
    if isinstance(grid, Grid1D):
        return derivative_stats(u, grid.h, order)
    U = u.reshape(grid.nx, grid.ny)
    hx, hy = grid.hx, grid.hy
    if order == 1:
        ux = (U[2:, 1:-1] - U[:-2, 1:-1]) / (2.0 * hx)
        uy = (U[1:-1, 2:] - U[1:-1, :-2]) / (2.0 * hy)
        d = np.sqrt(ux**2 + uy**2)
    else:
        d = ((U[2:, 1:-1] - 2.0 * U[1:-1, 1:-1] + U[:-2, 1:-1]) / hx**2
             + (U[1:-1, 2:] - 2.0 * U[1:-1, 1:-1] + U[1:-1, :-2]) / hy**2)
    return DerivativeStats(float(d.mean()), float(d.var()), order, int(d.size))

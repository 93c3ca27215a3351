"""Uniform 1-D and 2-D training meshes with boundary/interior index sets.

Grids are parameterized by point count ``n`` per axis with spacing
``(b - a) / (n - 1)``, so both endpoints are mesh points.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class MeshError(ValueError):
    pass


@dataclass(frozen=True)
class Grid1D:
    a: float
    b: float
    n: int
    points: np.ndarray
    boundary_ids: tuple[int, ...]
    interior_ids: tuple[int, ...]

    dim = 1

    @property
    def h(self) -> float:
        return (self.b - self.a) / (self.n - 1)

    @property
    def size(self) -> int:
        return self.n

    def coords(self) -> np.ndarray:
        """Points as an (n, 1) array."""
        return self.points[:, None]

    def with_boundary(self, boundary_ids) -> "Grid1D":
        return Grid1D(self.a, self.b, self.n, self.points, *_partition(self.n, boundary_ids))


@dataclass(frozen=True)
class Grid2D:
    """Tensor-product grid; flat index k = i * ny + j for (x_i, y_j)."""

    xs: np.ndarray
    ys: np.ndarray
    boundary_ids: tuple[int, ...]
    interior_ids: tuple[int, ...]

    dim = 2

    @property
    def nx(self) -> int:
        return len(self.xs)

    @property
    def ny(self) -> int:
        return len(self.ys)

    @property
    def hx(self) -> float:
        return (self.xs[-1] - self.xs[0]) / (self.nx - 1)

    @property
    def hy(self) -> float:
        return (self.ys[-1] - self.ys[0]) / (self.ny - 1)

    @property
    def size(self) -> int:
        return self.nx * self.ny

    def index(self, i: int, j: int) -> int:
        return i * self.ny + j

    def coords(self) -> np.ndarray:
        """All points as a (nx*ny, 2) array in flat-index order."""
        X, Y = np.meshgrid(self.xs, self.ys, indexing="ij")
        return np.column_stack([X.ravel(), Y.ravel()])


def _partition(n: int, boundary_ids) -> tuple[tuple[int, ...], tuple[int, ...]]:
    bset = sorted(set(int(k) for k in boundary_ids))
    if bset and (bset[0] < 0 or bset[-1] >= n):
        raise MeshError(f"boundary index out of range for {n} points")
    interior = tuple(k for k in range(n) if k not in set(bset))
    return tuple(bset), interior


def _axis(a: float, b: float, n: int) -> np.ndarray:
    if n < 3:
        raise MeshError(f"need at least 3 points per axis for an interior point, got {n}")
    if not a < b:
        raise MeshError(f"need a < b, got a={a}, b={b}")
    h = (b - a) / (n - 1)
    pts = a + h * np.arange(n, dtype=float)
    pts[-1] = b
    return pts


def uniform_1d(a: float, b: float, n: int, boundary: str = "both") -> Grid1D:
    """``boundary`` is 'both', 'left' or 'right': which endpoints carry data."""
    pts = _axis(a, b, n)
    ends = {"both": (0, n - 1), "left": (0,), "right": (n - 1,)}
    try:
        bids = ends[boundary]
    except KeyError:
        raise MeshError(f"unknown boundary spec {boundary!r}") from None
    return Grid1D(float(a), float(b), int(n), pts, *_partition(n, bids))


def uniform_2d(a: float, b: float, n: int, ny: int | None = None) -> Grid2D:
    """Square grid [a, b]^2 whose whole rectangle edge is the boundary set."""
    ny = n if ny is None else ny
    xs, ys = _axis(a, b, n), _axis(a, b, ny)
    bids = [i * ny + j for i in range(n) for j in range(ny)
            if i in (0, n - 1) or j in (0, ny - 1)]
    return Grid2D(xs, ys, *_partition(n * ny, bids))


def classify(grid, boundary: str = "both"):
    """Boundary and interior index sets for a problem's boundary description.

    For 1-D grids ``boundary`` selects the constrained endpoints; 2-D grids
    always use the full rectangle edge.
    """
    if isinstance(grid, Grid1D):
        g = uniform_1d(grid.a, grid.b, grid.n, boundary)
        return g.boundary_ids, g.interior_ids
    return grid.boundary_ids, grid.interior_ids

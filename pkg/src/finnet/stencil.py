"""Finite-difference derivative estimates over a field of tape variables.

Every stencil is recorded as a single linear-combination node, so the
gradient with respect to each field entry is exactly the stencil weight
(and 0 for constant entries such as substituted boundary values).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from . import autodiff as ad
from .autodiff import Tape, Var
from .mesh import Grid1D, Grid2D


class StencilError(IndexError):
    pass


@dataclass
class Field:
    grid: Grid1D | Grid2D
    values: list[Var]

    def __post_init__(self):
        if len(self.values) != self.grid.size:
            raise ValueError(f"field has {len(self.values)} values for {self.grid.size} grid points")

    @classmethod
    def from_values(cls, tape: Tape, grid, values: Sequence[float], constant: bool = False) -> "Field":
        make = tape.const if constant else tape.var
        return cls(grid, [make(v) for v in values])

    @property
    def tape(self) -> Tape:
        return self.values[0].tape

    def substitute(self, ids: Sequence[int], values: Sequence[float]) -> "Field":
        """Copy with entries at ``ids`` replaced by constant leaves."""
        tape = self.tape
        new = list(self.values)
        for k, v in zip(ids, values, strict=True):
            new[k] = tape.const(v)
        return Field(self.grid, new)


def _check(field: Field, lo: int, hi: int, i: int) -> None:
    if field.grid.dim != 1:
        raise StencilError("1-D stencil applied to a 2-D field")
    if i + lo < 0 or i + hi >= field.grid.size:
        raise StencilError(f"stencil at index {i} reaches outside the grid")


def d1_forward(field: Field, i: int) -> Var:
    _check(field, 0, 1, i)
    h = field.grid.h
    f = field.values
    return ad.lincomb((f[i + 1], f[i]), (1.0 / h, -1.0 / h))


def d1_backward(field: Field, i: int) -> Var:
    _check(field, -1, 0, i)
    h = field.grid.h
    f = field.values
    return ad.lincomb((f[i], f[i - 1]), (1.0 / h, -1.0 / h))


def d1_central(field: Field, i: int) -> Var:
    _check(field, -1, 1, i)
    c = 0.5 / field.grid.h
    f = field.values
    return ad.lincomb((f[i + 1], f[i - 1]), (c, -c))


def d2_central(field: Field, i: int) -> Var:
    _check(field, -1, 1, i)
    c = 1.0 / field.grid.h**2
    f = field.values
    return ad.lincomb((f[i + 1], f[i], f[i - 1]), (c, -2.0 * c, c))


def d1_best(field: Field, i: int) -> Var:
    """Central where both neighbours exist, else the one-sided difference."""
    n = field.grid.size
    if 0 < i < n - 1:
        return d1_central(field, i)
    if i == 0:
        return d1_forward(field, i)
    return d1_backward(field, i)


def _check2(field: Field, i: int, j: int) -> Grid2D:
    grid = field.grid
    if grid.dim != 2:
        raise StencilError("2-D stencil applied to a 1-D field")
    if not (0 < i < grid.nx - 1 and 0 < j < grid.ny - 1):
        raise StencilError(f"point ({i}, {j}) is on the boundary")
    return grid


def grad_2d(field: Field, ij: tuple[int, int]) -> tuple[Var, Var]:
    """Central first differences along x and y."""
    i, j = ij
    grid = _check2(field, i, j)
    f = field.values
    k = grid.index(i, j)
    cx, cy = 0.5 / grid.hx, 0.5 / grid.hy
    ux = ad.lincomb((f[k + grid.ny], f[k - grid.ny]), (cx, -cx))
    uy = ad.lincomb((f[k + 1], f[k - 1]), (cy, -cy))
    return ux, uy


def laplacian_2d(field: Field, ij: tuple[int, int]) -> Var:
    i, j = ij
    grid = _check2(field, i, j)
    f = field.values
    k = grid.index(i, j)
    cx, cy = 1.0 / grid.hx**2, 1.0 / grid.hy**2
    return ad.lincomb(
        (f[k + grid.ny], f[k - grid.ny], f[k + 1], f[k - 1], f[k]),
        (cx, cx, cy, cy, -2.0 * (cx + cy)),
    )


def grad_mag_2d(field: Field, ij: tuple[int, int]) -> Var:
    """sqrt(ux^2 + uy^2 + 1e-12) from central differences."""
    ux, uy = grad_2d(field, ij)
    return ad.norm_smooth(ux, uy)

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from finnet import autodiff as ad
from finnet.autodiff import Tape
from finnet.mesh import uniform_1d, uniform_2d
from finnet.stencil import (
    Field,
    StencilError,
    d1_backward,
    d1_central,
    d1_forward,
    d2_central,
    grad_2d,
    grad_mag_2d,
    laplacian_2d,
)


def field_1d(f, a=0.0, b=1.0, n=11, constant=True):
    g = uniform_1d(a, b, n)
    return Field.from_values(Tape(), g, f(g.points), constant=constant)


def field_2d(f, n=9):
    g = uniform_2d(-1, 1, n)
    X = g.coords()
    return Field.from_values(Tape(), g, f(X[:, 0], X[:, 1]), constant=True)


def test_affine_exact_for_all_first_differences():
    fld = field_1d(lambda x: x)
    for i in range(1, 10):
        for s in (d1_forward, d1_backward, d1_central):
            assert s(fld, i).value == pytest.approx(1.0, abs=1e-13)
        assert d2_central(fld, i).value == pytest.approx(0.0, abs=1e-11)


def test_central_on_quadratic():
    fld = field_1d(lambda x: x**2, a=0.9, b=1.1, n=3)
    assert d1_central(fld, 1).value == pytest.approx(2.0, abs=1e-14)
    fld = field_1d(lambda x: x**2, n=21)
    for i in range(1, 20):
        assert d2_central(fld, i).value == pytest.approx(2.0, abs=1e-10)


@pytest.mark.parametrize("degree, stencils", [
    (1, (d1_forward, d1_backward)),
    (2, (d1_central,)),
])
def test_first_difference_exactness_classes(degree, stencils):
    for p in range(degree + 1):
        fld = field_1d(lambda x: x**p, a=-0.5, b=0.7, n=13)
        for s in stencils:
            for i in range(1, 12):
                exact = p * fld.grid.points[i] ** (p - 1) if p else 0.0
                assert s(fld, i).value == pytest.approx(exact, abs=1e-12)


@pytest.mark.parametrize("p", [0, 1, 2, 3])
def test_second_difference_exact_through_cubics(p):
    fld = field_1d(lambda x: x**p, a=-0.5, b=0.7, n=13)
    for i in range(1, 12):
        x = fld.grid.points[i]
        exact = p * (p - 1) * x ** (p - 2) if p >= 2 else 0.0
        assert d2_central(fld, i).value == pytest.approx(exact, abs=1e-10)


def test_d2_exp_at_zero():
    fld = field_1d(np.exp, a=-0.01, b=0.01, n=3)
    got = d2_central(fld, 1).value
    # Taylor: 1 + h^2/12 + O(h^4)
    assert got == pytest.approx(1.0 + 0.01**2 / 12, abs=1e-9)
    assert got == pytest.approx(1.0000083, abs=1e-7)


def error_at(stencil, h, f, df, x0=0.5):
    fld = field_1d(f, a=x0 - h, b=x0 + h, n=3)
    return abs(stencil(fld, 1).value - df(x0))


def test_sin_error_ratios():
    c1, c2 = error_at(d1_central, 0.01, np.sin, np.cos), error_at(d1_central, 0.005, np.sin, np.cos)
    f1, f2 = error_at(d1_forward, 0.01, np.sin, np.cos), error_at(d1_forward, 0.005, np.sin, np.cos)
    assert c1 / c2 == pytest.approx(4.0, rel=0.02)
    assert f1 / f2 == pytest.approx(2.0, rel=0.02)


@pytest.mark.parametrize("stencil, order, need", [
    (d1_forward, 1, 0.9), (d1_backward, 1, 0.9), (d1_central, 1, 1.9), (d2_central, 2, 1.9),
])
@pytest.mark.parametrize("f, derivs", [
    (np.sin, (np.cos, lambda x: -np.sin(x))),
    (np.exp, (np.exp, np.exp)),
    (np.tanh, (lambda x: 1 - np.tanh(x) ** 2, lambda x: -2 * np.tanh(x) * (1 - np.tanh(x) ** 2))),
])
def test_convergence_orders(stencil, order, need, f, derivs):
    hs = np.array([0.1, 0.05, 0.025])
    errs = [error_at(stencil, h, f, derivs[order - 1]) for h in hs]
    slope = np.polyfit(np.log(hs), np.log(errs), 1)[0]
    assert slope >= need


@given(st.floats(-3, 3), st.floats(-3, 3), st.integers(1, 9))
def test_linearity(alpha, beta, i):
    g = uniform_1d(0, 1, 11)
    f, h = np.sin(3 * g.points), np.exp(g.points)
    t = Tape()
    F, H = Field.from_values(t, g, f), Field.from_values(t, g, h)
    C = Field.from_values(t, g, alpha * f + beta * h)
    for s in (d1_forward, d1_backward, d1_central, d2_central):
        combo = alpha * s(F, i).value + beta * s(H, i).value
        assert abs(s(C, i).value - combo) < 1e-12


def test_gradient_flow_coefficients():
    g = uniform_1d(0, 1, 6)
    t = Tape()
    fld = Field.from_values(t, g, g.points ** 2).substitute([0], [0.0])
    h = g.h
    cases = [
        (d1_central(fld, 1), {0: 0.0, 2: 0.5 / h}),
        (d2_central(fld, 1), {0: 0.0, 1: -2 / h**2, 2: 1 / h**2}),
        (d1_backward(fld, 1), {0: 0.0, 1: 1 / h}),
        (d1_forward(fld, 2), {2: -1 / h, 3: 1 / h}),
    ]
    for out, coeffs in cases:
        grads = ad.backward(t, out)
        for k, c in coeffs.items():
            assert grads[fld.values[k].node_id] == c


def test_out_of_range():
    fld = field_1d(lambda x: x)
    with pytest.raises(StencilError):
        d1_central(fld, 0)
    with pytest.raises(StencilError):
        d1_forward(fld, 10)
    with pytest.raises(StencilError):
        d1_backward(fld, 0)
    with pytest.raises(StencilError):
        d2_central(fld, 10)


def test_laplacian_bilinear_and_quadratic():
    xy = field_2d(lambda x, y: x * y)
    sq = field_2d(lambda x, y: x**2 + y**2)
    for i in range(1, 8):
        for j in range(1, 8):
            assert laplacian_2d(xy, (i, j)).value == pytest.approx(0.0, abs=1e-12)
            assert laplacian_2d(sq, (i, j)).value == pytest.approx(4.0, abs=1e-12)


def test_grad_mag_affine():
    fld = field_2d(lambda x, y: x + 2 * y)
    for ij in ((1, 1), (4, 5), (7, 7)):
        ux, uy = grad_2d(fld, ij)
        assert (ux.value, uy.value) == pytest.approx((1.0, 2.0), abs=1e-13)
        assert grad_mag_2d(fld, ij).value == pytest.approx(math.sqrt(5), abs=1e-6)


def test_2d_boundary_point_rejected():
    fld = field_2d(lambda x, y: x)
    with pytest.raises(StencilError):
        laplacian_2d(fld, (0, 3))
    with pytest.raises(StencilError):
        grad_mag_2d(fld, (3, 8))
    with pytest.raises(StencilError):
        d1_central(fld, 3)

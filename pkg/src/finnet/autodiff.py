"""Scalar reverse-mode tape and second-order forward jets.

A :class:`Tape` records every scalar operation as a node holding its parent
ids and the local partial derivatives. :func:`backward` sweeps the nodes in
reverse creation order, which is a valid reverse topological order because
parents always precede their children.

:class:`Jet2` carries a truncated Taylor expansion (value, first, second
derivative with respect to one scalar input) whose three coefficients are
tape variables, so input derivatives and weight gradients compose.
"""

from __future__ import annotations

import math

import numpy as np
from typing import Iterable, Sequence, Union

SMOOTH_ABS_FLOOR = 1e-12

Real = Union[int, float]


class EvaluationError(ArithmeticError):
    """Raised on a domain violation such as division by zero."""


class Tape:
    """Append-only list of scalar nodes."""

    __slots__ = ("parents", "partials", "values", "constants")

    def __init__(self) -> None:
        self.parents: list[tuple[int, ...]] = []
        self.partials: list[tuple[float, ...]] = []
        self.values: list[float] = []
        self.constants: set[int] = set()

    def __len__(self) -> int:
        return len(self.values)

    def clear(self) -> None:
        self.parents.clear()
        self.partials.clear()
        self.values.clear()
        self.constants.clear()

    def push(self, value: float, parents: tuple[int, ...], partials: tuple[float, ...]) -> "Var":
        idx = len(self.values)
        self.values.append(value)
        self.parents.append(parents)
        self.partials.append(partials)
        return Var(self, idx, value)

    def var(self, value: Real) -> "Var":
        return self.push(float(value), (), ())

    def const(self, value: Real) -> "Var":
        """A leaf excluded from differentiation; its gradient is always 0."""
        v = self.push(float(value), (), ())
        self.constants.add(v.node_id)
        return v


class Var:
    __slots__ = ("tape", "node_id", "value")

    def __init__(self, tape: Tape, node_id: int, value: float) -> None:
        self.tape = tape
        self.node_id = node_id
        self.value = value

    def __repr__(self) -> str:
        return f"Var(id={self.node_id}, value={self.value!r})"

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return add(neg(self), other)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(self, other)

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return mul(reciprocal(self), other)

    def __neg__(self):
        return neg(self)


def var(tape: Tape, value: Real) -> Var:
    return tape.var(value)


def _same_tape(a: Var, b: Var) -> None:
    if a.tape is not b.tape:
        raise ValueError("operands belong to different tapes")


def add(a: Var, b: Var | Real) -> Var:
    if isinstance(b, Var):
        _same_tape(a, b)
        return a.tape.push(a.value + b.value, (a.node_id, b.node_id), (1.0, 1.0))
    return a.tape.push(a.value + b, (a.node_id,), (1.0,))


def sub(a: Var, b: Var | Real) -> Var:
    if isinstance(b, Var):
        _same_tape(a, b)
        return a.tape.push(a.value - b.value, (a.node_id, b.node_id), (1.0, -1.0))
    return a.tape.push(a.value - b, (a.node_id,), (1.0,))


def mul(a: Var, b: Var | Real) -> Var:
    if isinstance(b, Var):
        _same_tape(a, b)
        return a.tape.push(a.value * b.value, (a.node_id, b.node_id), (b.value, a.value))
    b = float(b)
    return a.tape.push(a.value * b, (a.node_id,), (b,))


def div(a: Var, b: Var | Real) -> Var:
    if isinstance(b, Var):
        _same_tape(a, b)
        if b.value == 0.0:
            raise EvaluationError("division by zero")
        inv = 1.0 / b.value
        q = a.value * inv
        return a.tape.push(q, (a.node_id, b.node_id), (inv, -q * inv))
    if b == 0:
        raise EvaluationError("division by zero")
    inv = 1.0 / b
    return a.tape.push(a.value * inv, (a.node_id,), (inv,))


def reciprocal(a: Var) -> Var:
    if a.value == 0.0:
        raise EvaluationError("division by zero")
    r = 1.0 / a.value
    return a.tape.push(r, (a.node_id,), (-r * r,))


def neg(a: Var) -> Var:
    return a.tape.push(-a.value, (a.node_id,), (-1.0,))


def square(a: Var) -> Var:
    return a.tape.push(a.value * a.value, (a.node_id,), (2.0 * a.value,))


def tanh(a: Var) -> Var:
    # numpy's tanh so tape values match batched evaluation bit for bit
    t = float(np.tanh(a.value))
    return a.tape.push(t, (a.node_id,), (1.0 - t * t,))


def exp(a: Var) -> Var:
    e = float(np.exp(a.value))
    return a.tape.push(e, (a.node_id,), (e,))


def sqrt(a: Var) -> Var:
    if a.value < 0.0:
        raise EvaluationError(f"sqrt of negative value {a.value!r}")
    s = math.sqrt(a.value)
    return a.tape.push(s, (a.node_id,), (0.5 / s if s > 0.0 else math.inf,))


def abs_smooth(a: Var) -> Var:
    """sqrt(a^2 + 1e-12), a differentiable stand-in for |a|."""
    s = math.sqrt(a.value * a.value + SMOOTH_ABS_FLOOR)
    return a.tape.push(s, (a.node_id,), (a.value / s,))


def norm_smooth(a: Var, b: Var) -> Var:
    """sqrt(a^2 + b^2 + 1e-12) as a single node."""
    _same_tape(a, b)
    s = math.sqrt(a.value * a.value + b.value * b.value + SMOOTH_ABS_FLOOR)
    return a.tape.push(s, (a.node_id, b.node_id), (a.value / s, b.value / s))


def lincomb(terms: Sequence[Var], coeffs: Sequence[float], offset: float = 0.0) -> Var:
    """offset + sum(c * t) recorded as one node."""
    if not terms:
        raise ValueError("lincomb needs at least one term")
    tape = terms[0].tape
    total = offset
    for t, c in zip(terms, coeffs, strict=True):
        if t.tape is not tape:
            raise ValueError("operands belong to different tapes")
        total += c * t.value
    return tape.push(total, tuple(t.node_id for t in terms), tuple(float(c) for c in coeffs))


def mean_square(terms: Sequence[Var]) -> Var:
    """(1/n) sum t^2 as one node."""
    if not terms:
        raise ValueError("mean_square of an empty sequence")
    tape = terms[0].tape
    n = len(terms)
    total = 0.0
    for t in terms:
        if t.tape is not tape:
            raise ValueError("operands belong to different tapes")
        total += t.value * t.value
    return tape.push(total / n, tuple(t.node_id for t in terms), tuple(2.0 * t.value / n for t in terms))


def unary(a: Var, kind: str) -> Var:
    try:
        fn = _UNARY[kind]
    except KeyError:
        raise ValueError(f"unknown unary op {kind!r}") from None
    return fn(a)


def arith(a: Var, b: Var | Real, kind: str) -> Var:
    try:
        fn = _BINARY[kind]
    except KeyError:
        raise ValueError(f"unknown binary op {kind!r}") from None
    return fn(a, b)


_UNARY = {
    "tanh": tanh,
    "exp": exp,
    "sqrt": sqrt,
    "square": square,
    "neg": neg,
    "abs_smooth": abs_smooth,
}
_BINARY = {"add": add, "sub": sub, "mul": mul, "div": div}


def backward(tape: Tape, root: Var) -> list[float]:
    """Gradient of ``root`` w.r.t. every node, indexed by node id.

    Nodes the root does not depend on, and constant leaves, get 0.
    """
    if root.tape is not tape:
        raise ValueError("root does not belong to this tape")
    grads = [0.0] * len(tape.values)
    grads[root.node_id] = 1.0
    parents = tape.parents
    partials = tape.partials
    for i in range(root.node_id, -1, -1):
        g = grads[i]
        if g == 0.0:
            continue
        for p, d in zip(parents[i], partials[i]):
            grads[p] += g * d
    for c in tape.constants:
        grads[c] = 0.0
    return grads


def gradients(tape: Tape, root: Var, wrt: Iterable[Var]) -> list[float]:
    grads = backward(tape, root)
    return [grads[v.node_id] for v in wrt]


class Jet2:
    """Second-order jet (u, du, d2u) with tape-variable coefficients."""

    __slots__ = ("u", "du", "d2u")

    def __init__(self, u: Var, du: Var, d2u: Var) -> None:
        _same_tape(u, du)
        _same_tape(u, d2u)
        self.u = u
        self.du = du
        self.d2u = d2u

    @property
    def tape(self) -> Tape:
        return self.u.tape

    def values(self) -> tuple[float, float, float]:
        return (self.u.value, self.du.value, self.d2u.value)

    def __repr__(self) -> str:
        return "Jet2(%r, %r, %r)" % self.values()

    def __add__(self, other):
        return jet_add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return jet_sub(self, other)

    def __rsub__(self, other):
        return jet_add(jet_neg(self), other)

    def __mul__(self, other):
        return jet_mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return jet_div(self, other)

    def __neg__(self):
        return jet_neg(self)


def jet_lift(tape: Tape, x: Real) -> Jet2:
    """Identity lift of input x: (x, 1, 0), all constant leaves."""
    return Jet2(tape.const(x), tape.const(1.0), tape.const(0.0))


def jet_const(tape: Tape, c: Var | Real) -> Jet2:
    u = c if isinstance(c, Var) else tape.const(c)
    zero = tape.const(0.0)
    return Jet2(u, zero, zero)


def jet_add(a: Jet2, b: Jet2 | Var | Real) -> Jet2:
    if isinstance(b, Jet2):
        return Jet2(a.u + b.u, a.du + b.du, a.d2u + b.d2u)
    return Jet2(a.u + b, a.du, a.d2u)


def jet_sub(a: Jet2, b: Jet2 | Var | Real) -> Jet2:
    if isinstance(b, Jet2):
        return Jet2(a.u - b.u, a.du - b.du, a.d2u - b.d2u)
    return Jet2(a.u - b, a.du, a.d2u)


def jet_neg(a: Jet2) -> Jet2:
    return Jet2(-a.u, -a.du, -a.d2u)


def jet_mul(a: Jet2, b: Jet2 | Var | Real) -> Jet2:
    if isinstance(b, Jet2):
        # (ab)'' = a''b + 2a'b' + ab''
        return Jet2(
            a.u * b.u,
            a.du * b.u + a.u * b.du,
            a.d2u * b.u + 2.0 * (a.du * b.du) + a.u * b.d2u,
        )
    return Jet2(a.u * b, a.du * b, a.d2u * b)


def jet_tanh(a: Jet2) -> Jet2:
    t = tanh(a.u)
    s1 = 1.0 - square(t)  # tanh'
    s2 = -2.0 * (t * s1)  # tanh''
    du = s1 * a.du
    d2u = s1 * a.d2u + s2 * square(a.du)
    return Jet2(t, du, d2u)


def jet_exp(a: Jet2) -> Jet2:
    e = exp(a.u)
    return Jet2(e, e * a.du, e * (a.d2u + square(a.du)))


def jet_square(a: Jet2) -> Jet2:
    return jet_mul(a, a)


def jet_sqrt(a: Jet2) -> Jet2:
    s = sqrt(a.u)
    inv = reciprocal(s)
    # (√u)' = u'/(2√u); (√u)'' = u''/(2√u) − u'^2/(4 u^{3/2})
    du = 0.5 * (a.du * inv)
    d2u = 0.5 * (a.d2u * inv) - 0.25 * (square(a.du) * inv * reciprocal(a.u))
    return Jet2(s, du, d2u)


def jet_abs_smooth(a: Jet2) -> Jet2:
    return jet_sqrt(jet_add(jet_square(a), SMOOTH_ABS_FLOOR))


def jet_reciprocal(a: Jet2) -> Jet2:
    r = reciprocal(a.u)
    r2 = square(r)
    du = -(a.du * r2)
    d2u = -(a.d2u * r2) + 2.0 * (square(a.du) * r2 * r)
    return Jet2(r, du, d2u)


def jet_div(a: Jet2, b: Jet2 | Var | Real) -> Jet2:
    if isinstance(b, Jet2):
        return jet_mul(a, jet_reciprocal(b))
    return Jet2(a.u / b, a.du / b, a.d2u / b)


def jet_unary(a: Jet2, kind: str) -> Jet2:
    try:
        fn = _JET_UNARY[kind]
    except KeyError:
        raise ValueError(f"unknown unary op {kind!r}") from None
    return fn(a)


def jet_arith(a: Jet2, b: Jet2 | Var | Real, kind: str) -> Jet2:
    try:
        fn = _JET_BINARY[kind]
    except KeyError:
        raise ValueError(f"unknown binary op {kind!r}") from None
    return fn(a, b)


_JET_UNARY = {
    "tanh": jet_tanh,
    "exp": jet_exp,
    "sqrt": jet_sqrt,
    "square": jet_square,
    "neg": jet_neg,
    "abs_smooth": jet_abs_smooth,
}
_JET_BINARY = {"add": jet_add, "sub": jet_sub, "mul": jet_mul, "div": jet_div}

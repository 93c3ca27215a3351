"""Fully connected tanh network used as the surrogate solution.

Three evaluation routes share one parameter layout:

* tape route (:func:`forward`, :func:`forward_jet`): scalar tape variables,
  used for gradient checks and as the reference for the batched code;
* fixed-order batched route (:func:`predict`): numpy, summation order identical
  to the tape route so the two agree bit for bit;
* fast batched route (:func:`batch_forward`, :func:`batch_backward`,
  :func:`jet_forward`, :func:`jet_backward`): BLAS matmuls with hand-written
  vector-Jacobian products, used inside the training loops.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import autodiff as ad
from .autodiff import Jet2, Tape, Var

CHECKPOINT_MAGIC = "finnet-params"
CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class MlpSpec:
    input_dim: int
    hidden_layers: tuple[int, ...]

    def __post_init__(self):
        if self.input_dim not in (1, 2):
            raise ValueError(f"input_dim must be 1 or 2, got {self.input_dim}")
        if not self.hidden_layers:
            raise ValueError("hidden_layers must be non-empty")
        if any(int(w) < 1 for w in self.hidden_layers):
            raise ValueError(f"layer widths must be >= 1, got {self.hidden_layers}")
        object.__setattr__(self, "hidden_layers", tuple(int(w) for w in self.hidden_layers))

    @property
    def widths(self) -> tuple[int, ...]:
        return (self.input_dim, *self.hidden_layers, 1)


@dataclass
class MlpParams:
    """Per-layer weights (out x in) and biases (out,)."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]

    def __post_init__(self):
        if len(self.weights) != len(self.biases):
            raise ValueError("weights and biases differ in layer count")
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.ndim != 2 or b.shape != (w.shape[0],):
                raise ValueError(f"layer {i}: weight {w.shape} incompatible with bias {b.shape}")
            if i and w.shape[1] != self.weights[i - 1].shape[0]:
                raise ValueError(f"layer {i}: input width {w.shape[1]} != previous output {self.weights[i - 1].shape[0]}")

    @property
    def input_dim(self) -> int:
        return self.weights[0].shape[1]

    @property
    def n_layers(self) -> int:
        return len(self.weights)

    def arrays(self) -> list[np.ndarray]:
        """Flat list [W0, b0, W1, b1, ...]; views, not copies."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out += [w, b]
        return out

    def copy(self) -> "MlpParams":
        return MlpParams([w.copy() for w in self.weights], [b.copy() for b in self.biases])

    def zeros_like(self) -> "MlpParams":
        return MlpParams([np.zeros_like(w) for w in self.weights], [np.zeros_like(b) for b in self.biases])

    def n_params(self) -> int:
        return sum(a.size for a in self.arrays())

    def bitwise_equal(self, other: "MlpParams") -> bool:
        mine, theirs = self.arrays(), other.arrays()
        return len(mine) == len(theirs) and all(
            a.shape == b.shape and a.tobytes() == b.tobytes() for a, b in zip(mine, theirs)
        )


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based Philox stream; portable across platforms."""
    return np.random.Generator(np.random.Philox(int(seed)))


def init(spec: MlpSpec, seed: int) -> MlpParams:
    """Glorot-uniform weights, zero biases."""
    rng = make_rng(seed)
    weights, biases = [], []
    widths = spec.widths
    for fan_in, fan_out in zip(widths[:-1], widths[1:]):
        bound = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-bound, bound, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return MlpParams(weights, biases)


# ---------------------------------------------------------------------------
# tape route


class TapeParams:
    """Network parameters lifted onto a tape as leaf variables."""

    def __init__(self, tape: Tape, params: MlpParams):
        self.tape = tape
        self.weights = [[[tape.var(x) for x in row] for row in w] for w in params.weights]
        self.biases = [[tape.var(x) for x in b] for b in params.biases]

    @property
    def input_dim(self) -> int:
        return len(self.weights[0][0])

    def leaves(self) -> list[Var]:
        out = []
        for w, b in zip(self.weights, self.biases):
            out += [v for row in w for v in row]
            out += b
        return out

    def gradient(self, grads: Sequence[float]) -> MlpParams:
        """Pack a tape gradient list into the MlpParams layout."""
        return MlpParams(
            [np.array([[grads[v.node_id] for v in row] for row in w]) for w in self.weights],
            [np.array([grads[v.node_id] for v in b]) for b in self.biases],
        )


def _neuron(tape: Tape, ws: list[Var], xs: Sequence[Var | float], b: Var) -> Var:
    # w0*x0 + w1*x1 + ... then + b; same order as _dense_ordered
    z = 0.0
    parents, partials = [], []
    for k, (w, x) in enumerate(zip(ws, xs)):
        xv = x.value if isinstance(x, Var) else float(x)
        z = w.value * xv if k == 0 else z + w.value * xv
        parents.append(w.node_id)
        partials.append(xv)
        if isinstance(x, Var):
            parents.append(x.node_id)
            partials.append(w.value)
    z = z + b.value
    parents.append(b.node_id)
    partials.append(1.0)
    return tape.push(z, tuple(parents), tuple(partials))


def forward(tparams: TapeParams, x: Sequence[Var | float]) -> Var:
    if len(x) != tparams.input_dim:
        raise ValueError(f"point has dimension {len(x)}, network expects {tparams.input_dim}")
    tape = tparams.tape
    for xi in x:
        if isinstance(xi, Var) and xi.tape is not tape:
            raise ValueError("input lives on a different tape")
    a: Sequence[Var | float] = x
    last = len(tparams.weights) - 1
    for layer, (w, b) in enumerate(zip(tparams.weights, tparams.biases)):
        z = [_neuron(tape, w[j], a, b[j]) for j in range(len(w))]
        a = z if layer == last else [ad.tanh(v) for v in z]
    return a[0]


def forward_jet(tparams: TapeParams, x: Sequence[float] | float, axis: int = 0,
                frozen_other: float | None = None) -> Jet2:
    """Value and first two derivatives along ``axis`` at a point.

    ``x`` is either a full point or, for 2-D inputs, the coordinate along
    ``axis`` with ``frozen_other`` giving the remaining one.
    """
    dim = tparams.input_dim
    if axis not in range(dim):
        raise ValueError(f"axis {axis} invalid for input_dim {dim}")
    if np.isscalar(x):
        if dim == 1:
            point = [float(x)]
        else:
            if frozen_other is None:
                raise ValueError("frozen_other required for 2-D input")
            point = [float(frozen_other), float(frozen_other)]
            point[axis] = float(x)
    else:
        point = [float(v) for v in x]
        if len(point) != dim:
            raise ValueError(f"point has dimension {len(point)}, network expects {dim}")
    tape = tparams.tape
    a = [ad.jet_lift(tape, v) if k == axis else ad.jet_const(tape, v) for k, v in enumerate(point)]
    last = len(tparams.weights) - 1
    for layer, (w, b) in enumerate(zip(tparams.weights, tparams.biases)):
        z = []
        for j in range(len(w)):
            acc = a[0] * w[j][0]
            for k in range(1, len(a)):
                acc = acc + a[k] * w[j][k]
            z.append(acc + b[j])
        a = z if layer == last else [ad.jet_tanh(v) for v in z]
    return a[0]


# ---------------------------------------------------------------------------
# batched routes


def _as_points(params: MlpParams, points) -> np.ndarray:
    X = np.asarray(points, dtype=float)
    if X.ndim == 1:
        X = X[:, None] if params.input_dim == 1 else X[None, :]
    if X.ndim != 2 or X.shape[1] != params.input_dim:
        raise ValueError(f"points of shape {np.shape(points)} do not match input_dim {params.input_dim}")
    return X


def _dense_ordered(A: np.ndarray, W: np.ndarray, b: np.ndarray) -> np.ndarray:
    z = A[:, 0:1] * W[:, 0]
    for k in range(1, W.shape[1]):
        z = z + A[:, k:k + 1] * W[:, k]
    return z + b


def predict(params: MlpParams, points) -> np.ndarray:
    """Evaluate at arbitrary points; no tape, no mesh."""
    A = _as_points(params, points)
    last = params.n_layers - 1
    for layer, (w, b) in enumerate(zip(params.weights, params.biases)):
        Z = _dense_ordered(A, w, b)
        A = Z if layer == last else np.tanh(Z)
    return A[:, 0]


def batch_forward(params: MlpParams, points) -> tuple[np.ndarray, list[np.ndarray]]:
    """Fast forward pass; returns outputs and the activations needed by backward."""
    A = _as_points(params, points)
    acts = [A]
    last = params.n_layers - 1
    for layer, (w, b) in enumerate(zip(params.weights, params.biases)):
        Z = A @ w.T + b
        A = Z if layer == last else np.tanh(Z)
        acts.append(A)
    return A[:, 0], acts


def batch_backward(params: MlpParams, acts: list[np.ndarray], grad_out: np.ndarray) -> MlpParams:
    """Weight gradient of sum(grad_out * outputs)."""
    G = np.asarray(grad_out, dtype=float)[:, None]
    gw, gb = [], []
    for layer in range(params.n_layers - 1, -1, -1):
        A_in = acts[layer]
        gw.append(G.T @ A_in)
        gb.append(G.sum(axis=0))
        if layer:
            G = (G @ params.weights[layer]) * (1.0 - acts[layer] ** 2)
    return MlpParams(gw[::-1], gb[::-1])


@dataclass
class JetCache:
    inputs: list[tuple[np.ndarray, np.ndarray, np.ndarray]]
    pre: list[tuple[np.ndarray, np.ndarray, np.ndarray]]


def jet_forward(params: MlpParams, points, axis: int = 0):
    """Batched (v, dv/dx_axis, d2v/dx_axis^2) at each point.

    Returns ``(u, du, d2u, cache)`` with 1-D arrays over points.
    """
    X = _as_points(params, points)
    if axis not in range(params.input_dim):
        raise ValueError(f"axis {axis} invalid for input_dim {params.input_dim}")
    dX = np.zeros_like(X)
    dX[:, axis] = 1.0
    a, da, d2a = X, dX, np.zeros_like(X)
    cache = JetCache([], [])
    last = params.n_layers - 1
    for layer, (w, b) in enumerate(zip(params.weights, params.biases)):
        cache.inputs.append((a, da, d2a))
        z, dz, d2z = a @ w.T + b, da @ w.T, d2a @ w.T
        cache.pre.append((z, dz, d2z))
        if layer == last:
            a, da, d2a = z, dz, d2z
        else:
            s = np.tanh(z)
            s1 = 1.0 - s * s
            s2 = -2.0 * s * s1
            a, da, d2a = s, s1 * dz, s1 * d2z + s2 * dz * dz
    return a[:, 0], da[:, 0], d2a[:, 0], cache


def jet_backward(params: MlpParams, cache: JetCache, g_u, g_du, g_d2u) -> MlpParams:
    """Weight gradient of sum(g_u*u + g_du*du + g_d2u*d2u)."""
    gz = np.asarray(g_u, dtype=float)[:, None]
    gdz = np.asarray(g_du, dtype=float)[:, None]
    gd2z = np.asarray(g_d2u, dtype=float)[:, None]
    gw, gb = [], []
    for layer in range(params.n_layers - 1, -1, -1):
        a, da, d2a = cache.inputs[layer]
        w = params.weights[layer]
        gw.append(gz.T @ a + gdz.T @ da + gd2z.T @ d2a)
        gb.append(gz.sum(axis=0))
        if not layer:
            break
        ga, gda, gd2a = gz @ w, gdz @ w, gd2z @ w
        z, dz, d2z = cache.pre[layer - 1]
        s = np.tanh(z)
        s1 = 1.0 - s * s
        s2 = -2.0 * s * s1
        s3 = -2.0 * s1 * s1 - 2.0 * s * s2
        gz = ga * s1 + gda * s2 * dz + gd2a * (s2 * d2z + s3 * dz * dz)
        gdz = gda * s1 + 2.0 * gd2a * s2 * dz
        gd2z = gd2a * s1
    return MlpParams(gw[::-1], gb[::-1])


# ---------------------------------------------------------------------------
# checkpoint file
#
#   finnet-params 1
#   layers <L>
#   layer <i> <out> <in>
#   <out lines of <in> weights, row-major>
#   <one line of <out> biases>
#   ... repeated per layer
#
# Reals are written with 17 significant digits.


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def save_params(params: MlpParams, path: str | Path) -> None:
    lines = [f"{CHECKPOINT_MAGIC} {CHECKPOINT_VERSION}", f"layers {params.n_layers}"]
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        lines.append(f"layer {i} {w.shape[0]} {w.shape[1]}")
        lines += [" ".join(_fmt(x) for x in row) for row in w]
        lines.append(" ".join(_fmt(x) for x in b))
    Path(path).write_text("\n".join(lines) + "\n")


def load_params(path: str | Path) -> MlpParams:
    lines = Path(path).read_text().splitlines()
    head = lines[0].split()
    if len(head) != 2 or head[0] != CHECKPOINT_MAGIC:
        raise ValueError(f"{path}: not a parameter checkpoint")
    if int(head[1]) != CHECKPOINT_VERSION:
        raise ValueError(f"{path}: unsupported checkpoint version {head[1]}")
    n_layers = int(lines[1].split()[1])
    pos = 2
    weights, biases = [], []
    for i in range(n_layers):
        tag, idx, n_out, n_in = lines[pos].split()
        if tag != "layer" or int(idx) != i:
            raise ValueError(f"{path}:{pos + 1}: expected header for layer {i}")
        n_out, n_in = int(n_out), int(n_in)
        rows = [[float(t) for t in lines[pos + 1 + r].split()] for r in range(n_out)]
        w = np.array(rows, dtype=float).reshape(n_out, n_in)
        b = np.array([float(t) for t in lines[pos + 1 + n_out].split()], dtype=float)
        weights.append(w)
        biases.append(b)
        pos += n_out + 2
    return MlpParams(weights, biases)

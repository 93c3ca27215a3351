"""Adam with bias correction, one full-batch step per epoch."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .network import MlpParams


class NonFiniteGradientError(FloatingPointError):
    pass


@dataclass
class AdamState:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: list[np.ndarray] | None = field(default=None, repr=False)
    v: list[np.ndarray] | None = field(default=None, repr=False)

    def __post_init__(self):
        if not self.lr > 0:
            raise ValueError(f"lr must be positive, got {self.lr}")
        if not (0 < self.beta1 < 1 and 0 < self.beta2 < 1):
            raise ValueError("beta1 and beta2 must lie in (0, 1)")
        if not self.eps > 0:
            raise ValueError("eps must be positive")


def _param_names(params: MlpParams) -> list[str]:
    names = []
    for i in range(params.n_layers):
        names += [f"layer{i}.weight", f"layer{i}.bias"]
    return names


def step(state: AdamState, params: MlpParams, grads: MlpParams) -> tuple[MlpParams, AdamState]:
    """Return updated copies of params and state; inputs are not modified."""
    p_arrays, g_arrays = params.arrays(), grads.arrays()
    if len(p_arrays) != len(g_arrays) or any(p.shape != g.shape for p, g in zip(p_arrays, g_arrays)):
        raise ValueError("gradient shapes do not match parameter shapes")
    for name, g in zip(_param_names(params), g_arrays):
        if not np.all(np.isfinite(g)):
            raise NonFiniteGradientError(f"non-finite gradient in {name}")

    m = state.m if state.m is not None else [np.zeros_like(p) for p in p_arrays]
    v = state.v if state.v is not None else [np.zeros_like(p) for p in p_arrays]
    t = state.t + 1
    b1, b2 = state.beta1, state.beta2
    c1 = 1.0 - b1**t
    c2 = 1.0 - b2**t

    new_p, new_m, new_v = [], [], []
    for p, g, mi, vi in zip(p_arrays, g_arrays, m, v):
        mi = b1 * mi + (1.0 - b1) * g
        vi = b2 * vi + (1.0 - b2) * g * g
        m_hat = mi / c1
        v_hat = vi / c2
        new_p.append(p - state.lr * m_hat / (np.sqrt(v_hat) + state.eps))
        new_m.append(mi)
        new_v.append(vi)

    out = MlpParams(new_p[0::2], new_p[1::2])
    new_state = AdamState(state.lr, b1, b2, state.eps, t, new_m, new_v)
    return out, new_state

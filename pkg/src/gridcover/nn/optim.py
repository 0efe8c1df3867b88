"""Adam with bias correction."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from gridcover.core.config import OptimizerConfig
from gridcover.core.exceptions import DivergenceError
from gridcover.nn.dense import DenseNet, Gradients


@dataclass
class AdamState:
    """First/second moments shaped like the owning net's parameters."""

    m: list[np.ndarray]
    v: list[np.ndarray]
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = field(default=0)

    @classmethod
    def for_net(cls, net: DenseNet, config: OptimizerConfig | None = None) -> AdamState:
        cfg = config or OptimizerConfig()
        params = net.parameters()
        return cls(
            m=[np.zeros_like(p) for p in params],
            v=[np.zeros_like(p) for p in params],
            lr=cfg.lr,
            beta1=cfg.beta1,
            beta2=cfg.beta2,
            eps=cfg.eps,
        )


def adam_step(net: DenseNet, grads: Gradients, state: AdamState) -> tuple[DenseNet, AdamState]:
    """One in-place Adam update of ``net``; returns the same objects.

    Raises:
        DivergenceError: any gradient entry is NaN or Inf (nothing is updated).
    """
    if not grads.is_finite():
        raise DivergenceError("Non-finite gradient passed to adam_step")
    state.step += 1
    b1, b2 = state.beta1, state.beta2
    correction1 = 1.0 - b1**state.step
    correction2 = 1.0 - b2**state.step
    params = zip(net.parameters(), grads.parameters(), state.m, state.v, strict=True)
    for param, grad, m, v in params:
        m *= b1
        m += (1.0 - b1) * grad
        v *= b2
        v += (1.0 - b2) * grad * grad
        m_hat = m / correction1
        v_hat = v / correction2
        param -= (state.lr * m_hat / (np.sqrt(v_hat) + state.eps)).astype(param.dtype)
    if not net.is_finite():
        raise DivergenceError("Parameters became non-finite after adam_step")
    return net, state

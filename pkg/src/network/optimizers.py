from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np
from numpy.typing import NDArray

from network.config import OptimizerSpec

Params = List[NDArray[np.float64]]


@dataclass
class OptimizerState:
    """Step counter and per-parameter moment estimates (empty for SGD)."""
    step: int = 0
    first_moments: Params = field(default_factory=list)
    second_moments: Params = field(default_factory=list)


class BaseOptimizer(ABC):
    """Abstract base class for parameter update rules."""

    def __init__(self, spec: OptimizerSpec):
        self.spec = spec

    def init_state(self, params: Params) -> OptimizerState:
        return OptimizerState()

    @abstractmethod
    def step(self, params: Params, grads: Params, state: OptimizerState) -> Tuple[Params, OptimizerState]:
        """
        Apply one update.

        Args:
            params: Current parameters (not modified)
            grads: Gradients with matching shapes
            state: Optimizer state from the previous step

        Returns:
            Updated parameters and state
        """
        pass


class SGD(BaseOptimizer):
    """``p <- p - lr * g``."""

    def step(self, params: Params, grads: Params, state: OptimizerState) -> Tuple[Params, OptimizerState]:
        lr = self.spec.lr
        updated = [p - lr * g for p, g in zip(params, grads)]
        return updated, OptimizerState(step=state.step + 1)


class Adam(BaseOptimizer):
    """Adam with bias-corrected first and second moment estimates."""

    def init_state(self, params: Params) -> OptimizerState:
        return OptimizerState(
            step=0,
            first_moments=[np.zeros_like(p) for p in params],
            second_moments=[np.zeros_like(p) for p in params],
        )

    def step(self, params: Params, grads: Params, state: OptimizerState) -> Tuple[Params, OptimizerState]:
        spec = self.spec
        t = state.step + 1
        bc1 = 1.0 - spec.beta1 ** t
        bc2 = 1.0 - spec.beta2 ** t

        updated, first, second = [], [], []
        for p, g, m, v in zip(params, grads, state.first_moments, state.second_moments):
            m = spec.beta1 * m + (1.0 - spec.beta1) * g
            v = spec.beta2 * v + (1.0 - spec.beta2) * (g * g)
            updated.append(p - spec.lr * (m / bc1) / (np.sqrt(v / bc2) + spec.eps))
            first.append(m)
            second.append(v)
        return updated, OptimizerState(step=t, first_moments=first, second_moments=second)


def build_optimizer(spec: OptimizerSpec) -> BaseOptimizer:
    return Adam(spec) if spec.name == "adam" else SGD(spec)


def optimizer_step(params: Params, grads: Params, state: OptimizerState,
                   spec: OptimizerSpec) -> Tuple[Params, OptimizerState]:
    """
    One optimizer update without mutating the inputs.

    Args:
        params: Parameters
        grads: Gradients of the same shapes
        state: State returned by the previous call (``OptimizerState()`` initially)
        spec: Optimizer definition

    Returns:
        Updated parameters and state
    """
    if len(params) != len(grads) or any(p.shape != g.shape for p, g in zip(params, grads)):
        raise ValueError("Parameter and gradient shapes do not match")
    optimizer = build_optimizer(spec)
    if spec.name == "adam" and not state.first_moments:
        fresh = optimizer.init_state(params)
        state = OptimizerState(step=state.step, first_moments=fresh.first_moments,
                               second_moments=fresh.second_moments)
    return optimizer.step(params, grads, state)

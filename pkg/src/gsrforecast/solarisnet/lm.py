"""Levenberg-Marquardt least squares.

A step solves ``(J^T J + mu I) delta = J^T e`` and moves to ``params - delta``.
A step that lowers the sum of squared errors is accepted and ``mu`` is divided
by ``mu_factor``; otherwise ``mu`` is multiplied by ``mu_factor`` and the step
is retried, until ``mu`` passes ``mu_max``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Callable, NamedTuple

import numpy as np

from .. import numerics

log = logging.getLogger(__name__)

ResidualFn = Callable[[np.ndarray], np.ndarray]
JacobianFn = Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]


class TrainingDivergedError(FloatingPointError):
    """Loss, output or Jacobian became non-finite during training."""


@dataclass(frozen=True)
class TrainConfig:
    max_iterations: int = 1000
    mu_init: float = 1e-3
    mu_factor: float = 10.0
    grad_tol: float = 1e-7
    mu_max: float = 1e10
    mu_min: float = 1e-20
    max_escalations: int = 60
    seed: int = 0

    def __post_init__(self):
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be non-negative")
        if not self.mu_factor > 1:
            raise ValueError("mu_factor must exceed 1")
        for name in ("mu_init", "grad_tol", "mu_max", "mu_min"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not self.mu_min <= self.mu_init <= self.mu_max:
            raise ValueError("mu_init must lie within [mu_min, mu_max]")


class HistoryEntry(NamedTuple):
    iteration: int
    sse: float
    mu: float
    accepted: bool


@dataclass(frozen=True)
class LmState:
    params: np.ndarray
    mu: float
    sse: float
    iteration: int = 0
    history: tuple[HistoryEntry, ...] = field(default=())
    stop_reason: str | None = None

    @classmethod
    def start(cls, params, residual: np.ndarray, cfg: TrainConfig) -> "LmState":
        sse = float(residual @ residual)
        if not np.isfinite(sse):
            raise TrainingDivergedError(f"non-finite initial loss (mu={cfg.mu_init:g})")
        return cls(np.array(params, dtype=np.float64), cfg.mu_init, sse)


def sse_of(e: np.ndarray) -> float:
    return float(e @ e)


def lm_step(state: LmState, J: np.ndarray, e: np.ndarray, residual_fn: ResidualFn, cfg: TrainConfig) -> LmState:
    """One damped Gauss-Newton step, escalating ``mu`` until a step is accepted."""
    g = J.T @ e
    it = state.iteration + 1
    if not np.any(g) or state.sse == 0.0:
        return replace(state, iteration=it, stop_reason="stationary")
    H = J.T @ J
    eye = np.eye(H.shape[0])
    mu = state.mu
    history = list(state.history)
    for _ in range(cfg.max_escalations + 1):
        accepted = False
        try:
            factor = numerics.cholesky(H + mu * eye)
        except numerics.NotPositiveDefiniteError:
            candidate_sse = np.inf
        else:
            delta = numerics.solve_cholesky(factor, g)
            candidate = state.params - delta
            candidate_sse = sse_of(residual_fn(candidate))
            accepted = bool(np.isfinite(candidate_sse) and candidate_sse < state.sse)
        if accepted:
            new_mu = max(mu / cfg.mu_factor, cfg.mu_min)
            history.append(HistoryEntry(it, candidate_sse, mu, True))
            return LmState(candidate, new_mu, candidate_sse, it, tuple(history))
        history.append(HistoryEntry(it, state.sse, mu, False))
        mu *= cfg.mu_factor
        if mu > cfg.mu_max:
            break
    return replace(state, mu=min(mu, cfg.mu_max), iteration=it, history=tuple(history), stop_reason="damping")


def levenberg_marquardt(
    params0: np.ndarray,
    jacobian_fn: JacobianFn,
    residual_fn: ResidualFn,
    cfg: TrainConfig,
) -> LmState:
    """Iterate :func:`lm_step` from ``params0``.

    Stops after ``cfg.max_iterations`` steps, when ``||J^T e||_inf`` drops
    below ``cfg.grad_tol``, or when damping runs past ``cfg.mu_max``.
    """
    state = LmState.start(params0, residual_fn(np.asarray(params0, dtype=np.float64)), cfg)
    if cfg.max_iterations == 0:
        return replace(state, stop_reason="max_iterations")
    while state.iteration < cfg.max_iterations:
        try:
            J, e = jacobian_fn(state.params)
        except FloatingPointError as exc:
            raise TrainingDivergedError(
                f"{exc} at iteration {state.iteration} (mu={state.mu:g})"
            ) from exc
        if np.max(np.abs(J.T @ e), initial=0.0) < cfg.grad_tol:
            return replace(state, stop_reason="gradient")
        state = lm_step(state, J, e, residual_fn, cfg)
        if not np.isfinite(state.sse):  # pragma: no cover - lm_step only accepts finite losses
            raise TrainingDivergedError(f"non-finite loss at iteration {state.iteration} (mu={state.mu:g})")
        if state.stop_reason is not None:
            log.debug("LM stopped: %s at iteration %d", state.stop_reason, state.iteration)
            return state
    return replace(state, stop_reason="max_iterations")

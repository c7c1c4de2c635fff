"""
Numerical optimizers shared by the classical models and the encoder.

`minimize_quasi_newton` is a limited-memory BFGS with a backtracking
line search for the convex (and MLP) objectives; `adam_step` is the
bias-corrected adaptive-moment update used to train the encoder.
"""
import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Dict, NamedTuple, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from app.errors import ConvergenceError, DataError

logger = logging.getLogger("tweetinfo.numopt")

# curvature pairs with s.y at or below this are skipped
_CURVATURE_EPS = 1e-10


@dataclass(frozen=True)
class Objective:
    """A differentiable function `eval(x) -> (value, gradient)` on R^dim."""

    dim: int
    eval: Callable[[np.ndarray], Tuple[float, np.ndarray]]

    def __call__(self, x: np.ndarray) -> Tuple[float, np.ndarray]:
        value, grad = self.eval(x)
        grad = np.asarray(grad, dtype=np.float64)
        if grad.shape != (self.dim,):
            raise DataError(f"Gradient has shape {grad.shape}, expected ({self.dim},)")
        return float(value), grad


class LineSearchConfig(BaseModel):
    """Armijo backtracking parameters."""

    model_config = ConfigDict(frozen=True)

    c1: float = Field(1e-4, gt=0, lt=1, description="Sufficient-decrease constant")
    contraction: float = Field(0.5, gt=0, lt=1, description="Step shrink factor")
    max_steps: int = Field(40, ge=1)


class QuasiNewtonConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    memory: int = Field(10, ge=1, description="Number of stored curvature pairs")
    max_iters: int = Field(200, ge=0)
    grad_tol: float = Field(1e-5, gt=0, description="Stop when the max-norm gradient is below")
    line_search: LineSearchConfig = Field(default_factory=LineSearchConfig)


class AdamConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    learning_rate: float = Field(2e-5, gt=0)
    epsilon: float = Field(1e-8, gt=0)
    beta1: float = Field(0.9, gt=0, lt=1)
    beta2: float = Field(0.999, gt=0, lt=1)


class QuasiNewtonResult(NamedTuple):
    point: np.ndarray
    value: float
    iterations: int


def _two_loop(grad: np.ndarray, pairs) -> np.ndarray:
    """Approximate inverse-Hessian times gradient from stored (s, y, rho)."""
    q = grad.copy()
    alphas = []
    for s, y, rho in reversed(pairs):
        a = rho * np.dot(s, q)
        q -= a * y
        alphas.append(a)
    s_last, y_last, _ = pairs[-1]
    r = (np.dot(s_last, y_last) / np.dot(y_last, y_last)) * q
    for (s, y, rho), a in zip(pairs, reversed(alphas)):
        b = rho * np.dot(y, r)
        r += s * (a - b)
    return r


def _steepest(grad: np.ndarray) -> np.ndarray:
    scale = min(1.0, 1.0 / max(float(np.sum(np.abs(grad))), 1e-300))
    return -scale * grad


def minimize_quasi_newton(
    obj: Objective, x0: np.ndarray, cfg: QuasiNewtonConfig = QuasiNewtonConfig()
) -> QuasiNewtonResult:
    """
    Minimize `obj` from `x0`.

    Stops when the max-norm of the gradient is at most `grad_tol`, after
    `max_iters` iterations, or when the line search fails twice in a row.
    Every accepted step decreases the value, so the result is never worse
    than `x0`.

    Raises:
        ConvergenceError: the objective is non-finite at x0 or at a trial point.
    """
    x = np.array(x0, dtype=np.float64).reshape(-1)
    if x.shape != (obj.dim,):
        raise DataError(f"x0 has shape {x.shape}, expected ({obj.dim},)")

    f, g = obj(x)
    if not np.isfinite(f) or not np.all(np.isfinite(g)):
        raise ConvergenceError("Objective is not finite at the starting point", iteration=0)

    pairs: deque = deque(maxlen=cfg.memory)
    ls = cfg.line_search
    iterations = 0
    converged = False

    while iterations < cfg.max_iters:
        if np.max(np.abs(g), initial=0.0) <= cfg.grad_tol:
            converged = True
            break
        iterations += 1

        direction = -_two_loop(g, pairs) if pairs else _steepest(g)
        slope = float(np.dot(g, direction))
        if slope >= 0:
            pairs.clear()
            direction = _steepest(g)
            slope = float(np.dot(g, direction))

        step = 1.0
        accepted = None
        for _ in range(ls.max_steps):
            x_new = x + step * direction
            f_new, g_new = obj(x_new)
            if not np.isfinite(f_new) or not np.all(np.isfinite(g_new)):
                raise ConvergenceError("Objective became non-finite", iteration=iterations)
            if f_new <= f + ls.c1 * step * slope:
                accepted = (x_new, f_new, g_new)
                break
            step *= ls.contraction

        if accepted is None:
            if not pairs:
                logger.debug("Line search failed on a steepest-descent step; stopping")
                break
            pairs.clear()
            continue

        x_new, f_new, g_new = accepted
        s, y = x_new - x, g_new - g
        sy = float(np.dot(s, y))
        if sy > _CURVATURE_EPS:
            pairs.append((s, y, 1.0 / sy))
        logger.debug("iter %d value %.10g step %.3g", iterations, f_new, step)
        x, f, g = x_new, f_new, g_new
    else:
        converged = np.max(np.abs(g), initial=0.0) <= cfg.grad_tol

    logger.info(
        "Quasi-Newton finished: %d iterations, value %.6g, converged=%s",
        iterations,
        f,
        converged,
    )
    return QuasiNewtonResult(point=x, value=f, iterations=iterations)


@dataclass
class AdamState:
    """First and second moments per parameter, plus the step count."""

    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)
    step: int = 0


def adam_step(
    params: Dict[str, np.ndarray],
    grads: Dict[str, np.ndarray],
    state: AdamState,
    cfg: AdamConfig,
) -> Tuple[Dict[str, np.ndarray], AdamState]:
    """One bias-corrected adaptive-moment update. Inputs are not mutated."""
    if set(params) != set(grads):
        raise DataError("Parameter and gradient names differ")

    t = state.step + 1
    new_params: Dict[str, np.ndarray] = {}
    new_m: Dict[str, np.ndarray] = {}
    new_v: Dict[str, np.ndarray] = {}
    bias1 = 1.0 - cfg.beta1**t
    bias2 = 1.0 - cfg.beta2**t

    for name, p in params.items():
        g = np.asarray(grads[name])
        if g.shape != np.shape(p):
            raise DataError(f"Gradient for {name} has shape {g.shape}, expected {np.shape(p)}")
        m = state.m.get(name, np.zeros_like(g))
        v = state.v.get(name, np.zeros_like(g))
        if m.shape != g.shape or v.shape != g.shape:
            raise DataError(f"Optimizer state for {name} does not match its gradient shape")

        m = cfg.beta1 * m + (1.0 - cfg.beta1) * g
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g
        m_hat = m / bias1
        v_hat = v / bias2
        new_params[name] = p - cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.epsilon)
        new_m[name] = m
        new_v[name] = v

    return new_params, AdamState(m=new_m, v=new_v, step=t)


def check_gradient(obj: Objective, x: np.ndarray, eps: float = 1e-6) -> float:
    """Relative error between the analytic and central-difference gradient."""
    x = np.array(x, dtype=np.float64).reshape(-1)
    _, analytic = obj(x)
    numeric = np.zeros_like(x)
    for i in range(x.size):
        step = np.zeros_like(x)
        step[i] = eps
        f_plus, _ = obj(x + step)
        f_minus, _ = obj(x - step)
        numeric[i] = (f_plus - f_minus) / (2.0 * eps)
    scale = max(np.linalg.norm(analytic), np.linalg.norm(numeric), 1e-8)
    return float(np.linalg.norm(analytic - numeric) / scale)

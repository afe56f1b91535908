"""Sinusoidal motion model and its robust Levenberg-Marquardt fit.

The model is ``y = B + A * sin(omega * u + phi)``.  The fit minimises the sum
of pseudo-Huber losses of the residuals by running LM on transformed
residuals ``rt`` with ``rt**2 / 2 == loss``, so ordinary Gauss-Newton
machinery applies unchanged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

HUBER_FORMS = ("unit", "textbook", "l2")
AMPLITUDE_FLOOR = 1e-6


class FitError(ValueError):
    pass


def wrap_angle(a):
    """Map angle(s) into [-pi, pi)."""
    return (np.asarray(a, dtype=float) + math.pi) % (2 * math.pi) - math.pi


@dataclass(frozen=True)
class SinusoidParams:
    A: float
    phi: float
    B: float

    def canonical(self) -> "SinusoidParams":
        """Same curve with ``A >= 0`` and ``phi`` in [-pi, pi)."""
        A, phi = self.A, self.phi
        if A < 0:
            A, phi = -A, phi + math.pi
        phi = 0.0 if A == 0 else float(wrap_angle(phi))
        return SinusoidParams(float(A), phi, float(self.B))

    def as_array(self) -> np.ndarray:
        return np.array([self.A, self.phi, self.B], dtype=float)


@dataclass(frozen=True)
class FitConfig:
    """Fitting knobs.

    ``huber_form`` selects the loss: ``unit`` (tail slope 1) is
    ``delta * (sqrt(1 + (c/delta)**2) - 1)``, ``textbook`` carries an extra
    factor ``delta``, and ``l2`` is plain ``c**2 / 2``.
    """

    delta: float = 2.0
    max_iters: int = 200
    tol: float = 1e-10
    lambda0: float = 1e-3
    huber_form: str = "unit"

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if self.huber_form not in HUBER_FORMS:
            raise ValueError(f"huber_form must be one of {HUBER_FORMS}")


@dataclass(frozen=True)
class FitReport:
    params: SinusoidParams
    iterations: int
    final_cost: float
    inlier_rmse: float
    converged: bool
    degenerate: bool = False
    cost_history: tuple = field(default=(), repr=False)

    def to_dict(self) -> dict:
        return {
            "A": self.params.A,
            "phi": self.params.phi,
            "B": self.params.B,
            "iterations": self.iterations,
            "final_cost": self.final_cost,
            "inlier_rmse": self.inlier_rmse,
            "converged": self.converged,
            "degenerate": self.degenerate,
        }


def model_eval(params: SinusoidParams, omega: float, u_p):
    return params.B + params.A * np.sin(omega * np.asarray(u_p, dtype=float) + params.phi)


def pseudo_huber(c, delta: float, form: str = "unit"):
    """Pseudo-Huber loss; ``form='textbook'`` multiplies by ``delta`` once more."""
    if not delta > 0:
        raise ValueError("delta must be positive")
    c = np.asarray(c, dtype=float)
    x = c / delta
    # delta * x**2 / (s + 1) == delta * (s - 1) without cancellation
    val = delta * x * x / (np.sqrt(1.0 + x * x) + 1.0)
    if form == "textbook":
        val = val * delta
    elif form == "l2":
        val = 0.5 * c * c
    return val


def _as_samples(samples):
    arr = np.asarray(samples, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise FitError("samples must be a sequence of (u_p, y) pairs")
    if arr.shape[0] == 0:
        raise FitError("empty sample set")
    if not np.all(np.isfinite(arr)):
        raise FitError("non-finite sample values")
    return arr[:, 0], arr[:, 1]


def residuals(params: SinusoidParams, omega: float, samples) -> np.ndarray:
    u, y = _as_samples(samples)
    return model_eval(params, omega, u) - y


def model_jacobian(params: SinusoidParams, omega: float, u) -> np.ndarray:
    """d(model)/d(A, phi, B), one row per sample."""
    arg = omega * np.asarray(u, dtype=float) + params.phi
    return np.column_stack([np.sin(arg), params.A * np.cos(arg), np.ones_like(arg)])


def robust_transform(c, delta: float, form: str = "unit"):
    """Transformed residuals ``rt`` (``rt**2 / 2 == loss``) and ``d rt / d c``."""
    c = np.asarray(c, dtype=float)
    if form == "l2":
        return c.copy(), np.ones_like(c)
    x = c / delta
    s = np.sqrt(1.0 + x * x)
    scale = delta if form == "textbook" else 1.0
    g = np.sqrt(2.0 * scale / (delta * (1.0 + s)))
    return c * g, g * (1.0 - x * x / (2.0 * s * (1.0 + s)))


def objective(params: SinusoidParams, omega: float, samples, config: FitConfig):
    """Total loss and its gradient with respect to (A, phi, B)."""
    u, y = _as_samples(samples)
    c = model_eval(params, omega, u) - y
    rt, drt = robust_transform(c, config.delta, config.huber_form)
    J = drt[:, None] * model_jacobian(params, omega, u)
    return 0.5 * float(rt @ rt), J.T @ rt


def initial_guess(u, y, omega: float) -> SinusoidParams:
    """Offset from the mean, amplitude and phase from the first DFT harmonic.

    The samples are first resampled onto a uniform grid over their span.
    """
    order = np.argsort(u)
    u, y = np.asarray(u)[order], np.asarray(y)[order]
    grid = np.linspace(u[0], u[-1], len(u))
    yg = np.interp(grid, u, y)
    coef = 2.0 / len(grid) * np.sum((yg - yg.mean()) * np.exp(-1j * omega * grid))
    # y ~ A sin(wu + phi)  =>  coef ~ -1j * A * exp(1j * phi)
    z = 1j * coef
    return SinusoidParams(float(abs(z)), float(np.angle(z)), float(np.mean(y)))


def fit(samples, omega: float, config: FitConfig = FitConfig(),
        init: SinusoidParams | None = None) -> FitReport:
    """Fit the sinusoid to ``(u_p, y)`` samples by Levenberg-Marquardt.

    Args:
        samples: sequence of ``(u_p, y)`` pairs, at least 8, spanning at
            least half a period.
        omega: angular frequency in rad/px (the pixel opening angle).
        config: loss and optimiser settings.
        init: optional starting point; defaults to :func:`initial_guess`.

    Returns:
        FitReport with canonical parameters (``A >= 0``, ``phi`` in
        [-pi, pi)).  ``cost_history`` records the cost after every accepted
        step.

    Raises:
        FitError: too few samples, too short a span or non-finite input.
    """
    u, y = _as_samples(samples)
    if len(u) < 8:
        raise FitError(f"need at least 8 samples, got {len(u)}")
    if omega * (u.max() - u.min()) < math.pi:
        raise FitError("samples span less than half a period")

    p = (init or initial_guess(u, y, omega)).as_array()
    delta, form = config.delta, config.huber_form

    def evaluate(p):
        params = SinusoidParams(*p)
        c = model_eval(params, omega, u) - y
        rt, drt = robust_transform(c, delta, form)
        return rt, drt[:, None] * model_jacobian(params, omega, u)

    rt, J = evaluate(p)
    cost = 0.5 * float(rt @ rt)
    history = [cost]
    lam = config.lambda0
    converged = False
    it = 0
    while it < config.max_iters:
        it += 1
        g = J.T @ rt
        H = J.T @ J
        damp = np.maximum(np.diag(H), 1e-12 * max(1.0, np.trace(H)))
        try:
            step = np.linalg.solve(H + lam * np.diag(damp), -g)
        except np.linalg.LinAlgError:
            lam *= 10.0
            continue
        p_new = p + step
        rt_new, J_new = evaluate(p_new)
        cost_new = 0.5 * float(rt_new @ rt_new)
        if np.isfinite(cost_new) and cost_new < cost:
            rel = (cost - cost_new) / cost
            p, rt, J, cost = p_new, rt_new, J_new, cost_new
            history.append(cost)
            lam = max(lam / 10.0, 1e-12)
            if rel < config.tol or cost == 0.0:
                converged = True
                break
        else:
            lam *= 10.0
            if lam > 1e12:
                # no step improves the cost any more: stationary to working precision
                converged = True
                break

    params = SinusoidParams(*p).canonical()
    degenerate = params.A < AMPLITUDE_FLOOR
    if degenerate:
        params = SinusoidParams(params.A, 0.0, params.B)
    c = model_eval(params, omega, u) - y
    inl = np.abs(c) <= 3.0 * delta
    inlier_rmse = float(np.sqrt(np.mean(c[inl] ** 2))) if inl.any() else float("nan")
    final = float(np.sum(pseudo_huber(c, delta, form)))
    return FitReport(params, it, final, inlier_rmse, converged, degenerate,
                     tuple(history))

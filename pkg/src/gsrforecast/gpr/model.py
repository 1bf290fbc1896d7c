"""Exact GP regression with squared-exponential kernels.

Hyperparameters are handled in log space, ordered
``[log sf2, log l_1 .. log l_d, log sn2]`` (a single ``log l`` when the
kernel is isotropic). The training target is expected to be centred, since
the prior mean is zero.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .. import jsonio, numerics
from ..dataio import Dataset, Standardizer, fit_standardizer
from ..seeding import rng_for
from .kernel import KernelParams, gram, sqdiff_per_feature

log = logging.getLogger(__name__)

LOG_2PI = math.log(2.0 * math.pi)
MODES = ("isotropic", "ard")


class GprFitError(RuntimeError):
    pass


@dataclass(frozen=True)
class GprFitConfig:
    n_starts: int = 5
    max_iter: int = 200
    grad_tol: float = 1e-4
    ftol: float = 1e-10
    log_bounds: tuple[float, float] = (-10.0, 10.0)
    armijo: float = 1e-4
    seed: int = 0


class _Objective:
    """LML and its log-space gradient for fixed training data."""

    def __init__(self, X, y, mode: str):
        if mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
        self.X = numerics.as_matrix(X, "X")
        self.y = numerics.as_vector(y, "y")
        if self.X.shape[0] != self.y.size:
            raise ValueError("X and y disagree on the number of samples")
        self.n, self.dim = self.X.shape
        self.mode = mode
        self.sqdiff = sqdiff_per_feature(self.X, self.X)
        if mode == "isotropic":
            self.sqdiff = [sum(self.sqdiff)]
        self.n_theta = 2 + len(self.sqdiff)

    def params(self, theta) -> KernelParams:
        return KernelParams.from_log(theta)

    def _signal_gram(self, theta) -> np.ndarray:
        ls2 = np.exp(2.0 * np.asarray(theta[1:-1]))
        s = np.zeros((self.n, self.n))
        tmp = np.empty_like(s)
        for D, l2 in zip(self.sqdiff, ls2):
            np.multiply(D, -0.5 / l2, out=tmp)
            s += tmp
        np.exp(s, out=s)
        s *= math.exp(theta[0])
        return s

    def evaluate(self, theta, gradient: bool = True) -> "_Point":
        theta = np.asarray(theta, dtype=np.float64)
        Kf = self._signal_gram(theta)
        C = Kf.copy()
        C.flat[:: self.n + 1] += math.exp(theta[-1])
        factor = numerics.cholesky(C, check=False)
        alpha = numerics.solve_cholesky(factor, self.y)
        lml = -0.5 * float(self.y @ alpha) - 0.5 * factor.logdet() - 0.5 * self.n * LOG_2PI
        point = _Point(theta, lml, factor, alpha, Kf)
        if gradient:
            self.gradient(point)
        return point

    def gradient(self, point: "_Point") -> np.ndarray:
        if point.grad is not None:
            return point.grad
        theta, alpha = point.theta, point.alpha
        Cinv = numerics.cholesky_inverse(point.factor)
        W = np.outer(alpha, alpha)
        W -= Cinv
        grad = np.empty(self.n_theta)
        grad[-1] = 0.5 * math.exp(theta[-1]) * float(np.trace(W))
        W *= point.Kf
        grad[0] = 0.5 * W.sum()
        ls2 = np.exp(2.0 * theta[1:-1])
        for k, (D, l2) in enumerate(zip(self.sqdiff, ls2)):
            grad[1 + k] = 0.5 * float(np.vdot(W, D)) / l2
        point.grad = grad
        return grad


@dataclass
class _Point:
    theta: np.ndarray
    lml: float
    factor: numerics.CholeskyFactor
    alpha: np.ndarray
    Kf: np.ndarray
    grad: np.ndarray | None = None


def _theta(p: KernelParams, X, mode: str) -> np.ndarray:
    if mode == "isotropic" and p.ard:
        raise ValueError("isotropic mode needs a single length scale")
    if mode == "ard" and len(p.length_scales) == 1:
        p = KernelParams(p.signal_variance, p.scales_for(np.shape(X)[1]), p.noise_variance)
    return p.to_log()


def _infer_mode(p: KernelParams) -> str:
    return "ard" if p.ard else "isotropic"


def log_marginal_likelihood(X, y, p: KernelParams) -> float:
    """``-1/2 y^T C^-1 y - 1/2 log|C| - n/2 log 2 pi`` with ``C = K + sn2 I``."""
    mode = _infer_mode(p)
    obj = _Objective(X, y, mode)
    return obj.evaluate(_theta(p, X, mode), gradient=False).lml


def lml_gradient(X, y, p: KernelParams) -> np.ndarray:
    """Gradient of the LML with respect to the log-hyperparameters.

    Uses ``d LML / d theta = 1/2 tr((alpha alpha^T - C^-1) dC/dtheta)``.
    """
    mode = _infer_mode(p)
    obj = _Objective(X, y, mode)
    return obj.evaluate(_theta(p, X, mode)).grad


@dataclass(frozen=True)
class GprModel:
    params: KernelParams
    X_train: np.ndarray
    y_train: np.ndarray
    factor: numerics.CholeskyFactor
    alpha: np.ndarray
    mode: str = "ard"
    lml: float = float("nan")
    standardizer: Standardizer | None = None
    fit_meta: dict = field(default_factory=dict, compare=False)

    @classmethod
    def condition(cls, X, y, p: KernelParams, standardizer=None, fit_meta=None) -> "GprModel":
        """Factor the training covariance for fixed hyperparameters."""
        mode = _infer_mode(p)
        obj = _Objective(X, y, mode)
        pt = obj.evaluate(_theta(p, X, mode), gradient=False)
        return cls(p, obj.X, obj.y, pt.factor, pt.alpha, mode, pt.lml, standardizer, dict(fit_meta or {}))


def _start_points(obj: _Objective, cfg: GprFitConfig) -> list[np.ndarray]:
    """First start is data-driven; the rest are seeded perturbations of it."""
    var_y = max(float(np.var(obj.y)), 1e-8)
    base = np.concatenate([[math.log(var_y)], np.zeros(obj.n_theta - 2), [math.log(0.1 * var_y)]])
    starts = [base]
    rng = rng_for(cfg.seed, "gpr-starts")
    for _ in range(cfg.n_starts - 1):
        th = np.empty(obj.n_theta)
        th[0] = math.log(var_y) + rng.uniform(-2.0, 2.0)
        th[1:-1] = rng.uniform(-1.0, 2.5, obj.n_theta - 2)
        th[-1] = math.log(var_y) + rng.uniform(-5.0, 0.0)
        starts.append(th)
    lo, hi = cfg.log_bounds
    return [np.clip(s, lo, hi) for s in starts]


def _free_mask(theta, grad, lo, hi) -> np.ndarray:
    """Coordinates not pinned at a bound by an outward-pointing gradient."""
    return ~(((theta <= lo) & (grad < 0)) | ((theta >= hi) & (grad > 0)))


def _ascend(obj: _Objective, theta0: np.ndarray, cfg: GprFitConfig):
    """Maximize the LML from ``theta0`` inside the log-parameter box.

    The ascent direction is the gradient preconditioned by a BFGS estimate
    of the inverse negative Hessian over the free coordinates; plain
    gradient steps crawl along the ridge where signal variance and length
    scales grow together. Step lengths come from Armijo backtracking, and
    the estimate is reset whenever the set of coordinates held at a bound
    changes.
    """
    lo, hi = cfg.log_bounds
    pt = obj.evaluate(theta0)
    m = obj.n_theta
    B = np.eye(m) / max(1.0, float(np.max(np.abs(pt.grad))))
    fresh = True
    free = _free_mask(pt.theta, pt.grad, lo, hi)
    trace = [(0, pt.lml, 0.0)]
    reason = "max_iter"
    for it in range(1, cfg.max_iter + 1):
        g = pt.grad
        new_free = _free_mask(pt.theta, g, lo, hi)
        if not np.array_equal(new_free, free):
            B = np.eye(m) / max(1.0, float(np.max(np.abs(g))))
            fresh = True
            free = new_free
        if not np.any(free) or np.max(np.abs(g[free])) < cfg.grad_tol:
            reason = "gradient"
            break
        d = np.zeros(m)
        d[free] = B[np.ix_(free, free)] @ g[free]
        if float(g @ d) <= 0.0:
            B = np.eye(m) / max(1.0, float(np.max(np.abs(g))))
            fresh = True
            d = np.where(free, B @ g, 0.0)
        t = 1.0
        for _ in range(60):
            cand = np.clip(pt.theta + t * d, lo, hi)
            try:
                trial = obj.evaluate(cand, gradient=False)
            except numerics.NotPositiveDefiniteError:
                trial = None
            if trial is not None and trial.lml >= pt.lml + cfg.armijo * float(g @ (cand - pt.theta)):
                break
            t *= 0.5
        else:
            reason = "line_search"
            break
        g_new = obj.gradient(trial)
        s = trial.theta - pt.theta
        yv = -(g_new - g)  # curvature of the negated objective
        sy = float(s @ yv)
        if sy > 1e-12 * float(s @ s):
            if fresh:
                B = np.eye(m) * sy / float(yv @ yv)
                fresh = False
            rho = 1.0 / sy
            V = np.eye(m) - rho * np.outer(s, yv)
            B = V @ B @ V.T + rho * np.outer(s, s)
        converged = abs(trial.lml - pt.lml) <= cfg.ftol * (1.0 + abs(pt.lml))
        pt = trial
        trace.append((it, pt.lml, t))
        if converged:
            reason = "ftol"
            break
    return pt, trace, reason


def fit(X, y, mode: str = "ard", cfg: GprFitConfig = GprFitConfig(), standardizer=None) -> GprModel:
    """Maximize the LML over the hyperparameters from several starts."""
    obj = _Objective(X, y, mode)
    if obj.n < 2:
        raise GprFitError("GP fitting needs at least 2 training points")
    best = None
    failures = []
    runs = []
    for k, th0 in enumerate(_start_points(obj, cfg)):
        try:
            result = _ascend(obj, th0, cfg)
        except numerics.NotPositiveDefiniteError as exc:
            failures.append(f"start {k}: {exc}")
            continue
        pt, trace, reason = result
        runs.append({"start": k, "lml": pt.lml, "iterations": len(trace) - 1, "stop": reason})
        log.info("gpr start %d: lml=%.6f after %d iterations (%s)", k, pt.lml, len(trace) - 1, reason)
        if best is None or pt.lml > best[0].lml:
            best = result
    if best is None:
        raise GprFitError("all starts failed: " + "; ".join(failures))
    pt, trace, reason = best
    meta = {
        "seed": cfg.seed,
        "n_starts": cfg.n_starts,
        "runs": runs,
        "final_gradient": [float(v) for v in pt.grad],
        "stop_reason": reason,
        "trace": trace,
    }
    return GprModel(obj.params(pt.theta), obj.X, obj.y, pt.factor, pt.alpha, mode, pt.lml, standardizer, meta)


def fit_dataset(train: Dataset, mode: str = "ard", cfg: GprFitConfig = GprFitConfig(), feature_names=None) -> GprModel:
    """Standardize features, remove the target mean and fit."""
    std = fit_standardizer(train, feature_names or train.feature_names[:3])
    X, y = std.apply(train)
    return fit(X, y, mode, cfg, std)


def predict(model: GprModel, X_star, predictive: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Posterior mean and variance of the latent function at ``X_star``.

    With ``predictive=True`` the noise variance is added to the variance.
    """
    X_star = np.atleast_2d(np.asarray(X_star, dtype=np.float64))
    if X_star.shape[1] != model.X_train.shape[1]:
        raise ValueError(
            f"dimension mismatch: model has {model.X_train.shape[1]} features, got {X_star.shape[1]}"
        )
    Ks = gram(X_star, model.X_train, model.params)
    mean = Ks @ model.alpha
    v = solve_triangular(model.factor.lower, Ks.T, lower=True, check_finite=False)
    var = model.params.signal_variance - np.sum(v * v, axis=0)
    var = np.where(var < 0.0, 0.0, var)
    if predictive:
        var = var + model.params.noise_variance
    return mean, var


def predict_dataset(model: GprModel, ds: Dataset) -> np.ndarray:
    """Posterior mean GSR in raw units."""
    if len(ds) == 0:
        return np.zeros(0)
    if model.standardizer is None:
        raise ValueError("model has no standardizer")
    mean, _ = predict(model, model.standardizer.transform(ds))
    return mean + model.standardizer.target_mean


SCHEMA_VERSION = 1


def to_document(model: GprModel) -> dict:
    if model.standardizer is None:
        raise ValueError("only models with a standardizer can be serialized")
    p = model.params
    return {
        "schema_version": SCHEMA_VERSION,
        "model_type": "gpr",
        "mode": model.mode,
        "hyperparameters": {
            "signal_variance": p.signal_variance,
            "length_scales": list(p.length_scales),
            "noise_variance": p.noise_variance,
        },
        "lml": model.lml,
        "standardizer": model.standardizer.to_dict(),
        "X_train": [[float(v) for v in row] for row in model.X_train],
        "y_train": [float(v) for v in model.y_train],
        "fit_meta": {k: v for k, v in model.fit_meta.items() if k != "trace"},
    }


def from_document(doc: dict) -> GprModel:
    """Rebuild a model; the covariance is refactored from the stored inputs."""
    jsonio.check_header(doc, "gpr", SCHEMA_VERSION)
    try:
        hp = doc["hyperparameters"]
        p = KernelParams(float(hp["signal_variance"]), tuple(hp["length_scales"]), float(hp["noise_variance"]))
        X = np.array(doc["X_train"], dtype=np.float64)
        y = np.array(doc["y_train"], dtype=np.float64)
        std = Standardizer.from_dict(doc["standardizer"])
        mode = doc["mode"]
    except (KeyError, TypeError, ValueError) as exc:
        raise jsonio.DocumentError(f"incomplete gpr document: {exc}") from None
    if X.ndim != 2 or X.shape[0] != y.size or X.shape[1] != len(std.feature_names):
        raise jsonio.DocumentError("training inputs disagree with the targets or the standardizer")
    expected = {"isotropic": 1, "ard": X.shape[1]}.get(mode)
    if expected != len(p.length_scales):
        raise jsonio.DocumentError(f"kernel mode {mode!r} disagrees with {len(p.length_scales)} length scales")
    m = GprModel.condition(X, y, p, std, doc.get("fit_meta", {}))
    return GprModel(m.params, m.X_train, m.y_train, m.factor, m.alpha, mode, m.lml, std, m.fit_meta)


def serialize(model: GprModel) -> str:
    return jsonio.dumps(to_document(model))


def deserialize(text: str) -> GprModel:
    return from_document(jsonio.loads(text))

"""Maximisation of the scale-invariant Vandermonde objective behind Delta_n(p).

The objective is

    f(t) = (2 / (n (n-1))) sum_{i<j} log|t_i - t_j| - (1/p) log((1/n) sum |t_i|^p),

which is constant along rays. Its supremum is log Delta_n(p). The ascent is a
modified Newton method. The ray direction, where the Hessian is singular,
is filled in by a rank-one term, and iterates are rescaled to unit l_p norm
after every step.
"""

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ._validation import as_generator, check_int, check_p, check_points, check_positive
from .vandermonde import gauss_lobatto_nodes

# smallest admissible gap between consecutive points
MIN_GAP = 1e-14
# p < 1: relative size below which a coordinate is tried at exactly 0
SNAP_RATIO = 1e-6
# iterations without objective gain before giving up
STALL_ITERS = 50


@dataclass(frozen=True)
class OptimizerConfig:
    """Stopping rule and restart policy of :func:`optimize_delta_n`."""

    tol: float = 1e-10
    max_iter: int = 100_000
    restarts: int = 5
    seed: int = 0

    def __post_init__(self):
        check_positive(self.tol, "tol")
        check_int(self.max_iter, "max_iter", minimum=1)
        check_int(self.restarts, "restarts", minimum=0)
        check_int(self.seed, "seed", minimum=0)

    @classmethod
    def from_dict(cls, data):
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ValueError(f"unknown optimizer settings: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, path):
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        return cls.from_dict(data.get("optimizer", data))

    def as_dict(self):
        return asdict(self)


@dataclass
class OptimizerResult:
    """Maximiser found for a given ``(p, n)`` together with first-order diagnostics."""

    points: np.ndarray
    log_delta_n: float
    lagrange_lambda_hat: float
    max_lagrange_residual: float
    iterations: int
    converged: bool
    p: float = math.nan
    grad_norm: float = math.nan
    #: largest |sum_k alpha_k t_k - n(n-1)/2| seen over all iterates
    lambda_identity_error: float = 0.0
    pinned: tuple = ()
    start: str = "gauss_lobatto"
    message: str = ""
    residuals: np.ndarray = field(default=None, repr=False)

    @property
    def n(self):
        return self.points.size

    @property
    def delta_n(self):
        return math.exp(self.log_delta_n)

    def mirror(self):
        """Points of the mirror-equivalent maximiser ``-t`` reversed."""
        return -self.points[::-1]

    def as_dict(self):
        return {
            "p": self.p,
            "n": self.n,
            "delta_n": self.delta_n,
            "log_delta_n": self.log_delta_n,
            "points": self.points.tolist(),
            "lagrange_lambda_hat": self.lagrange_lambda_hat,
            "max_lagrange_residual": self.max_lagrange_residual,
            "lambda_identity_error": self.lambda_identity_error,
            "iterations": self.iterations,
            "converged": self.converged,
            "grad_norm": self.grad_norm,
            "message": self.message,
        }


def _alpha(t):
    """alpha_k = sum_{i != k} 1 / (t_k - t_i) together with the squared inverse gaps."""
    d = t[:, None] - t[None, :]
    np.fill_diagonal(d, np.inf)
    inv = 1.0 / d
    return inv.sum(axis=1), inv * inv


def _signed_power(t, e):
    """|t|^e sgn(t), zero at t = 0."""
    out = np.zeros_like(t)
    nz = t != 0
    out[nz] = np.abs(t[nz]) ** e * np.sign(t[nz])
    return out


def _value(t, p):
    n = t.size
    c = 2.0 / (n * (n - 1))
    ts = np.sort(t)
    gaps = ts[None, :] - ts[:, None]
    iu = np.triu_indices(n, 1)
    g = gaps[iu]
    if np.any(g <= 0):
        return -math.inf
    mean_p = np.mean(np.abs(t) ** p)
    if mean_p == 0:
        return -math.inf
    return c * float(np.sum(np.log(g))) - math.log(mean_p) / p


def delta_objective(p, t):
    """Scale-invariant objective whose supremum is log Delta_n(p).

    Coincident points give ``-inf`` rather than an exception; the all-zero
    vector is rejected.
    """
    p = check_p(p)
    t = check_points(t, "t", min_size=2)
    if not np.any(t):
        raise ValueError("t must not be identically zero")
    return _value(t, p)


def lagrange_residual(p, t):
    """First-order conditions at ``t``.

    Returns ``(lambda_hat, residuals)``. ``lambda_hat = sum_k alpha_k t_k``
    equals ``n(n-1)/2`` for every admissible ``t``. The residuals are
    ``alpha_k - (n(n-1)/2) |t_k|^(p-1) sgn(t_k) / sum_i |t_i|^p``, so on the
    unit sphere the sum is 1. A zero entry has no residual when ``p < 1``
    (NaN). When ``p = 1`` it gets the distance of ``alpha_k`` from the
    subdifferential ``[-lambda, lambda]``.
    """
    p = check_p(p)
    t = check_points(t, "t", min_size=2)
    n = t.size
    if np.unique(t).size != n:
        raise ValueError("t must have pairwise distinct entries")
    alpha, _ = _alpha(t)
    lam = n * (n - 1) / 2.0
    s_total = float(np.sum(np.abs(t) ** p))
    if s_total == 0:
        raise ValueError("t must not be identically zero")
    res = alpha - lam * _signed_power(t, p - 1.0) / s_total
    zero = t == 0
    if np.any(zero):
        if p < 1:
            res[zero] = np.nan
        elif p == 1:
            a = alpha[zero]
            res[zero] = np.sign(a) * np.maximum(0.0, np.abs(a) - lam / s_total)
    return float(np.dot(alpha, t)), res


def _normalise(t, p):
    return t / np.sum(np.abs(t) ** p) ** (1.0 / p)


def _gradient_hessian(t, p, free):
    n = t.size
    c = 2.0 / (n * (n - 1))
    alpha, inv2 = _alpha(t)
    s_total = float(np.sum(np.abs(t) ** p))
    s = _signed_power(t, p - 1.0)
    g = c * alpha - s / s_total
    tf = t[free]
    hv = c * (inv2 - np.diag(inv2.sum(axis=1)))
    h = hv[np.ix_(free, free)]
    if p != 1.0:
        # zero coordinates get infinite curvature when p < 2; they are stepped separately
        at = np.abs(tf)
        curv = np.zeros_like(at)
        nz = at > 0
        curv[nz] = at[nz] ** (p - 2.0)
        if p < 2:
            curv[~nz] = np.inf
        h -= np.diag((p - 1.0) * curv / s_total)
    sf = s[free]
    h += p * np.outer(sf, sf) / s_total**2
    return g, h, alpha


def _newton_direction(g_free, h_free, t_free):
    """Ascent direction from the eigenvalue-modified negative Hessian."""
    m = -h_free
    scale = max(1.0, float(np.max(np.abs(np.diag(m)))))
    nt = float(np.dot(t_free, t_free))
    if nt > 0:
        # f is constant along rays, so -H is singular along t
        m = m + scale * np.outer(t_free, t_free) / nt
    e, v = np.linalg.eigh(m)
    e = np.maximum(np.abs(e), 1e-8 * scale)
    return v @ ((v.T @ g_free) / e)


def _zero_subgradient(g, alpha, t, p, c, idx):
    """Ascent slope of f at coordinates sitting exactly at 0."""
    if p != 1.0:
        return g[idx]
    s_total = float(np.sum(np.abs(t)))
    a = c * alpha[idx]
    return np.sign(a) * np.maximum(0.0, np.abs(a) - 1.0 / s_total)


def _snap_to_zero(t, f, p, pinned):
    """Move a coordinate that is almost 0 onto 0 if the objective does not drop.

    For p < 2 the gradient is not Lipschitz at 0, so a stray offset of
    1e-18 can leave a gradient of 1e-9. For p <= 1 the snapped coordinate is
    pinned.
    """
    scale = float(np.max(np.abs(t)))
    for k in np.flatnonzero((np.abs(t) < SNAP_RATIO * scale) & (t != 0)):
        trial = t.copy()
        trial[k] = 0.0
        f_trial = _value(trial, p)
        if f_trial >= f:
            t, f = _normalise(trial, p), f_trial
            if p <= 1:
                pinned.add(int(k))
    return t, f


def _release_candidates(t, alpha, pinned, p, c):
    """Pinned zeros whose subgradient condition fails (p = 1 only)."""
    if p != 1.0 or not pinned:
        return []
    s_total = float(np.sum(np.abs(t)))
    return [k for k in pinned if abs(c * alpha[k]) > 1.0 / s_total * (1 + 1e-12)]


def _ascend(t, p, cfg):
    n = t.size
    c = 2.0 / (n * (n - 1))
    lam = n * (n - 1) / 2.0
    t = _normalise(t, p)
    pinned = {int(k) for k in np.flatnonzero(t == 0)} if p <= 1 else set()
    f = _value(t, p)
    id_err = 0.0
    grad_norm = math.inf
    message = "max_iter reached"
    converged = False
    it = 0
    stall = 0
    best_grad = math.inf
    for it in range(1, cfg.max_iter + 1):
        if p < 2:
            t, f = _snap_to_zero(t, f, p, pinned)
        free = np.array([k for k in range(n) if k not in pinned], dtype=int)
        g, h, alpha = _gradient_hessian(t, p, free)
        id_err = max(id_err, abs(float(np.dot(alpha, t)) - lam))
        for k in _release_candidates(t, alpha, pinned, p, c):
            pinned.discard(k)
        if len(free) != n - len(pinned):
            continue
        gf = g[free]
        zero_free = t[free] == 0
        if p <= 1 and np.any(zero_free):
            gf = gf.copy()
            gf[zero_free] = _zero_subgradient(g, alpha, t, p, c, free[zero_free])
        grad_norm = float(np.max(np.abs(gf))) if gf.size else 0.0
        if grad_norm <= cfg.tol:
            converged, message = True, "gradient tolerance met"
            break
        d = np.zeros(n)
        smooth = free[(t[free] != 0) | (p >= 2)]
        at_zero = free[(t[free] == 0) & (p < 2)]
        hs = 1.0
        if smooth.size:
            pos = np.isin(free, smooth)
            hsub = h[np.ix_(pos, pos)]
            hs = max(1.0, float(np.max(np.abs(np.diag(hsub)))))
            d[smooth] = _newton_direction(gf[pos], hsub, t[smooth])
        if at_zero.size:
            # infinite curvature at 0
            sub = _zero_subgradient(g, alpha, t, p, c, at_zero)
            if p > 1:
                # exact maximiser of c a t - |t|^p / (p S) along this coordinate
                s_total = float(np.sum(np.abs(t) ** p))
                d[at_zero] = np.sign(sub) * (np.abs(sub) * s_total) ** (1.0 / (p - 1.0))
            else:
                d[at_zero] = sub / hs
        slope = float(np.dot(g, d))
        if slope <= 0:
            d = g.copy()
            d[list(pinned)] = 0.0
            slope = float(np.dot(g, d))
        step, accepted = 1.0, False
        # gains below rounding in f: judge the Newton step by the gradient instead
        f_noise = 64 * np.finfo(float).eps * max(1.0, abs(f))
        tiny = slope <= f_noise and not at_zero.size
        for _ in range(60):
            trial = t + step * d
            crossed = []
            if p <= 1:
                crossed = [k for k in free if t[k] != 0 and np.sign(trial[k]) != np.sign(t[k])]
                trial[crossed] = 0.0
            gaps = np.diff(trial)
            if np.all(gaps >= MIN_GAP * np.max(np.abs(trial))):
                f_trial = _value(trial, p)
                if f_trial >= f + 1e-4 * step * slope or (crossed and f_trial > f) or (
                    tiny and f_trial >= f - f_noise
                ):
                    accepted = True
                    break
            step *= 0.5
        if not accepted:
            message = "line search stalled"
            break
        pinned.update(crossed)
        t = _normalise(trial, p)
        f_new = _value(t, p)
        gained = f_new - f > 4 * np.finfo(float).eps * max(1.0, abs(f))
        if gained or grad_norm < best_grad * 0.5:
            stall = 0
        else:
            stall += 1
        best_grad = min(best_grad, grad_norm)
        f = f_new
        if stall >= STALL_ITERS:
            message = "no progress in objective"
            break
    return t, f, it, converged, grad_norm, id_err, tuple(sorted(pinned)), message


def _random_start(n, rng):
    while True:
        t = np.sort(rng.uniform(-1.0, 1.0, n))
        if np.all(np.diff(t) > 1e-3 / n):
            return t


def _analytic_two(p):
    """Two points: the ratio is 2 at (-a, a) and 2^(1/p) at (0, a).

    For p < 1 the antisymmetric pair is only a saddle of the objective and the
    maximiser puts one point at the origin.
    """
    if p >= 1:
        a = 2.0 ** (-1.0 / p)
        t, log_val, pinned = np.array([-a, a]), math.log(2.0), ()
    else:
        t, log_val, pinned = np.array([0.0, 1.0]), math.log(2.0) / p, (0,)
    lam_hat, res = lagrange_residual(p, t)
    finite = res[np.isfinite(res)]
    return OptimizerResult(
        points=t, log_delta_n=log_val, lagrange_lambda_hat=lam_hat,
        max_lagrange_residual=float(np.max(np.abs(finite))), iterations=0, converged=True, p=p,
        grad_norm=0.0, pinned=pinned, start="analytic", message="closed form", residuals=res,
    )


def optimize_delta_n(p, n, config=None):
    """Approximate Delta_n(p) by maximising :func:`delta_objective`.

    Starts from Gauss-Lobatto nodes scaled to unit l_p norm. For ``p < 1``
    the objective has cusps where a coordinate vanishes, so
    ``config.restarts`` random starts are tried as well and the best one is
    kept. Non-convergence is reported through ``converged=False``.
    """
    p = check_p(p)
    n = check_int(n, "n", minimum=2)
    cfg = config if config is not None else OptimizerConfig()
    if n == 2:
        return _analytic_two(p)
    starts = [("gauss_lobatto", gauss_lobatto_nodes(n).points.copy())]
    if p < 1:
        rng = as_generator(np.random.SeedSequence([cfg.seed, n]))
        starts += [(f"random_{i}", _random_start(n, rng)) for i in range(cfg.restarts)]
    best = None
    for label, t0 in starts:
        t, f, it, conv, gn, id_err, pinned, msg = _ascend(t0, p, cfg)
        if best is None or f > best[1][1] + 1e-14:
            best = (label, (t, f, it, conv, gn, id_err, pinned, msg))
    label, (t, f, it, conv, gn, id_err, pinned, msg) = best
    lam_hat, res = lagrange_residual(p, t)
    finite = res[np.isfinite(res)]
    return OptimizerResult(
        points=t, log_delta_n=f, lagrange_lambda_hat=lam_hat,
        max_lagrange_residual=float(np.max(np.abs(finite))) if finite.size else 0.0,
        iterations=it, converged=conv, p=p, grad_norm=gn, lambda_identity_error=id_err,
        pinned=pinned, start=label, message=msg, residuals=res,
    )

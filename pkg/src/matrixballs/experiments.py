"""Finite-n experiments: empirical eigenvalue laws, the weak law, volumes and intersections."""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats
from scipy.special import logsumexp

from ._validation import DomainError, check_int, check_p, check_rows
from .config import LOG_I_MAX_N
from .constants import (
    C_pq,
    EnsembleSpec,
    a_pq,
    asymptotic_volume_radius,
    intersection_threshold,
    log_c_n_beta,
)
from .measures import EmpiricalMeasure, as_measure
from .sampler import (
    ChainConfig,
    EigenBatch,
    EigenSample,
    log_volume_lp_ball,
    sample_classical_lp_ball,
    sample_unit_ball_eigen,
)
from .ullman import UllmanDist, ullman_abs_moment, ullman_cdf


@dataclass
class MonteCarloEstimate:
    """Point estimate with its standard error (sample std / sqrt(n_samples))."""

    value: float
    stderr: float
    n_samples: int
    seed: int = None
    metadata: dict = field(default_factory=dict)

    def as_dict(self):
        return {
            "value": self.value,
            "stderr": self.stderr,
            "n_samples": self.n_samples,
            "seed": self.seed,
            "metadata": self.metadata,
        }


def _values(sample):
    if isinstance(sample, (EigenSample, EigenBatch)):
        return sample.values
    return np.asarray(sample, dtype=float)


def empirical_measure(sample, scale_exponent=0.0):
    """Uniform measure on the eigenvalues times ``n^(-scale_exponent)``.

    A batch is pooled into one measure; ``n`` is always the tuple length.
    """
    vals = _values(sample)
    n = vals.shape[-1]
    return EmpiricalMeasure.from_values(vals * float(n) ** (-scale_exponent))


def ks_to_scaled_ullman(mu, p):
    """Fit the Ullman scale by the p-th moment and return ``(scale_hat, ks)``.

    ``scale_hat`` solves ``mean |x|^p = b^p E|U|^p``. ``ks`` is the exact
    one-sample Kolmogorov-Smirnov distance to ``UllmanDist(p, scale_hat)``.
    """
    p = check_p(p)
    mu = as_measure(mu)
    m = mu.abs_moment(p)
    if m == 0:
        raise DomainError("the measure is concentrated at 0")
    scale = (m / ullman_abs_moment(p, p)) ** (1.0 / p)
    dist = UllmanDist(p, scale)
    ks = stats.kstest(mu.atoms, lambda x: ullman_cdf(dist, x)).statistic
    return scale, float(ks)


def wlln_statistic(sample, p, q):
    """``n^(1/p - 1/q) (sum |lambda_i|^q)^(1/q)``, one value per tuple."""
    p = check_p(p)
    q = check_p(q, "q")
    arr = _values(sample)
    rows = check_rows(arr)
    n = rows.shape[1]
    out = n ** (1.0 / p - 1.0 / q) * np.sum(np.abs(rows) ** q, axis=1) ** (1.0 / q)
    return float(out[0]) if arr.ndim == 1 else out


def wlln_experiment(spec, q, reps, chain=None):
    """Mean of :func:`wlln_statistic` over ``reps`` uniform draws from the unit ball.

    ``metadata`` carries the limit ``C_pq``, the deviation from it and the
    sample standard deviation.
    """
    spec = spec if isinstance(spec, EnsembleSpec) else EnsembleSpec(*spec)
    q = check_p(q, "q")
    reps = check_int(reps, "reps", minimum=2)
    cfg = chain if chain is not None else ChainConfig()
    batch = sample_unit_ball_eigen(spec, reps, cfg)
    s = wlln_statistic(batch, spec.p, q)
    mean = float(np.mean(s))
    sd = float(np.std(s, ddof=1))
    limit = C_pq(spec.p, q)
    meta = {
        "spec": spec.as_dict(),
        "q": q,
        "limit": limit,
        "abs_deviation": abs(mean - limit),
        "sample_std": sd,
        "source": batch.metadata.get("base_source"),
    }
    return MonteCarloEstimate(mean, sd / math.sqrt(reps), reps, cfg.seed, meta)


def estimate_log_I(spec, samples, seed=None, max_n=LOG_I_MAX_N):
    """Monte Carlo estimate of ``log int_{B_p^n} prod |x_i - x_j|^beta dx``.

    Uniform points of the classical ball feed a log-mean-exp of
    ``beta log|Vandermonde|``, to which the ball's log volume is added. The
    stderr comes from the delta method, ``sd(w) / (mean(w) sqrt(N))`` with
    ``w`` the weights.
    """
    spec = spec if isinstance(spec, EnsembleSpec) else EnsembleSpec(*spec)
    samples = check_int(samples, "samples", minimum=2)
    if spec.n > max_n:
        raise DomainError(
            f"n={spec.n} exceeds the cap {max_n}: the plain estimator's variance grows "
            "too fast; use the asymptotic surrogate instead"
        )
    log_vol = log_volume_lp_ball(spec.n, spec.p)
    meta = {"spec": spec.as_dict(), "log_vol_lp_ball": log_vol, "estimator": "log-mean-exp, delta method"}
    if spec.n == 1:
        return MonteCarloEstimate(log_vol, 0.0, samples, seed, meta)
    x = sample_classical_lp_ball(spec.n, spec.p, samples, seed)
    iu = np.triu_indices(spec.n, 1)
    logw = spec.beta * np.sum(np.log(np.abs(x[:, iu[0]] - x[:, iu[1]])), axis=1)
    lme = float(logsumexp(logw) - math.log(samples))
    w = np.exp(logw - lme)
    stderr = float(np.std(w, ddof=1) / math.sqrt(samples))
    meta["relative_ess"] = float(np.sum(w) ** 2 / np.sum(w * w) / samples)
    return MonteCarloEstimate(log_vol + lme, stderr, samples, seed, meta)


def log_volume_ball(spec, samples, seed=None):
    """``log c_{n,beta} + log I``: the log volume of the matrix unit ball.

    ``metadata`` includes the large-n surrogate, labelled as such. It also
    gives the scale ``vol^(-1/dim)`` that maps the ball to its volume-one
    version, where ``dim = beta n (n-1) / 2 + n``.
    """
    spec = spec if isinstance(spec, EnsembleSpec) else EnsembleSpec(*spec)
    est = estimate_log_I(spec, samples, seed)
    log_c = log_c_n_beta(spec.n, spec.beta)
    value = log_c + est.value
    surrogate = asymptotic_volume_radius(spec, "n2")
    meta = dict(est.metadata)
    meta.update(
        {
            "log_c_n_beta": log_c,
            "log_I": est.value,
            "radius_n2": math.exp(2.0 / spec.n**2 * value),
            "surrogate_radius_n2": surrogate.value,
            "surrogate_kind": surrogate.kind,
            "unit_volume_scale": math.exp(-value / spec.dim),
        }
    )
    return MonteCarloEstimate(value, est.stderr, est.n_samples, seed, meta)


def parse_t_grid(text):
    """Parse ``lo:hi:count`` into an inclusive linear grid."""
    parts = str(text).split(":")
    if len(parts) != 3:
        raise ValueError(f"t-grid must look like lo:hi:count, got {text!r}")
    lo, hi = float(parts[0]), float(parts[1])
    count = check_int(int(parts[2]), "count", minimum=1)
    if not (0 < lo <= hi) or not math.isfinite(hi):
        raise ValueError(f"t-grid needs 0 < lo <= hi, got {lo}, {hi}")
    return np.linspace(lo, hi, count)


def intersection_experiment(p, q, beta, n, t_grid, reps, chain=None):
    """Fraction of uniform ``p``-ball draws lying in the dilated ``q``-ball.

    The volume-one normalisations enter through ``a_pq``. A draw is counted
    at ``t`` when ``wlln_statistic * a_pq <= t``. One sample set serves the
    whole grid, so the fractions are nondecreasing in ``t`` by construction.
    Returns a list of ``(t, MonteCarloEstimate)``.
    """
    p = check_p(p)
    q = check_p(q, "q")
    if p == q:
        raise ValueError("p and q must differ")
    reps = check_int(reps, "reps", minimum=100)
    grid = np.asarray(t_grid, dtype=float).reshape(-1)
    if grid.size == 0 or np.any(grid <= 0) or not np.all(np.isfinite(grid)):
        raise ValueError("t_grid must contain finite positive values")
    spec = EnsembleSpec(n, beta, p)
    cfg = chain if chain is not None else ChainConfig()
    batch = sample_unit_ball_eigen(spec, reps, cfg)
    scaled = np.sort(wlln_statistic(batch, p, q) * a_pq(p, q))
    threshold = intersection_threshold(p, q).value
    out = []
    for t in grid:
        frac = np.searchsorted(scaled, t, side="right") / reps
        meta = {"t_over_threshold": float(t / threshold), "threshold": threshold}
        out.append((float(t), MonteCarloEstimate(float(frac), math.sqrt(frac * (1 - frac) / reps), reps,
                                                 cfg.seed, meta)))
    return out


"""Eigenvalue samplers for the log-gas ``exp(-sum |x_i|^p) prod |x_i - x_j|^beta`` and unit balls.

Three sources are provided:

* ``mcmc``: Metropolis-within-Gibbs for any ``p``;
* ``tridiagonal_oracle``: exact sampling at ``p = 2`` through the tridiagonal
  beta-Hermite model;
* ``transform``: ``U^(1/(n+m)) X / ||X||_p``, which turns a log-gas draw ``X``
  into the eigenvalues of a uniform point of the matrix unit ball.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from scipy.linalg import eigh_tridiagonal

from ._validation import DomainError, check_int, check_p, check_positive, check_rows
from .constants import EnsembleSpec

SOURCES = ("mcmc", "tridiagonal_oracle", "transform")

# gaps below this make the log-density -inf; such proposals are rejected
COLLISION_GAP = 1e-300
# sizes above which the tridiagonal oracle switches from batched dense eigvalsh
_DENSE_MAX_N = 128
_DENSE_CHUNK = 2048


def default_threads():
    """Worker count from ``MBL_THREADS`` or the number of logical cores."""
    env = os.environ.get("MBL_THREADS")
    if env:
        return check_int(int(env), "MBL_THREADS", minimum=1)
    return os.cpu_count() or 1


@dataclass(frozen=True)
class ChainConfig:
    """Settings of the Metropolis-within-Gibbs sampler.

    ``thinning=None`` keeps one state every ``n`` sweeps. ``n_chains=None``
    runs one chain per requested draw. Chains are grouped in blocks of
    ``block_size``, and each block owns a spawned random stream, so results
    do not depend on ``threads``.
    """

    burn_in: int = 1000
    thinning: int = None
    proposal_scale: float = 0.5
    target_acceptance: float = 0.44
    seed: int = 0
    n_chains: int = None
    block_size: int = 256
    threads: int = None

    def __post_init__(self):
        check_int(self.burn_in, "burn_in", minimum=0)
        if self.thinning is not None:
            check_int(self.thinning, "thinning", minimum=1)
        check_positive(self.proposal_scale, "proposal_scale")
        if not 0.0 < self.target_acceptance < 1.0:
            raise ValueError(f"target_acceptance must lie in (0, 1), got {self.target_acceptance}")
        check_int(self.seed, "seed", minimum=0)
        if self.n_chains is not None:
            check_int(self.n_chains, "n_chains", minimum=1)
        check_int(self.block_size, "block_size", minimum=1)
        if self.threads is not None:
            check_int(self.threads, "threads", minimum=1)

    def as_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class EigenSample:
    """One unordered eigenvalue tuple."""

    values: np.ndarray
    spec: EnsembleSpec
    source: str

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float).reshape(-1)
        if vals.size != self.spec.n:
            raise ValueError(f"expected {self.spec.n} values, got {vals.size}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("values must be finite")
        if self.source not in SOURCES:
            raise ValueError(f"source must be one of {SOURCES}")
        object.__setattr__(self, "values", vals)


@dataclass
class EigenBatch:
    """Many eigenvalue tuples of one ensemble, stored row-wise.

    Iterating or indexing yields :class:`EigenSample` objects.
    """

    values: np.ndarray
    spec: EnsembleSpec
    source: str
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = check_rows(self.values, self.spec.n)
        if self.source not in SOURCES:
            raise ValueError(f"source must be one of {SOURCES}")

    def __len__(self):
        return self.values.shape[0]

    def __getitem__(self, i):
        if isinstance(i, slice):
            return EigenBatch(self.values[i], self.spec, self.source, dict(self.metadata))
        return EigenSample(self.values[i], self.spec, self.source)

    def __iter__(self):
        for row in self.values:
            yield EigenSample(row, self.spec, self.source)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)


def _as_spec(spec):
    return spec if isinstance(spec, EnsembleSpec) else EnsembleSpec(*spec)


def _abs_pow(x, p):
    if math.isinf(p):
        return np.where(np.abs(x) <= 1.0, 0.0, np.inf)
    return np.abs(x) ** p


def _logdensity_rows(x, p, beta):
    n = x.shape[1]
    out = -np.sum(_abs_pow(x, p), axis=1)
    if n > 1:
        iu = np.triu_indices(n, 1)
        d = np.abs(x[:, iu[0]] - x[:, iu[1]])
        with np.errstate(divide="ignore"):
            out = out + beta * np.sum(np.log(d), axis=1)
        out[np.any(d < COLLISION_GAP, axis=1)] = -np.inf
    return out


def loggas_logdensity(spec, x):
    """Unnormalised log-density ``-sum |x_i|^p + beta sum_{i<j} log|x_i - x_j|``.

    Accepts one tuple (returns a float) or a 2-D array of tuples. Collisions
    give ``-inf``.
    """
    spec = _as_spec(spec)
    arr = np.asarray(x, dtype=float)
    rows = check_rows(arr, spec.n, "x")
    out = _logdensity_rows(rows, spec.p, spec.beta)
    return float(out[0]) if arr.ndim == 1 else out


def _geyer_ess(series):
    """Effective sample size of one chain by Geyer's initial positive sequence."""
    m = series.size
    if m < 4:
        return float(m)
    x = series - series.mean()
    var = float(np.dot(x, x)) / m
    if var == 0.0:
        return float(m)
    f = np.fft.rfft(x, 2 * m)
    acov = np.fft.irfft(f * np.conj(f))[:m] / m
    rho = acov / var
    tau = -1.0
    for k in range(0, m - 1, 2):
        pair = rho[k] + rho[k + 1]
        if pair <= 0:
            break
        tau += 2.0 * pair
    return m / max(tau, 1.0)


def _run_block(spec, n_chains, keep, thin, cfg, seed_seq):
    """Advance ``n_chains`` chains together; returns kept states (keep, chains, n)."""
    rng = np.random.default_rng(seed_seq)
    n, p, beta = spec.n, spec.p, spec.beta
    init_scale = max(1.0, beta * n / 2.0) ** (1.0 / p)
    x = rng.standard_normal((n_chains, n)) * init_scale
    while np.any(np.isinf(_logdensity_rows(x, p, beta))):
        x = rng.standard_normal((n_chains, n)) * init_scale
    log_scale = np.full(n_chains, math.log(cfg.proposal_scale * init_scale))
    idx = np.arange(n)
    out = np.empty((keep, n_chains, n))
    accepted = 0
    proposals = 0
    total = cfg.burn_in + keep * thin
    for sweep in range(total):
        burn = sweep < cfg.burn_in
        acc_sweep = np.zeros(n_chains)
        scale = np.exp(log_scale)
        noise = rng.standard_normal((n, n_chains))
        logu = np.log(rng.random((n, n_chains)))
        for k in range(n):
            old = x[:, k]
            new = old + scale * noise[k]
            delta = _abs_pow(old, p) - _abs_pow(new, p)
            if n > 1:
                others = x[:, idx != k]
                d_new = np.abs(new[:, None] - others)
                d_old = np.abs(old[:, None] - others)
                with np.errstate(divide="ignore"):
                    delta = delta + beta * np.sum(np.log(d_new) - np.log(d_old), axis=1)
                delta[np.any(d_new < COLLISION_GAP, axis=1)] = -np.inf
            ok = logu[k] < delta
            x[ok, k] = new[ok]
            acc_sweep += ok
        if burn:
            # Robbins-Monro on the log proposal scale, frozen after burn-in
            gain = (sweep + 1.0) ** -0.6
            log_scale += gain * (acc_sweep / n - cfg.target_acceptance)
        else:
            accepted += int(acc_sweep.sum())
            proposals += n * n_chains
            j = sweep - cfg.burn_in
            if (j + 1) % thin == 0:
                out[j // thin] = x
    return out, accepted, proposals, np.exp(log_scale)


def sample_loggas_mcmc(spec, count, chain=None):
    """Draw ``count`` tuples from the log-gas by Metropolis-within-Gibbs.

    Each sweep updates the coordinates in fixed order with Gaussian
    random-walk proposals. The per-chain proposal scale is tuned during
    burn-in toward ``chain.target_acceptance`` and then frozen, so the
    retained states come from a homogeneous Markov chain. Diagnostics are
    attached as ``metadata``: acceptance rate, final proposal scales and an
    effective sample size of ``sum x_i^2``. When every chain keeps a single
    state, the ESS is the number of independent chains.
    """
    spec = _as_spec(spec)
    if math.isinf(spec.p):
        raise DomainError("the log-gas needs a finite p")
    count = check_int(count, "count", minimum=1)
    cfg = chain if chain is not None else ChainConfig()
    thin = cfg.thinning if cfg.thinning is not None else spec.n
    n_chains = cfg.n_chains if cfg.n_chains is not None else count
    keep = -(-count // n_chains)
    sizes = [min(cfg.block_size, n_chains - s) for s in range(0, n_chains, cfg.block_size)]
    seeds = np.random.SeedSequence(cfg.seed).spawn(len(sizes))
    threads = cfg.threads if cfg.threads is not None else default_threads()
    jobs = [(spec, size, keep, thin, cfg, seed) for size, seed in zip(sizes, seeds)]
    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda a: _run_block(*a), jobs))
    else:
        results = [_run_block(*a) for a in jobs]
    # order-stable merge: chain-major, then state index within the chain
    states = np.concatenate([r[0] for r in results], axis=1)
    values = states.transpose(1, 0, 2).reshape(-1, spec.n)[:count]
    accepted = sum(r[1] for r in results)
    proposals = sum(r[2] for r in results)
    scales = np.concatenate([r[3] for r in results])
    if keep >= 4:
        stat = np.sum(states**2, axis=2)
        ess = float(sum(_geyer_ess(stat[:, c]) for c in range(stat.shape[1])))
        ess = min(ess, float(count))
        ess_method = "geyer_initial_positive_sequence"
    else:
        ess, ess_method = float(values.shape[0]), "independent_chains"
    meta = {
        "chain": cfg.as_dict(),
        "thinning_used": thin,
        "n_chains": n_chains,
        "states_per_chain": keep,
        "acceptance_rate": accepted / proposals if proposals else math.nan,
        "proposal_scale_median": float(np.median(scales)),
        "ess": ess,
        "ess_method": ess_method,
    }
    return EigenBatch(values, spec, "mcmc", meta)


def _tridiagonal_parts(n, beta, count, rng):
    diag = rng.standard_normal((count, n)) * math.sqrt(0.5)
    dof = beta * np.arange(n - 1, 0, -1, dtype=float)
    off = np.sqrt(rng.chisquare(dof, size=(count, n - 1))) / 2.0
    return diag, off


def sample_beta_hermite(n, beta, count, seed=None):
    """Exact draws with density proportional to ``exp(-sum x_i^2) prod |x_i - x_j|^beta``.

    Uses the symmetric tridiagonal beta-Hermite matrix. Its diagonal is
    N(0, 2) and its off-diagonal entries are chi with ``beta (n-1), ...,
    beta`` degrees of freedom. The matrix is scaled by 1/2, so the
    eigenvalues have exactly the target density. Works for any ``beta > 0``.
    """
    n = check_int(n, "n", minimum=1)
    beta = check_positive(beta, "beta")
    count = check_int(count, "count", minimum=1)
    rng = np.random.default_rng(seed)
    spec = EnsembleSpec(n, beta, 2.0)
    diag, off = _tridiagonal_parts(n, beta, count, rng)
    if n == 1:
        vals = diag
    elif n <= _DENSE_MAX_N:
        vals = np.empty((count, n))
        for s in range(0, count, _DENSE_CHUNK):
            e = min(s + _DENSE_CHUNK, count)
            mats = np.zeros((e - s, n, n))
            r = np.arange(n)
            mats[:, r, r] = diag[s:e]
            mats[:, r[:-1], r[1:]] = off[s:e]
            mats[:, r[1:], r[:-1]] = off[s:e]
            vals[s:e] = np.linalg.eigvalsh(mats)
    else:
        vals = np.empty((count, n))
        for i in range(count):
            try:
                vals[i] = eigh_tridiagonal(diag[i], off[i], eigvals_only=True)
            except np.linalg.LinAlgError as exc:
                raise RuntimeError(
                    f"tridiagonal eigensolver failed on draw {i}: diag={diag[i].tolist()}, "
                    f"off={off[i].tolist()}"
                ) from exc
    # eigenvalues come out sorted; an independent shuffle makes the tuple exchangeable
    vals = rng.permuted(vals, axis=1)
    meta = {"seed": int(seed)} if isinstance(seed, (int, np.integer)) else {}
    return EigenBatch(vals, spec, "tridiagonal_oracle", meta)


def schechtman_zinn_transform(x, u, p=None, beta=None):
    """Map a log-gas draw ``x`` and a uniform ``u`` to ``u^(1/(n+m)) x / ||x||_p``.

    ``x`` may be an :class:`EigenSample`, an :class:`EigenBatch`, or a raw
    array together with ``beta``. ``m = beta n (n-1) / 2``. The output has
    l_p norm ``u^(1/(n+m))``.
    """
    if isinstance(x, (EigenSample, EigenBatch)):
        spec = x.spec
        if p is not None and check_p(p) != spec.p:
            raise ValueError(f"p={p} does not match the sample's p={spec.p}")
        vals = np.atleast_2d(x.values)
    else:
        vals = np.asarray(x, dtype=float)
        if p is None or beta is None:
            raise ValueError("raw arrays need both p and beta")
        spec = EnsembleSpec(vals.shape[-1], beta, p)
        vals = check_rows(vals, spec.n, "x")
    if math.isinf(spec.p):
        raise DomainError("the transform needs a finite p")
    u = np.asarray(u, dtype=float)
    if np.any(u <= 0) or np.any(u > 1):
        raise ValueError("u must lie in (0, 1]")
    norms = np.sum(np.abs(vals) ** spec.p, axis=1) ** (1.0 / spec.p)
    if np.any(norms == 0):
        raise DomainError("cannot normalise the zero vector")
    radius = u.reshape(-1) ** (1.0 / (spec.n + spec.m))
    out = vals / norms[:, None] * radius[:, None]
    if isinstance(x, EigenSample):
        return EigenSample(out[0], spec, "transform")
    if isinstance(x, EigenBatch):
        meta = dict(x.metadata)
        meta["base_source"] = x.source
        return EigenBatch(out, spec, "transform", meta)
    return out[0] if np.asarray(x).ndim == 1 else out


def sample_unit_ball_eigen(spec, count, chain=None):
    """Eigenvalue tuples of matrices uniform in the unit ``p``-ball.

    The log-gas draw comes from the tridiagonal oracle when ``p = 2`` and
    from MCMC otherwise. The chosen source is recorded in
    ``metadata["base_source"]``. The tuples are exchangeable, so no explicit
    random permutation is needed.
    """
    spec = _as_spec(spec)
    if math.isinf(spec.p):
        raise DomainError("sampling the p = inf ball is not supported")
    count = check_int(count, "count", minimum=1)
    cfg = chain if chain is not None else ChainConfig()
    base_seq, u_seq = np.random.SeedSequence(cfg.seed).spawn(2)
    if spec.p == 2.0:
        base = sample_beta_hermite(spec.n, spec.beta, count, base_seq)
        base.metadata["seed"] = cfg.seed
    else:
        base = sample_loggas_mcmc(spec, count, replace(cfg, seed=int(base_seq.generate_state(1)[0])))
    u = 1.0 - np.random.default_rng(u_seq).random(count)
    out = schechtman_zinn_transform(base, u)
    out.metadata["seed"] = cfg.seed
    return out


def sample_classical_lp_ball(n, p, count, seed=None):
    """Uniform points of the l_p^n unit ball, shape ``(count, n)``.

    Coordinates with density proportional to ``exp(-|x|^p)`` are normalised
    to the sphere and scaled by ``U^(1/n)``. ``p = inf`` samples the cube
    directly.
    """
    n = check_int(n, "n", minimum=1)
    p = check_p(p, allow_inf=True)
    count = check_int(count, "count", minimum=1)
    rng = np.random.default_rng(seed)
    if math.isinf(p):
        return rng.uniform(-1.0, 1.0, size=(count, n))
    g = rng.standard_gamma(1.0 / p, size=(count, n)) ** (1.0 / p)
    g *= rng.choice((-1.0, 1.0), size=(count, n))
    norms = np.sum(np.abs(g) ** p, axis=1) ** (1.0 / p)
    r = rng.random(count) ** (1.0 / n)
    return g / norms[:, None] * r[:, None]


def log_volume_lp_ball(n, p):
    """Log volume of the l_p^n unit ball, ``n log(2 Gamma(1+1/p)) - log Gamma(1+n/p)``."""
    n = check_int(n, "n", minimum=1)
    p = check_p(p, allow_inf=True)
    if math.isinf(p):
        return n * math.log(2.0)
    return n * (math.log(2.0) + math.lgamma(1 + 1 / p)) - math.lgamma(1 + n / p)

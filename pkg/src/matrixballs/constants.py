"""Closed-form constants: Weyl normalisation, Delta(p), moment ratios and thresholds.

Products of gamma functions are evaluated in the log domain throughout.
``p = math.inf`` selects the structurally different sup-norm branches.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from ._validation import DegenerateInputWarning, check_int, check_p, check_positive
from .ullman import free_entropy, ullman_abs_moment

INF = math.inf


@dataclass(frozen=True)
class EnsembleSpec:
    """Matrix size ``n``, Dyson index ``beta`` and norm exponent ``p`` of a ball."""

    n: int
    beta: float
    p: float

    def __post_init__(self):
        object.__setattr__(self, "n", check_int(self.n, "n", minimum=1))
        object.__setattr__(self, "beta", check_positive(self.beta, "beta"))
        object.__setattr__(self, "p", check_p(self.p, allow_inf=True))

    @property
    def m(self):
        """Homogeneity degree ``beta n (n-1) / 2`` of the Vandermonde weight."""
        return self.beta * self.n * (self.n - 1) / 2.0

    @property
    def dim(self):
        """Real dimension of the space of self-adjoint matrices."""
        return self.m + self.n

    @property
    def p_is_inf(self):
        return math.isinf(self.p)

    def as_dict(self):
        return {"n": self.n, "beta": self.beta, "p": "inf" if self.p_is_inf else self.p}


def log_c_n_beta(n, beta):
    """Log of the Weyl integration constant c_{n,beta}."""
    n = check_int(n, "n", minimum=1)
    beta = check_positive(beta, "beta")
    k = np.arange(1, n + 1, dtype=float)
    terms = (
        math.log(2.0)
        + 0.5 * beta * k * math.log(2.0 * math.pi)
        - 0.5 * beta * math.log(2.0)
        - gammaln(0.5 * beta * k)
    )
    head = math.log(2.0) + 0.5 * beta * math.log(math.pi) - gammaln(0.5 * beta)
    return math.fsum(terms) - gammaln(n + 1.0) - head


def c_n_beta_limit(beta):
    """``(4 pi / beta)^(beta/2) e^(3 beta / 4)``, the limit of ``n^(beta/2) c^(2/n^2)``."""
    beta = check_positive(beta, "beta")
    return math.exp(0.5 * beta * math.log(4.0 * math.pi / beta) + 0.75 * beta)


def log_delta_p(p):
    p = check_p(p, allow_inf=True)
    if math.isinf(p):
        return -math.log(2.0)
    inner = math.log(p) + 0.5 * math.log(math.pi) + gammaln(p / 2) - 0.5 - gammaln((p + 1) / 2)
    return -math.log(2.0) + inner / p


def delta_p_closed_form(p):
    """Limit constant ``Delta(p)``; ``Delta(inf) = 1/2``."""
    return math.exp(log_delta_p(p))


def delta_p_entropy_form(p):
    """``Delta(p)`` via the free entropy minus ``(1/p) log E|U|^p``."""
    p = check_p(p)
    return math.exp(free_entropy(p) - math.log(ullman_abs_moment(p, p)) / p)


def b_p(p):
    """Edge of the limiting eigenvalue law for the weight ``exp(-n beta |x|^p / (2p))``."""
    p = check_p(p)
    return math.exp((math.log(p) + 0.5 * math.log(math.pi) + gammaln(p / 2) - gammaln((p + 1) / 2)) / p)


def C_pq(p, q):
    """Moment ratio ``(E|U|^q)^(1/q) / (E|U|^p)^(1/p)`` for U ~ U(p)."""
    p = check_p(p)
    q = check_p(q, "q")
    return math.exp(math.log(ullman_abs_moment(p, q)) / q - math.log(ullman_abs_moment(p, p)) / p)


def a_p_beta(p, beta):
    """``Delta(p)^beta (4 pi / beta)^(beta/2) e^(3 beta / 4)``."""
    beta = check_positive(beta, "beta")
    return math.exp(beta * log_delta_p(p)) * c_n_beta_limit(beta)


def a_pq(p, q):
    """``Delta(q) / Delta(p)``, the beta-free ratio of the limiting volume radii."""
    return math.exp(log_delta_p(q) - log_delta_p(p))


@dataclass(frozen=True)
class Threshold:
    value: float
    degenerate: bool = False

    def __float__(self):
        return self.value


def intersection_threshold(p, q):
    """Critical dilation ``e^(1/(2p) - 1/(2q)) (2p/(p+q))^(1/q)``.

    For ``p == q`` there is no dichotomy; a :class:`DegenerateInputWarning`
    is issued and the trivial value 1 is returned, flagged ``degenerate``.
    """
    p = check_p(p)
    q = check_p(q, "q")
    if p == q:
        warnings.warn("p == q: the threshold theorem excludes this case", DegenerateInputWarning,
                      stacklevel=2)
        return Threshold(1.0, degenerate=True)
    return Threshold(math.exp(0.5 / p - 0.5 / q + math.log(2.0 * p / (p + q)) / q))


def A_pq_classical(p, q):
    """Threshold constant for classical l_p^n balls (``p`` may be infinite)."""
    p = check_p(p, allow_inf=True)
    q = check_p(q, "q", allow_inf=True)
    if math.isinf(q):
        raise ValueError("q = inf is not supported by the classical formula")
    if p < 1 or q < 1:
        raise ValueError(f"the classical formula needs p, q >= 1, got p={p}, q={q}")
    if p == q:
        raise ValueError("p must differ from q")
    if math.isinf(p):
        return math.exp(-gammaln(1 + 1 / q) + math.log((q + 1) / (q * math.e)) / q)
    log_val = (
        (1 + 1 / q) * gammaln(1 + 1 / p)
        - gammaln(1 + 1 / q)
        - gammaln((q + 1) / p) / q
        + 1 / p
        - 1 / q
        + math.log(p / q) / q
    )
    return math.exp(log_val)


@dataclass(frozen=True)
class AsymptoticRadius:
    """Large-n surrogate of a normalised volume; never an exact finite-n value."""

    value: float
    root: str
    n: int
    kind: str = "asymptotic surrogate"

    def __float__(self):
        return self.value


def asymptotic_volume_radius(spec, root="n2"):
    """Right-hand side of the volume asymptotics at finite ``n``.

    ``root="n2"`` approximates ``vol^(2/n^2)``;
    ``root="beta_n2"`` approximates ``vol^(2/(beta n^2))``.
    """
    if not isinstance(spec, EnsembleSpec):
        spec = EnsembleSpec(*spec)
    inv_p = 0.0 if spec.p_is_inf else 1.0 / spec.p
    log_val = -spec.beta * (inv_p + 0.5) * math.log(spec.n) + math.log(a_p_beta(spec.p, spec.beta))
    if root == "beta_n2":
        log_val /= spec.beta
    elif root != "n2":
        raise ValueError(f"root must be 'n2' or 'beta_n2', got {root!r}")
    return AsymptoticRadius(math.exp(log_val), root, spec.n)


def log_volume_surrogate(spec):
    """``(n^2 / 2) log`` of the ``vol^(2/n^2)`` surrogate, comparable to a log volume."""
    r = asymptotic_volume_radius(spec, "n2")
    return 0.5 * spec.n**2 * math.log(r.value)

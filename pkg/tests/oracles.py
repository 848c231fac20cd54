"""Reference values computed independently of the package code paths."""

import math

import numpy as np
from scipy.special import gammaln, roots_hermite


def selberg_log_I_inf(n, beta):
    """log of int_{[-1,1]^n} prod |x_i - x_j|^beta dx via Selberg's integral."""
    g = beta / 2.0
    m = beta * n * (n - 1) / 2.0
    terms = [
        2 * gammaln(1 + k * g) + gammaln(1 + (k + 1) * g) - gammaln(2 + (n + k - 1) * g) - gammaln(1 + g)
        for k in range(n)
    ]
    return (n + m) * math.log(2.0) + math.fsum(terms)


def square_pair_integral(beta):
    """int int_{[-1,1]^2} |x - y|^beta dx dy."""
    return 2.0 ** (beta + 3) / ((beta + 1) * (beta + 2))


def log_mehta_gaussian(n, beta):
    """log int_{R^n} exp(-sum x^2) prod |x_i - x_j|^beta dx."""
    m = beta * n * (n - 1) / 2.0
    s = sum(gammaln(1 + j * beta / 2) - gammaln(1 + beta / 2) for j in range(1, n + 1))
    return -(n + m) / 2 * math.log(2.0) + n / 2 * math.log(2 * math.pi) + s


def log_I_p2(n, beta):
    """log I_{n,beta,2} from the Gaussian integral through polar integration."""
    m = beta * n * (n - 1) / 2.0
    return log_mehta_gaussian(n, beta) - gammaln(1 + (n + m) / 2)


def hermite_delta_n(n):
    """Delta_n(2) attained at the roots of the n-th Hermite polynomial."""
    x = roots_hermite(n)[0]
    x = x / np.sqrt(np.sum(x**2))
    iu = np.triu_indices(n, 1)
    logv = np.sum(np.log(np.abs(x[iu[0]] - x[iu[1]])))
    return math.exp(2.0 / (n * (n - 1)) * logv + 0.5 * math.log(n))


def log_c_direct(n, beta):
    """c_{n,beta} by the literal product formula (small n only, no log-gamma tricks)."""
    val = 1.0 / math.factorial(n) / (2 * math.pi ** (beta / 2) / math.gamma(beta / 2))
    for k in range(1, n + 1):
        val *= 2 * (2 * math.pi) ** (beta * k / 2) / (2 ** (beta / 2) * math.gamma(beta * k / 2))
    return math.log(val)


def hypergeometric_h(x, p):
    """Ullman density via (p/pi)|x|^(p-1) sqrt(1-x^2) 2F1(1/2, (1+p)/2; 3/2; 1-x^2)."""
    from scipy.special import hyp2f1

    ax = abs(x)
    return p / math.pi * ax ** (p - 1) * math.sqrt(1 - ax * ax) * hyp2f1(0.5, (1 + p) / 2, 1.5, 1 - ax * ax)

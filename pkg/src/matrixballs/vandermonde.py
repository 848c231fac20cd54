"""Log-Vandermonde products, Gauss-Lobatto Chebyshev nodes and Fekete points of [-1, 1]."""

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from ._validation import SingularityError, check_int, check_points

NODE_KINDS = ("gauss_lobatto", "fekete", "generic")

# rows per block when summing the pair matrix; keeps memory at O(block * n)
_PAIR_BLOCK = 512


@dataclass(frozen=True)
class NodeSet:
    """Strictly increasing nodes on the real line."""

    points: np.ndarray
    kind: str = "generic"

    def __post_init__(self):
        pts = check_points(self.points, "points")
        if self.kind not in NODE_KINDS:
            raise ValueError(f"kind must be one of {NODE_KINDS}, got {self.kind!r}")
        if pts.size > 1 and np.any(np.diff(pts) <= 0):
            raise ValueError("points must be strictly increasing")
        if self.kind != "generic" and (pts[0] != -1.0 or pts[-1] != 1.0):
            raise ValueError(f"{self.kind} nodes must have endpoints exactly -1 and 1")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return self.points.size

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.points, dtype=dtype)


def sum_log_gaps(sorted_points):
    """Sum of ``log(x_j - x_i)`` over i < j for sorted, pairwise distinct input."""
    x = sorted_points
    n = x.size
    total = 0.0
    for start in range(0, n - 1, _PAIR_BLOCK):
        stop = min(start + _PAIR_BLOCK, n - 1)
        rows = x[start:stop, None]
        d = x[None, :] - rows
        # keep the strict upper triangle of this block of rows
        cols = np.arange(n)[None, :]
        mask = cols > np.arange(start, stop)[:, None]
        total += float(np.log(d[mask]).sum())
    return total


def log_vandermonde(points):
    """Return ``sum_{i<j} log|t_j - t_i|``.

    Raises :class:`SingularityError` if two points coincide.
    """
    x = check_points(points, "points", min_size=2)
    x = np.sort(x)
    if np.any(np.diff(x) == 0):
        raise SingularityError("log_vandermonde is -inf: points are not pairwise distinct")
    return sum_log_gaps(x)


def gauss_lobatto_nodes(n):
    """Nodes ``-cos((j-1) pi / (n-1))``, j = 1..n, made exactly symmetric."""
    n = check_int(n, "n", minimum=2)
    j = np.arange(n)
    t = -np.cos(j * np.pi / (n - 1))
    half = n // 2
    t[n - half:] = -t[:half][::-1]
    if n % 2:
        t[half] = 0.0
    t[0], t[-1] = -1.0, 1.0
    return NodeSet(t, "gauss_lobatto")


def gl_log_product(n):
    """Closed form of the log Vandermonde product at the Gauss-Lobatto nodes."""
    n = check_int(n, "n", minimum=2)
    return (n + 1 - 0.5 * n * n) * math.log(2.0) + 0.5 * n * math.log(n - 1)


def gl_vandermonde_identity_gap(n):
    """Absolute gap between the O(n^2) log product and its closed form."""
    return abs(log_vandermonde(gauss_lobatto_nodes(n).points) - gl_log_product(n))


def _jacobi11_roots(m):
    """Roots of P_m^{(1,1)} as eigenvalues of its symmetric recurrence matrix."""
    if m == 0:
        return np.empty(0)
    k = np.arange(1, m, dtype=float)
    off = np.sqrt(k * (k + 2.0) / ((2.0 * k + 1.0) * (2.0 * k + 3.0)))
    roots = eigh_tridiagonal(np.zeros(m), off, eigvals_only=True)
    roots = np.sort(roots)
    # the spectrum is symmetric about zero; enforce it exactly
    roots = 0.5 * (roots - roots[::-1])
    if m % 2:
        roots[m // 2] = 0.0
    return roots


def fekete_points(n):
    """Fekete points of [-1, 1]: the endpoints plus the roots of P_{n-2}^{(1,1)}."""
    n = check_int(n, "n", minimum=2)
    pts = np.concatenate(([-1.0], _jacobi11_roots(n - 2), [1.0]))
    return NodeSet(pts, "fekete")


def k_diameter(k):
    """The k-diameter of [-1, 1], evaluated at its Fekete points."""
    k = check_int(k, "k", minimum=2)
    return math.exp(2.0 / (k * (k - 1)) * log_vandermonde(fekete_points(k).points))

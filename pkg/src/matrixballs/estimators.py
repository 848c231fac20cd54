"""scikit-learn style wrappers around the functional API."""

import numpy as np
from scipy import stats
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ._validation import check_p
from .constants import C_pq, EnsembleSpec
from .delta_opt import OptimizerConfig, optimize_delta_n
from .experiments import ks_to_scaled_ullman, wlln_statistic
from .measures import EmpiricalMeasure
from .sampler import ChainConfig, sample_unit_ball_eigen
from .ullman import UllmanDist


class ScaledUllmanFit(TransformerMixin, BaseEstimator):
    """Fit the scale of an Ullman law to pooled eigenvalues.

    Parameters
    ----------
    p : float
        Shape exponent of the Ullman law.
    scale_exponent : float
        Rows of length ``n`` are multiplied by ``n**(-scale_exponent)`` before
        pooling.

    Attributes
    ----------
    scale_ : float
        Fitted support half-width.
    ks_ : float
        Kolmogorov-Smirnov distance of the pooled atoms to the fitted law.
    """

    def __init__(self, p=2.0, scale_exponent=0.0):
        self.p = p
        self.scale_exponent = scale_exponent

    def _pooled(self, X):
        X = check_array(X, ensure_2d=False)
        if X.ndim == 1:
            X = X.reshape(1, -1)
        return X * float(X.shape[1]) ** (-self.scale_exponent)

    def fit(self, X, y=None):
        p = check_p(self.p)
        atoms = self._pooled(X)
        self.scale_, self.ks_ = ks_to_scaled_ullman(EmpiricalMeasure.from_values(atoms), p)
        self.dist_ = UllmanDist(p, self.scale_)
        self.n_features_in_ = atoms.shape[1]
        return self

    def transform(self, X):
        """Scaled eigenvalues divided by the fitted half-width (support [-1, 1])."""
        check_is_fitted(self, "scale_")
        return self._pooled(X) / self.scale_

    def score(self, X, y=None):
        """Negative KS distance of ``X`` to the fitted law (higher is better)."""
        check_is_fitted(self, "scale_")
        atoms = self._pooled(X).ravel()
        return -float(stats.kstest(atoms, self.dist_.cdf).statistic)


class EigenNormStatistic(TransformerMixin, BaseEstimator):
    """Map eigenvalue rows to ``n^(1/p - 1/q) ||row||_q``.

    ``fit`` only validates the input and records ``limit_ = C_pq(p, q)``.
    """

    def __init__(self, p=2.0, q=4.0):
        self.p = p
        self.q = q

    def fit(self, X, y=None):
        X = check_array(X)
        self.limit_ = C_pq(check_p(self.p), check_p(self.q, "q"))
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "limit_")
        X = check_array(X)
        return np.asarray(wlln_statistic(X, self.p, self.q)).reshape(-1, 1)


class DeltaMaximizer(BaseEstimator):
    """Estimator form of :func:`optimize_delta_n`; ``fit`` takes no data.

    Attributes
    ----------
    points_ : ndarray
        Maximising configuration on the unit l_p sphere.
    delta_n_ : float
    result_ : OptimizerResult
    """

    def __init__(self, n=10, p=2.0, tol=1e-10, max_iter=100_000, restarts=5, seed=0):
        self.n = n
        self.p = p
        self.tol = tol
        self.max_iter = max_iter
        self.restarts = restarts
        self.seed = seed

    def fit(self, X=None, y=None):
        cfg = OptimizerConfig(self.tol, self.max_iter, self.restarts, self.seed)
        self.result_ = optimize_delta_n(self.p, self.n, cfg)
        self.points_ = self.result_.points
        self.delta_n_ = self.result_.delta_n
        return self


class MatrixBallSampler(BaseEstimator):
    """Draw eigenvalues of uniform matrices in the unit p-ball.

    ``fit`` fixes the ensemble. ``sample(count)`` returns an
    :class:`~matrixballs.sampler.EigenBatch`.
    """

    def __init__(self, n=4, beta=2.0, p=2.0, burn_in=1000, thinning=None, seed=0):
        self.n = n
        self.beta = beta
        self.p = p
        self.burn_in = burn_in
        self.thinning = thinning
        self.seed = seed

    def fit(self, X=None, y=None):
        self.spec_ = EnsembleSpec(self.n, self.beta, self.p)
        self.chain_ = ChainConfig(burn_in=self.burn_in, thinning=self.thinning, seed=self.seed)
        return self

    def sample(self, count):
        check_is_fitted(self, "spec_")
        return sample_unit_ball_eigen(self.spec_, count, self.chain_)

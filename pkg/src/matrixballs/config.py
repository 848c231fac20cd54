"""Numerical defaults. Every tolerance used by an adaptive routine lives here."""

from dataclasses import dataclass, asdict


@dataclass(frozen=True)
class QuadratureConfig:
    """Tolerances handed to :func:`scipy.integrate.quad`."""

    epsabs: float = 1e-13
    epsrel: float = 1e-11
    limit: int = 200
    #: absolute accuracy target for the tabulated CDF used on large arrays
    cdf_atol: float = 1e-8

    def as_dict(self):
        return asdict(self)

    def quad_kwargs(self):
        return {"epsabs": self.epsabs, "epsrel": self.epsrel, "limit": self.limit}


DEFAULT_QUADRATURE = QuadratureConfig()

# Arrays longer than this go through the tabulated CDF instead of one quad call per point.
CDF_TABLE_THRESHOLD = 256

# Sample-size cap for plain Monte Carlo estimation of I_{n,beta,p}.
LOG_I_MAX_N = 8

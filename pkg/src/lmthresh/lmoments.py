"""Sample probability weighted moments, L-statistics and GPd ratio geometry.

All sample estimators work on ascending order statistics. The PWM weights
``C(n-i, r) / C(n-1, r)`` are built with a running product over ranks so
that samples in the tens of thousands never touch factorials.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSampleError, DomainError, InsufficientSampleError, NonexistentMomentError

__all__ = [
    "ObservationSample",
    "LStatSet",
    "PwmSet",
    "as_sample",
    "pwm_weights",
    "pwm_estimates",
    "l_statistics",
    "l_ratios_rows",
    "gpd_g",
    "gpd_g_inv",
    "gpd_population_lmoments",
    "lmrd_lower_bound",
    "LMOM_FROM_PWM",
]

# rows map (a0, a1, a2, a3) to (l1, l2, l3, l4)
LMOM_FROM_PWM = np.array(
    [
        [1.0, 0.0, 0.0, 0.0],
        [1.0, -2.0, 0.0, 0.0],
        [1.0, -6.0, 6.0, 0.0],
        [1.0, -12.0, 30.0, -20.0],
    ]
)

DEGENERATE_RTOL = 1e-14


@dataclass(frozen=True)
class ObservationSample:
    """Finite observations held in ascending order."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1:
            raise DomainError("observations must be one-dimensional")
        if v.size == 0:
            raise InsufficientSampleError("empty sample")
        if not np.all(np.isfinite(v)):
            raise DomainError("observations must be finite")
        v = np.sort(v)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.size

    def __len__(self) -> int:
        return self.values.size


def as_sample(data) -> ObservationSample:
    if isinstance(data, ObservationSample):
        return data
    return ObservationSample(np.asarray(data, dtype=float))


@dataclass(frozen=True)
class PwmSet:
    a0: float
    a1: float
    a2: float = np.nan
    a3: float = np.nan

    def as_array(self) -> np.ndarray:
        return np.array([self.a0, self.a1, self.a2, self.a3])


@dataclass(frozen=True)
class LStatSet:
    l1: float
    l2: float
    l3: float
    l4: float
    t3: float
    t4: float
    n: int


def pwm_weights(n: int, rmax: int = 3) -> np.ndarray:
    """Weights ``w[r, i] = C(n-1-i, r) / (n C(n-1, r))`` for 0-based rank ``i``.

    ``a_r = w[r] @ x_sorted``.
    """
    if n <= rmax:
        raise InsufficientSampleError(f"need more than {rmax} observations, got {n}")
    ranks = np.arange(n, dtype=float)
    w = np.empty((rmax + 1, n))
    w[0] = 1.0 / n
    for r in range(1, rmax + 1):
        # C(n-1-i, r)/C(n-1, r) = C(n-1-i, r-1)/C(n-1, r-1) * (n-1-i-(r-1))/(n-1-(r-1))
        w[r] = w[r - 1] * np.clip(n - ranks - r, 0.0, None) / (n - r)
    return w


def pwm_estimates(sample, rmax: int = 3) -> PwmSet:
    """Unbiased sample PWMs ``a_0 .. a_rmax`` (``rmax`` at most 3)."""
    if not 0 <= rmax <= 3:
        raise DomainError("rmax must be between 0 and 3")
    s = as_sample(sample)
    a = pwm_weights(s.n, rmax) @ s.values
    return PwmSet(*a.tolist())


def _ratios(l1, l2, l3, l4):
    if not l2 > DEGENERATE_RTOL * abs(l1):
        raise DegenerateSampleError("sample L-scale is zero; L-moment ratios undefined")
    return l3 / l2, l4 / l2


def l_statistics(sample) -> LStatSet:
    """First four sample L-moments with L-skewness and L-kurtosis.

    Raises
    ------
    InsufficientSampleError
        Fewer than four observations.
    DegenerateSampleError
        The sample is (numerically) constant.
    """
    s = as_sample(sample)
    if s.n < 4:
        raise InsufficientSampleError(f"need at least 4 observations, got {s.n}")
    lm = LMOM_FROM_PWM @ (pwm_weights(s.n, 3) @ s.values)
    l1 = float(np.mean(s.values))
    _, l2, l3, l4 = lm.tolist()
    t3, t4 = _ratios(l1, l2, l3, l4)
    return LStatSet(l1, l2, l3, l4, t3, t4, s.n)


def l_ratios_rows(rows: np.ndarray, presorted: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """``(t3, t4)`` for each row of a 2-D array of equal-size samples."""
    x = np.asarray(rows, dtype=float)
    if not presorted:
        x = np.sort(x, axis=1)
    lm = (x @ pwm_weights(x.shape[1], 3).T) @ LMOM_FROM_PWM.T
    return lm[:, 2] / lm[:, 1], lm[:, 3] / lm[:, 1]


def gpd_g(t3):
    """GPd L-kurtosis as a function of L-skewness."""
    t3 = np.asarray(t3, dtype=float)
    out = t3 * (1.0 + 5.0 * t3) / (5.0 + t3)
    return float(out) if out.ndim == 0 else out


def gpd_g_inv(t4):
    """Inverse of :func:`gpd_g` on the first quadrant of the ratio diagram.

    Raises :class:`DomainError` for negative ``t4``.
    """
    t4 = np.asarray(t4, dtype=float)
    if np.any(~(t4 >= 0.0)):
        raise DomainError("g inverse only defined for non-negative L-kurtosis")
    out = (t4 - 1.0) / 10.0 + np.sqrt(t4 * t4 + 98.0 * t4 + 1.0) / 10.0
    return float(out) if out.ndim == 0 else out


def gpd_population_lmoments(sigma: float, xi: float) -> tuple[float, float, float, float]:
    """``(lambda1, lambda2, tau3, tau4)`` of GPd(sigma, xi)."""
    if not sigma > 0:
        raise DomainError("GPd scale must be positive")
    if xi >= 1:
        raise NonexistentMomentError("GPd mean is infinite for xi >= 1")
    lam1 = sigma / (1.0 - xi)
    lam2 = sigma / ((1.0 - xi) * (2.0 - xi))
    tau3 = (1.0 + xi) / (3.0 - xi)
    return lam1, lam2, tau3, gpd_g(tau3)


def lmrd_lower_bound(t3):
    """Smallest attainable L-kurtosis for a given L-skewness."""
    t3 = np.asarray(t3, dtype=float)
    out = 0.25 * (5.0 * t3 * t3 - 1.0)
    return float(out) if out.ndim == 0 else out

"""Asymptotic covariance of PWMs, L-moments and L-moment ratios under the GPd.

The chain is ``A`` (n cov of a_r) -> ``Lambda = M A M^T`` (n cov of l_r) ->
``T`` (n cov of t3, t4), followed by the conditional normal bands used to
judge whether a sample's ratio pair sits close enough to the GPd curve.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distributions import GpdParams, std_normal_quantile
from .errors import DomainError, NonexistentMomentError
from .lmoments import LMOM_FROM_PWM, gpd_g, gpd_g_inv

__all__ = [
    "RatioCov",
    "ConfidenceBand",
    "pwm_acov",
    "lmom_acov",
    "ratio_acov",
    "ratio_acov_gpd",
    "ci_tau4_given_t3",
    "ci_tau3_given_t4",
]


@dataclass(frozen=True)
class RatioCov:
    """Limits of ``n var(t3)``, ``n cov(t3, t4)``, ``n var(t4)``."""

    T33: float
    T34: float
    T44: float
    rho34_sq: float
    degenerate: bool = False


@dataclass(frozen=True)
class ConfidenceBand:
    center: float
    lower: float
    upper: float
    level: float

    def contains(self, value: float) -> bool:
        return self.lower <= value <= self.upper

    @property
    def half_width(self) -> float:
        return self.upper - self.center


def pwm_acov(params: GpdParams, rmax: int = 3) -> np.ndarray:
    """Asymptotic covariance ``lim n cov(a_r, a_s)`` for r, s = 0..rmax.

    Entries are ``sigma^2 / ((r+1-xi)(s+1-xi)(r+s+1-2xi))``. The variance is
    infinite for ``xi >= 1/2``; below -1/2 the formula is still returned and
    the caller is expected to flag it (see ``GpdParams.valid``).
    """
    sigma, xi = params.sigma, params.xi
    if xi >= 0.5:
        raise NonexistentMomentError(f"PWM variance is infinite for xi = {xi} >= 1/2")
    r = np.arange(rmax + 1, dtype=float)
    a = r + 1.0 - xi
    return sigma**2 / (a[:, None] * a[None, :] * (r[:, None] + r[None, :] + 1.0 - 2.0 * xi))


def lmom_acov(A: np.ndarray) -> np.ndarray:
    """``Lambda = M A M^T`` for the first four L-moments."""
    A = np.asarray(A, dtype=float)
    L = LMOM_FROM_PWM @ A @ LMOM_FROM_PWM.T
    return 0.5 * (L + L.T)


def ratio_acov(Lam: np.ndarray, lam2: float, tau3: float, tau4: float) -> RatioCov:
    """Delta-method covariance of ``(t3, t4)`` from the L-moment covariance."""
    if not lam2 > 0:
        raise DomainError("lambda2 must be positive")
    L22, L23, L24 = Lam[1, 1], Lam[1, 2], Lam[1, 3]
    L33, L34, L44 = Lam[2, 2], Lam[2, 3], Lam[3, 3]
    d = lam2 * lam2
    T33 = (L33 - 2.0 * tau3 * L23 + tau3 * tau3 * L22) / d
    T34 = (L34 - tau3 * L24 - tau4 * L23 + tau3 * tau4 * L22) / d
    T44 = (L44 - 2.0 * tau4 * L24 + tau4 * tau4 * L22) / d
    if T33 > 0 and T44 > 0:
        rho = min(max(T34 * T34 / (T33 * T44), 0.0), 1.0)
        return RatioCov(T33, T34, T44, rho)
    return RatioCov(T33, T34, T44, math.nan, degenerate=True)


def ratio_acov_gpd(params: GpdParams, tau3: float | None = None, tau4: float | None = None) -> RatioCov:
    """Full chain for a GPd; ratios default to the distribution's own values."""
    xi = params.xi
    lam2 = params.sigma / ((1.0 - xi) * (2.0 - xi))
    if tau3 is None:
        tau3 = (1.0 + xi) / (3.0 - xi)
    if tau4 is None:
        tau4 = gpd_g(tau3)
    return ratio_acov(lmom_acov(pwm_acov(params)), lam2, tau3, tau4)


def _band(center: float, var: float, n_u: int, alpha: float) -> ConfidenceBand:
    if n_u < 4:
        raise DomainError("need at least 4 excesses for a band")
    if not 0 < alpha < 1:
        raise DomainError("alpha must be in (0, 1)")
    if not var >= 0:
        raise DomainError("conditional variance is negative or undefined")
    half = std_normal_quantile(1.0 - alpha / 2.0) * math.sqrt(var / n_u)
    return ConfidenceBand(center, center - half, center + half, 1.0 - alpha)


def ci_tau4_given_t3(t3_obs: float, n_u: int, alpha: float, rc: RatioCov) -> ConfidenceBand:
    """Band for L-kurtosis centred on the GPd curve at the observed L-skewness.

    ``rc`` should be evaluated at ``(t3_obs, g(t3_obs))``.
    """
    if rc.degenerate:
        raise DomainError("degenerate ratio covariance")
    return _band(gpd_g(t3_obs), rc.T44 * (1.0 - rc.rho34_sq), n_u, alpha)


def ci_tau3_given_t4(t4_obs: float, n_u: int, alpha: float, rc: RatioCov) -> ConfidenceBand:
    """Band for L-skewness centred on the inverse GPd curve at the observed L-kurtosis.

    Only defined in the first quadrant; ``t4_obs <= 0`` raises :class:`DomainError`.
    """
    if not t4_obs > 0:
        raise DomainError("L-kurtosis band needs t4 > 0")
    if rc.degenerate:
        raise DomainError("degenerate ratio covariance")
    return _band(gpd_g_inv(t4_obs), rc.T33 * (1.0 - rc.rho34_sq), n_u, alpha)

"""GPd, four-parameter Kappa and standard normal helpers.

Shape parameters follow the extreme-value sign convention throughout: ``xi > 0``
is a heavy upper tail. The Kappa d.f. is

    F(x) = (1 - h * [1 + xi (x - mu) / sigma] ** (-1 / xi)) ** (1 / h)

with GEV (h = 0), GPd (h = 1, mu = 0) and Gumbel (h = xi = 0) as limits.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import special

from .errors import (
    ConvergenceError,
    DegenerateSampleError,
    DomainError,
    InfeasibleFitError,
    NonexistentMomentError,
)
from .lmoments import ObservationSample, as_sample, pwm_estimates

__all__ = [
    "GpdParams",
    "KappaParams",
    "RandomStream",
    "gpd_cdf",
    "gpd_quantile",
    "gpd_fit_pwm",
    "kappa_cdf",
    "kappa_quantile",
    "kappa_lmoments",
    "kappa_fit_lmom",
    "kappa_sample",
    "kappa_feasible",
    "glo_tau4",
    "std_normal_cdf",
    "std_normal_quantile",
]

LIMIT_TOL = 1e-9
GPD_ASYMPTOTIC_RANGE = (-0.5, 0.5)


@dataclass(frozen=True)
class GpdParams:
    sigma: float
    xi: float
    valid: bool = True  # False when xi falls outside the finite-variance range

    def __post_init__(self):
        if not (self.sigma > 0 and math.isfinite(self.sigma)):
            raise DomainError(f"GPd scale must be positive and finite, got {self.sigma}")
        if not math.isfinite(self.xi):
            raise DomainError("GPd shape must be finite")


@dataclass(frozen=True)
class KappaParams:
    mu: float
    sigma: float
    xi: float
    h: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise DomainError(f"Kappa scale must be positive, got {self.sigma}")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.mu, self.sigma, self.xi, self.h)


@dataclass(frozen=True)
class RandomStream:
    """Reproducible source of uniform variates.

    A stream is identified by a seed and a path of integer keys. Children made
    with :meth:`spawn` are statistically independent of each other and of the
    parent, and depend only on ``(seed, stream_id)``, never on call order.
    """

    seed: int
    stream_id: tuple[int, ...] = field(default=())

    def spawn(self, key: int) -> "RandomStream":
        return RandomStream(self.seed, self.stream_id + (int(key),))

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=int(self.seed), spawn_key=self.stream_id)
        return np.random.Generator(np.random.Philox(ss))


# ---------------------------------------------------------------------------
# GPd


def gpd_cdf(x, params: GpdParams):
    """GPd distribution function on the excess scale ``x >= 0``."""
    x = np.maximum(np.asarray(x, dtype=float), 0.0)
    sigma, xi = params.sigma, params.xi
    z = x / sigma
    if abs(xi) < LIMIT_TOL:
        out = -np.expm1(-z)
    else:
        xz = xi * z
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(xz > -1, -np.expm1(-np.log1p(np.where(xz > -1, xz, 0.0)) / xi), 1.0)
    out = np.clip(out, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def gpd_quantile(p, params: GpdParams):
    p = np.asarray(p, dtype=float)
    if np.any(~((p >= 0) & (p < 1))):
        raise DomainError("GPd quantile needs 0 <= p < 1")
    sigma, xi = params.sigma, params.xi
    lq = -np.log1p(-p)
    if abs(xi) < LIMIT_TOL:
        out = sigma * lq
    else:
        out = sigma * np.expm1(xi * lq) / xi
    return float(out) if out.ndim == 0 else out


def gpd_fit_pwm(sample) -> GpdParams:
    """PWM estimates of the GPd scale and shape for an excess sample.

    The returned parameters carry ``valid=False`` when the shape estimate lies
    outside (-1/2, 1/2), where the PWM asymptotics no longer apply.
    """
    s = as_sample(sample)
    if s.n < 2:
        raise DegenerateSampleError(f"need at least 2 excesses for a GPd fit, got {s.n}")
    a = pwm_estimates(s, 1)
    d = a.a0 - 2.0 * a.a1
    if not abs(d) > 1e-14 * abs(a.a0):
        raise DegenerateSampleError("a0 - 2 a1 vanishes; GPd fit is degenerate")
    xi = 2.0 - a.a0 / d
    sigma = 2.0 * a.a0 * a.a1 / d
    if not sigma > 0:
        raise DegenerateSampleError(f"GPd fit gave non-positive scale {sigma}")
    lo, hi = GPD_ASYMPTOTIC_RANGE
    return GpdParams(sigma, xi, valid=bool(lo < xi < hi))


# ---------------------------------------------------------------------------
# Kappa


def _kappa_from_logf(logf, mu, sigma, xi, h):
    """Kappa quantile given ``log F`` (pass log1p(-c) near F = 1 for precision)."""
    if abs(h) < LIMIT_TOL:
        w = -logf
    else:
        w = -np.expm1(h * logf) / h
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        lw = np.log(w)
        if abs(xi) < LIMIT_TOL:
            return mu - sigma * lw
        return mu + sigma * np.expm1(-xi * lw) / xi


def kappa_cdf(x, params: KappaParams):
    """Kappa distribution function; values outside the support clamp to 0 or 1."""
    mu, sigma, xi, h = params.as_tuple()
    z = (np.asarray(x, dtype=float) - mu) / sigma
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        if abs(xi) < LIMIT_TOL:
            y = np.exp(-z)
            inside = np.ones_like(z, dtype=bool)
        else:
            xz = xi * z
            inside = xz > -1
            y = np.exp(-np.log1p(np.where(inside, xz, 0.0)) / xi)
            # beyond the finite endpoint implied by xi: upper end if xi < 0, lower end if xi > 0
            y = np.where(inside, y, 0.0 if xi < 0 else np.inf)
        if abs(h) < LIMIT_TOL:
            out = np.exp(-y)
        else:
            hy = h * y
            out = np.where(hy < 1, np.exp(np.log1p(-np.where(hy < 1, hy, 0.0)) / h), 0.0)
    out = np.clip(np.nan_to_num(out, nan=0.0), 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def kappa_quantile(F, params: KappaParams):
    F = np.asarray(F, dtype=float)
    if np.any(~((F >= 0) & (F < 1))):
        raise DomainError("Kappa quantile needs 0 <= F < 1")
    with np.errstate(divide="ignore"):
        logf = np.log(F)
    # F = 0 gives the lower endpoint, which may be -inf
    out = _kappa_from_logf(logf, *params.as_tuple())
    return float(out) if out.ndim == 0 else out


def _check_lmoment_region(xi: float, h: float) -> None:
    if h < -1:
        raise NonexistentMomentError(f"Kappa with h = {h} < -1 is outside the supported family")
    if xi >= 1:
        raise NonexistentMomentError(f"Kappa mean is infinite for xi = {xi} >= 1")
    if h < 0 and xi * h >= 1:
        raise NonexistentMomentError(f"Kappa lower tail too heavy for xi = {xi}, h = {h}")


@lru_cache(maxsize=None)
def _tanh_sinh_nodes(level: int, tmax: float = 6.0):
    """Nodes on (0, 1) as ``(F, 1 - F)`` pairs with weights for step ``2**-level``.

    Both coordinates are computed without cancellation so the quantile can be
    evaluated accurately at both endpoints. ``tmax`` keeps every node in the
    normal double range (about 1e-275 from either end); the last return value
    is the probability mass ``eps`` left uncovered at each end.
    """
    step = 2.0 ** -level
    t = np.arange(-tmax, tmax + step / 2, step)
    s = 0.5 * np.pi * np.sinh(t)
    F = special.expit(2.0 * s)
    Fc = special.expit(-2.0 * s)
    # d/dt of 1/(1+e^{-2s}) = 2 s' F (1-F), with s' = pi/2 cosh t
    w = step * np.pi * np.cosh(t) * F * Fc
    eps = float(special.expit(-np.pi * np.sinh(tmax + step / 2)))
    return F, Fc, w, eps


def _shifted_legendre(F):
    return np.stack(
        [
            np.ones_like(F),
            2.0 * F - 1.0,
            (6.0 * F - 6.0) * F + 1.0,
            ((20.0 * F - 30.0) * F + 12.0) * F - 1.0,
        ]
    )


def _tail_terms(sigma, xi, h, eps):
    """Leading-order integrals of the quantile over the two uncovered end pieces.

    Near F = 1 the quantile behaves like ``sigma/xi (u^-xi - 1)`` with
    ``u = 1 - F``; near F = 0 with h < 0 like ``sigma/xi |h|^xi F^(-xi h)``.
    Only the singular parts matter; the rest is below 1e-270.
    """
    upper = lower = 0.0
    if xi > 0:
        upper = sigma / xi * eps ** (1.0 - xi) / (1.0 - xi)
    if h < 0 and xi < 0:
        a = xi * h
        lower = sigma / xi * (-h) ** xi * eps ** (1.0 - a) / (1.0 - a)
    sign = np.array([1.0, -1.0, 1.0, -1.0])
    return upper + sign * lower


def _lmoment_integrals(mu, sigma, xi, h, level):
    F, Fc, w, eps = _tanh_sinh_nodes(level)
    with np.errstate(divide="ignore"):
        logf = np.where(F > 0.5, np.log1p(-Fc), np.log(F))
    q = _kappa_from_logf(logf, mu, sigma, xi, h)
    return _shifted_legendre(F) @ (w * q) + _tail_terms(sigma, xi, h, eps)


def kappa_lmoments(params: KappaParams, tol: float = 1e-13) -> tuple[float, float, float, float]:
    """``(lambda1, lambda2, tau3, tau4)`` of a Kappa distribution.

    Integrates the quantile function against shifted Legendre polynomials with
    double-exponential quadrature, halving the step until successive estimates
    agree to ``tol`` (relative to lambda2).
    """
    mu, sigma, xi, h = params.as_tuple()
    _check_lmoment_region(xi, h)
    prev = _lmoment_integrals(mu, sigma, xi, h, 2)
    for level in range(3, 9):
        cur = _lmoment_integrals(mu, sigma, xi, h, level)
        if np.all(np.isfinite(cur)) and np.max(np.abs(cur[1:] - prev[1:])) <= tol * abs(cur[1]):
            break
        prev = cur
    else:
        if not np.all(np.isfinite(cur)):
            raise NonexistentMomentError(f"Kappa L-moments do not converge for xi = {xi}, h = {h}")
    lam1, lam2, lam3, lam4 = cur.tolist()
    return lam1, lam2, lam3 / lam2, lam4 / lam2


def glo_tau4(t3):
    """L-kurtosis of the generalized logistic (Kappa h = -1) curve."""
    t3 = np.asarray(t3, dtype=float)
    out = (1.0 + 5.0 * t3 * t3) / 6.0
    return float(out) if out.ndim == 0 else out


def kappa_feasible(t3: float, t4: float) -> bool:
    """Necessary condition for a Kappa fit: strictly inside the global ratio bounds.

    The h = -1 curve is only an approximate upper edge of the h >= -1 region
    (h slightly above -1 crosses it at large L-skewness), so points above it
    are left to the Newton iteration to accept or reject.
    """
    return bool(abs(t3) < 1 and 0.25 * (5 * t3 * t3 - 1) < t4 < 1)


def _ratios_at(xi, h):
    _, _, t3, t4 = kappa_lmoments(KappaParams(0.0, 1.0, xi, h))
    return np.array([t3, t4])


def _in_region(xi, h):
    return h >= -1 and xi < 1 and not (h < 0 and xi * h >= 1)


def kappa_fit_lmom(
    l1: float,
    l2: float,
    t3: float,
    t4: float,
    tol: float = 1e-10,
    maxiter: int = 100,
) -> KappaParams:
    """Fit a Kappa distribution by the method of L-moments.

    Newton iteration on the shape pair (xi, h) matches (t3, t4), starting from
    the GPd point with the same L-skewness; the Jacobian is approximated by
    forward differences and each step is halved until the residual norm drops.
    Scale and location then follow from ``l2`` and ``l1``.

    Raises
    ------
    InfeasibleFitError
        ``(t3, t4)`` outside the region spanned by Kappa shapes with h >= -1.
    ConvergenceError
        Newton failed to reach ``tol`` within ``maxiter`` iterations.
    """
    if not l2 > 0:
        raise InfeasibleFitError("L-scale must be positive")
    if not kappa_feasible(t3, t4):
        raise InfeasibleFitError(f"(t3, t4) = ({t3:.6g}, {t4:.6g}) is outside the Kappa region")
    target = np.array([t3, t4])
    theta = np.array([(3.0 * t3 - 1.0) / (1.0 + t3), 1.0])
    try:
        res = _ratios_at(*theta) - target
    except NonexistentMomentError as exc:
        raise InfeasibleFitError(str(exc)) from exc
    norm = np.hypot(*res)
    for _ in range(maxiter):
        if norm <= tol:
            break
        eps = 1e-6
        jac = np.empty((2, 2))
        for j in range(2):
            bumped = theta.copy()
            step = eps * max(1.0, abs(theta[j]))
            bumped[j] += step
            if not _in_region(*bumped):
                bumped[j] -= 2 * step
                step = -step
            jac[:, j] = (_ratios_at(*bumped) - target - res) / step
        try:
            delta = np.linalg.solve(jac, -res)
        except np.linalg.LinAlgError as exc:
            raise ConvergenceError("singular Jacobian in Kappa fit") from exc
        lam = 1.0
        for _ in range(40):
            trial = theta + lam * delta
            if _in_region(*trial):
                try:
                    tres = _ratios_at(*trial) - target
                except NonexistentMomentError:
                    tres = None
                if tres is not None and np.all(np.isfinite(tres)) and np.hypot(*tres) < norm:
                    break
            lam *= 0.5
        else:
            if not _in_region(*(theta + delta)):
                raise InfeasibleFitError(
                    f"(t3, t4) = ({t3:.6g}, {t4:.6g}) needs Kappa shapes outside h >= -1"
                )
            raise ConvergenceError("Kappa fit line search failed")
        theta, res, norm = trial, tres, np.hypot(*tres)
    else:
        if norm > tol:
            raise ConvergenceError(f"Kappa fit did not converge (residual {norm:.3g})")
    xi, h = theta.tolist()
    lam1_u, lam2_u, _, _ = kappa_lmoments(KappaParams(0.0, 1.0, xi, h))
    sigma = l2 / lam2_u
    mu = l1 - sigma * lam1_u
    return KappaParams(mu, sigma, xi, h)


def kappa_sample(params: KappaParams, n: int, stream: RandomStream, size: int | None = None):
    """Inverse-transform draws from a Kappa distribution.

    Returns an :class:`ObservationSample` of ``n`` values, or, when ``size``
    is given, a ``(size, n)`` array whose rows are each sorted ascending.
    """
    if n < 1:
        raise DomainError("sample size must be at least 1")
    rng = stream.generator()
    shape = (n,) if size is None else (size, n)
    u = rng.random(shape)
    # random() is on [0, 1); map a drawn 0 to the smallest positive double
    u = np.where(u > 0, u, np.nextafter(0.0, 1.0))
    x = np.sort(_kappa_from_logf(np.log(u), *params.as_tuple()), axis=-1)
    if size is None:
        return ObservationSample(x)
    return x


# ---------------------------------------------------------------------------
# standard normal


def std_normal_cdf(z):
    out = special.ndtr(np.asarray(z, dtype=float))
    return float(out) if np.ndim(out) == 0 else out


def std_normal_quantile(p):
    p = np.asarray(p, dtype=float)
    if np.any(~((p > 0) & (p < 1))):
        raise DomainError("normal quantile needs 0 < p < 1")
    out = special.ndtri(p)
    return float(out) if out.ndim == 0 else out

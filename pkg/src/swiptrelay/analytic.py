"""Closed-form, integral and asymptotic outage expressions.

Conventions: ``eps = tau / P`` is the decode threshold on a normalized gain,
``k_d = 1 + d**alpha`` the inverse direct-link path gain, and ``mu`` the mean
relay count on the disc. The direct-link gain ``x0`` is exponential with rate
``k_d``. The high-SNR forms assume ``alpha = 2`` and a destination far from
the disc, so that every relay-destination distance is close to ``d``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from math import comb

import numpy as np
from scipy import integrate, special

from .channel import ScenarioParams
from .geometry import Disc, PPPConfig

__all__ = [
    "AnalyticResult",
    "QuadratureError",
    "AsymptoticConstants",
    "bessel_k1",
    "small_argument_xk1",
    "one_minus_xk1",
    "digamma",
    "lower_incomplete_gamma2",
    "exact_outage_random",
    "approx_outage_random",
    "asymptotic_outage_closest",
    "beamforming_outage_upper_bound",
    "prob_single_decode_failure",
    "direct_outage",
]

EULER_GAMMA = 0.57721566490153286061
SERIES_CUTOFF = 1e-3


class QuadratureError(ArithmeticError):
    """Raised when a quadrature misses its tolerance; carries the partial value."""

    def __init__(self, message: str, value: float, error: float):
        super().__init__(message)
        self.value = value
        self.error = error


@dataclass(frozen=True)
class AnalyticResult:
    value: float
    error: float
    tag: str  # "exact" | "approx" | "closest_asymptotic" | "beamforming_upper_bound"
    in_regime: bool = True


# --------------------------------------------------------------------------
# special functions


def bessel_k1(x):
    """Modified Bessel function of the second kind, order one."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("K1 is defined here for x > 0 only")
    return special.k1(x)[()]


def digamma(n):
    return special.digamma(n)


def lower_incomplete_gamma2(x):
    """gamma(2, x) = 1 - (1 + x) exp(-x), computed without cancellation."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("gamma(2, x) needs x >= 0")
    return special.gammainc(2.0, x)[()]


def _c0() -> float:
    return float(-(digamma(1.0) + digamma(2.0)) / 2.0)


def small_argument_xk1(x):
    """Two-term series ``x K1(x) ~ 1 + (x^2/2)(ln(x/2) + c0)`` for small x.

    ``c0 = -(psi(1) + psi(2))/2 = gamma_E - 1/2``. Used by the high-SNR
    approximations and to evaluate ``1 - x K1(x)`` below ``SERIES_CUTOFF``.
    """
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = 1.0 + 0.5 * x**2 * (np.log(x / 2.0) + _c0())
    return np.where(x == 0, 1.0, out)[()]


def one_minus_xk1(x):
    """``1 - x K1(x)`` for ``x >= 0``, switching to the series near zero."""
    x = np.asarray(x, dtype=float)
    small = x < SERIES_CUTOFF
    xs = np.where(small, 1.0, x)
    direct = 1.0 - xs * special.k1(xs)
    with np.errstate(divide="ignore", invalid="ignore"):
        series = -0.5 * x**2 * (np.log(x / 2.0) + _c0())
    series = np.where(x == 0, 0.0, series)
    return np.where(small, series, direct)


# --------------------------------------------------------------------------
# constants


@dataclass(frozen=True)
class AsymptoticConstants:
    a1: float
    e1: float
    c0: float
    zeta: float
    b3: float
    b4: float
    beta1: float
    beta2: float

    @classmethod
    def compute(cls, params: ScenarioParams, disc: Disc, ppp: PPPConfig) -> "AsymptoticConstants":
        eps, eta = params.epsilon, params.eta
        d, rd = disc.dest_distance, disc.radius
        kd = 1.0 + d**2
        psi_sum = float(digamma(1.0) + digamma(2.0))
        e1 = -psi_sum / 4.0
        c0 = -psi_sum / 2.0
        beta1 = rd**2 * (rd**2 + 2.0)
        beta2 = (1.0 + rd**2) ** 2 * math.log1p(rd**2) + 4.0 * e1 * beta1
        lam = ppp.intensity
        if lam > 0:
            a = math.pi * lam
            zeta = 1.0 / -math.expm1(-a * rd**2)
            b3 = 2.0 * _quad_checked(
                lambda y: y * math.log(kd * y / eta) * math.exp(-a * y), 1.0, 1.0 + rd**2
            )
            b4 = float(
                (lower_incomplete_gamma2(a * (1.0 + rd**2)) - lower_incomplete_gamma2(a))
                / a**2
            )
        else:
            zeta = b3 = b4 = math.nan
        return cls(1.0 - kd * eps, e1, c0, zeta, b3, b4, beta1, beta2)


def b0(params: ScenarioParams, disc: Disc, x0):
    return (1.0 + disc.dest_distance**2) * (params.epsilon - np.asarray(x0)) / params.eta


def b1(params: ScenarioParams, disc: Disc, r):
    return (1.0 + disc.dest_distance**2) * (1.0 + np.asarray(r) ** 2) / params.eta


def e2(params: ScenarioParams, disc: Disc, d_i):
    a = params.alpha
    return (1.0 + disc.dest_distance**a) * (1.0 + np.asarray(d_i) ** a) / params.eta


def q_factor(params: ScenarioParams, disc: Disc, r, theta, x0):
    """Bessel argument scale ``q(r, theta)``: ``2 q`` is fed to K1."""
    a, d = params.alpha, disc.dest_distance
    r = np.asarray(r, dtype=float)
    c2 = np.maximum(r**2 + d**2 - 2.0 * r * d * np.cos(theta), 0.0)
    slack = np.maximum(params.epsilon - np.asarray(x0, dtype=float), 0.0)
    return np.sqrt((1.0 + c2 ** (a / 2.0)) * (1.0 + r**a) * slack / params.eta)


def _quad_checked(f, a, b, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(f, a, b, limit=200, **kw)
        except integrate.IntegrationWarning as exc:
            raise QuadratureError(str(exc), math.nan, math.inf) from exc
    return val


# --------------------------------------------------------------------------
# random relay


def direct_outage(params: ScenarioParams, disc: Disc) -> float:
    """P(x0 < eps) for the direct link alone."""
    kd = 1.0 + disc.dest_distance**params.alpha
    return -math.expm1(-kd * params.epsilon)


def _angle_average(fun, tol: float, n: int = 32, n_max: int = 4096):
    """Mean of a smooth 2*pi-periodic even function over one period.

    Trapezoid rule on [0, pi] with doubling until two successive levels agree.
    Returns (mean, error estimate).
    """
    prev = None
    while True:
        theta = np.linspace(0.0, np.pi, n + 1)
        vals = fun(theta)
        w = np.full(n + 1, 1.0 / n)
        w[0] = w[-1] = 0.5 / n
        cur = float(vals @ w)
        if prev is not None and (abs(cur - prev) <= tol or n >= n_max):
            return cur, abs(cur - prev)
        prev = cur
        n *= 2


def _relay_helped_failure(params: ScenarioParams, disc: Disc, rel_tol: float = 1e-9):
    """Probability that a uniformly placed relay decodes yet the SNR falls short.

    Integrates ``exp(-(1+r^a) eps) (1 - 2q K1(2q))`` against the direct-link
    density over ``x0 < eps`` and uniform placement on the disc.
    """
    eps, eta, a = params.epsilon, params.eta, params.alpha
    d, rd = disc.dest_distance, disc.radius
    kd = 1.0 + d**a
    if eps <= 0:
        return 0.0, 0.0
    inner_err = [0.0]

    def over_disc(u):
        # u = eps - x0 in (0, eps]
        def at_radius(r):
            base = math.exp(-(1.0 + r**a) * eps) * 2.0 * r / rd**2
            if base == 0.0:
                return 0.0
            pre = (1.0 + r**a) * u / eta

            def g(theta):
                c2 = np.maximum(r * r + d * d - 2.0 * r * d * np.cos(theta), 0.0)
                q = np.sqrt((1.0 + c2 ** (a / 2.0)) * pre)
                return one_minus_xk1(2.0 * q)

            mean, err = _angle_average(g, 1e-13)
            inner_err[0] = max(inner_err[0], base * err)
            return base * mean

        val, err = integrate.quad(at_radius, 0.0, rd, epsabs=1e-300, epsrel=rel_tol, limit=200)
        inner_err[0] = max(inner_err[0], err)
        return val

    def integrand(s):
        u = eps * s
        return kd * math.exp(-kd * (eps - u)) * over_disc(u)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(integrand, 0.0, 1.0, epsabs=1e-300, epsrel=rel_tol, limit=200)
    value = eps * val
    error = eps * (err + kd * inner_err[0])
    return value, error


def _both_fail(params: ScenarioParams, disc: Disc) -> float:
    """P(x0 < eps, x_i < eps) for a uniformly placed relay."""
    eps, a, rd = params.epsilon, params.alpha, disc.radius
    relay = _quad_checked(
        lambda r: -math.expm1(-(1.0 + r**a) * eps) * 2.0 * r / rd**2,
        0.0, rd, epsabs=1e-300, epsrel=1e-12,
    )
    return direct_outage(params, disc) * relay


def exact_outage_random(
    params: ScenarioParams,
    disc: Disc,
    ppp: PPPConfig,
    given_relay: bool = False,
    tolerance: float = 1e-6,
) -> AnalyticResult:
    """Exact outage probability with a randomly chosen relay, any ``alpha``.

    Sum of three events: no relay on the disc and a failed direct link; the
    chosen relay decodes but the combined SNR falls short; neither the relay
    nor the destination decodes. With ``given_relay`` the first event is
    dropped and the others are not weighted by ``P(N >= 1)``.
    """
    eps = params.epsilon
    if eps <= 0:
        return AnalyticResult(0.0, 0.0, "exact")
    helped, err = _relay_helped_failure(params, disc)
    both = _both_fail(params, disc)
    if given_relay:
        value = helped + both
    else:
        mu = ppp.mean_measure(disc)
        p_empty = math.exp(-mu)
        value = direct_outage(params, disc) * p_empty + (-math.expm1(-mu)) * (helped + both)
    if not err <= tolerance:
        raise QuadratureError(f"quadrature error {err:.3g} above {tolerance:.3g}", value, err)
    return AnalyticResult(value, err, "exact")


def approx_outage_random(
    params: ScenarioParams, disc: Disc, ppp: PPPConfig, given_relay: bool = False
) -> AnalyticResult:
    """High-SNR approximation of the random-relay outage (``alpha = 2``).

    The dominant relay term behaves like ``-eps^2 ln eps``. ``given_relay``
    drops the empty-disc term, as when at least one relay is present.
    ``in_regime`` is False unless ``d > 5 R_D``.
    """
    if params.alpha != 2:
        raise ValueError("the high-SNR approximation is derived for alpha = 2 only")
    k = AsymptoticConstants.compute(params, disc, ppp)
    eps, eta = params.epsilon, params.eta
    d, rd = disc.dest_distance, disc.radius
    kd = 1.0 + d**2
    t = kd * eps / eta
    helped = -(eta * k.a1 / (4.0 * rd**2)) * (
        k.beta1 * (t**2 * math.log(t) - t**2)
        + t**2 * ((1.0 + rd**2) ** 2 * math.log1p(rd**2) + 4.0 * k.e1 * k.beta1)
    )
    both = 0.5 * (rd**2 + 2.0) * kd * eps**2
    if given_relay:
        value = helped + both
    else:
        mu = ppp.mean_measure(disc)
        w = -math.expm1(-mu)
        value = kd * eps * math.exp(-mu) + w * (helped + both)
    return AnalyticResult(value, 0.0, "approx", in_regime=d > 5.0 * rd)


# --------------------------------------------------------------------------
# closest relay


def asymptotic_outage_closest(params: ScenarioParams, disc: Disc, ppp: PPPConfig) -> AnalyticResult:
    """High-SNR outage when the relay nearest the source is used, given N >= 1."""
    if params.alpha != 2:
        raise ValueError("the closest-relay asymptotic is derived for alpha = 2 only")
    if not ppp.intensity > 0:
        raise ValueError("closest-relay selection needs a positive intensity")
    k = AsymptoticConstants.compute(params, disc, ppp)
    eps, eta = params.epsilon, params.eta
    rd, lam = disc.radius, ppp.intensity
    kd = 1.0 + disc.dest_distance**2
    a = math.pi * lam
    helped = -(a * k.zeta * kd**2 * eps**2 * math.exp(a) / (4.0 * eta)) * (
        k.b3 + 2.0 * k.b4 * math.log(eps) - k.b4 * (1.0 - 4.0 * k.c0)
    )
    tail = math.exp(-a * rd**2)
    both = (1.0 - (1.0 + rd**2) * tail + (1.0 - tail) / a) * k.zeta * kd * eps**2
    return AnalyticResult(helped + both, 0.0, "closest_asymptotic")


# --------------------------------------------------------------------------
# distributed beamforming


def prob_single_decode_failure(params: ScenarioParams, disc: Disc, approximate: bool = False) -> float:
    """P(x_i < eps) averaged over uniform placement on the disc (``alpha = 2``)."""
    eps, rd = params.epsilon, disc.radius
    if approximate:
        return eps * (1.0 + rd**2 / 2.0)
    if eps <= 0:
        return 0.0
    z = eps * rd**2
    # 1 - e^{-eps} * (1 - e^{-z}) / z, split to avoid cancellation
    if z < 1e-4:
        one_minus_g = z / 2.0 - z**2 / 6.0 + z**3 / 24.0
    else:
        one_minus_g = 1.0 + math.expm1(-z) / z
    return -math.expm1(-eps) + math.exp(-eps) * one_minus_g


def beamforming_outage_upper_bound(
    params: ScenarioParams, disc: Disc, ppp: PPPConfig, n_relays: int
) -> AnalyticResult:
    """Leading-order upper bound on beamforming outage with ``n_relays`` relays.

    Sums over the size ``n`` of the qualified set, each of the ``C(N, n)``
    splits contributing ``eps^(N+1)`` times a power of ``|ln((1+d^2) eps/eta)|``.
    """
    if params.alpha != 2:
        raise ValueError("the beamforming bound is derived for alpha = 2 only")
    if n_relays < 1:
        raise ValueError("the bound needs at least one relay")
    k = AsymptoticConstants.compute(params, disc, ppp)
    eps, eta, rd = params.epsilon, params.eta, disc.radius
    kd = 1.0 + disc.dest_distance**2
    t = kd * eps / eta
    log_t = -math.log(t)
    fail = 1.0 + rd**2 / 2.0
    total = 0.0
    for n in range(n_relays + 1):
        term = (
            eps ** (n_relays + 1)
            * fail ** (n_relays - n)
            * k.a1 * eta / (2.0**n * rd ** (2 * n))
            * k.beta1**n
            * (kd / eta) ** (n + 1)
            * log_t**n
            / (n + 1)
        )
        total += comb(n_relays, n) * term
    return AnalyticResult(max(total, 0.0), 0.0, "beamforming_upper_bound", in_regime=t < 1.0)

"""Exact distribution of the phase estimate, its error moments, and the
asymptotic-regime analysis.

The reduced bin statistic is (to the adopted Gaussian model) an isotropic
complex Gaussian with mean beta_p*e^{j*phi} and per-axis variance sigma^2.
The estimate arg(D) then has the closed-form density

    g(theta) = exp(-beta^2/(2 s^2)) / (2 pi)
             + beta*cos(t) * exp(-beta^2 sin^2(t) / (2 s^2)) / (2 sqrt(2 pi) s)
               * erfc(-beta*cos(t) / (s*sqrt(2)))

with t = theta - phi: a uniform ambient floor plus a concentrated lobe.  For
negative cos(t) the erfc factor underflows long before the prefactor decays,
so that branch is evaluated through the scaled function erfcx with the
exponentials combined analytically.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy.integrate import quad
from scipy.special import erfc, erfcx

from .errors import DegenerateSigma, OutOfRange, QuadratureNonConvergence
from .quadrature import integrate
from .spectral_estimator import TheoreticalMoments

_SQRT2 = math.sqrt(2.0)
_SQRT2PI = math.sqrt(2.0 * math.pi)
TWO_PI = 2.0 * math.pi

# Below this spread (in units of the error scale sigma/beta) the lobe is too
# narrow for panels spanning [-pi, pi]; moment integrals switch to the
# rescaled variable u = theta*beta/sigma with an analytic ambient remainder.
NARROW_SPREAD = 0.05
# Rescaled integration half-width: beyond |u| = 40 the non-ambient part of
# the density is below e^{-800}.
U_LIMIT = 40.0


def wrap_angle(angle):
    """Wrap to the principal interval (-pi, pi] (vectorized)."""
    a = np.asarray(angle, dtype=float)
    wrapped = np.mod(a + math.pi, TWO_PI) - math.pi
    wrapped = np.where(wrapped == -math.pi, math.pi, wrapped)
    if np.ndim(angle) == 0:
        return float(wrapped)
    return wrapped


def circular_error(theta, phase):
    """Shortest angular distance |wrap(theta - phase)| in [0, pi]."""
    err = np.abs(wrap_angle(np.asarray(theta, dtype=float) - phase))
    if np.ndim(theta) == 0 and np.ndim(phase) == 0:
        return float(err)
    return err


@dataclass(frozen=True)
class PolarPdf:
    """Parameters of the phase-estimate density: lobe location phi,
    concentration beta_p, per-axis spread sigma."""

    beta_p: float
    sigma: float
    phi: float = 0.0

    def __post_init__(self):
        if not (0.0 < self.beta_p <= 1.0):
            raise OutOfRange(f"beta_p must be in (0, 1], got {self.beta_p!r}")
        if self.sigma == 0.0:
            raise DegenerateSigma("sigma = 0: the estimate is deterministic")
        if not (self.sigma > 0.0) or not math.isfinite(self.sigma):
            raise OutOfRange(f"sigma must be > 0 and finite, got {self.sigma!r}")
        if not math.isfinite(self.phi):
            raise OutOfRange(f"phi must be finite, got {self.phi!r}")

    @property
    def spread(self) -> float:
        """Error scale sigma/beta_p (std of the small-error linearization)."""
        return self.sigma / self.beta_p

    @classmethod
    def from_moments(cls, moments: TheoreticalMoments) -> "PolarPdf":
        if moments.sigma2 == 0.0:
            raise DegenerateSigma(
                "noiseless configuration: the estimate is deterministic"
            )
        return cls(
            beta_p=moments.beta_p,
            sigma=math.sqrt(moments.sigma2),
            phi=moments.phase,
        )


def pdf_value(pdf: PolarPdf, theta) -> Union[float, np.ndarray]:
    """Density of the phase estimate at theta (radians); vectorized."""
    t = np.asarray(theta, dtype=float) - pdf.phi
    beta = pdf.beta_p
    sigma = pdf.sigma

    c = np.cos(t)
    s = np.sin(t)
    # e^{-beta^2/(2 sigma^2)}: ambient (uniform) component scale
    core = math.exp(-0.5 * (beta / sigma) ** 2) if beta / sigma < 38.0 else 0.0
    ambient = core / TWO_PI

    pref = beta * c / (2.0 * _SQRT2PI * sigma)
    z = -beta * c / (sigma * _SQRT2)

    out = np.full(t.shape, ambient, dtype=float)
    pos = c >= 0.0
    if np.any(pos):
        lobe = np.exp(-0.5 * (beta * s[pos] / sigma) ** 2) * erfc(z[pos])
        out[pos] += pref[pos] * lobe
    neg = ~pos
    if np.any(neg):
        # erfc(z)*e^{-b^2 s^2/2sig^2} == erfcx(z)*e^{-b^2/2sig^2}: combining
        # the exponents analytically avoids underflow-times-overflow
        out[neg] += pref[neg] * erfcx(z[neg]) * core
    if np.ndim(theta) == 0:
        return float(out)
    return out


def _moment_integral(pdf: PolarPdf, power: int, *, rel_tol, abs_tol, max_panels) -> float:
    """integral of (theta - phi)^power * g(theta) over the principal circle."""
    centered = PolarPdf(beta_p=pdf.beta_p, sigma=pdf.sigma, phi=0.0)
    spread = centered.spread

    if spread >= NARROW_SPREAD:
        marks = [m * spread for m in (-4.0, -1.0, 1.0, 4.0)]
        return integrate(
            lambda th: th**power * pdf_value(centered, th),
            -math.pi,
            math.pi,
            rel_tol=rel_tol,
            abs_tol=abs_tol,
            max_panels=max_panels,
            breakpoints=[m for m in marks if -math.pi < m < math.pi],
        )

    # Narrow lobe: integrate theta = u*spread over |u| <= U_LIMIT, then add
    # the ambient component's exact contribution over the remaining arc.
    limit = U_LIMIT * spread

    def integrand(u):
        th = u * spread
        return th**power * pdf_value(centered, th) * spread

    lobe = integrate(
        integrand,
        -U_LIMIT,
        U_LIMIT,
        rel_tol=rel_tol,
        abs_tol=abs_tol,
        max_panels=max_panels,
        breakpoints=[-5.0, -1.0, 1.0, 5.0],
    )
    core = math.exp(-0.5 * (pdf.beta_p / pdf.sigma) ** 2) if pdf.beta_p / pdf.sigma < 38.0 else 0.0
    ambient = core / TWO_PI
    if power == 2:
        remainder = ambient * (2.0 / 3.0) * (math.pi**3 - limit**3)
    elif power == 0:
        remainder = ambient * 2.0 * (math.pi - limit)
    elif power % 2 == 1:
        remainder = 0.0
    else:
        raise ValueError(f"unsupported moment power {power}")
    return lobe + remainder


def rmse_polar(
    pdf: PolarPdf,
    *,
    rel_tol: float = 1e-10,
    abs_tol: float = 1e-14,
    max_panels: int = 2000,
) -> float:
    """Root-mean-square error of the estimate about the lobe center phi,
    from the closed-form density (no sampling)."""
    second = _moment_integral(
        pdf, 2, rel_tol=rel_tol, abs_tol=abs_tol, max_panels=max_panels
    )
    return math.sqrt(second)


def bias_polar(
    pdf: PolarPdf,
    *,
    rel_tol: float = 1e-10,
    abs_tol: float = 1e-14,
    max_panels: int = 2000,
) -> float:
    """Mean signed error; zero by symmetry, evaluated as a sanity channel."""
    return _moment_integral(
        pdf, 1, rel_tol=rel_tol, abs_tol=abs_tol, max_panels=max_panels
    )


def rmse_cartesian_oracle(moments: TheoreticalMoments) -> float:
    """RMSE via the two-dimensional Cartesian route (independent oracle).

    Integrates arg(x+jy)^2 against the isotropic Gaussian of the bin
    statistic with nested 1-D adaptive quadrature (QUADPACK), entirely
    bypassing the closed-form angular density.  Intended as a cross-check:
    Python-loop slow, accurate to ~1e-7 relative.
    """
    if moments.sigma2 == 0.0:
        raise DegenerateSigma("noiseless configuration: the estimate is deterministic")
    sigma = math.sqrt(moments.sigma2)
    mx = moments.mean.real
    my = moments.mean.imag
    phi = moments.phase

    reach = max(2.0 * moments.beta_p, 8.0 * sigma)
    xlo, xhi = min(mx - 8.0 * sigma, -reach), max(mx + 8.0 * sigma, reach)
    ylo, yhi = min(my - 8.0 * sigma, -reach), max(my + 8.0 * sigma, reach)
    norm = 1.0 / (TWO_PI * sigma**2)
    inv2s2 = 1.0 / (2.0 * sigma**2)

    def _inner_points(lo, hi, a, b):
        return [p for p in (a, b) if lo < p < hi]

    xpts = _inner_points(xlo, xhi, mx - 8.0 * sigma, mx + 8.0 * sigma)
    ypts = _inner_points(ylo, yhi, my - 8.0 * sigma, my + 8.0 * sigma)

    def inner(y):
        dy2 = (y - my) ** 2

        def f(x):
            err = math.atan2(y, x) - phi
            err = math.remainder(err, TWO_PI)
            if err <= -math.pi:
                err += TWO_PI
            return err * err * math.exp(-((x - mx) ** 2 + dy2) * inv2s2)

        val, _ = quad(f, xlo, xhi, points=xpts, limit=200, epsabs=1e-13, epsrel=1e-10)
        return val

    total, _ = quad(
        inner, ylo, yhi, points=ypts, limit=200, epsabs=1e-12, epsrel=1e-9
    )
    return math.sqrt(norm * total)


def crlb(moments: TheoreticalMoments) -> float:
    """Cramer-Rao lower bound on the error variance: sigma^2 / beta_p^2."""
    return moments.sigma2 / moments.beta_p**2


def efficiency(moments: TheoreticalMoments, rmse: float) -> float:
    """Ratio CRLB / rmse^2 (meaningful in the concentrated regime)."""
    if not (rmse > 0.0):
        raise OutOfRange(f"rmse must be > 0, got {rmse!r}")
    return crlb(moments) / rmse**2


def rmse_uniform_limit() -> float:
    """RMSE of a uniform phase estimate: pi/sqrt(3)."""
    return math.pi / math.sqrt(3.0)


def rmse_linear_approx(n_samples: int, snr: float) -> float:
    """Small-error additive-noise-only approximation 1/sqrt(N*SNR)."""
    if n_samples < 1:
        raise OutOfRange(f"n_samples must be >= 1, got {n_samples!r}")
    if math.isinf(snr) and snr > 0:
        return 0.0
    if not (snr > 0.0):
        raise OutOfRange(f"snr must be > 0, got {snr!r}")
    return 1.0 / math.sqrt(n_samples * snr)


def rmse_floor_approx(
    n_samples: int, beta_p: float, snr: Optional[float] = None
) -> float:
    """High-SNR error floor set by phase noise.

    With snr=None: sqrt((1/beta_p^2 - 1)/N), the saturation value no amount
    of additive-SNR can beat.  With a finite snr the additive term is kept:
    sqrt((1 - beta_p^2 + 1/snr) / (beta_p^2 * N)).
    """
    if n_samples < 1:
        raise OutOfRange(f"n_samples must be >= 1, got {n_samples!r}")
    if not (0.0 < beta_p <= 1.0):
        raise OutOfRange(f"beta_p must be in (0, 1], got {beta_p!r}")
    one_minus_b2 = (1.0 - beta_p) * (1.0 + beta_p)
    if snr is None:
        inv = 0.0
    elif math.isinf(snr) and snr > 0:
        inv = 0.0
    elif snr > 0:
        inv = 1.0 / snr
    else:
        raise OutOfRange(f"snr must be > 0, got {snr!r}")
    return math.sqrt((one_minus_b2 + inv) / (beta_p**2 * n_samples))


class Regime(str, enum.Enum):
    UNIFORM_SATURATED = "UniformSaturated"
    PHASE_NOISE_FLOOR = "PhaseNoiseFloor"
    LINEAR = "Linear"
    TRANSITIONAL = "Transitional"


def classify_regime(
    moments: TheoreticalMoments, rmse: Optional[float] = None
) -> Regime:
    """Asymptotic regime of a configuration (checks in priority order).

    UniformSaturated: rmse within 2% of pi/sqrt(3);
    PhaseNoiseFloor:  phase noise dominates, 1 - beta_p^2 > 10/SNR;
    Linear:           beta_p > 0.9999 and rmse within 2% of 1/sqrt(N*SNR);
    Transitional:     everything else.
    """
    if rmse is None:
        rmse = rmse_polar(PolarPdf.from_moments(moments))
    limit = rmse_uniform_limit()
    if abs(rmse - limit) <= 0.02 * limit:
        return Regime.UNIFORM_SATURATED
    one_minus_b2 = (1.0 - moments.beta_p) * (1.0 + moments.beta_p)
    threshold = 0.0 if math.isinf(moments.snr) else 10.0 / moments.snr
    if one_minus_b2 > threshold:
        return Regime.PHASE_NOISE_FLOOR
    if moments.beta_p > 0.9999 and not math.isinf(moments.snr):
        linear = rmse_linear_approx(moments.n_samples, moments.snr)
        if abs(rmse - linear) <= 0.02 * linear:
            return Regime.LINEAR
    return Regime.TRANSITIONAL


@dataclass(frozen=True)
class ErrorReport:
    """Analytic error summary for one configuration."""

    rmse_analytic: float
    bias_analytic: float
    crlb: float
    efficiency: float
    rmse_linear_approx: float
    rmse_floor_approx: float
    regime: Regime


def error_report(moments: TheoreticalMoments) -> ErrorReport:
    """Assemble the full analytic error summary for one configuration.

    Note the efficiency field is CRLB/rmse^2 verbatim; outside the
    concentrated regime the bound is not attainable and the ratio may exceed
    one — interpret it together with `regime`.
    """
    pdf = PolarPdf.from_moments(moments)
    rmse = rmse_polar(pdf)
    bias = bias_polar(pdf)
    return ErrorReport(
        rmse_analytic=rmse,
        bias_analytic=bias,
        crlb=crlb(moments),
        efficiency=efficiency(moments, rmse),
        rmse_linear_approx=rmse_linear_approx(moments.n_samples, moments.snr),
        rmse_floor_approx=rmse_floor_approx(moments.n_samples, moments.beta_p),
        regime=classify_regime(moments, rmse=rmse),
    )

"""Closed-form probability laws used by the shell/slab decoder analysis.

Normal tails are evaluated through erfc so that values far out in the tail
keep full relative accuracy (a naive 1 - CDF cancels catastrophically).
The chi-square CDF is the exact law behind the normal shell approximation
and serves as the oracle the approximation is compared against.

Convention: code parameters spelled "log n" (the shell half-width eps_n,
slab width, tree depth) use the binary logarithm; the analytic tail
formulas keep their natural-exponential form exactly as they stand.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy.special import gammainc

__all__ = [
    "ShellSpec",
    "default_eps",
    "std_normal_pdf",
    "std_normal_cdf",
    "projection_tail",
    "chi_square_cdf",
    "shell_prob_same",
    "shell_prob_cross",
    "mills_bound",
]

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def default_eps(n: int) -> float:
    """Default shell half-width parameter, log2(n) / sqrt(n)."""
    return math.log2(n) / math.sqrt(n)


@dataclass(frozen=True)
class ShellSpec:
    """Dimension, noise level and shell half-width of a decoding shell.

    eps_n defaults to log2(n)/sqrt(n) when not given.
    """

    n: int
    sigma: float
    eps_n: float | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if self.sigma <= 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")
        if self.eps_n is None:
            object.__setattr__(self, "eps_n", default_eps(self.n))
        if self.eps_n <= 0:
            raise ValueError(f"eps_n must be > 0, got {self.eps_n}")


def std_normal_pdf(z: float) -> float:
    """Standard normal density."""
    return _INV_SQRT_2PI * math.exp(-0.5 * z * z)


def std_normal_cdf(x: float) -> float:
    """Standard normal CDF via erfc; keeps relative accuracy deep in the tail."""
    return 0.5 * math.erfc(-x / _SQRT2)


def projection_tail(x: float) -> float:
    """P(|N(0,1)| >= x) = 2 Phi(-x): tail of the norm of a Gaussian projection.

    The projection of an i.i.d. standard normal vector onto any fixed
    direction is a scalar standard normal, so the norm of the projection
    follows |N(0,1)|.
    """
    if x < 0:
        raise ValueError(f"x must be >= 0, got {x}")
    return math.erfc(x / _SQRT2)


def chi_square_cdf(n: int, x: float) -> float:
    """Chi-square CDF with n degrees of freedom: regularized gamma P(n/2, x/2)."""
    if n < 1 or int(n) != n:
        raise ValueError(f"degrees of freedom must be a positive integer, got {n}")
    if x < 0:
        raise ValueError(f"x must be >= 0, got {x}")
    if math.isinf(x):
        return 1.0
    return float(gammainc(n / 2.0, x / 2.0))


def shell_prob_same(spec: ShellSpec, method: str = "exact") -> float:
    """Probability that noise around the transmitted point lands in its own shell.

    method="normal-approx": the central-limit approximation
    1 - 2 Phi(-sqrt(n) eps / (sqrt(2) sigma^2)).
    method="exact": the chi-square law
    P(n - n eps/sigma^2 <= chi2(n) <= n + n eps/sigma^2).

    At desk-scale n the two differ by more than the approximate tail itself,
    which is why the exact value backs every empirical comparison.
    """
    n, sigma, eps = spec.n, spec.sigma, spec.eps_n
    if method == "normal-approx":
        a = math.sqrt(n) * eps / (_SQRT2 * sigma * sigma)
        return 1.0 - 2.0 * std_normal_cdf(-a)
    if method == "exact":
        shift = n * eps / (sigma * sigma)
        hi = chi_square_cdf(n, n + shift)
        lo = chi_square_cdf(n, max(0.0, n - shift))
        return hi - lo
    raise ValueError(f"unknown method {method!r}; expected 'normal-approx' or 'exact'")


def shell_prob_cross(spec: ShellSpec, d: float) -> float:
    """Normal approximation of landing in the shell of a codeword at distance d.

    Phi((n eps - d^2) / (sigma sqrt(2 n sigma^2 + 4 d^2))).
    """
    if d < 0:
        raise ValueError(f"distance must be >= 0, got {d}")
    n, sigma, eps = spec.n, spec.sigma, spec.eps_n
    return std_normal_cdf((n * eps - d * d) / (sigma * math.sqrt(2 * n * sigma**2 + 4 * d * d)))


def mills_bound(spec: ShellSpec) -> float:
    """Gaussian tail bound dominating the shell miss probability.

    (2 sigma^2 / (sqrt(n pi) eps)) * exp(-n eps^2 / (4 sigma^4)); always at
    least Phi(-sqrt(n) eps / (sqrt(2) sigma^2)), with slack factor 2 on top
    of the plain phi(x)/x bound.
    """
    n, sigma, eps = spec.n, spec.sigma, spec.eps_n
    if eps == 0:
        raise ValueError("eps_n must be > 0 for the tail bound")
    return (2 * sigma**2 / (math.sqrt(n * math.pi) * eps)) * math.exp(
        -n * eps * eps / (4 * sigma**4)
    )

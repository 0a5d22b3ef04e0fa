"""AWGN channel and the hierarchical shell/slab decoder.

The channel adds i.i.d. N(0, sigma^2) noise per coordinate.  The decoder
for a codeword u accepts an output y iff y lies in the noise shell around
u (squared distance within n(sigma^2 +/- eps_n)) and, for every ancestor
center o in u's chain, the projection of y onto the line o-u lands within
sigma log2(n) of u.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .galaxy import Codeword, GalaxyParams
from .gaussian import default_eps
from .geometry import as_coords, project_point_onto_line

__all__ = [
    "DecoderParams",
    "ChannelOutput",
    "transmit",
    "in_shell",
    "in_slab",
    "identify",
    "slab_separation_margin",
]


@dataclass(frozen=True)
class DecoderParams:
    """Shell and slab thresholds; defaults are eps_n = log2(n)/sqrt(n) and
    slab half-width sigma log2(n)."""

    n: int
    sigma: float
    eps_n: float | None = None
    slab_halfwidth: float | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if self.sigma < 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")
        if self.eps_n is None:
            object.__setattr__(self, "eps_n", default_eps(self.n))
        if self.eps_n <= 0:
            raise ValueError(f"eps_n must be > 0, got {self.eps_n}")
        if self.slab_halfwidth is None:
            object.__setattr__(self, "slab_halfwidth", self.sigma * math.log2(self.n))
        if self.slab_halfwidth < 0:
            raise ValueError(f"slab_halfwidth must be >= 0, got {self.slab_halfwidth}")

    @classmethod
    def from_galaxy(cls, params: GalaxyParams) -> "DecoderParams":
        return cls(n=params.n, sigma=params.sigma)

    @property
    def shell_bounds(self) -> tuple[float, float]:
        """Squared-norm window [max(0, n(sigma^2 - eps)), n(sigma^2 + eps)]."""
        lo = self.n * (self.sigma**2 - self.eps_n)
        hi = self.n * (self.sigma**2 + self.eps_n)
        return max(0.0, lo), hi


@dataclass(frozen=True)
class ChannelOutput:
    """A received vector plus the transmitted index, known only to the harness."""

    y: np.ndarray
    source_index: int


def transmit(u, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """One channel use: y = u + sigma * z with z drawn from the given stream."""
    u = as_coords(u)
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    return u + sigma * rng.standard_normal(u.size)


def in_shell(y, u, params: DecoderParams) -> bool:
    """Whether ||y - u||^2 lies in the shell window.

    The window is on the squared norm: the shell is exactly the event that
    the normalized noise chi-square statistic concentrates, so the squared
    form is the one consistent with the underlying law.
    """
    y = as_coords(y)
    u = as_coords(u)
    if y.size != u.size:
        raise ValueError(f"dimension mismatch: {y.size} vs {u.size}")
    lo, hi = params.shell_bounds
    d = y - u
    sq = float(np.dot(d, d))
    return lo <= sq <= hi


def in_slab(y, o, u, params: DecoderParams) -> bool:
    """Whether the projection of y onto the line o-u lands within the slab of u."""
    p = project_point_onto_line(o, u, y)
    return float(np.linalg.norm(as_coords(u) - p)) <= params.slab_halfwidth


def identify(y, c: Codeword, params: DecoderParams) -> bool:
    """Full decision: shell around u and every slab along u's center chain.

    Slabs are tested top-down (outermost ancestor first), zooming in level
    by level; the result is a pure conjunction, so the order never changes
    the outcome.
    """
    if not c.path:
        raise ValueError("codeword carries no center chain")
    if not in_shell(y, c.u, params):
        return False
    for o in reversed(c.path):
        if not in_slab(y, o, c.u, params):
            return False
    return True


def slab_separation_margin(u1, u2, o_bar) -> float:
    """Along-line distance between u1 and the projection of u2 onto line o_bar-u1.

    Equals (||u1-o||^2 + ||u1-u2||^2 - ||u2-o||^2) / (2 ||u1-o||).  When
    this is at least 2 sigma log2 n, the slab of u1 rejects transmissions
    of u2 except with probability 2 Phi(-log2 n).
    """
    u1 = as_coords(u1)
    u2 = as_coords(u2)
    o = as_coords(o_bar)
    a2 = float(np.dot(u1 - o, u1 - o))
    d2 = float(np.dot(u1 - u2, u1 - u2))
    b2 = float(np.dot(u2 - o, u2 - o))
    a = math.sqrt(a2)
    if a == 0.0:
        raise ValueError("degenerate line: u1 coincides with the ancestor center")
    return (a2 + d2 - b2) / (2.0 * a)

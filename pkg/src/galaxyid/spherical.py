"""Minimum-angle codes on spheres.

A theta-spherical code is a finite set of points on a sphere S(center, r)
such that any two distinct points subtend an angle >= theta at the center.
Optimal packings are not attempted: every downstream distance guarantee
only needs the minimum-angle property, which the greedy construction
certifies by an exhaustive O(m^2) check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import as_coords

__all__ = [
    "SphericalCode",
    "generate",
    "min_pairwise_angle",
    "csw_lower_bound",
    "csw_lower_bound_full",
]

# Slack on the dot-product acceptance test; keeps exact witness
# configurations (dot == cos theta) acceptable under rounding.
_DOT_TOL = 1e-12


@dataclass
class SphericalCode:
    """Points on S(center, radius) with pairwise subtended angle >= theta."""

    center: np.ndarray
    radius: float
    theta: float
    points: np.ndarray  # shape (m, n), rows on the sphere
    seed: int
    saturated: bool = False

    def __len__(self) -> int:
        return self.points.shape[0]


def _simplex_directions(n: int, m: int) -> np.ndarray:
    """Unit vertices of a regular (m-1)-simplex embedded in R^n, m <= n+1.

    Pairwise inner products are exactly -1/(m-1).
    """
    e = np.eye(m, dtype=np.float64)
    v = e - e.mean(axis=0)
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    out = np.zeros((m, n), dtype=np.float64)
    out[:, :m] = v
    return out


def _witness_candidates(n: int, theta: float) -> list[np.ndarray]:
    """Deterministic candidate prefix that realizes known-feasible configurations.

    Uniform proposals alone have probability zero of hitting the tight
    configurations (the antipodal pair at theta = pi, the orthoplex at
    theta = pi/2, the regular simplex for obtuse theta), so those are
    offered first.  For obtuse theta the simplex must come before the
    signed basis: an accepted antipodal pair blocks every further point.
    """
    cos_t = math.cos(theta)
    basis: list[np.ndarray] = []
    for i in range(n):
        e = np.zeros(n, dtype=np.float64)
        e[i] = 1.0
        basis.extend((e, -e))
    if cos_t >= -_DOT_TOL:
        return basis
    # Largest m with pairwise dot <= cos theta achievable: (m-1) cos >= -1.
    m = min(n + 1, int(math.floor(1.0 - 1.0 / cos_t + 1e-9)))
    if m < 2:
        return basis
    return [d for d in _simplex_directions(n, m)] + basis


def generate(
    n: int,
    center,
    r: float,
    theta: float,
    target_m: int,
    max_attempts: int,
    seed: int,
) -> SphericalCode:
    """Greedily build a theta-spherical code of up to target_m points.

    Candidates are the deterministic witness prefix followed by uniform
    directions (normalized i.i.d. standard normal draws); a candidate is
    accepted iff it keeps the minimum subtended angle >= theta against
    everything accepted so far.  Generation stops at target_m points or
    after max_attempts consecutive rejections, in which case the result
    is flagged saturated.  Fully deterministic given the seed.
    """
    if not (0 < theta <= math.pi):
        raise ValueError(f"theta must lie in (0, pi], got {theta}")
    if target_m < 1:
        raise ValueError(f"target_m must be >= 1, got {target_m}")
    if r <= 0:
        raise ValueError(f"radius must be > 0, got {r}")
    center = as_coords(center)
    if center.size != n:
        raise ValueError(f"center has dimension {center.size}, expected {n}")

    rng = np.random.default_rng(seed)
    cos_t = math.cos(theta)
    accepted: list[np.ndarray] = []
    prefix = _witness_candidates(n, theta)
    prefix_pos = 0
    rejections = 0
    saturated = False

    while len(accepted) < target_m:
        if prefix_pos < len(prefix):
            cand = prefix[prefix_pos]
            prefix_pos += 1
        else:
            v = rng.standard_normal(n)
            norm = np.linalg.norm(v)
            if norm == 0.0:
                continue
            cand = v / norm
        if accepted and np.max(np.asarray(accepted) @ cand) > cos_t + _DOT_TOL:
            rejections += 1
            if rejections >= max_attempts:
                saturated = True
                break
            continue
        accepted.append(cand)
        rejections = 0

    dirs = np.asarray(accepted, dtype=np.float64)
    return SphericalCode(
        center=center,
        radius=float(r),
        theta=float(theta),
        points=center + r * dirs,
        seed=seed,
        saturated=saturated,
    )


def min_pairwise_angle(code: SphericalCode) -> float:
    """Exact minimum over all point pairs of the angle subtended at the center."""
    m = len(code)
    if m < 2:
        raise ValueError("need at least two points for a pairwise angle")
    offs = code.points - code.center
    offs = offs / np.linalg.norm(offs, axis=1, keepdims=True)
    gram = offs @ offs.T
    iu = np.triu_indices(m, k=1)
    max_dot = float(np.max(gram[iu]))
    return math.acos(max(-1.0, min(1.0, max_dot)))


def csw_lower_bound(n: int, theta: float) -> float:
    """Simplified lower bound sin(theta)^(-n) on the maximum code size M(n, theta).

    This is the form the rate bounds use downstream.
    """
    if not (0 < theta < math.pi):
        raise ValueError(f"theta must lie in (0, pi), got {theta}")
    return math.sin(theta) ** (-n)


def csw_lower_bound_full(n: int, theta: float) -> float:
    """Full Chabauty/Shannon/Wyner expression with the o(1) factors dropped.

    n * sqrt(2 pi n) * cos(theta) / sin(theta)^(n-1) * log2(sqrt(2) cos(theta/2));
    only defined for theta < pi/2 where cos(theta) > 0.  Reporting only.
    """
    if not (0 < theta < math.pi / 2):
        raise ValueError(f"full bound requires 0 < theta < pi/2, got {theta}")
    s_inv = math.sqrt(2 * math.pi * n) * math.cos(theta) / math.sin(theta) ** (n - 1)
    return n * s_inv * math.log2(math.sqrt(2.0) * math.cos(theta / 2.0))

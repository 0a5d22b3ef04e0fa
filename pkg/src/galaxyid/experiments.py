"""Monte Carlo error estimation, exhaustive structural checks, rate reports.

Estimation is organized in fixed-size work units, each with its own RNG
stream derived from (master seed, unit index).  The unit plan depends only
on the trial count, so results are bit-identical no matter how many
workers execute the units, and merging is plain summation.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from statistics import NormalDist

import numpy as np
from scipy.spatial.distance import cdist

from . import galaxy
from .channel import DecoderParams
from .galaxy import Codeword, GalaxyCode, meet_depth
from .gaussian import ShellSpec, projection_tail, shell_prob_cross, shell_prob_same
from .seeding import derive_seed
from .spherical import csw_lower_bound, min_pairwise_angle

__all__ = [
    "ErrorEstimate",
    "PairStrategy",
    "StructureReport",
    "RateReport",
    "TrialPlan",
    "SweepResult",
    "wilson_interval",
    "estimate_type1",
    "estimate_type2",
    "verify_structure",
    "rate_report",
    "sweep",
]

UNIT_SIZE = 8192  # trials per RNG work unit; fixed so worker count never matters
_PAIR_CAP = 20000  # strategies larger than this are subsampled deterministically
ANGLE_TOL = 1e-9


def wilson_interval(hits: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    """Wilson score interval; well-defined at p_hat of 0 or 1."""
    if trials <= 0:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if not 0 <= hits <= trials:
        raise ValueError(f"hits {hits} outside [0, {trials}]")
    z = NormalDist().inv_cdf(0.5 + confidence / 2.0)
    phat = hits / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = phat + z2 / (2.0 * trials)
    radius = z * math.sqrt(max(0.0, phat * (1.0 - phat) / trials + z2 / (4.0 * trials * trials)))
    lo = max(0.0, (center - radius) / denom)
    hi = min(1.0, (center + radius) / denom)
    # rounding must never push the interval off the point estimate
    return min(lo, phat), max(hi, phat)


@dataclass(frozen=True)
class ErrorEstimate:
    """Result of one Monte Carlo error estimation run.

    `hits` counts the headline event (type1: rejection of the true
    codeword's decision set; type2: false acceptance).  `components`
    carries sub-event counts (shell / decisive slab) so the two failure
    routes can be reported separately without composing a bound the
    analysis does not state.  `rule_of_three` is the 3/trials zero-hit
    upper bound, reported alongside since the analytic bounds usually sit
    below Monte Carlo resolution.
    """

    kind: str
    trials: int
    hits: int
    p_hat: float
    wilson_95: tuple[float, float]
    analytic_bound: float
    bound_formula: str
    seed: int
    rule_of_three: float
    components: dict = field(default_factory=dict)


@dataclass(frozen=True)
class PairStrategy:
    """Which ordered codeword pairs (target, sender) a type-II run exercises.

    mode: "same-planet" (meet height 1), "same-galaxy-deep" (meet at the
    full depth), "cross-galaxy", or "exhaustive-sample" (seeded sample of
    `sample_count` ordered pairs of any class).  min_distance filters
    cross-galaxy pairs by Euclidean distance.
    """

    mode: str
    sample_count: int | None = None
    min_distance: float | None = None

    _MODES = ("same-planet", "same-galaxy-deep", "cross-galaxy", "exhaustive-sample")

    def __post_init__(self):
        if self.mode not in self._MODES:
            raise ValueError(f"unknown pair mode {self.mode!r}; expected one of {self._MODES}")
        if self.mode == "exhaustive-sample" and not self.sample_count:
            raise ValueError("exhaustive-sample requires sample_count")


@dataclass
class StructureReport:
    """Violation lists from the exhaustive structural checks; empty means pass."""

    cond1_violations: list = field(default_factory=list)
    cond2_violations: list = field(default_factory=list)
    cross_galaxy_violations: list = field(default_factory=list)
    angle_violations: list = field(default_factory=list)
    power_violations: list = field(default_factory=list)
    separation: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not (
            self.cond1_violations
            or self.cond2_violations
            or self.cross_galaxy_violations
            or self.angle_violations
            or self.power_violations
        )

    def counts(self) -> dict:
        return {
            "cond1": len(self.cond1_violations),
            "cond2": len(self.cond2_violations),
            "cross_galaxy": len(self.cross_galaxy_violations),
            "angle": len(self.angle_violations),
            "power": len(self.power_violations),
        }


@dataclass(frozen=True)
class RateReport:
    """Achieved codebook size against every bound the analysis provides.

    `lemma1_met` is None (no claim either way) whenever the per-level code
    size falls short of the simplified spherical-code bound or the packing
    stopped for a reason other than saturation; the gap is data, not a
    failure.
    """

    num_codewords: int
    num_roots: int
    rate_achieved: float
    lemma1_bound: float
    claim1_bounds: tuple[float, float]
    asymptotic: float
    csw_bound: float
    m_achieved: int
    packing_saturated: bool
    claim1_upper_ok: bool
    claim1_consistent: bool | None
    lemma1_met: bool | None


# ---------------------------------------------------------------------------
# vectorized decoder internals
# ---------------------------------------------------------------------------


class _CodewordKernel:
    """Precomputed arrays for batch decoding against one codeword."""

    def __init__(self, c: Codeword, params: DecoderParams):
        self.u = c.u
        dirs = np.asarray([c.u - o for o in c.path], dtype=np.float64)
        norms = np.linalg.norm(dirs, axis=1, keepdims=True)
        if np.any(norms == 0.0):
            raise ValueError("degenerate center chain: ancestor coincides with codeword")
        self.directions = dirs / norms
        self.shell_lo, self.shell_hi = params.shell_bounds
        self.halfwidth = params.slab_halfwidth

    def decide(self, deltas: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Shell mask, per-level slab masks, full-decision mask for rows y - u."""
        sq = np.einsum("ij,ij->i", deltas, deltas)
        shell = (self.shell_lo <= sq) & (sq <= self.shell_hi)
        along = np.abs(deltas @ self.directions.T)
        slabs = along <= self.halfwidth
        return shell, slabs, shell & slabs.all(axis=1)


def _unit_plan(trials: int) -> list[tuple[int, int]]:
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    return [(s, min(UNIT_SIZE, trials - s)) for s in range(0, trials, UNIT_SIZE)]


def _resolve_threads(threads: int | None) -> int:
    return max(1, threads or 1)


def _run_units(worker, n_units: int, threads: int) -> list:
    if threads <= 1:
        return [worker(i) for i in range(n_units)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(worker, range(n_units)))


def _grouped(indices: np.ndarray):
    """Yield (value, row positions) groups of an integer assignment vector."""
    order = np.argsort(indices, kind="stable")
    values, starts, counts = np.unique(indices[order], return_index=True, return_counts=True)
    for v, s, c in zip(values, starts, counts):
        yield int(v), order[s : s + c]


def estimate_type1(
    code: GalaxyCode,
    params: DecoderParams,
    trials: int,
    master_seed: int,
    threads: int | None = None,
) -> ErrorEstimate:
    """Miss rate of the decoder on its own transmissions.

    Codewords are visited round-robin (trial t uses codeword t mod N) so
    every decision set is exercised; a hit is a rejection.  The analytic
    companion is the exact shell miss plus the union bound over the slab
    levels.
    """
    plan = _unit_plan(trials)
    kernels = [_CodewordKernel(c, params) for c in code.codewords]
    n_cw = len(kernels)
    n, sigma = params.n, params.sigma

    def run_unit(unit_index: int) -> int:
        start, size = plan[unit_index]
        rng = np.random.default_rng(derive_seed(master_seed, "type1", unit_index))
        noise = rng.standard_normal((size, n))
        assignment = (start + np.arange(size)) % n_cw
        hits = 0
        for j, rows in _grouped(assignment):
            _, _, accept = kernels[j].decide(sigma * noise[rows])
            hits += int(rows.size - accept.sum())
        return hits

    hits = sum(_run_units(run_unit, len(plan), _resolve_threads(threads)))
    spec = ShellSpec(n=n, sigma=sigma, eps_n=params.eps_n)
    t_bar = code.params.t_bar
    bound = (1.0 - shell_prob_same(spec, "exact")) + t_bar * projection_tail(math.log2(n))
    return ErrorEstimate(
        kind="type1",
        trials=trials,
        hits=hits,
        p_hat=hits / trials,
        wilson_95=wilson_interval(hits, trials),
        analytic_bound=bound,
        bound_formula="shell-exact+slab-union",
        seed=master_seed,
        rule_of_three=3.0 / trials,
    )


def select_pairs(code: GalaxyCode, strategy: PairStrategy, master_seed: int) -> list[tuple[int, int]]:
    """Ordered (target, sender) index pairs matching the strategy.

    Deterministic: any subsampling uses a stream derived from the master
    seed.  Raises when the code contains no pair of the requested class.
    """
    cws = code.codewords
    n_cw = len(cws)
    if n_cw < 2:
        raise ValueError("need at least two codewords to form pairs")
    pairs: list[tuple[int, int]] = []
    if strategy.mode == "exhaustive-sample":
        rng = np.random.default_rng(derive_seed(master_seed, "pair-sample"))
        seen = set()
        while len(pairs) < strategy.sample_count:
            i, j = int(rng.integers(n_cw)), int(rng.integers(n_cw))
            if i != j and (i, j) not in seen:
                seen.add((i, j))
                pairs.append((i, j))
        return pairs
    t_bar = code.params.t_bar
    for i in range(n_cw):
        for j in range(n_cw):
            if i == j:
                continue
            if cws[i].root_index != cws[j].root_index:
                if strategy.mode != "cross-galaxy":
                    continue
                if strategy.min_distance is not None:
                    if float(np.linalg.norm(cws[i].u - cws[j].u)) < strategy.min_distance:
                        continue
                pairs.append((i, j))
            else:
                meet = meet_depth(cws[i], cws[j])
                if strategy.mode == "same-planet" and meet == 1:
                    pairs.append((i, j))
                elif strategy.mode == "same-galaxy-deep" and meet == t_bar:
                    pairs.append((i, j))
    if not pairs:
        raise ValueError(f"no pairs match strategy {strategy.mode!r}")
    if len(pairs) > _PAIR_CAP:
        rng = np.random.default_rng(derive_seed(master_seed, "pair-cap"))
        keep = rng.choice(len(pairs), size=_PAIR_CAP, replace=False)
        pairs = [pairs[int(t)] for t in np.sort(keep)]
    return pairs


def estimate_type2(
    code: GalaxyCode,
    strategy: PairStrategy,
    params: DecoderParams,
    trials: int,
    master_seed: int,
    threads: int | None = None,
) -> ErrorEstimate:
    """False-acceptance rate: transmit the sender, test the target's decision set.

    Pairs are visited round-robin.  Sub-events are counted separately: the
    shell of the target, and the slab at the pair's meet ancestor (the one
    the separation analysis makes decisive).  Cross-galaxy pairs have no
    meet ancestor, so their decisive-slab count stays zero by construction.
    """
    pairs = select_pairs(code, strategy, master_seed)
    plan = _unit_plan(trials)
    cws = code.codewords
    kernels: dict[int, _CodewordKernel] = {}
    offsets = []
    meet_rows = []
    for ti, si in pairs:
        if ti not in kernels:
            kernels[ti] = _CodewordKernel(cws[ti], params)
        offsets.append(cws[si].u - cws[ti].u)
        meet = meet_depth(cws[ti], cws[si])
        meet_rows.append(-1 if meet is None else meet - 1)
    n, sigma = params.n, params.sigma

    def run_unit(unit_index: int) -> tuple[int, int, int]:
        start, size = plan[unit_index]
        rng = np.random.default_rng(derive_seed(master_seed, "type2", unit_index))
        noise = rng.standard_normal((size, n))
        assignment = (start + np.arange(size)) % len(pairs)
        decision = shell_ct = slab_ct = 0
        for p, rows in _grouped(assignment):
            kern = kernels[pairs[p][0]]
            shell, slabs, accept = kern.decide(offsets[p] + sigma * noise[rows])
            decision += int(accept.sum())
            shell_ct += int(shell.sum())
            if meet_rows[p] >= 0:
                slab_ct += int(slabs[:, meet_rows[p]].sum())
        return decision, shell_ct, slab_ct

    totals = _run_units(run_unit, len(plan), _resolve_threads(threads))
    hits = sum(t[0] for t in totals)
    shell_hits = sum(t[1] for t in totals)
    slab_hits = sum(t[2] for t in totals)

    spec = ShellSpec(n=n, sigma=sigma, eps_n=params.eps_n) if sigma > 0 else None
    cross_ds = [float(np.linalg.norm(offsets[p])) for p in range(len(pairs)) if meet_rows[p] < 0]
    if strategy.mode == "cross-galaxy" or (cross_ds and len(cross_ds) == len(pairs)):
        bound = shell_prob_cross(spec, min(cross_ds)) if spec else 0.0
        formula = "cross-shell"
    elif not cross_ds:
        bound = projection_tail(math.log2(n))
        formula = "meet-slab-tail"
    else:
        slab = projection_tail(math.log2(n))
        cross = shell_prob_cross(spec, min(cross_ds)) if spec else 0.0
        bound = max(slab, cross)
        formula = "max(cross-shell,meet-slab-tail)"
    return ErrorEstimate(
        kind="type2",
        trials=trials,
        hits=hits,
        p_hat=hits / trials,
        wilson_95=wilson_interval(hits, trials),
        analytic_bound=bound,
        bound_formula=formula,
        seed=master_seed,
        rule_of_three=3.0 / trials,
        components={"shell_hits": shell_hits, "decisive_slab_hits": slab_hits},
    )


# ---------------------------------------------------------------------------
# structural verification
# ---------------------------------------------------------------------------


def verify_structure(code: GalaxyCode, tol: float = 1e-6) -> StructureReport:
    """Exhaustive check of every structural guarantee of the construction.

    Radial windows codeword-to-ancestor, exact node-chain radii, pairwise
    meet-height distance bounds within a root, the cross-galaxy floor
    n^(b+1/4)/2, per-node minimum angles, and the power constraint.  All
    violations are returned with their measured values.
    """
    if not code.codewords:
        raise ValueError("cannot verify an empty code")
    p = code.params
    report = StructureReport(separation=galaxy.separation_margins(p.k, p.theta))

    cws = code.codewords
    u_mat = np.asarray([c.u for c in cws])
    roots_of = np.asarray([c.root_index for c in cws])
    index_paths = np.asarray([c.index_path for c in cws])

    # Radial windows per ancestor height (lo = hi = r at height 1).
    for t in range(1, p.t_bar + 1):
        lo, hi = galaxy.radial_bounds(p.r, p.k, t)
        anc = np.asarray([c.path[t - 1] for c in cws])
        dist = np.linalg.norm(u_mat - anc, axis=1)
        for i in np.nonzero((dist < lo - tol) | (dist > hi + tol))[0]:
            report.cond1_violations.append(
                {
                    "kind": "codeword-radial",
                    "codeword": int(i),
                    "height": t,
                    "measured": float(dist[i]),
                    "bound": (lo, hi),
                }
            )

    # Exact node-chain radii and per-node angles.
    def walk(node, tree_index):
        radius = node.code.radius
        d = np.linalg.norm(node.code.points - node.center, axis=1)
        bad = np.nonzero(np.abs(d - radius) > 1e-9 * radius)[0]
        for i in bad:
            report.cond1_violations.append(
                {
                    "kind": "node-radius",
                    "root": tree_index,
                    "height": node.height,
                    "point": int(i),
                    "measured": float(d[i]),
                    "bound": (radius, radius),
                }
            )
        if len(node.code) >= 2:
            ang = min_pairwise_angle(node.code)
            if ang < p.theta - ANGLE_TOL:
                report.angle_violations.append(
                    {
                        "root": tree_index,
                        "height": node.height,
                        "measured": float(ang),
                        "bound": p.theta,
                    }
                )
        for child in node.children:
            walk(child, tree_index)

    for tree in code.trees:
        walk(tree.root, tree.root_index)

    # Pairwise distances: meet-height bound inside a root, floor across roots.
    dists = cdist(u_mat, u_mat)
    bound_at = np.asarray(
        [0.0] + [galaxy.pair_distance_lower_bound(p.r, p.k, p.theta, t) for t in range(1, p.t_bar + 1)]
    )
    for root in np.unique(roots_of):
        grp = np.nonzero(roots_of == root)[0]
        ip = index_paths[grp]
        eq = ip[:, None, :] == ip[None, :, :]
        lcp = np.cumprod(eq, axis=2).sum(axis=2)
        meets = p.t_bar - lcp  # 0 on the diagonal (identical paths)
        sub = dists[np.ix_(grp, grp)]
        ii, jj = np.nonzero(np.triu(sub < bound_at[meets] - tol, k=1))
        for a, bb in zip(ii, jj):
            report.cond2_violations.append(
                {
                    "pair": (int(grp[a]), int(grp[bb])),
                    "meet": int(meets[a, bb]),
                    "measured": float(sub[a, bb]),
                    "bound": float(bound_at[meets[a, bb]]),
                }
            )
    cross_floor = p.n ** (p.b + 0.25) / 2.0
    cross_bad = np.triu((roots_of[:, None] != roots_of[None, :]) & (dists < cross_floor - tol), k=1)
    for i, j in zip(*np.nonzero(cross_bad)):
        report.cross_galaxy_violations.append(
            {"pair": (int(i), int(j)), "measured": float(dists[i, j]), "bound": cross_floor}
        )

    # Power constraint on every codeword.
    power_cap = math.sqrt(p.n * p.power)
    norms = np.linalg.norm(u_mat, axis=1)
    for i in np.nonzero(norms > power_cap + tol)[0]:
        report.power_violations.append(
            {"codeword": int(i), "measured": float(norms[i]), "bound": power_cap}
        )
    return report


def _min_m_achieved(code: GalaxyCode) -> int:
    vals = []

    def walk(node):
        vals.append(len(node.code))
        for child in node.children:
            walk(child)

    for tree in code.trees:
        walk(tree.root)
    return min(vals)


def rate_report(code: GalaxyCode) -> RateReport:
    """Achieved size and rate next to every analytic bound, gaps flagged."""
    p = code.params
    n_cw = len(code.codewords)
    n_roots = len(code.roots)
    rate = math.log2(n_cw) / (p.n * math.log2(p.n)) if n_cw >= 1 else 0.0
    lo, hi = galaxy.center_count_bounds(p.n, p.power, p.b)
    csw = csw_lower_bound(p.n, p.theta)
    m_achieved = _min_m_achieved(code)
    claim1_upper_ok = n_roots <= hi
    claim1_consistent = None
    if lo >= 1 and code.packing_saturated:
        claim1_consistent = bool(lo <= n_roots <= hi)
    lemma1_bound = galaxy.rate_lower_bound(p.n, p.power, p.b, p.k, p.theta)
    lemma1_met = None
    if m_achieved >= csw and code.packing_saturated:
        lemma1_met = bool(rate >= lemma1_bound - 1e-12)
    return RateReport(
        num_codewords=n_cw,
        num_roots=n_roots,
        rate_achieved=rate,
        lemma1_bound=lemma1_bound,
        claim1_bounds=(lo, hi),
        asymptotic=galaxy.asymptotic_rate(p.b, p.k),
        csw_bound=csw,
        m_achieved=m_achieved,
        packing_saturated=code.packing_saturated,
        claim1_upper_ok=claim1_upper_ok,
        claim1_consistent=claim1_consistent,
        lemma1_met=lemma1_met,
    )


# ---------------------------------------------------------------------------
# parameter sweeps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TrialPlan:
    """Per-cell Monte Carlo plan for a sweep."""

    type1_trials: int = 0
    type2_trials: int = 0
    pair_mode: str = "cross-galaxy"


@dataclass
class SweepResult:
    params: galaxy.GalaxyParams
    rate: RateReport | None = None
    structure_passed: bool | None = None
    type1: ErrorEstimate | None = None
    type2: ErrorEstimate | None = None
    error: str | None = None


def _params_key(p: galaxy.GalaxyParams) -> str:
    fields = (
        p.n, p.power, p.b, p.k, p.theta, p.m_per_level, p.sigma, p.master_seed,
        p.t_bar, p.r_min_coeff, p.enforce_cross_galaxy_margin, p.max_roots,
        p.saturation_probes, p.max_attempts,
    )
    return "|".join(repr(f) for f in fields)


def sweep(
    grid: list,
    plan: TrialPlan,
    master_seed: int,
    threads: int | None = None,
) -> list[SweepResult]:
    """Build + verify + estimate per grid cell; rows come back in grid order.

    Cells are independent; estimator seeds derive from the cell's own
    parameters, so duplicate cells produce identical rows and execution
    order is irrelevant.  Per-cell failures are recorded in the row and
    the sweep continues.
    """
    if not grid:
        raise ValueError("sweep grid is empty")

    def run_cell(index: int) -> SweepResult:
        params = grid[index]
        result = SweepResult(params=params)
        try:
            code = galaxy.build_code(params)
            result.rate = rate_report(code)
            result.structure_passed = verify_structure(code).passed
            dec = DecoderParams.from_galaxy(params)
            cell_seed = derive_seed(master_seed, "cell", _params_key(params))
            if plan.type1_trials:
                result.type1 = estimate_type1(code, dec, plan.type1_trials, cell_seed)
            if plan.type2_trials:
                result.type2 = estimate_type2(
                    code, PairStrategy(mode=plan.pair_mode), dec, plan.type2_trials, cell_seed
                )
        except (ValueError, ArithmeticError) as exc:
            result.error = str(exc)
        return result

    return _run_units(run_cell, len(grid), _resolve_threads(threads))

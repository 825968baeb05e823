"""Bifurcation-event renormalization on Z^2_+ and its site-percolation oracle.

A point (m, n) of the renormalized lattice is "red" when some lattice point
on the line {((a, m*beta), 2n)} is both reachable from the origin and the
root of a successful bifurcation: one open axis-1 bond out of it, then from
the intermediate vertex both an open vertical bond (axis 2, displacement
beta) and a second open axis-1 bond.  The red cluster is grown by the
(A_i, B_i) recursion over the exterior boundary, examining at each step the
minimal unexplored boundary point.

The abstract red definition quantifies over every integer offset a; here
the scan is restricted to the offsets already certified reachable by the
recursion itself.  That restriction only lowers the red frequency, so the
domination consequence being tested (conditional red frequency >= gamma_k)
keeps its direction.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bondfield import TAG_SITE, BondField, BondId
from .sequences import TruncatedSequence
from .stats import EstimateWithCI, wilson_interval


# -- order and boundary ------------------------------------------------------

def prec(a, b) -> bool:
    """Strict total order on Z^2_+: earlier generation first, then smaller m."""
    (m1, n1), (m2, n2) = a, b
    return n1 < n2 or (n1 == n2 and m1 < m2)


def exterior_boundary(X) -> set:
    """Points outside X with a parent (m, n-1) or (m-1, n-1) inside X,
    intersected with Z^2_+."""
    out = set()
    for (m, n) in X:
        for child in ((m, n + 1), (m + 1, n + 1)):
            if child not in X and child[0] >= 0 and child[1] >= 0:
                out.add(child)
    return out


def _min_prec(points):
    return min(points, key=lambda p: (p[1], p[0]))


# -- bifurcation events ------------------------------------------------------

@dataclass(frozen=True)
class BifurcationParams:
    k: int
    beta: int
    pseq: TruncatedSequence  # axis 1
    qseq: TruncatedSequence  # axis 2

    def __post_init__(self):
        if self.beta < 1:
            raise ValueError("beta must be >= 1")
        if self.qseq.term(self.beta) <= 0.0:
            raise ValueError("vertical displacement beta needs positive probability")


@dataclass(frozen=True)
class BifurcationRecord:
    success: bool
    a: int | None = None
    a_prime: int | None = None


def _signed_scan(k: int):
    for i in range(1, k + 1):
        yield i
        yield -i


def gamma_k(params: BifurcationParams) -> float:
    """Exact probability of a bifurcation event under the truncated measure."""
    p = params.pseq
    qb = params.qseq.term(params.beta)
    inner = 1.0
    for i in range(1, params.k + 1):
        inner *= (1.0 - p.term(i)) ** 2  # both signs of a'
    inner = 1.0 - inner
    out = 1.0
    for i in range(1, params.k + 1):
        out *= (1.0 - p.term(i) * qb * inner) ** 2  # both signs of a
    return 1.0 - out


def check_bifurcation(fld: BondField, origin, params: BifurcationParams) -> BifurcationRecord:
    """Deterministic scan for the bifurcation event rooted at origin = (x, n),
    x in Z^2.  Witnesses are the first (|a| ascending, positive sign first)
    complete open triple."""
    x, n = origin
    if len(x) != 2:
        raise ValueError("bifurcation events live on spatial dimension 2")
    p, q, beta = params.pseq, params.qseq, params.beta
    for a in _signed_scan(params.k):
        if not fld.is_open(BondId.oriented(x, n, 1, a), p.term(abs(a))):
            continue
        mid = (x[0] + a, x[1])
        if not fld.is_open(BondId.oriented(mid, n + 1, 2, beta), q.term(beta)):
            continue
        for ap in _signed_scan(params.k):
            if fld.is_open(BondId.oriented(mid, n + 1, 1, ap), p.term(abs(ap))):
                return BifurcationRecord(True, a, ap)
    return BifurcationRecord(False)


# -- red-cluster recursion ---------------------------------------------------

@dataclass
class RedState:
    A: set
    B: set
    current: tuple | None
    step: int
    truncated: bool
    examined: list  # (point, red, offsets_scanned) in examination order
    certificates: dict = field(repr=False, default_factory=dict)
    # certificates[(m, n)] maps an e_1 offset a to an explicit open path of
    # lattice vertices from ((0,0),0) to ((a, m*beta), 2n)


def explore_red_cluster(fld: BondField, params: BifurcationParams,
                        max_steps: int) -> RedState:
    """The (A_i, B_i) recursion; returns the terminated or truncated state.

    Every certified offset carries an explicit bond path so red membership
    can be re-verified against the raw bond configuration.
    """
    if max_steps < 0:
        raise ValueError("max_steps must be nonnegative")
    beta = params.beta
    A, B = set(), set()
    cert = {(0, 0): {0: (((0, 0), 0),)}}
    examined = []
    current = (0, 0)
    step = 0
    truncated = False
    while True:
        if step >= max_steps:
            truncated = True
            break
        m, n = current
        origins = sorted(cert.get(current, {}), key=lambda a: (abs(a), a < 0))
        red = False
        for a in origins:
            root = ((a, m * beta), 2 * n)
            rec = check_bifurcation(fld, root, params)
            if not rec.success:
                continue
            red = True
            path = cert[current][a]
            mid = ((a + rec.a, m * beta), 2 * n + 1)
            c1 = ((a + rec.a + rec.a_prime, m * beta), 2 * n + 2)
            c2 = ((a + rec.a, (m + 1) * beta), 2 * n + 2)
            cert.setdefault((m, n + 1), {}).setdefault(a + rec.a + rec.a_prime,
                                                       path + (mid, c1))
            cert.setdefault((m + 1, n + 1), {}).setdefault(a + rec.a,
                                                           path + (mid, c2))
        (A if red else B).add(current)
        examined.append((current, red, len(origins)))
        step += 1
        frontier = exterior_boundary(A) - B
        if not frontier:
            current = None
            break
        current = _min_prec(frontier)
    return RedState(A, B, current, step, truncated, examined, cert)


def verify_path(fld: BondField, params: BifurcationParams, path) -> bool:
    """Re-check bond-by-bond that a certificate path is open."""
    p, q = params.pseq, params.qseq
    for (x, n), (y, n2) in zip(path, path[1:]):
        if n2 != n + 1:
            return False
        dx = (y[0] - x[0], y[1] - x[1])
        if dx[0] != 0 and dx[1] != 0:
            return False
        axis = 1 if dx[0] != 0 else 2
        disp = dx[axis - 1]
        prob = p.term(abs(disp)) if axis == 1 else q.term(abs(disp))
        if not fld.is_open(BondId.oriented(x, n, axis, disp), prob):
            return False
    return True


def reverify_red_cluster(fld: BondField, params: BifurcationParams, state: RedState) -> bool:
    """True iff every red vertex owns at least one fully open certificate path
    ending at a bifurcation root that still checks out, and every certified
    path is open bond-by-bond."""
    for point, offsets in state.certificates.items():
        for a, path in offsets.items():
            if not verify_path(fld, params, path):
                return False
            end_x, end_n = path[-1]
            if end_x != (a, point[0] * params.beta) or end_n != 2 * point[1]:
                return False
    for point in state.A:
        m, n = point
        if not any(check_bifurcation(fld, ((a, m * params.beta), 2 * n), params).success
                   for a in state.certificates.get(point, {})):
            return False
    return True


# -- oriented site percolation on the cone ------------------------------------

@dataclass
class ConeCluster:
    reached: list  # list of sets of m-coordinates, index = generation
    survived: bool

    @property
    def front_sizes(self):
        return [len(s) for s in self.reached]


def site_perc_cone(gamma: float, horizon: int, fld: BondField) -> ConeCluster:
    """Independent site percolation on {(m, n): 0 <= m <= n} with children
    (m, n+1) and (m+1, n+1).  The origin counts as occupied regardless of its
    own site variable (cluster-of-the-origin rule)."""
    if not 0.0 <= gamma <= 1.0:
        raise ValueError("gamma must be a probability")
    reached = [{0}]
    for n in range(1, horizon + 1):
        prev = reached[-1]
        cur = {m for m in range(0, n + 1)
               if (m in prev or m - 1 in prev)
               and fld.is_open(BondId.site(m, n), gamma)}
        reached.append(cur)
        if not cur:
            reached.extend([set()] * (horizon - n))
            break
    return ConeCluster(reached, bool(reached[horizon]))


def cone_survival_scan(gammas, horizons, reps: int, seed: int) -> np.ndarray:
    """Vectorized survival counts S[g, t] over shared site variables.

    All gammas are coupled through one uniform per (replica, site), so each
    replica's survival indicator is exactly nondecreasing in gamma.
    """
    gammas = np.asarray(gammas, dtype=np.float64)
    horizons = sorted(horizons)
    fld = BondField(seed)
    rep_col = np.arange(reps, dtype=np.int64)[:, None]
    alive = np.ones((len(gammas), reps, 1), dtype=bool)
    counts = np.zeros((len(gammas), len(horizons)), dtype=np.int64)
    hidx = 0
    for n in range(1, horizons[-1] + 1):
        m_col = np.arange(n + 1, dtype=np.int64)[None, :]
        u = fld.uniforms([np.full((1, 1), TAG_SITE), rep_col, m_col,
                          np.full((1, 1), n)])  # (reps, n+1)
        width = alive.shape[2]
        reach = np.zeros((len(gammas), reps, n + 1), dtype=bool)
        reach[:, :, :width] |= alive
        reach[:, :, 1:width + 1] |= alive
        alive = reach & (u[None, :, :] < gammas[:, None, None])
        if n == horizons[hidx]:
            counts[:, hidx] = alive.any(axis=2).sum(axis=1)
            hidx += 1
            if hidx == len(horizons):
                break
    return counts


def crossing_from_scan(gammas, counts) -> float | None:
    """Locate the critical parameter from a three-horizon scan.

    For successive-horizon conditional survivals r1 = S2/S1 and r2 = S3/S2,
    the difference r2 - r1 is negative in the subcritical phase (survival
    decays ever faster) and positive in the supercritical one (conditional
    survival stabilizes), so its zero crossing estimates the threshold.
    Returns the interpolated crossing, or None when there is no sign change.
    """
    counts = np.asarray(counts, dtype=np.float64)
    gammas = np.asarray(gammas, dtype=np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        r1 = np.where(counts[:, 0] > 0, counts[:, 1] / counts[:, 0], 0.0)
        r2 = np.where(counts[:, 1] > 0, counts[:, 2] / counts[:, 1], 0.0)
    d = r2 - r1
    idx = [i for i in range(len(d) - 1) if d[i] < 0 <= d[i + 1]]
    if not idx:
        return None
    i = idx[-1]
    t = d[i] / (d[i] - d[i + 1])
    return float(gammas[i] + t * (gammas[i + 1] - gammas[i]))


# -- domination check ----------------------------------------------------------

@dataclass
class DominationReport:
    runs: int
    trials: int
    successes: int
    frequency: float
    lo: float
    hi: float
    gamma: float
    violation: bool


def domination_check(params: BifurcationParams, samples: int, seed: int,
                     max_steps: int = 200, z: float = 3.0) -> DominationReport:
    """Pool every examination step over many red-cluster runs and test the
    one-sided consequence of stochastic domination: the conditional red
    frequency must not fall significantly below gamma_k."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    root = BondField(seed)
    trials = successes = 0
    for r in range(samples):
        state = explore_red_cluster(root.derive_replica(r), params, max_steps)
        for _, red, _ in state.examined:
            trials += 1
            successes += red
    g = gamma_k(params)
    lo, hi = wilson_interval(successes, trials, z)
    freq = successes / trials
    return DominationReport(samples, trials, successes, freq, lo, hi, g,
                            violation=hi < g)


def estimate_bifurcation_frequency(params: BifurcationParams, trials: int,
                                   seed: int, z: float = 3.0) -> EstimateWithCI:
    """Monte Carlo frequency of the bifurcation event over independent replicas."""
    root = BondField(seed)
    hits = sum(check_bifurcation(root.derive_replica(t), ((0, 0), 0), params).success
               for t in range(trials))
    return EstimateWithCI.from_counts(hits, trials, z)

"""Brute-force oracles, the seeded instance generator and counterexample mining.

The oracle side deliberately shares nothing with the solver beyond the
instance tables: fixed points are a table scan and orbits are followed
with Floyd's tortoise-and-hare rather than the solver's visited set.
"""

from dataclasses import asdict, dataclass, field, replace
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .chains import chain_bottlenecks, chainability_threshold
from .errors import NoComparablePairs
from .picard import check_hypotheses, iterate, solve_t3, solve_t5
from .rng import SplitMix64
from .space import (
    FiniteInstance,
    FiniteSpace,
    Relation,
    SelfMapTable,
    instance_to_json,
    transitive_closure,
)

METRIC_MODES = ("embedding-1d", "embedding-2d", "random-explicit", "geometric-1d")
MAP_MODES = ("monotone-random", "unconstrained")
RELATION_MODES = ("index", "strict-index", "components", "random")
EPSILON_MODES = ("anchor", "chainable")
DROPS = ("none", "transitivity", "monotonicity-b", "limit-comparability-c",
         "contraction-d", "condition-e")


def enumerate_fixed_points(fmap):
    return {i for i, j in enumerate(fmap.image) if i == j}


@dataclass(frozen=True)
class Settled:
    converged: bool
    point: int = None      # the fixed point when converged
    period: int = None     # cycle length otherwise
    steps: int = 0         # map applications until the cycle is entered


def orbit_settles(fmap, x0):
    f = fmap.image
    tortoise, hare = f[x0], f[f[x0]]
    while tortoise != hare:
        tortoise, hare = f[tortoise], f[f[hare]]
    mu, tortoise = 0, x0
    while tortoise != hare:
        tortoise, hare = f[tortoise], f[hare]
        mu += 1
    period, hare = 1, f[tortoise]
    while tortoise != hare:
        hare = f[hare]
        period += 1
    if period == 1:
        return Settled(True, tortoise, 1, mu)
    return Settled(False, None, period, mu)


@dataclass(frozen=True)
class GeneratorParams:
    seed: int = 0
    n: int = 6
    relation_density: float = 0.5
    metric_mode: str = "embedding-1d"
    target_k: float = 0.5
    map_mode: str = "monotone-random"
    relation_mode: str = "index"
    epsilon_mode: str = "anchor"
    close_relation: bool = True

    def __post_init__(self):
        if not 1 <= self.n <= 4096:
            raise ValueError("n must lie in 1..4096")
        if not 0.0 <= self.relation_density <= 1.0:
            raise ValueError("relation_density must lie in [0, 1]")
        if not 0.0 < self.target_k < 1.0:
            raise ValueError("target_k must lie in (0, 1)")
        for value, allowed in ((self.metric_mode, METRIC_MODES), (self.map_mode, MAP_MODES),
                               (self.relation_mode, RELATION_MODES),
                               (self.epsilon_mode, EPSILON_MODES)):
            if value not in allowed:
                raise ValueError(f"{value!r} not one of {allowed}")


def _blocks(n, mode):
    if mode == "components" and n >= 2:
        h = n // 2
        return [range(0, h), range(h, n)]
    return [range(n)]


def _close_under_map(h, image, transitive):
    # add (f(i), f(j)) for every related (i, j) so the map preserves the relation
    while True:
        before = h.copy()
        pairs = np.argwhere(h)
        h[image[pairs[:, 0]], image[pairs[:, 1]]] = True
        if transitive:
            h = transitive_closure(Relation(h)).holds.copy()
        if np.array_equal(h, before):
            return h


def _geometric_coords(rng, blocks, k):
    # gaps shrink by a factor in [k/2, k] toward one attractor per block, so
    # the one-step shift toward the attractor contracts every pair by k
    coords, attractors = [], []
    offset = 0.0
    for block in blocks:
        lo, hi = block.start, block.stop
        a = lo + rng.below(hi - lo)
        gaps = {}
        g = 0.1 * rng.uniform(0.5, 1.0)
        for t in range(a - 1, lo - 1, -1):
            gaps[t] = g
            g /= k * rng.uniform(0.5, 1.0)
        g = 0.1 * rng.uniform(0.5, 1.0)
        for t in range(a, hi - 1):
            gaps[t] = g
            g /= k * rng.uniform(0.5, 1.0)
        c = [offset]
        for t in range(lo, hi - 1):
            c.append(c[-1] + gaps[t])
        coords.extend(c)
        attractors.extend([a] * (hi - lo))
        offset = c[-1] + 1.0
    return np.array(coords), attractors


def random_instance(params):
    """Deterministic instance for ``params``; the draw order is part of the contract.

    Draws, in order: coordinates or distances, relation pairs, map table,
    x0, epsilon jitter.  ``geometric-1d`` places each relation block on a
    line with gaps shrinking geometrically toward a random attractor; its
    monotone map steps every point one place toward the attractor and is
    then an exact k-contraction.  Relations are transitively closed unless
    ``close_relation`` is off, and monotone-random maps are made relation
    preserving by closing the relation under the map.
    """
    p = params
    n = p.n
    rng = SplitMix64(p.seed)

    if p.metric_mode == "embedding-1d":
        c = np.sort([rng.uniform() for _ in range(n)])
        for i in range(1, n):
            c[i] = max(c[i], np.nextafter(c[i - 1], np.inf))
        space = FiniteSpace.from_coords(c[:, None], "l2")
    elif p.metric_mode == "embedding-2d":
        c = np.array([[rng.uniform(), rng.uniform()] for _ in range(n)])
        space = FiniteSpace.from_coords(c, "l2")
    elif p.metric_mode == "geometric-1d":
        c, attractors = _geometric_coords(rng, _blocks(n, p.relation_mode), p.target_k)
        space = FiniteSpace.from_coords(c[:, None], "l2")
    else:
        d = np.zeros((n, n))
        for i in range(n):
            for j in range(i + 1, n):
                d[i, j] = d[j, i] = rng.uniform(1.0, 2.0)
        space = FiniteSpace(d)

    blocks = _blocks(n, p.relation_mode)
    h = np.zeros((n, n), dtype=bool)
    if p.relation_mode == "random":
        for i in range(n):
            for j in range(n):
                if i != j and rng.bernoulli(p.relation_density):
                    h[i, j] = True
    else:
        strict = p.relation_mode == "strict-index"
        for block in blocks:
            for i in block:
                for j in block:
                    if (j > i or (j == i and not strict)) and rng.bernoulli(p.relation_density):
                        h[i, j] = True
    if p.close_relation:
        h = transitive_closure(Relation(h)).holds.copy()

    if p.map_mode == "monotone-random" and p.metric_mode == "geometric-1d":
        image = np.array([i + (i < a) - (i > a) for i, a in enumerate(attractors)])
        h = _close_under_map(h, image, p.close_relation)
    elif p.map_mode == "monotone-random":
        image = np.zeros(n, dtype=int)
        for block in blocks:
            lo, size = block.start, len(block)
            image[lo:lo + size] = np.sort([lo + rng.below(size) for _ in range(size)])
        h = _close_under_map(h, image, p.close_relation)
    else:
        image = np.array([rng.below(n) for _ in range(n)])

    x0 = int(rng.below(n))
    jitter = 1.0 + 0.5 * rng.uniform()
    inst = FiniteInstance(space, Relation(h), SelfMapTable(image.tolist()), x0, 1.0, p.target_k)
    return inst.with_(epsilon=_pick_epsilon(inst, p.epsilon_mode) * jitter)


def _pick_epsilon(inst, mode):
    dist = inst.space.dist
    positive = dist[dist > 0]
    fallback = float(np.median(positive)) if positive.size else 1.0
    if mode == "chainable":
        try:
            return chainability_threshold(inst)
        except NoComparablePairs:
            return fallback
    x0, fx0 = inst.x0, inst.f(inst.x0)
    if x0 == fx0:
        return fallback
    b = chain_bottlenecks(inst)
    anchor = min(b[x0, fx0], b[fx0, x0])
    return float(np.nextafter(anchor, np.inf)) if np.isfinite(anchor) else fallback


@dataclass
class OracleVerdict:
    fixed_points: set
    outcomes: dict           # start -> Settled
    agrees_with_solver: bool
    hypothesis_report: object
    t5_report: object
    theorem_holds: bool
    mismatches: list = field(default_factory=list)

    def to_json(self):
        return {
            "fixed_points": sorted(self.fixed_points),
            "outcomes": {
                str(s): ({"converged_to": o.point} if o.converged else {"cycle": o.period})
                for s, o in self.outcomes.items()
            },
            "agrees_with_solver": self.agrees_with_solver,
            "theorem_holds": self.theorem_holds,
            "hypothesis_report": self.hypothesis_report.to_json(),
            "t5_report": self.t5_report.to_json(),
            "mismatches": self.mismatches,
        }


def brute_force_check(inst):
    fixed = enumerate_fixed_points(inst.map)
    outcomes = {s: orbit_settles(inst.map, s) for s in range(inst.n)}
    mismatches = []

    t3 = solve_t3(inst)
    o = outcomes[inst.x0]
    oracle_limit = o.point if o.converged else None
    if t3.xstar != oracle_limit:
        mismatches.append(("t3-limit", inst.x0, t3.xstar, oracle_limit))
    if t3.xstar is not None and t3.xstar not in fixed:
        mismatches.append(("t3-not-fixed", t3.xstar))

    t5 = solve_t5(inst, raise_on_e=False)
    for s, limit in t5.limits.items():
        expected = outcomes[s].point if outcomes[s].converged else None
        if limit != expected:
            mismatches.append(("t5-limit", s, limit, expected))
    settled = {outcomes[s].point if outcomes[s].converged else None for s in range(inst.n)}
    oracle_unique = len(settled) == 1 and None not in settled
    if t5.unique != oracle_unique:
        mismatches.append(("uniqueness", t5.unique, oracle_unique))

    holds = True
    if t3.certificate.overall and not outcomes[inst.x0].converged:
        holds = False
    if t5.certificate.overall and not (oracle_unique and settled <= fixed):
        holds = False
    return OracleVerdict(fixed, outcomes, not mismatches, t3.certificate, t5.certificate,
                         holds, mismatches)


# --- counterexample mining ----------------------------------------------------

T3_KEYS = {"transitivity": None, "monotonicity-b": "b",
           "limit-comparability-c": "c", "contraction-d": "d"}


def _transitive(inst):
    h = inst.relation.holds
    return np.array_equal(transitive_closure(inst.relation).holds, h)


def _evaluate_drop(inst, drop):
    """Return a witness dict when inst is a counterexample for ``drop``."""
    if drop == "condition-e" or drop == "none":
        if not _transitive(inst):
            return None
        t5 = solve_t5(inst, raise_on_e=False)
        rep = t5.certificate
        kept = [key for key in rep.conditions if not (drop == "condition-e" and key == "e")]
        if all(rep.conditions[key].verdict for key in kept) and not t5.unique:
            return {"kind": "non-unique", "limits": {str(s): v for s, v in t5.limits.items()},
                    "disagreement": list(t5.disagreement), "report": rep.to_json()}
        if drop == "condition-e":
            return None
    if drop == "transitivity" or _transitive(inst):
        trace = iterate(inst)
        rep = check_hypotheses(inst, 3, trace)
        skip = T3_KEYS.get(drop)
        if all(c.verdict for key, c in rep.conditions.items() if key != skip):
            if trace.limit is None:
                return {"kind": "no-convergence", "status": trace.status.value,
                        "period": trace.period, "report": rep.to_json()}
    return None


@dataclass
class MiningReport:
    drop: str
    params: dict
    budget: int
    found: bool
    seed: int = None
    seeds_tried: int = 0
    instance: dict = None
    witness: dict = None

    def to_json(self):
        return {
            "drop": self.drop,
            "params": self.params,
            "budget": self.budget,
            "status": "found" if self.found else "exhausted",
            "seed": self.seed,
            "seeds_tried": self.seeds_tried,
            "instance": self.instance,
            "witness": self.witness,
        }


def _mine_params(params, drop):
    if drop == "transitivity":
        return replace(params, close_relation=False)
    return params


def _mine_range(params, drop, start, stop):
    params = _mine_params(params, drop)
    for seed in range(start, stop):
        inst = random_instance(replace(params, seed=seed))
        witness = _evaluate_drop(inst, drop)
        if witness is not None:
            return seed, inst, witness
    return None


def counterexample_mine(params, drop, budget, workers=1):
    """Search seeds params.seed, params.seed+1, ... for a counterexample.

    A hit keeps every hypothesis except ``drop`` and breaks the conclusion:
    no convergence (existence hypotheses) or disagreeing limits (condition
    e).  ``drop='none'`` is the control run and must never hit.  With
    several workers the seed range is split and the smallest hitting seed
    wins, so the report does not depend on scheduling.  Transitivity is a
    generator property, so dropping it switches relation closure off.
    """
    if drop not in DROPS:
        raise ValueError(f"drop must be one of {DROPS}")
    start = params.seed
    if workers <= 1:
        hits = [_mine_range(params, drop, start, start + budget)]
    else:
        step = -(-budget // workers)
        bounds = [(s, min(s + step, start + budget)) for s in range(start, start + budget, step)]
        with ProcessPoolExecutor(workers) as pool:
            hits = list(pool.map(_mine_range, [params] * len(bounds), [drop] * len(bounds),
                                 [b[0] for b in bounds], [b[1] for b in bounds]))
    hits = [h for h in hits if h is not None]
    report_params = asdict(_mine_params(params, drop))
    if not hits:
        return MiningReport(drop, report_params, budget, False, seeds_tried=budget)
    seed, inst, witness = min(hits, key=lambda h: h[0])
    return MiningReport(drop, report_params, budget, True, seed, seed - start + 1,
                        instance_to_json(inst), witness)


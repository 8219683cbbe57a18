"""Certified Picard iteration.

Finite instances iterate until the orbit stabilises or provably cycles,
then the hypotheses of the existence theorem (conditions a-d) and of the
uniqueness theorem (additionally chainability and condition e) are
checked and attached to the result together with the explicit bounds the
existence proof yields:

    step bound   d(f^n x0, f^(n+1) x0) <= m k^n eps
    n0           smallest n with m k^n < 1
    tail bound   d(x_n, x_n') < k^n eps / (1 - k),   x_n = f^(n0+n) x0

where m is the hop count of the chain joining x0 to f(x0).  A failed
hypothesis never stops the iteration; it only invalidates the certificate.
"""

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import NamedTuple

import numpy as np

from .chains import check_chainable, find_monotonic_chain
from .contraction import (
    CheckResult,
    HypothesisReport,
    check_limit_comparability,
    check_local_contraction_on_comparables,
    check_local_radial_contraction,
    classify_monotonicity,
)
from .errors import ConditionEFailed, InvalidInput, NotReachable
from .expr import RealMap, eval_map
from .space import TAU_ABS, FiniteInstance, is_comparable, norm


class Status(Enum):
    CONVERGED = "converged"
    CYCLE = "cycle-detected"
    MAX_ITERATIONS = "max-iterations"


@dataclass(frozen=True)
class StopRule:
    atol: float = 1e-12
    n_max: int = 10**6


@dataclass(frozen=True)
class IterationTrace:
    start: object
    iterates: tuple
    step_dists: tuple
    status: Status
    period: int = None
    # filled in by certify(); None when no chain witness is available
    m: int = None
    k: float = None
    epsilon: float = None
    n0: int = None
    step_bounds: tuple = ()
    tail_bounds: tuple = ()

    @property
    def iterations(self):
        return len(self.iterates) - 1

    @property
    def limit(self):
        return self.iterates[-1] if self.status is Status.CONVERGED else None

    def reindexed(self):
        """Iterates x_n = f^(n0+n)(x0), the sequence the tail bound talks about."""
        if self.n0 is None:
            raise ValueError("trace carries no n0; certify it first")
        return self.iterates[self.n0:]

    def csv_rows(self):
        rows = []
        for n, point in enumerate(self.iterates):
            step = self.step_dists[n] if n < len(self.step_dists) else None
            sb = self.step_bounds[n] if n < len(self.step_bounds) else None
            tb = self.tail_bounds[n] if n < len(self.tail_bounds) else None
            rows.append((n, point, step, sb, tb))
        return rows

    def to_json(self):
        return {
            "start": _plain(self.start),
            "iterates": [_plain(p) for p in self.iterates],
            "step_dists": list(self.step_dists),
            "status": self.status.value,
            "period": self.period,
            "m": self.m,
            "n0": self.n0,
            "step_bounds": list(self.step_bounds),
            "tail_bounds": list(self.tail_bounds),
        }


def _plain(p):
    if isinstance(p, (tuple, list, np.ndarray)):
        return [float(v) for v in p]
    return p


def step_bound(m, k, epsilon, n):
    if m < 1 or not 0 < k < 1 or not epsilon > 0 or n < 0:
        raise InvalidInput(f"step_bound domain: m={m}, k={k}, epsilon={epsilon}, n={n}")
    return m * k**n * epsilon


def select_n0(m, k):
    if m < 1 or not 0 < k < 1:
        raise InvalidInput(f"select_n0 domain: m={m}, k={k}")
    n = 0
    while m * k**n >= 1:
        n += 1
    return n


def tail_bound(k, epsilon, n):
    if not 0 < k < 1 or not epsilon > 0 or n < 0:
        raise InvalidInput(f"tail_bound domain: k={k}, epsilon={epsilon}, n={n}")
    return k**n * epsilon / (1 - k)


def certify(trace, m, k, epsilon):
    """Attach step bounds, n0 and re-indexed tail bounds to a trace.

    A chain with m = 0 (x0 already fixed) is bounded as if m = 1; every
    step is zero then anyway.
    """
    m_eff = max(m, 1)
    n0 = select_n0(m_eff, k)
    steps = len(trace.step_dists)
    sb = tuple(step_bound(m_eff, k, epsilon, n) for n in range(steps))
    tb = tuple(
        tail_bound(k, epsilon, n - n0) if n >= n0 else None
        for n in range(len(trace.iterates))
    )
    return replace(trace, m=m, k=k, epsilon=epsilon, n0=n0, step_bounds=sb, tail_bounds=tb)


@dataclass(frozen=True)
class RealInstance:
    map: RealMap
    x0: tuple
    epsilon: float = None
    k: float = None
    norm: str = "l2"
    box: tuple = None

    def __post_init__(self):
        x0 = tuple(float(v) for v in np.ravel(self.x0))
        if len(x0) != self.map.dimension:
            raise InvalidInput("x0 dimension does not match the map")
        object.__setattr__(self, "x0", x0)
        if self.box is not None:
            object.__setattr__(self, "box", tuple(tuple(map(float, b)) for b in self.box))

    @classmethod
    def from_json(cls, obj):
        try:
            return cls(
                RealMap.from_strings(obj["map"]),
                tuple(obj["x0"]),
                obj.get("epsilon"),
                obj.get("k"),
                obj.get("norm", "l2"),
                obj.get("box"),
            )
        except (KeyError, TypeError) as exc:
            raise InvalidInput(f"malformed real instance: {exc!r}") from None

    def to_json(self):
        out = {"backend": "real", "map": self.map.to_strings(), "x0": list(self.x0),
               "norm": self.norm}
        for key in ("epsilon", "k", "box"):
            value = getattr(self, key)
            if value is not None:
                out[key] = [list(b) for b in value] if key == "box" else value
        return out


def _iterate_finite(inst, n_max):
    x = inst.x0
    iterates = [x]
    steps = []
    seen = {x: 0}
    status, period = Status.MAX_ITERATIONS, None
    for _ in range(n_max):
        y = inst.f(x)
        iterates.append(y)
        steps.append(inst.d(x, y))
        if y == x:
            status = Status.CONVERGED
            break
        if y in seen:
            status, period = Status.CYCLE, len(iterates) - 1 - seen[y]
            break
        seen[y] = len(iterates) - 1
        x = y
    return IterationTrace(inst.x0, tuple(iterates), tuple(steps), status, period)


def _iterate_real(inst, stop):
    x = np.array(inst.x0)
    iterates = [tuple(x)]
    steps = []
    status = Status.MAX_ITERATIONS
    for _ in range(stop.n_max):
        y = np.array(eval_map(inst.map, x))
        step = norm(y - x, inst.norm)
        iterates.append(tuple(y))
        steps.append(step)
        x = y
        if step <= stop.atol:
            status = Status.CONVERGED
            break
    return IterationTrace(inst.x0, tuple(iterates), tuple(steps), status)


def iterate(inst, stop=None):
    if isinstance(inst, FiniteInstance):
        n_max = stop.n_max if stop is not None else inst.n + 1
        return _iterate_finite(inst, n_max)
    if isinstance(inst, RealInstance):
        return _iterate_real(inst, stop or StopRule())
    raise TypeError(f"cannot iterate {type(inst).__name__}")


class Localized(NamedTuple):
    point: int
    steps: int


def localize_start(inst):
    """First orbit point u0 = f^N(x0) with d(u0, f(u0)) < epsilon."""
    u, steps = inst.x0, 0
    seen = {u}
    while not inst.d(u, inst.f(u)) < inst.epsilon:
        u = inst.f(u)
        steps += 1
        if u in seen:
            raise NotReachable(f"orbit of {inst.x0} cycles before a step drops below epsilon")
        seen.add(u)
    return Localized(u, steps)


# --- certificates --------------------------------------------------------------

def condition_e(inst):
    """Find, for every pair of distinct points, a z below both or above both.

    Returns (witnesses, failing_pair); candidates are tried in the order
    x, y, 0, 1, ... so witnesses are deterministic.
    """
    h = inst.relation.holds
    n = inst.n
    witnesses = {}
    for x in range(n):
        for y in range(x + 1, n):
            found = None
            for z in (x, y, *range(n)):
                if (h[z, x] and h[z, y]) or (h[x, z] and h[y, z]):
                    found = z
                    break
            if found is None:
                return witnesses, (x, y)
            witnesses[(x, y)] = found
    return witnesses, None


def _condition_a_chain(inst):
    fx0 = inst.f(inst.x0)
    chain = find_monotonic_chain(inst, inst.x0, fx0)
    if chain is None:
        return CheckResult(False, (inst.x0, fx0)), None
    return CheckResult(True, details={"chain": chain.to_json()}), chain


def _condition_b(inst):
    mono = classify_monotonicity(inst.relation, inst.map)
    details = {"class": mono.kind.value}
    if mono.monotone:
        return CheckResult(True, details=details), mono
    details["reverse_witness"] = list(mono.reverse_witness)
    return CheckResult(False, mono.preserve_witness, details=details), mono


def _condition_c(inst, trace, mono):
    if trace.status is not Status.CONVERGED:
        # no limit, so the conditional hypothesis holds vacuously
        return CheckResult(True, details={"vacuous": True, "status": trace.status.value})
    return check_limit_comparability(inst.relation, trace, trace.limit, mono)


def check_hypotheses(inst, theorem=3, trace=None):
    """HypothesisReport for the existence (3) or uniqueness (5) theorem."""
    if theorem not in (3, 5):
        raise InvalidInput(f"theorem must be 3 or 5, got {theorem}")
    trace = trace if trace is not None else iterate(inst)
    report, _ = _certificate(inst, theorem, trace)
    return report


def _certificate(inst, theorem, trace):
    conditions = {}
    if theorem == 5:
        ch = check_chainable(inst)
        conditions["chainable"] = CheckResult(ch.verdict, ch.witness,
                                              details={"pairs_checked": ch.pairs_checked})
        x0, fx0 = inst.x0, inst.f(inst.x0)
        ok = x0 == fx0 or is_comparable(inst.relation, x0, fx0)
        conditions["a"] = CheckResult(ok, None if ok else (x0, fx0))
        chain = find_monotonic_chain(inst, x0, fx0)
    else:
        conditions["a"], chain = _condition_a_chain(inst)
    conditions["b"], mono = _condition_b(inst)
    conditions["c"] = _condition_c(inst, trace, mono)
    conditions["d"] = check_local_contraction_on_comparables(inst)
    if theorem == 5:
        witnesses, bad = condition_e(inst)
        conditions["e"] = CheckResult(bad is None, bad, details={"pairs_witnessed": len(witnesses)})
    return HypothesisReport(theorem, conditions), chain


@dataclass
class FixedPointResult:
    xstar: object
    iterations: int
    residual: float
    certificate: HypothesisReport
    tail_bound_at_stop: float
    trace: IterationTrace
    chain: object = None

    @property
    def reached(self):
        return self.xstar is not None

    @property
    def status(self):
        return self.trace.status

    def to_json(self):
        return {
            "xstar": _plain(self.xstar),
            "reached": self.reached,
            "status": self.trace.status.value if self.reached else "no-fixed-point-reached",
            "trace_status": self.trace.status.value,
            "period": self.trace.period,
            "iterations": self.iterations,
            "residual": self.residual,
            "tail_bound_at_stop": self.tail_bound_at_stop,
            "certificate": self.certificate.to_json() if self.certificate else None,
            "chain": self.chain.to_json() if self.chain is not None else None,
            "trace": self.trace.to_json(),
        }


def solve_t3(inst, stop=None):
    trace = iterate(inst, stop)
    report, chain = _certificate(inst, 3, trace)
    if chain is not None:
        trace = certify(trace, chain.m, inst.k, inst.epsilon)
    xstar = trace.limit
    residual = inst.d(xstar, inst.f(xstar)) if xstar is not None else None
    tail = None
    if xstar is not None and trace.n0 is not None:
        tail = tail_bound(inst.k, inst.epsilon, max(trace.iterations - trace.n0, 0))
    return FixedPointResult(xstar, trace.iterations, residual, report, tail, trace, chain)


def solve_real(inst, stop=None, samples=1000, seed=0):
    """Iterate a real-vector map; certificate is a sampled radial check over the box."""
    stop = stop or StopRule()
    trace = iterate(inst, stop)
    x = np.array(trace.iterates[-1])
    residual = norm(np.array(eval_map(inst.map, x)) - x, inst.norm)
    certificate = None
    if inst.box is not None and inst.k is not None:
        radius = inst.epsilon if inst.epsilon is not None else np.inf
        d = check_local_radial_contraction(inst.map, inst.box, radius, inst.k, samples, seed,
                                           inst.norm)
        certificate = HypothesisReport(3, {"d": d})
    xstar = tuple(x) if trace.status is Status.CONVERGED else None
    return FixedPointResult(xstar, trace.iterations, residual, certificate, None, trace)


# --- uniqueness -----------------------------------------------------------------

@dataclass
class PropagationCheck:
    start: int
    end: int
    p: int
    ok: bool
    worst_excess: float
    steps_checked: int

    def to_json(self):
        return dict(self.__dict__)


@dataclass
class UniquenessResult:
    limits: dict
    common_limit: object
    unique: bool
    disagreement: tuple
    condition_e_witnesses: dict
    certificate: HypothesisReport
    propagation: list = field(default_factory=list)
    t3: FixedPointResult = None

    def to_json(self):
        return {
            "unique": self.unique,
            "common_limit": self.common_limit,
            "limits": {str(s): v for s, v in self.limits.items()},
            "disagreement": list(self.disagreement) if self.disagreement else None,
            "condition_e_witnesses": {
                f"{a},{b}": z for (a, b), z in self.condition_e_witnesses.items()
            },
            "certificate": self.certificate.to_json(),
            "propagation": [p.to_json() for p in self.propagation],
        }


def orbit(inst, x, length):
    out = [x]
    for _ in range(length):
        x = inst.f(x)
        out.append(x)
    return out


def propagation_check(inst, chain, length, tau=TAU_ABS):
    """d(f^n a, f^n b) <= k^n p eps along a chain a -> b of p hops."""
    a, b = chain.vertices[0], chain.vertices[-1]
    p = chain.m
    oa, ob = orbit(inst, a, length), orbit(inst, b, length)
    worst = -np.inf
    for n in range(length + 1):
        excess = inst.d(oa[n], ob[n]) - inst.k**n * p * inst.epsilon
        worst = max(worst, excess)
    return PropagationCheck(a, b, p, bool(worst <= tau), float(worst), length + 1)


def solve_t5(inst, starts=None, raise_on_e=True):
    """Uniqueness pipeline: chainability, condition (e), limits from every start.

    With ``raise_on_e`` a failed condition (e) raises ConditionEFailed;
    otherwise the run continues so disagreeing limits can be reported.
    """
    starts = list(range(inst.n)) if starts is None else [int(s) for s in starts]
    t3 = solve_t3(inst)
    report, _ = _certificate(inst, 5, t3.trace)
    witnesses, bad = condition_e(inst)
    if bad is not None and raise_on_e:
        raise ConditionEFailed(bad)

    limits = {}
    longest = 0
    for s in starts:
        tr = iterate(inst.with_(x0=s))
        limits[s] = tr.limit
        longest = max(longest, len(tr.iterates))
    xstar = t3.xstar
    disagreement = None
    for s in starts:
        if xstar is None or limits[s] != xstar:
            disagreement = (s, limits[s], inst.x0, xstar)
            break
    unique = disagreement is None and xstar is not None

    length = longest + inst.n
    checks = []
    x0 = inst.x0
    for s in starts:
        if s == x0:
            continue
        if is_comparable(inst.relation, s, x0):
            pairs = [(s, x0)]
        else:
            key = (min(s, x0), max(s, x0))
            z = witnesses.get(key)
            pairs = [] if z is None else [(z, s), (z, x0)]
        for a, b in pairs:
            if a == b:
                continue
            chain = find_monotonic_chain(inst, a, b)
            if chain is not None:
                checks.append(propagation_check(inst, chain, length))
    return UniquenessResult(
        limits,
        xstar if unique else None,
        unique,
        disagreement,
        witnesses,
        report,
        checks,
        t3,
    )

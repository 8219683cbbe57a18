"""Monotonicity and contraction checks.

Finite-instance checks are exact enumerations.  The radial check on real
maps is a seeded Monte-Carlo refutation: a ``True`` verdict only means no
counterexample was sampled.
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import LimitMismatch, NonConvergedTrace
from .rng import SplitMix64, derive_seed
from .space import TAU_ABS, is_comparable, norm


@dataclass
class CheckResult:
    verdict: bool
    witness: tuple = None
    measured_ratio: float = None
    details: dict = field(default_factory=dict)

    def to_json(self):
        out = {"verdict": bool(self.verdict)}
        out["witness"] = list(self.witness) if self.witness is not None else None
        out["measured_ratio"] = self.measured_ratio
        if self.details:
            out["details"] = self.details
        return out


@dataclass
class HypothesisReport:
    theorem: int
    conditions: dict

    @property
    def overall(self):
        return all(c.verdict for c in self.conditions.values())

    def failed(self):
        return [key for key, c in self.conditions.items() if not c.verdict]

    def to_json(self):
        return {
            "theorem": self.theorem,
            "conditions": {key: c.to_json() for key, c in self.conditions.items()},
            "overall": self.overall,
        }


class MonotonicityKind(Enum):
    PRESERVING = "preserving"
    REVERSING = "reversing"
    BOTH = "both"
    NEITHER = "neither"


@dataclass(frozen=True)
class Monotonicity:
    kind: MonotonicityKind
    # first related pair (lexicographic) breaking each direction
    preserve_witness: tuple = None
    reverse_witness: tuple = None

    @property
    def monotone(self):
        return self.kind is not MonotonicityKind.NEITHER


def classify_monotonicity(relation, fmap):
    h = relation.holds
    img = np.asarray(fmap.image)
    pairs = np.argwhere(h)
    if pairs.size == 0:
        return Monotonicity(MonotonicityKind.BOTH)
    fx, fy = img[pairs[:, 0]], img[pairs[:, 1]]
    pres_bad = np.flatnonzero(~h[fx, fy])
    rev_bad = np.flatnonzero(~h[fy, fx])
    pw = tuple(int(v) for v in pairs[pres_bad[0]]) if pres_bad.size else None
    rw = tuple(int(v) for v in pairs[rev_bad[0]]) if rev_bad.size else None
    if pw is None and rw is None:
        kind = MonotonicityKind.BOTH
    elif pw is None:
        kind = MonotonicityKind.PRESERVING
    elif rw is None:
        kind = MonotonicityKind.REVERSING
    else:
        kind = MonotonicityKind.NEITHER
    return Monotonicity(kind, pw, rw)


def _eligible_pairs(inst, local):
    h = inst.relation.holds
    mask = np.triu(h | h.T, k=1)
    if local:
        mask &= inst.space.dist < inst.epsilon
    return np.argwhere(mask)


def _ratios(inst, pairs):
    img = np.asarray(inst.map.image)
    dist = inst.space.dist
    d = dist[pairs[:, 0], pairs[:, 1]]
    dimg = dist[img[pairs[:, 0]], img[pairs[:, 1]]]
    return d, dimg


def tightest_constant(inst, scope="local"):
    if scope not in ("local", "global"):
        raise ValueError(f"scope must be 'local' or 'global', got {scope!r}")
    pairs = _eligible_pairs(inst, scope == "local")
    if pairs.size == 0:
        return 0.0
    d, dimg = _ratios(inst, pairs)
    return float(np.max(dimg / d))


def _contraction_check(inst, local, tau):
    pairs = _eligible_pairs(inst, local)
    if pairs.size == 0:
        return CheckResult(True, measured_ratio=0.0, details={"pairs_checked": 0})
    d, dimg = _ratios(inst, pairs)
    ratio = float(np.max(dimg / d))
    bad = np.flatnonzero(dimg > inst.k * d + tau)
    details = {"pairs_checked": int(len(pairs))}
    if bad.size == 0:
        return CheckResult(True, measured_ratio=ratio, details=details)
    b = bad[0]
    details.update(d=float(d[b]), d_image=float(dimg[b]), k=inst.k)
    witness = (int(pairs[b, 0]), int(pairs[b, 1]))
    return CheckResult(False, witness, ratio, details)


def check_local_contraction_on_comparables(inst, tau=TAU_ABS):
    """Comparable x, y with d(x,y) < epsilon must satisfy d(fx,fy) <= k d(x,y)."""
    return _contraction_check(inst, True, tau)


def check_global_contraction_on_comparables(inst, tau=TAU_ABS):
    return _contraction_check(inst, False, tau)


def _ascending(relation, points):
    return all(a == b or relation.holds[a, b] for a, b in zip(points, points[1:]))


def check_limit_comparability(relation, trace, xstar, monotonicity=None):
    """Every iterate other than the limit itself must be comparable to it.

    ``details["consistent_direction"]`` says whether all those iterates
    precede the limit; it is only reported for ascending traces of
    preserving maps (None otherwise) and never enters the verdict.
    """
    its = list(trace.iterates)
    if not its or its[-1] != xstar:
        raise LimitMismatch(f"trace ends at {its[-1] if its else None}, not at {xstar}")
    witness = None
    for n, p in enumerate(its):
        if p != xstar and not is_comparable(relation, p, xstar):
            witness = (n, p)
            break
    details = {"consistent_direction": None}
    preserving = monotonicity is None or monotonicity.kind in (
        MonotonicityKind.PRESERVING,
        MonotonicityKind.BOTH,
    )
    if witness is None and preserving and _ascending(relation, its):
        details["consistent_direction"] = all(
            p == xstar or relation.holds[p, xstar] for p in its
        )
    return CheckResult(witness is None, witness, None, details)


def check_monotonic_sequential_continuity(inst, trace):
    from .picard import Status

    if trace.status is not Status.CONVERGED:
        raise NonConvergedTrace(f"trace status is {trace.status.value}")
    xstar = trace.iterates[-1]
    image = inst.f(xstar)
    if image == xstar:
        return CheckResult(True, details={"xstar": xstar})
    return CheckResult(False, (xstar, image), details={"xstar": xstar})


def check_local_radial_contraction(fmap, box, radius, k, samples, seed, norm_kind="l2",
                                   tau=TAU_ABS):
    """Sampled refutation of d(x,y) < r(x)  =>  d(fx, fy) < k d(x,y).

    ``radius`` is a number or a callable of the centre point.  Sample i is
    drawn from its own substream of ``seed`` so the result does not depend
    on evaluation order.  Equality within ``tau`` counts as satisfied.
    """
    box = np.asarray(box, dtype=float).reshape(-1, 2)
    lo, hi = box[:, 0], box[:, 1]
    dim = len(box)
    if samples < 1:
        raise ValueError("samples must be >= 1")
    worst = 0.0
    drawn = 0
    for i in range(samples):
        rng = SplitMix64(derive_seed(seed, i))
        x = np.array([rng.uniform(lo[c], hi[c]) for c in range(dim)])
        direction = np.array([rng.uniform(-1.0, 1.0) for _ in range(dim)])
        length = np.sqrt(direction @ direction)
        if length == 0.0:
            continue
        r = radius(x) if callable(radius) else radius
        y = np.clip(x + rng.uniform() * r * direction / length, lo, hi)
        d = norm(x - y, norm_kind)
        if d == 0.0 or not d < r:
            continue
        drawn += 1
        fx = np.asarray(fmap(x))
        fy = np.asarray(fmap(y))
        dimg = norm(fx - fy, norm_kind)
        worst = max(worst, dimg / d)
        if not dimg < k * d + tau:
            details = {"sample": i, "x": x.tolist(), "y": y.tolist(), "d": d,
                       "d_image": dimg, "samples_used": drawn}
            return CheckResult(False, (x.tolist(), y.tolist()), dimg / d, details)
    return CheckResult(True, None, worst, {"samples_used": drawn, "refutation_only": True})

"""Finite metric spaces, transitive relations and self-map tables.

Everything here is immutable after construction.  Construction checks
shapes and ranges only; the metric axioms and transitivity are checked by
:func:`validate_metric` and :func:`validate_relation` so a caller always
sees *which* axiom failed instead of a constructor exception.
"""

from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .errors import InvalidInput

TAU_REL = 1e-9
TAU_ABS = 1e-12

NORMS = ("l1", "l2", "linf")


def norm(vec, kind="l2"):
    v = np.asarray(vec, dtype=float)
    if kind == "l2":
        return float(np.sqrt(np.dot(v, v)))
    if kind == "l1":
        return float(np.sum(np.abs(v)))
    if kind == "linf":
        return float(np.max(np.abs(v))) if v.size else 0.0
    raise InvalidInput(f"unknown norm {kind!r}")


def _frozen(arr):
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class FiniteSpace:
    dist: np.ndarray
    labels: tuple = None
    coords: np.ndarray = None
    norm: str = None

    def __post_init__(self):
        try:
            d = np.array(self.dist, dtype=float)
        except (TypeError, ValueError) as exc:
            raise InvalidInput(f"distance table is not numeric: {exc}") from None
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise InvalidInput(f"distance table must be square, got shape {d.shape}")
        if d.shape[0] == 0:
            raise InvalidInput("space must have at least one point")
        if not np.all(np.isfinite(d)):
            raise InvalidInput("distance table has non-finite entries")
        object.__setattr__(self, "dist", _frozen(d))
        if self.labels is not None:
            labels = tuple(str(s) for s in self.labels)
            if len(labels) != d.shape[0]:
                raise InvalidInput("label count does not match point count")
            object.__setattr__(self, "labels", labels)
        if self.coords is not None:
            object.__setattr__(self, "coords", _frozen(np.array(self.coords, dtype=float)))

    @classmethod
    def from_coords(cls, coords, norm="l2", labels=None):
        c = np.array(coords, dtype=float)
        if c.ndim == 1:
            c = c[:, None]
        if c.ndim != 2 or c.shape[0] == 0:
            raise InvalidInput("coords must be a non-empty list of vectors")
        if not np.all(np.isfinite(c)):
            raise InvalidInput("coords have non-finite entries")
        if norm not in NORMS:
            raise InvalidInput(f"unknown norm {norm!r}")
        diff = c[:, None, :] - c[None, :, :]
        if norm == "l2":
            d = np.sqrt(np.sum(diff * diff, axis=-1))
        elif norm == "l1":
            d = np.sum(np.abs(diff), axis=-1)
        else:
            d = np.max(np.abs(diff), axis=-1)
        return cls(d, labels=labels, coords=c, norm=norm)

    @property
    def n(self):
        return self.dist.shape[0]

    def d(self, i, j):
        return float(self.dist[i, j])


class Comparability(Enum):
    LEFT_LE = "left-le"
    RIGHT_LE = "right-le"
    BOTH = "both"
    INCOMPARABLE = "incomparable"


RELATION_KINDS = (
    "explicit-edges",
    "total-index-order",
    "strict-index-order",
    "universal",
    "componentwise-le",
)


@dataclass(frozen=True, eq=False)
class Relation:
    """Boolean table ``holds[i, j]`` meaning point i precedes point j.

    Reflexivity and antisymmetry are not required, only transitivity,
    and even that is left to :func:`validate_relation`.
    """

    holds: np.ndarray
    kind: str = "explicit-edges"

    def __post_init__(self):
        h = np.array(self.holds, dtype=bool)
        if h.ndim != 2 or h.shape[0] != h.shape[1]:
            raise InvalidInput(f"relation table must be square, got shape {h.shape}")
        if self.kind not in RELATION_KINDS:
            raise InvalidInput(f"unknown relation kind {self.kind!r}")
        object.__setattr__(self, "holds", _frozen(h))

    @classmethod
    def from_edges(cls, n, pairs):
        h = np.zeros((n, n), dtype=bool)
        for i, j in pairs:
            if not (0 <= i < n and 0 <= j < n):
                raise InvalidInput(f"edge ({i}, {j}) out of range for {n} points")
            h[i, j] = True
        return cls(h, "explicit-edges")

    @classmethod
    def total_index_order(cls, n):
        return cls(np.triu(np.ones((n, n), dtype=bool)), "total-index-order")

    @classmethod
    def strict_index_order(cls, n):
        return cls(np.triu(np.ones((n, n), dtype=bool), k=1), "strict-index-order")

    @classmethod
    def universal(cls, n):
        return cls(np.ones((n, n), dtype=bool), "universal")

    @classmethod
    def componentwise(cls, coords):
        c = np.atleast_2d(np.asarray(coords, dtype=float))
        h = np.all(c[:, None, :] <= c[None, :, :], axis=-1)
        return cls(h, "componentwise-le")

    @property
    def n(self):
        return self.holds.shape[0]

    def le(self, i, j):
        return bool(self.holds[i, j])

    def pairs(self):
        return [(int(i), int(j)) for i, j in np.argwhere(self.holds)]


def componentwise_le(x, y):
    """The real-backend relation: x precedes y iff every coordinate does."""
    return bool(np.all(np.asarray(x, dtype=float) <= np.asarray(y, dtype=float)))


@dataclass(frozen=True)
class SelfMapTable:
    image: tuple

    def __post_init__(self):
        image = tuple(int(j) for j in self.image)
        n = len(image)
        if n == 0:
            raise InvalidInput("map table is empty")
        for i, j in enumerate(image):
            if not 0 <= j < n:
                raise InvalidInput(f"image of {i} is {j}, outside 0..{n - 1}")
        object.__setattr__(self, "image", image)

    @property
    def n(self):
        return len(self.image)

    def __call__(self, i):
        return self.image[i]


@dataclass(frozen=True, eq=False)
class FiniteInstance:
    space: FiniteSpace
    relation: Relation
    map: SelfMapTable
    x0: int
    epsilon: float
    k: float

    def __post_init__(self):
        n = self.space.n
        if self.relation.n != n or self.map.n != n:
            raise InvalidInput(
                f"size mismatch: space {n}, relation {self.relation.n}, map {self.map.n}"
            )
        if not 0 <= self.x0 < n:
            raise InvalidInput(f"x0={self.x0} outside 0..{n - 1}")
        if not (np.isfinite(self.epsilon) and self.epsilon > 0):
            raise InvalidInput(f"epsilon must be positive, got {self.epsilon}")
        if not 0 < self.k < 1:
            raise InvalidInput(f"k must lie in (0, 1), got {self.k}")
        object.__setattr__(self, "epsilon", float(self.epsilon))
        object.__setattr__(self, "k", float(self.k))

    @property
    def n(self):
        return self.space.n

    def d(self, i, j):
        return float(self.space.dist[i, j])

    def f(self, i):
        return self.map.image[i]

    def le(self, i, j):
        return bool(self.relation.holds[i, j])

    def with_(self, **changes):
        return replace(self, **changes)


@dataclass
class ValidationReport:
    # (axiom, indices) with axiom in {zero-diagonal, symmetry, positivity, triangle}
    violations: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.violations


@dataclass
class TransitivityReport:
    violations: list = field(default_factory=list)
    reflexive: bool = False
    antisymmetric: bool = False

    @property
    def ok(self):
        return not self.violations


def validate_metric(space, tau_rel=TAU_REL):
    d = space.dist
    n = space.n
    out = []
    for i in range(n):
        if d[i, i] != 0.0:
            out.append(("zero-diagonal", (i,)))
    for i, j in np.argwhere(np.triu(d != d.T, k=1)):
        out.append(("symmetry", (int(i), int(j))))
    nonpos = (d <= 0.0) | (d.T <= 0.0)
    for i, j in np.argwhere(np.triu(nonpos, k=1)):
        out.append(("positivity", (int(i), int(j))))
    triples = []
    for j in range(n):
        via = d[:, j:j + 1] + d[j:j + 1, :]
        bad = d > via + tau_rel * via
        for i, k in np.argwhere(bad):
            triples.append((int(i), j, int(k)))
    triples.sort()
    out.extend(("triangle", t) for t in triples)
    return ValidationReport(out)


def validate_relation(relation, limit=None):
    """All triples (i, j, k) with i<j, j<k related but not i<k."""
    h = relation.holds
    n = relation.n
    found = []
    for j in range(n):
        rows = np.flatnonzero(h[:, j])
        cols = np.flatnonzero(h[j, :])
        if rows.size == 0 or cols.size == 0:
            continue
        missing = ~h[np.ix_(rows, cols)]
        for a, b in np.argwhere(missing):
            found.append((int(rows[a]), j, int(cols[b])))
    found.sort()
    if limit is not None:
        found = found[:limit]
    both = h & h.T
    np.fill_diagonal(both, False)
    return TransitivityReport(
        found,
        reflexive=bool(np.all(np.diag(h))),
        antisymmetric=not bool(np.any(both)),
    )


def transitive_closure(relation):
    h = relation.holds.copy()
    for m in range(relation.n):
        h |= h[:, m:m + 1] & h[m:m + 1, :]
    kind = relation.kind if np.array_equal(h, relation.holds) else "explicit-edges"
    return Relation(h, kind)


def comparable(relation, x, y):
    n = relation.n
    if not (0 <= x < n and 0 <= y < n):
        raise InvalidInput(f"indices ({x}, {y}) out of range for {n} points")
    left = relation.holds[x, y]
    right = relation.holds[y, x]
    if left and right:
        return Comparability.BOTH
    if left:
        return Comparability.LEFT_LE
    if right:
        return Comparability.RIGHT_LE
    return Comparability.INCOMPARABLE


def is_comparable(relation, x, y):
    return bool(relation.holds[x, y] or relation.holds[y, x])


# --- instance JSON -----------------------------------------------------------

def _relation_from_json(obj, n):
    kind = obj.get("type")
    if kind == "edges":
        return Relation.from_edges(n, [tuple(p) for p in obj.get("pairs", [])])
    if kind == "total-index-order":
        return Relation.total_index_order(n)
    if kind == "strict-index-order":
        return Relation.strict_index_order(n)
    if kind == "universal":
        return Relation.universal(n)
    raise InvalidInput(f"unknown relation type {kind!r}")


def _relation_to_json(relation):
    if relation.kind in ("total-index-order", "strict-index-order", "universal"):
        return {"type": relation.kind}
    return {"type": "edges", "pairs": [list(p) for p in relation.pairs()]}


def instance_from_json(obj):
    if not isinstance(obj, dict):
        raise InvalidInput("instance must be a JSON object")
    backend = obj.get("backend", "finite")
    if backend != "finite":
        raise InvalidInput(f"not a finite-backend instance: {backend!r}")
    try:
        metric = obj["metric"]
        labels = obj.get("labels")
        if metric.get("type") == "explicit":
            space = FiniteSpace(metric["matrix"], labels=labels)
        elif metric.get("type") == "embedding":
            space = FiniteSpace.from_coords(metric["coords"], metric.get("norm", "l2"), labels)
        else:
            raise InvalidInput(f"unknown metric type {metric.get('type')!r}")
        relation = _relation_from_json(obj["relation"], space.n)
        return FiniteInstance(
            space,
            relation,
            SelfMapTable(obj["map"]),
            int(obj["x0"]),
            float(obj["epsilon"]),
            float(obj["k"]),
        )
    except (KeyError, TypeError, AttributeError) as exc:
        raise InvalidInput(f"malformed instance: {exc!r}") from None


def instance_to_json(inst):
    space = inst.space
    if space.coords is not None:
        metric = {"type": "embedding", "coords": space.coords.tolist(), "norm": space.norm}
    else:
        metric = {"type": "explicit", "matrix": space.dist.tolist()}
    out = {
        "backend": "finite",
        "metric": metric,
        "relation": _relation_to_json(inst.relation),
        "map": list(inst.map.image),
        "x0": inst.x0,
        "epsilon": inst.epsilon,
        "k": inst.k,
    }
    if space.labels is not None:
        out["labels"] = list(space.labels)
    return out

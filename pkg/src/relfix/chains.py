"""epsilon-monotonic chains and chainability of finite instances."""

from collections import deque
from dataclasses import dataclass
import math

import numpy as np

from .errors import InvalidInput, NoComparablePairs
from .space import is_comparable

ASC = "asc"
DESC = "desc"


@dataclass(frozen=True)
class Chain:
    vertices: tuple
    direction: str
    epsilon: float
    step_dists: tuple

    @property
    def m(self):
        return len(self.vertices) - 1

    def to_json(self):
        return {
            "direction": self.direction,
            "vertices": list(self.vertices),
            "steps": list(self.step_dists),
            "epsilon": self.epsilon,
        }


def verify_chain(inst, chain, x=None, y=None):
    """Re-check a chain from scratch against the instance."""
    v = chain.vertices
    if not v:
        return False
    if x is not None and v[0] != x:
        return False
    if y is not None and v[-1] != y:
        return False
    if len(chain.step_dists) != len(v) - 1:
        return False
    for a, b, step in zip(v, v[1:], chain.step_dists):
        related = inst.le(a, b) if chain.direction == ASC else inst.le(b, a)
        if not related:
            return False
        if step != inst.d(a, b) or not step < chain.epsilon:
            return False
    return True


def _adjacency(inst, epsilon, direction):
    h = inst.relation.holds if direction == ASC else inst.relation.holds.T
    adj = h & (inst.space.dist < epsilon)
    np.fill_diagonal(adj, False)
    return adj


def _min_hop_lex_path(adj, x, y):
    # hop distances to y on the reversed graph, then greedy smallest successor
    n = adj.shape[0]
    dist = [-1] * n
    dist[y] = 0
    queue = deque([y])
    while queue:
        v = queue.popleft()
        for u in np.flatnonzero(adj[:, v]):
            if dist[u] < 0:
                dist[u] = dist[v] + 1
                queue.append(int(u))
    if dist[x] < 0:
        return None
    path = [x]
    cur = x
    while cur != y:
        nxt = next(int(w) for w in np.flatnonzero(adj[cur]) if dist[w] == dist[cur] - 1)
        path.append(nxt)
        cur = nxt
    return path


def find_monotonic_chain(inst, x, y, epsilon=None):
    """Minimal-hop epsilon-monotonic chain from x to y, or None.

    Ascending chains are tried first.  Among chains with the fewest hops
    the lexicographically smallest vertex sequence is returned.
    """
    n = inst.n
    if not (0 <= x < n and 0 <= y < n):
        raise InvalidInput(f"indices ({x}, {y}) out of range for {n} points")
    eps = inst.epsilon if epsilon is None else float(epsilon)
    if not eps > 0:
        raise InvalidInput("epsilon must be positive")
    if x == y:
        return Chain((x,), ASC, eps, ())
    for direction in (ASC, DESC):
        path = _min_hop_lex_path(_adjacency(inst, eps, direction), x, y)
        if path is not None:
            steps = tuple(inst.d(a, b) for a, b in zip(path, path[1:]))
            return Chain(tuple(path), direction, eps, steps)
    return None


@dataclass(frozen=True)
class ChainabilityReport:
    verdict: bool
    epsilon: float
    witness: tuple = None
    pairs_checked: int = 0

    def to_json(self):
        return {
            "verdict": self.verdict,
            "epsilon": self.epsilon,
            "witness": list(self.witness) if self.witness else None,
            "pairs_checked": self.pairs_checked,
        }


def _reach(adj):
    r = adj.copy()
    for m in range(r.shape[0]):
        r |= r[:, m:m + 1] & r[m:m + 1, :]
    return r


def check_chainable(inst, epsilon=None):
    eps = inst.epsilon if epsilon is None else float(epsilon)
    reach = _reach(_adjacency(inst, eps, ASC))
    chained = reach | reach.T
    h = inst.relation.holds
    checked = 0
    for i in range(inst.n):
        for j in range(i + 1, inst.n):
            if not (h[i, j] or h[j, i]):
                continue
            checked += 1
            if not chained[i, j]:
                return ChainabilityReport(False, eps, (i, j), checked)
    return ChainabilityReport(True, eps, None, checked)


def chain_bottlenecks(inst):
    """Minimax step over ascending chains, for every ordered pair."""
    h = inst.relation.holds.copy()
    np.fill_diagonal(h, False)
    b = np.where(h, inst.space.dist, np.inf)
    for m in range(inst.n):
        b = np.minimum(b, np.maximum(b[:, m:m + 1], b[m:m + 1, :]))
    return b


def chainability_threshold(inst):
    """Smallest epsilon for which every comparable pair is chained."""
    h = inst.relation.holds
    if not h.any():
        raise NoComparablePairs("relation has no related pairs")
    b = chain_bottlenecks(inst)
    worst = 0.0
    for i in range(inst.n):
        for j in range(i + 1, inst.n):
            if is_comparable(inst.relation, i, j):
                worst = max(worst, float(min(b[i, j], b[j, i])))
    # chains need d < epsilon strictly
    return math.nextafter(worst, math.inf)

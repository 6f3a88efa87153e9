"""Hierarchy-constrained maximum-spanning-tree learning.

Candidate edges arrive sorted descending by conditional mutual information
and are processed greedily. A pair whose endpoints are hierarchically related
may only enter the tree with the ancestor as parent; it is rejected outright
if that would give the descendant a second parent. Unrelated pairs enter
undirected unless the single-parent constraint already forces a direction:

* both endpoints parented  -> the edge is rejected (either direction would
  give some feature two parents);
* exactly one parented     -> oriented away from the parented endpoint;
* neither parented         -> kept undirected for now.

After every directed insertion, dependency propagation runs to a fixpoint:
any undirected edge with exactly one parented endpoint is oriented away from
that endpoint and becomes directed. Undirected edges that survive the whole
pass are oriented by a seeded coin at the end, in insertion order, choosing
only among directions that keep the single-parent constraint; an edge with no
legal direction left is dropped with a warning.

Cycle checks treat directed and undirected edges alike, so the working
skeleton is always a forest and the result is a single-parent forest whose
directed edges never oppose the hierarchy.
"""

from __future__ import annotations

import random
import warnings
from typing import Callable, Optional, Sequence

from .hierarchy import FeatureDag
from .mutual_info import ScoredEdge
from .tree import DependencyTree, UnionFind

TraceFn = Optional[Callable[[dict], None]]


class EdgeSets:
    """Working state of the constrained learner: directed edges, undirected
    edges, the derived parent map, and a union-find over the skeleton."""

    __slots__ = ("n_features", "directed", "undirected", "parent_of", "_uf")

    def __init__(self, n_features: int):
        self.n_features = n_features
        self.directed: list[tuple[int, int]] = []  # (parent, child)
        self.undirected: list[tuple[int, int]] = []  # (a, b) with a < b
        self.parent_of: dict[int, int] = {}
        self._uf = UnionFind(n_features)

    def copy(self) -> "EdgeSets":
        out = EdgeSets.__new__(EdgeSets)
        out.n_features = self.n_features
        out.directed = list(self.directed)
        out.undirected = list(self.undirected)
        out.parent_of = dict(self.parent_of)
        out._uf = self._uf.copy()
        return out

    def connected(self, a: int, b: int) -> bool:
        return self._uf.connected(a, b)

    def has_parent(self, v: int) -> bool:
        return v in self.parent_of

    def add_directed(self, parent: int, child: int) -> None:
        if child in self.parent_of:
            raise ValueError(f"feature {child} already has a parent")
        self.directed.append((parent, child))
        self.parent_of[child] = parent
        self._uf.union(parent, child)

    def add_undirected(self, a: int, b: int) -> None:
        pair = (a, b) if a < b else (b, a)
        self.undirected.append(pair)
        self._uf.union(a, b)

    def _move_to_directed(self, pair: tuple[int, int], parent: int, child: int) -> None:
        self.undirected.remove(pair)
        self.directed.append((parent, child))
        self.parent_of[child] = parent

    def _drop_undirected(self, pair: tuple[int, int]) -> None:
        self.undirected.remove(pair)
        # The skeleton connectivity stays as-is; dropping late never
        # re-admits edges, so a stale union is harmless and keeps this O(1).


def would_create_cycle(sets: EdgeSets, edge: tuple[int, int]) -> bool:
    """True iff both endpoints already sit in one connected component of the
    combined directed + undirected skeleton."""
    return sets.connected(edge[0], edge[1])


def violates_single_parent(sets: EdgeSets, child: int) -> bool:
    return sets.has_parent(child)


def _note(trace: TraceFn, decision: str, i: int, j: int, **extra) -> None:
    if trace is not None:
        entry = {"decision": decision, "i": i, "j": j}
        entry.update(extra)
        trace(entry)


def _propagate(sets: EdgeSets, trace: TraceFn = None) -> None:
    """Run dependency propagation to a fixpoint, in place."""
    moved = True
    while moved:
        moved = False
        for pair in list(sets.undirected):
            a, b = pair
            has_a = a in sets.parent_of
            has_b = b in sets.parent_of
            if has_a == has_b:
                continue
            parent, child = (a, b) if has_a else (b, a)
            sets._move_to_directed(pair, parent, child)
            _note(trace, "oriented_by_propagation", a, b, parent=parent, child=child)
            moved = True


def propagate_dependencies(sets: EdgeSets) -> EdgeSets:
    """Functional form of the propagation fixpoint (the learners use the
    in-place variant internally; both share the same loop)."""
    out = sets.copy()
    _propagate(out)
    return out


def _orient_residual(sets: EdgeSets, rng: random.Random, trace: TraceFn = None) -> None:
    """Randomly direct whatever stayed undirected, in insertion order."""
    for pair in list(sets.undirected):
        a, b = pair
        options = []
        if b not in sets.parent_of:
            options.append((a, b))
        if a not in sets.parent_of:
            options.append((b, a))
        if not options:
            warnings.warn(
                f"dropping edge {pair}: both endpoints already have parents, "
                "no orientation is legal",
                RuntimeWarning,
                stacklevel=3,
            )
            sets._drop_undirected(pair)
            _note(trace, "rejected_single_parent", a, b)
            continue
        parent, child = options[0] if len(options) == 1 else options[rng.randrange(2)]
        sets._move_to_directed(pair, parent, child)
        _note(trace, "oriented_randomly", a, b, parent=parent, child=child)


def _insert_constrained(
    sets: EdgeSets,
    dag: FeatureDag,
    i: int,
    j: int,
    trace: TraceFn,
) -> bool:
    """Apply the constraint branches to one non-cycle-creating edge.

    Runs propagation to a fixpoint after every directed insertion. Returns
    True iff the edge entered the working sets (directed or undirected), so
    the lazy learner knows when its redundancy hook must fire.
    """
    if dag.hierarchically_related(i, j):
        parent, child = (i, j) if dag.is_ancestor(i, j) else (j, i)
        if violates_single_parent(sets, child):
            _note(trace, "rejected_single_parent", i, j)
            return False
        sets.add_directed(parent, child)
        _note(trace, "accepted_directed", i, j, parent=parent, child=child)
        _propagate(sets, trace)
        return True

    has_i = sets.has_parent(i)
    has_j = sets.has_parent(j)
    if has_i and has_j:
        _note(trace, "rejected_single_parent", i, j)
        return False
    if has_i != has_j:
        parent, child = (i, j) if has_i else (j, i)
        sets.add_directed(parent, child)
        _note(trace, "accepted_directed", i, j, parent=parent, child=child)
        _propagate(sets, trace)
        return True
    sets.add_undirected(i, j)
    _note(trace, "accepted_undirected", i, j)
    return True


def hie_mst(
    edges: Sequence[ScoredEdge],
    dag: FeatureDag,
    n_features: int,
    seed: int,
    trace: TraceFn = None,
) -> DependencyTree:
    """Learn the hierarchy-constrained dependency forest.

    ``edges`` must be sorted descending by score. The result may have fewer
    than ``n_features - 1`` edges: constraint rejections can exhaust the
    candidates, and leftover features simply become roots.
    """
    rng = random.Random(seed)
    sets = EdgeSets(n_features)
    for e in edges:
        if would_create_cycle(sets, e.pair):
            _note(trace, "rejected_cycle", e.i, e.j)
            continue
        _insert_constrained(sets, dag, e.i, e.j, trace)
    _orient_residual(sets, rng, trace)
    return DependencyTree(tuple(sets.parent_of.get(f) for f in range(n_features)))

"""Lazy per-instance variant of the constrained spanning-tree learner.

Hierarchical redundancy is a property of one instance: two hierarchically
related features carrying the same value say the same thing twice. For each
test instance this learner therefore builds its own tree, with two extra
gates in front of the usual constraint branches (the edge's status must still
be available, and the pair itself must not be redundant), and after every
insertion it deactivates all relatives of the new endpoints that duplicate an
endpoint's value, marking every candidate edge touching them unavailable.

The surviving active features are returned next to the tree; features removed
as redundant contribute no likelihood factor when the instance is classified.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import DimensionMismatch
from .hie_mst import EdgeSets, TraceFn, _insert_constrained, _note, _orient_residual, would_create_cycle
from .hierarchy import FeatureDag
from .mutual_info import AVAILABLE, UNAVAILABLE, ScoredEdge
from .tree import DependencyTree


@dataclass
class InstanceContext:
    """Per-instance working state: the instance's values, a private status for
    every candidate edge, and the set of still-active features."""

    values: list[int]
    edges: Sequence[ScoredEdge]
    edge_status: list[str]
    active_features: set[int]
    incident: Mapping[int, tuple[int, ...]]


def build_context(
    edges: Sequence[ScoredEdge], instance, n_features: int
) -> InstanceContext:
    values = [int(v) for v in instance]
    if len(values) != n_features:
        raise DimensionMismatch(
            f"instance has {len(values)} values, expected {n_features}"
        )
    incident: dict[int, list[int]] = {f: [] for f in range(n_features)}
    for pos, e in enumerate(edges):
        incident[e.i].append(pos)
        incident[e.j].append(pos)
    return InstanceContext(
        values=values,
        edges=edges,
        edge_status=[e.status for e in edges],
        active_features=set(range(n_features)),
        incident={f: tuple(ps) for f, ps in incident.items()},
    )


def is_redundant_pair(dag: FeatureDag, values, a: int, b: int) -> bool:
    """True iff the features are hierarchically related and carry the same
    value in this instance."""
    return dag.hierarchically_related(a, b) and int(values[a]) == int(values[b])


def remove_redundancy(
    ctx: InstanceContext,
    dag: FeatureDag,
    edge: tuple[int, int],
    trace: TraceFn = None,
) -> InstanceContext:
    """Deactivate every ancestor/descendant of the edge's endpoints that
    shares the endpoint's value; the endpoints themselves stay active.

    All candidate edges incident to a deactivated feature become unavailable.
    Mutates and returns ``ctx``.
    """
    i, j = edge
    for v in (i, j):
        val = ctx.values[v]
        for u in dag.related(v):
            if u == i or u == j:
                continue
            if u in ctx.active_features and ctx.values[u] == val:
                ctx.active_features.discard(u)
                for pos in ctx.incident[u]:
                    ctx.edge_status[pos] = UNAVAILABLE
                _note(trace, "relative_removed", i, j, feature=u, endpoint=v)
    return ctx


def hie_mst_lite(
    edges: Sequence[ScoredEdge],
    dag: FeatureDag,
    instance,
    n_features: int,
    seed: int,
    trace: TraceFn = None,
) -> tuple[DependencyTree, frozenset[int]]:
    """Learn one instance-specific tree and report the surviving features.

    On a hierarchy with no edges this degenerates to the eager learner: no
    pair is ever redundant, nothing gets deactivated, and the two learners
    consume the seed identically, so their outputs coincide edge for edge.
    """
    rng = random.Random(seed)
    ctx = build_context(edges, instance, n_features)
    sets = EdgeSets(n_features)
    for pos, e in enumerate(edges):
        if would_create_cycle(sets, e.pair):
            _note(trace, "rejected_cycle", e.i, e.j)
            continue
        if ctx.edge_status[pos] == UNAVAILABLE:
            _note(trace, "rejected_unavailable", e.i, e.j)
            continue
        if is_redundant_pair(dag, ctx.values, e.i, e.j):
            _note(trace, "rejected_redundant", e.i, e.j)
            continue
        if _insert_constrained(sets, dag, e.i, e.j, trace):
            remove_redundancy(ctx, dag, e.pair, trace)
    _orient_residual(sets, rng, trace)
    tree = DependencyTree(tuple(sets.parent_of.get(f) for f in range(n_features)))
    return tree, frozenset(ctx.active_features)

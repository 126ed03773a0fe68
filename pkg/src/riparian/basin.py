"""Geometric allocation on river basins that are not a single line.

A basin is a DAG whose edges point downstream.  Nodes without a downstream
successor are mouths and keep everything that reaches them; every other node
keeps a share ``gamma_i`` of its augmented mass and splits the rest equally
among its immediate successors.  Confluences add up all inflows first.
"""

from __future__ import annotations

import graphlib
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .core import (
    BudgetExceedsAggregate,
    EmptyClaims,
    NegativeBudget,
    NegativeClaim,
    ParameterOutOfRange,
    Problem,
    ValidationError,
    ZeroAggregateClaim,
    infer_exact,
    to_quantity,
)


class CycleDetected(ValidationError):
    def __init__(self, nodes: Sequence[str]) -> None:
        self.nodes = list(nodes)
        super().__init__(f"basin contains a cycle through {' -> '.join(self.nodes)}")


class NoMouth(ValidationError):
    def __init__(self, node: str | None = None) -> None:
        self.node = node
        msg = "basin has no mouth" if node is None else f"node {node} cannot reach a mouth"
        super().__init__(msg)


class InvalidBasin(ValidationError):
    pass


@dataclass(frozen=True)
class BasinGraph:
    """A validated basin.  ``order`` is a topological order (upstream first)."""

    nodes: tuple[str, ...]
    claims: Mapping[str, object]
    gammas: Mapping[str, object]
    successors: Mapping[str, tuple[str, ...]]
    predecessors: Mapping[str, tuple[str, ...]]
    budget: object
    order: tuple[str, ...]

    @property
    def mouths(self) -> tuple[str, ...]:
        return tuple(v for v in self.nodes if not self.successors[v])

    @property
    def total(self):
        return sum((self.claims[v] for v in self.nodes), self.budget * 0)

    @property
    def exact(self) -> bool:
        return isinstance(self.budget, Fraction)

    def confluences(self) -> tuple[str, ...]:
        return tuple(v for v in self.nodes if len(self.predecessors[v]) > 1)


@dataclass(frozen=True)
class BasinAllocation:
    awards: dict
    retained_shares: dict

    def in_order(self, nodes: Iterable[str]) -> tuple:
        return tuple(self.awards[v] for v in nodes)


def _node_fields(node) -> tuple:
    if isinstance(node, Mapping):
        return str(node["id"]), node["claim"], node.get("gamma")
    node = tuple(node)
    if len(node) == 2:
        return str(node[0]), node[1], None
    return str(node[0]), node[1], node[2]


def validate_basin(nodes: Iterable, edges: Iterable, budget, exact: bool | None = None) -> BasinGraph:
    """Validate a basin description.

    ``nodes`` holds mappings ``{"id", "claim", "gamma"?}`` or ``(id, claim[, gamma])``
    tuples; ``edges`` holds ``(upstream, downstream[, weight])``.  Edge weights
    are reserved: every edge leaving a node must carry the same weight.
    """
    parsed = [_node_fields(n) for n in nodes]
    if not parsed:
        raise EmptyClaims()
    if exact is None:
        exact = infer_exact([c for _, c, _ in parsed] + [g for _, _, g in parsed if g is not None] + [budget])
    ids = [i for i, _, _ in parsed]
    if len(set(ids)) != len(ids):
        raise InvalidBasin("duplicate node identifier")

    claims, gammas = {}, {}
    for node_id, claim, gamma in parsed:
        c = to_quantity(claim, exact)
        if c < 0:
            raise NegativeClaim(node_id, c)
        claims[node_id] = c
        if gamma is not None:
            g = to_quantity(gamma, exact)
            if not 0 <= g <= 1:
                raise ParameterOutOfRange(f"gamma[{node_id}]", g)
            gammas[node_id] = g

    succ: dict[str, list[str]] = {v: [] for v in ids}
    pred: dict[str, list[str]] = {v: [] for v in ids}
    weights: dict[str, set] = {v: set() for v in ids}
    for edge in edges:
        edge = tuple(edge)
        if len(edge) not in (2, 3):
            raise InvalidBasin(f"malformed edge {edge!r}")
        a, b = str(edge[0]), str(edge[1])
        if a not in succ or b not in succ:
            raise InvalidBasin(f"edge {a}->{b} references an unknown node")
        if b in succ[a]:
            raise InvalidBasin(f"duplicate edge {a}->{b}")
        succ[a].append(b)
        pred[b].append(a)
        if len(edge) == 3:
            weights[a].add(to_quantity(edge[2], exact))
    for v, ws in weights.items():
        if len(ws) > 1:
            raise InvalidBasin(f"node {v}: unequal residual split weights are not supported")

    sorter = graphlib.TopologicalSorter({v: pred[v] for v in ids})
    try:
        order = tuple(sorter.static_order())
    except graphlib.CycleError as exc:
        raise CycleDetected([str(x) for x in exc.args[1]]) from None

    mouths = [v for v in ids if not succ[v]]
    if not mouths:
        raise NoMouth()
    reaches = set(mouths)
    for v in reversed(order):
        if any(w in reaches for w in succ[v]):
            reaches.add(v)
    for v in ids:
        if v not in reaches:
            raise NoMouth(v)

    budget_q = to_quantity(budget, exact)
    total = sum(claims.values(), Fraction(0) if exact else 0.0)
    if total <= 0:
        raise ZeroAggregateClaim()
    if budget_q < 0:
        raise NegativeBudget(budget_q)
    if budget_q > total:
        raise BudgetExceedsAggregate(budget_q, total)

    return BasinGraph(
        nodes=tuple(ids),
        claims=claims,
        gammas=gammas,
        successors={v: tuple(s) for v, s in succ.items()},
        predecessors={v: tuple(p) for v, p in pred.items()},
        budget=budget_q,
        order=order,
    )


def basin_geometric(g: BasinGraph, gamma_default=None) -> BasinAllocation:
    """Single topological pass bubbling residual claims downstream."""
    default = None if gamma_default is None else to_quantity(gamma_default, g.exact)
    if default is not None and not 0 <= default <= 1:
        raise ParameterOutOfRange("gamma", gamma_default)
    zero = g.budget * 0
    inflow = {v: zero for v in g.nodes}
    retained = {}
    for v in g.order:
        mass = g.claims[v] + inflow[v]
        succ = g.successors[v]
        if not succ:
            retained[v] = mass
            continue
        gamma = g.gammas.get(v, default)
        if gamma is None:
            raise ParameterOutOfRange(f"gamma[{v}]", None)
        keep = gamma * mass
        retained[v] = keep
        share = (mass - keep) / len(succ)
        for w in succ:
            inflow[w] = inflow[w] + share
    ratio = g.budget / g.total
    awards = {v: retained[v] * ratio for v in g.nodes}
    return BasinAllocation(awards=awards, retained_shares={v: retained[v] for v in g.nodes})


def linear_to_basin(p: Problem, ids: Sequence[str] | None = None) -> BasinGraph:
    """Chain basin ``1 -> 2 -> ... -> n`` carrying the claims of ``p``."""
    ids = [str(i) for i in (ids or range(1, p.n + 1))]
    if len(ids) != p.n:
        raise InvalidBasin("one identifier per agent is required")
    nodes = [{"id": i, "claim": c} for i, c in zip(ids, p.claims)]
    edges = list(zip(ids, ids[1:]))
    return validate_basin(nodes, edges, p.budget, exact=p.exact)


def basin_from_json(data: Mapping, exact: bool | None = None, budget=None) -> BasinGraph:
    """Build a basin from the ``{"nodes", "edges", "budget"}`` file layout."""
    try:
        nodes = data["nodes"]
        edges = data.get("edges", [])
        b = data["budget"] if budget is None else budget
    except (KeyError, TypeError) as exc:
        raise InvalidBasin(f"basin file is missing field {exc}") from exc
    return validate_basin(nodes, edges, b, exact=exact)


def basin_to_json(g: BasinGraph) -> dict:
    from .core import format_quantity

    nodes = []
    for v in g.nodes:
        entry = {"id": v, "claim": format_quantity(g.claims[v])}
        if v in g.gammas:
            entry["gamma"] = format_quantity(g.gammas[v])
        nodes.append(entry)
    edges = [[v, w] for v in g.nodes for w in g.successors[v]]
    return {"nodes": nodes, "edges": edges, "budget": format_quantity(g.budget)}

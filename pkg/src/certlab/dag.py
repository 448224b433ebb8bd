"""Decision DAGs: the exploration testbed.

Reasoning is modeled as traversal of a directed acyclic graph from a start
node toward a target set; at each node a policy assigns a categorical
distribution over that node's ordered successor list.  The module provides
graph builders (chain, diamond, trap, layered random), policy constructors
for three certainty regimes, a divergence-from-uniform metric, a Monte
Carlo searcher, and an exact dynamic-programming oracle for the success
probability, so every sampled statistic can be checked against a closed
answer.

Graphs and policies are immutable after construction; trials derive their
own seeds, so results are identical under any execution order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import categorical as cat
from .errors import (
    EnumerationTooLargeError,
    InfiniteDivergenceError,
    InvalidInputError,
    NoSuccessorsError,
)
from .seeding import rng_for

ENUMERATION_NODE_CAP = 10**6


@dataclass(frozen=True)
class DecisionDag:
    """Immutable DAG with a start node and a set of target nodes.

    ``successors[v]`` is the ordered tuple of valid next steps from node
    ``v``; policies index their per-node distributions by this order.
    Construction verifies acyclicity (topological sort) and that every
    target is reachable from the start.
    """

    successors: tuple[tuple[int, ...], ...]
    start: int
    targets: frozenset[int]
    _topo: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        n = len(self.successors)
        if not (0 <= self.start < n):
            raise InvalidInputError(f"start node {self.start} out of range 0..{n - 1}")
        if not self.targets:
            raise InvalidInputError("target set must be non-empty")
        for t in self.targets:
            if not (0 <= t < n):
                raise InvalidInputError(f"target node {t} out of range 0..{n - 1}")
        for v, succ in enumerate(self.successors):
            for u in succ:
                if not (0 <= u < n):
                    raise InvalidInputError(f"edge {v}->{u} leaves node range 0..{n - 1}")
        object.__setattr__(self, "_topo", self._topological_order())
        reachable = self.reachable_from_start()
        missing = [t for t in self.targets if t not in reachable]
        if missing:
            raise InvalidInputError(f"targets not reachable from start: {sorted(missing)}")

    def _topological_order(self) -> tuple[int, ...]:
        n = len(self.successors)
        indegree = [0] * n
        for succ in self.successors:
            for u in succ:
                indegree[u] += 1
        queue = [v for v in range(n) if indegree[v] == 0]
        order: list[int] = []
        while queue:
            v = queue.pop()
            order.append(v)
            for u in self.successors[v]:
                indegree[u] -= 1
                if indegree[u] == 0:
                    queue.append(u)
        if len(order) != n:
            raise InvalidInputError("graph contains a cycle")
        return tuple(order)

    @property
    def n_nodes(self) -> int:
        return len(self.successors)

    @property
    def topological_order(self) -> tuple[int, ...]:
        return self._topo

    def reachable_from_start(self) -> set[int]:
        seen = {self.start}
        stack = [self.start]
        while stack:
            v = stack.pop()
            for u in self.successors[v]:
                if u not in seen:
                    seen.add(u)
                    stack.append(u)
        return seen

    def decision_nodes(self) -> list[int]:
        """Nodes with at least one successor, in index order."""
        return [v for v in range(self.n_nodes) if self.successors[v]]


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------


def chain_dag(length: int) -> DecisionDag:
    """Single path 0 -> 1 -> ... -> length; the last node is the target."""
    if length < 1:
        raise InvalidInputError(f"chain length must be >= 1, got {length}")
    succ = tuple((v + 1,) for v in range(length)) + ((),)
    return DecisionDag(successors=succ, start=0, targets=frozenset({length}))


def diamond_dag() -> DecisionDag:
    """start -> {a, b} -> target; both branches succeed."""
    return DecisionDag(successors=((1, 2), (3,), (3,), ()), start=0, targets=frozenset({3}))


def trap_dag(depth: int, branching: int) -> DecisionDag:
    """Depth-``depth`` trap: one of ``branching`` successors continues.

    At each level exactly one successor leads onward; the others are dead
    ends (childless non-targets).  The continuing successor is placed
    first in each node's successor list.  A uniform walker reaches the
    target with probability ``(1/branching) ** depth``.
    """
    if depth < 1 or branching < 2:
        raise InvalidInputError(f"need depth >= 1 and branching >= 2, got {depth}, {branching}")
    succ: list[tuple[int, ...]] = []
    next_id = depth + 1  # ids 0..depth are the spine, traps allocated after
    spine_succ: list[list[int]] = [[] for _ in range(depth + 1)]
    trap_nodes = []
    for level in range(depth):
        options = [level + 1]
        for _ in range(branching - 1):
            options.append(next_id)
            trap_nodes.append(next_id)
            next_id += 1
        spine_succ[level] = options
    successors = [tuple(spine_succ[v]) for v in range(depth + 1)]
    successors.extend(() for _ in trap_nodes)
    return DecisionDag(successors=tuple(successors), start=0, targets=frozenset({depth}))


def layered_dag(
    n_layers: int, width: int, max_out_degree: int, seed: int
) -> DecisionDag:
    """Random layered DAG: every node links to 1..max_out_degree next-layer nodes.

    The final layer is collapsed into a single target node, so all paths of
    length ``n_layers`` succeed; the graph is used for divergence metrics
    rather than trap-style search.
    """
    if n_layers < 1 or width < 1 or max_out_degree < 1:
        raise InvalidInputError("layers, width and out-degree must all be >= 1")
    rng = rng_for(seed, "layered-dag")
    # node ids: 0 = start, then layers of `width`, then the target
    ids = [[0]]
    next_id = 1
    for _ in range(n_layers - 1):
        ids.append(list(range(next_id, next_id + width)))
        next_id += width
    target = next_id
    ids.append([target])
    succ: dict[int, tuple[int, ...]] = {target: ()}
    for layer, nodes in enumerate(ids[:-1]):
        nxt = ids[layer + 1]
        for v in nodes:
            k = int(rng.integers(1, min(max_out_degree, len(nxt)) + 1))
            chosen = sorted(rng.choice(len(nxt), size=k, replace=False).tolist())
            succ[v] = tuple(nxt[i] for i in chosen)
    successors = tuple(succ.get(v, ()) for v in range(target + 1))
    return DecisionDag(successors=successors, start=0, targets=frozenset({target}))


# ---------------------------------------------------------------------------
# Plain-text serialization: one line per node `id: s1,s2`, plus
# `start: id` and `targets: id,id` header lines.
# ---------------------------------------------------------------------------


def format_dag(dag: DecisionDag) -> str:
    lines = [f"start: {dag.start}", "targets: " + ",".join(str(t) for t in sorted(dag.targets))]
    for v, succ in enumerate(dag.successors):
        lines.append(f"{v}: " + ",".join(str(u) for u in succ))
    return "\n".join(lines) + "\n"


def parse_dag(text: str) -> DecisionDag:
    start: int | None = None
    targets: frozenset[int] | None = None
    succ: dict[int, tuple[int, ...]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, _, rest = line.partition(":")
        key = key.strip()
        rest = rest.strip()
        if key == "start":
            start = int(rest)
        elif key == "targets":
            targets = frozenset(int(t) for t in rest.split(",") if t.strip())
        else:
            try:
                node = int(key)
            except ValueError as exc:
                raise InvalidInputError(f"line {lineno}: bad node id {key!r}") from exc
            if node in succ:
                raise InvalidInputError(f"line {lineno}: duplicate node {node}")
            succ[node] = tuple(int(u) for u in rest.split(",") if u.strip())
    if start is None or targets is None:
        raise InvalidInputError("missing start: or targets: header line")
    n = max(succ) + 1 if succ else 0
    successors = tuple(succ.get(v, ()) for v in range(n))
    return DecisionDag(successors=successors, start=start, targets=targets)


# ---------------------------------------------------------------------------
# Policies
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ReasoningPolicy:
    """Per-node successor distributions, aligned with each successor list."""

    tables: tuple[np.ndarray | None, ...]  # None for childless nodes
    kind: str

    def distribution(self, node: int) -> np.ndarray:
        table = self.tables[node]
        if table is None:
            raise NoSuccessorsError(f"node {node} has no successors")
        return table


def uniform_prior(dag: DecisionDag, node: int) -> np.ndarray:
    """The ideal explorer's distribution: 1/|successors| on each successor."""
    k = len(dag.successors[node])
    if k == 0:
        raise NoSuccessorsError(f"node {node} has no successors")
    return np.full(k, 1.0 / k)


def _continuing_successors(dag: DecisionDag) -> list[set[int]]:
    """Per node, the set of successors from which a target is reachable."""
    can_reach = [False] * dag.n_nodes
    for v in reversed(dag.topological_order):
        if v in dag.targets:
            can_reach[v] = True
        else:
            can_reach[v] = any(can_reach[u] for u in dag.successors[v])
    return [
        {i for i, u in enumerate(succ) if can_reach[u]} for succ in dag.successors
    ]


def make_policy(
    dag: DecisionDag,
    kind: str,
    *,
    kappa: float | None = None,
    minority_mass: float | None = None,
    delta: float | None = None,
    seed: int = 0,
    dominant_mode: str = "random",
) -> ReasoningPolicy:
    """Construct a policy in one of three certainty regimes.

    kind:
      * ``uniform``: equals the uniform prior at every node.
      * ``concentrated``: each node's distribution is one draw from the
        concentrated Dirichlet family (``kappa``, ``minority_mass``); the
        dominant successor is chosen per ``dominant_mode``: ``random``
        (uniformly at random per node), ``aligned`` (a successor from
        which a target is reachable) or ``adversarial`` (a successor from
        which no target is reachable, when one exists).
      * ``non_degenerate``: a uniform simplex draw per node, with the
        maximum capped at ``1 - delta`` and the remainder renormalized
        proportionally, so the top probability never exceeds the cap.
    """
    rng = rng_for(seed, "policy", kind)
    tables: list[np.ndarray | None] = []
    if kind == "concentrated":
        if kappa is None or minority_mass is None:
            raise InvalidInputError("concentrated policy needs kappa and minority_mass")
        continuing = _continuing_successors(dag) if dominant_mode != "random" else None
    elif kind == "non_degenerate":
        if delta is None:
            raise InvalidInputError("non_degenerate policy needs delta")
    elif kind != "uniform":
        raise InvalidInputError(f"unknown policy kind {kind!r}")

    for v in range(dag.n_nodes):
        k = len(dag.successors[v])
        if k == 0:
            tables.append(None)
            continue
        if kind == "uniform" or k == 1:
            tables.append(np.full(k, 1.0 / k))
            continue
        if kind == "concentrated":
            params = cat.DirichletConcentration(
                kappa=kappa, n_options=k, minority_mass=minority_mass
            )
            draw = cat.dirichlet_sample(params, rng)
            if dominant_mode == "random":
                dominant = int(rng.integers(k))
            else:
                good = continuing[v]
                pool = good if dominant_mode == "aligned" else set(range(k)) - good
                if not pool:
                    pool = set(range(k))
                pool_list = sorted(pool)
                dominant = pool_list[int(rng.integers(len(pool_list)))]
            # draw[0] carries the dominant parameter; swap it into place
            out = draw.copy()
            out[0], out[dominant] = out[dominant], out[0]
            tables.append(out)
        else:  # non_degenerate
            cap = 1.0 - delta
            if cap < 1.0 / k - 1e-15:
                raise InvalidInputError(
                    f"delta {delta!r} infeasible at node {v}: cap below 1/{k}"
                )
            raw = rng.dirichlet(np.ones(k))
            tables.append(cap_distribution(raw, cap))
    return ReasoningPolicy(tables=tuple(tables), kind=kind)


def cap_distribution(probs: np.ndarray, cap: float) -> np.ndarray:
    """Cap the max entry and renormalize the remainder proportionally."""
    p = np.asarray(probs, dtype=np.float64)
    top = int(np.argmax(p))
    if p[top] <= cap:
        return p / p.sum()
    rest = 1.0 - p[top]
    out = p * ((1.0 - cap) / rest) if rest > 0 else np.full(p.size, (1.0 - cap) / (p.size - 1))
    out[top] = cap
    return out / out.sum()


def custom_policy(dag: DecisionDag, tables: dict[int, np.ndarray]) -> ReasoningPolicy:
    """Policy from explicit per-node distributions (validated against the DAG).

    Single-successor nodes may be omitted; the forced move is filled in.
    """
    rows: list[np.ndarray | None] = []
    for v in range(dag.n_nodes):
        k = len(dag.successors[v])
        if k == 0:
            rows.append(None)
            continue
        if v not in tables:
            if k == 1:
                rows.append(np.ones(1))
                continue
            raise InvalidInputError(f"missing distribution for decision node {v}")
        row = np.asarray(tables[v], dtype=np.float64)
        if row.size != k:
            raise InvalidInputError(
                f"node {v}: distribution length {row.size} != successor count {k}"
            )
        if np.any(row < 0) or abs(float(row.sum()) - 1.0) > cat.SUM_TOL:
            raise InvalidInputError(f"node {v}: not a probability vector")
        rows.append(row)
    return ReasoningPolicy(tables=tuple(rows), kind="custom")


# ---------------------------------------------------------------------------
# Metrics and search
# ---------------------------------------------------------------------------


def exploration_divergence(
    dag: DecisionDag, policy: ReasoningPolicy, *, visit_weighted: bool = False
) -> float:
    """Mean divergence of the uniform prior from the policy across decision nodes.

    Per node this is D(uniform || policy); a policy that zeroes out a valid
    successor raises InfiniteDivergenceError naming the node.  With
    ``visit_weighted=True`` nodes are weighted by their visit probability
    under the policy instead of uniformly.
    """
    nodes = dag.decision_nodes()
    if not nodes:
        raise InvalidInputError("graph has no decision nodes")
    divergences = {}
    for v in nodes:
        row = policy.distribution(v)
        if row.size == 1:  # forced moves carry no exploration signal
            divergences[v] = 0.0
            continue
        try:
            divergences[v] = cat.kl_divergence(uniform_prior(dag, v), row)
        except InfiniteDivergenceError as exc:
            raise InfiniteDivergenceError(f"node {v}: {exc}") from exc
    if not visit_weighted:
        return float(np.mean([divergences[v] for v in nodes]))
    visit = _visit_probabilities(dag, policy)
    total = sum(visit[v] for v in nodes)
    if total <= 0:
        raise InvalidInputError("no decision node is reachable under this policy")
    return float(sum(visit[v] * divergences[v] for v in nodes) / total)


def _visit_probabilities(dag: DecisionDag, policy: ReasoningPolicy) -> np.ndarray:
    visit = np.zeros(dag.n_nodes)
    visit[dag.start] = 1.0
    for v in dag.topological_order:
        if visit[v] == 0.0 or not dag.successors[v]:
            continue
        row = policy.distribution(v)
        for i, u in enumerate(dag.successors[v]):
            visit[u] += visit[v] * row[i]
    return visit


class TraversalStats(NamedTuple):
    trials: int
    successes: int
    mean_path_length: float
    success_rate: float


def run_search(
    dag: DecisionDag,
    policy: ReasoningPolicy,
    trials: int,
    max_steps: int,
    seed: int,
) -> TraversalStats:
    """Monte Carlo traversal: sample successors until a target, dead end, or step cap.

    Each trial owns the stream derived from (seed, "trial", index), so the
    statistics are invariant to execution order.
    """
    if trials < 1:
        raise InvalidInputError(f"need trials >= 1, got {trials}")
    if max_steps < 1:
        raise InvalidInputError(f"need max_steps >= 1, got {max_steps}")
    # Inverse-CDF sampling against precomputed per-node cumulative tables.
    cumulative = {
        v: np.cumsum(policy.distribution(v)) for v in dag.decision_nodes()
    }
    successes = 0
    total_steps = 0
    for trial in range(trials):
        rng = rng_for(seed, "trial", trial)
        node = dag.start
        steps = 0
        while steps < max_steps:
            if node in dag.targets:
                break
            succ = dag.successors[node]
            if not succ:
                break
            cdf = cumulative[node]
            pick = min(int(np.searchsorted(cdf, rng.random(), side="right")), len(succ) - 1)
            node = succ[pick]
            steps += 1
        if node in dag.targets:
            successes += 1
        total_steps += steps
    return TraversalStats(
        trials=trials,
        successes=successes,
        mean_path_length=total_steps / trials,
        success_rate=successes / trials,
    )


def enumerate_paths(dag: DecisionDag, policy: ReasoningPolicy) -> float:
    """Exact probability of reaching a target, by backward induction.

    Dynamic programming over the reverse topological order; linear in the
    number of edges, with a node-count cap to keep the oracle honest about
    its intended desk scale.
    """
    if dag.n_nodes > ENUMERATION_NODE_CAP:
        raise EnumerationTooLargeError(
            f"{dag.n_nodes} nodes exceeds the {ENUMERATION_NODE_CAP} cap"
        )
    reach = np.zeros(dag.n_nodes)
    for v in reversed(dag.topological_order):
        if v in dag.targets:
            reach[v] = 1.0
        elif dag.successors[v]:
            row = policy.distribution(v)
            reach[v] = float(
                sum(row[i] * reach[u] for i, u in enumerate(dag.successors[v]))
            )
    return float(reach[dag.start])

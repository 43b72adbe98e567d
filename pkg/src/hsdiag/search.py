"""Diagnosis searches over the hitting-set tree.

``rbf_hs`` enumerates the ld most probable minimal diagnoses in best-first
order inside linear memory: it explores the best child depth-first until
the best cost in the current subtree falls below the best known alternative
(``bound``), then backs the learned cost up and forgets the subtree.
``hs_tree`` is the classic breadth-style best-first baseline that keeps the
expanded tree and an open queue in memory. Both share one labeling routine,
one conflict store and one instrumentation scheme so their node counts and
runtimes are directly comparable.

Costs are node probabilities kept in log scale; the minus-infinity float is
a pure sentinel (discarded subtree / exhausted node) and is never produced
by cost arithmetic. Child costs derive incrementally from the parent, so
nodes with equal probability compare exactly equal and the deterministic
tie-break (smaller cardinality, then smaller id sequence) decides.
"""

from __future__ import annotations

import math
import time
from bisect import insort
from dataclasses import dataclass

from .conflict import EmptyConflict, MinimalConflict, NoConflict, find_min_conflict
from .dpi import Diagnosis, Dpi, FaultProbabilities, ValidityChecker

NEG_INF = float("-inf")

RBFHS = "rbfhs"
HSTREE = "hstree"

_CLOSED = "closed"
_VALID = "valid"


@dataclass
class SearchStats:
    peak_live_nodes: int = 0
    nodes_generated: int = 0
    label_calls: int = 0
    conflict_computations: int = 0
    conflict_reuses: int = 0
    wall_time: float = 0.0


@dataclass(frozen=True)
class TraceEvent:
    kind: str  # LABEL | EXPAND | BACKTRACK | INHERIT | DIAG
    ids: tuple[str, ...]
    detail: str = ""

    def line(self) -> str:
        return f"{self.kind} [{','.join(self.ids)}] {self.detail}".rstrip()


@dataclass
class SearchResult:
    algorithm: str
    diagnoses: list[Diagnosis]
    stats: SearchStats
    conflicts: tuple[tuple[str, ...], ...]

    def diagnosis_sets(self) -> list[frozenset[str]]:
        return [d.id_set for d in self.diagnoses]


@dataclass
class _Node:
    ids: frozenset[str]
    key: tuple[int, ...]  # K-order index tuple; the sort tie-break
    f: float  # static log cost, immutable
    F: float  # backed-up log cost, only ever decreases
    dummy: bool = False


def _order_key(node: _Node) -> tuple[float, int, tuple[int, ...]]:
    return (-node.F, len(node.key), node.key)


class _SearchCore:
    """State shared by one search run: solution list D, conflict store C,
    cost model, counters and optional tracing."""

    def __init__(
        self,
        dpi: Dpi,
        pr: FaultProbabilities,
        ld: int | None,
        trace: list[TraceEvent] | None,
        debug: bool,
    ):
        if not pr.cost_adjusted:
            raise ValueError("search requires cost-adjusted probabilities (all below 0.5)")
        if ld is not None and ld < 1:
            raise ValueError(f"ld must be at least 1: {ld}")
        self.dpi = dpi
        self.pr = pr
        self.ld = ld
        self.trace = trace
        self.debug = debug
        self.checker = ValidityChecker(dpi)
        self.stats = SearchStats()
        self.diagnoses: list[Diagnosis] = []
        self.conflict_list: list[tuple[str, ...]] = []
        self.conflict_sets: list[frozenset[str]] = []
        self.aborted = False
        self._live = 0
        # RBF-HS never holds two set-equal nodes at once; HS-Tree may create
        # a duplicate child briefly before its queue check discards it.
        self.unique_live = True
        self._live_keys: set[tuple[int, ...]] = set()
        # Per-axiom log terms; child costs extend the parent sum by one delta,
        # which keeps equal-probability nodes bitwise equal.
        self._delta = {a: math.log(pr[a]) - math.log(1.0 - pr[a]) for a in dpi.k_ids}
        self.f_empty = 0.0
        for a in dpi.k_ids:
            self.f_empty += math.log(1.0 - pr[a])

    # -- instrumentation ---------------------------------------------------

    def make_node(self, parent: _Node, axiom: str) -> _Node:
        idx = self.dpi.index_of(axiom)
        pos = 0
        while pos < len(parent.key) and parent.key[pos] < idx:
            pos += 1
        key = parent.key[:pos] + (idx,) + parent.key[pos:]
        node = _Node(parent.ids | {axiom}, key, parent.f + self._delta[axiom], NEG_INF)
        node.F = node.f
        self._created(node)
        return node

    def make_root(self) -> _Node:
        node = _Node(frozenset(), (), self.f_empty, self.f_empty)
        self._created(node)
        return node

    def make_dummy(self) -> _Node:
        node = _Node(frozenset(), (), NEG_INF, NEG_INF, dummy=True)
        self._created(node)
        return node

    def _created(self, node: _Node) -> None:
        self.stats.nodes_generated += 1
        self._live += 1
        self.stats.peak_live_nodes = max(self.stats.peak_live_nodes, self._live)
        if self.debug and self.unique_live and not node.dummy:
            assert node.key not in self._live_keys, f"duplicate live node {node.ids}"
            self._live_keys.add(node.key)

    def discard(self, node: _Node) -> None:
        self._live -= 1
        if self.debug and self.unique_live and not node.dummy:
            self._live_keys.discard(node.key)

    def assert_drained(self) -> None:
        if self.debug:
            assert self._live == 0, f"{self._live} nodes leaked"

    def linear(self, log_cost: float) -> float:
        return 0.0 if log_cost == NEG_INF else math.exp(log_cost)

    def emit(self, kind: str, ids: tuple[str, ...], detail: str = "") -> None:
        if self.trace is not None:
            self.trace.append(TraceEvent(kind, ids, detail))

    def node_ids(self, node: _Node) -> tuple[str, ...]:
        return tuple(self.dpi.k_ids[i] for i in node.key)

    # -- shared Reiter-style labeling ---------------------------------------

    def add_conflict(self, ids: tuple[str, ...]) -> None:
        self.conflict_list.append(ids)
        self.conflict_sets.append(frozenset(ids))

    def label(self, node: _Node):
        """Classify a node: closed, valid, or a minimal conflict to expand.

        Cheapest test first: non-minimality against the found diagnoses,
        then reuse of a stored conflict, and only then a fresh conflict
        computation on the instance without the node's axioms.
        """
        self.stats.label_calls += 1
        ids = self.node_ids(node)
        cost = f"f={self.linear(node.f):.9g}"
        for d in self.diagnoses:
            if d.id_set <= node.ids:
                self.emit("LABEL", ids, f"closed superset-of={{{','.join(d.ids)}}} {cost}")
                return _CLOSED
        for stored_set, stored in zip(self.conflict_sets, self.conflict_list):
            if not stored_set & node.ids:
                self.stats.conflict_reuses += 1
                self.emit("LABEL", ids, f"conflict-reuse {{{','.join(stored)}}} {cost}")
                return stored
        outcome = find_min_conflict(self.dpi, exclude=node.ids, checker=self.checker)
        self.stats.conflict_computations += 1
        if isinstance(outcome, NoConflict):
            self.emit("LABEL", ids, f"valid {cost}")
            return _VALID
        if isinstance(outcome, MinimalConflict):
            self.add_conflict(outcome.ids)
            self.emit("LABEL", ids, f"conflict-new {{{','.join(outcome.ids)}}} {cost}")
            return outcome.ids
        raise RuntimeError("empty conflict inside the search tree")  # handled up front

    def expand(self, node: _Node, conflict: tuple[str, ...]) -> list[_Node]:
        """One child per conflict element, in the conflict's stored order."""
        children = [self.make_node(node, e) for e in conflict]
        costs = ",".join(f"{self.linear(c.f):.9g}" for c in children)
        self.emit("EXPAND", self.node_ids(node), f"conflict={{{','.join(conflict)}}} f=[{costs}]")
        return children

    def record_diagnosis(self, node: _Node) -> None:
        ids = self.node_ids(node)
        diag = Diagnosis(ids, self.linear(node.f))
        self.diagnoses.append(diag)
        self.emit("DIAG", ids, f"pr={self.linear(node.f):.9g}")
        if self.ld is not None and len(self.diagnoses) >= self.ld:
            self.aborted = True  # exit procedure: unwind without further work

    def result(self, algorithm: str) -> SearchResult:
        return SearchResult(algorithm, self.diagnoses, self.stats, tuple(self.conflict_list))


def _start(core: _SearchCore):
    """Trivial cases shared by both algorithms; returns the seeded first
    conflict or None when the search is already decided."""
    outcome = find_min_conflict(core.dpi, checker=core.checker)
    core.stats.conflict_computations += 1
    if isinstance(outcome, EmptyConflict):
        return None
    if isinstance(outcome, NoConflict):
        core.diagnoses.append(Diagnosis((), core.linear(core.f_empty)))
        return None
    core.add_conflict(outcome.ids)
    return outcome.ids


def rbf_hs(
    dpi: Dpi,
    pr: FaultProbabilities,
    ld: int | None,
    *,
    trace: list[TraceEvent] | None = None,
    debug: bool = False,
) -> SearchResult:
    """Recursive best-first hitting-set search.

    Returns up to ld minimal diagnoses in non-increasing probability order.
    Peak live nodes stay within (max conflict size + 1) * (|K| + 1): one
    child list per recursion level, plus the root.
    """
    core = _SearchCore(dpi, pr, ld, trace, debug)
    started = time.perf_counter()
    if _start(core) is not None:
        root = core.make_root()
        _rbf_rec(core, root, root.F, NEG_INF, 0)
        core.discard(root)
    core.stats.wall_time = time.perf_counter() - started
    core.assert_drained()
    return core.result(RBFHS)


def _rbf_rec(core: _SearchCore, node: _Node, f_backed: float, bound: float, depth: int) -> float:
    label = core.label(node)
    if label is _CLOSED:
        return NEG_INF
    if label is _VALID:
        core.record_diagnosis(node)
        return NEG_INF
    children = core.expand(node, label)
    if node.f > f_backed:  # node was expanded before; pass learned costs down
        for child in children:
            if child.f > f_backed:
                child.F = f_backed
                core.emit("INHERIT", core.node_ids(child), f"F={core.linear(child.F):.9g}")
    if len(children) == 1:
        children.append(core.make_dummy())
    children.sort(key=_order_key)
    best = children.pop(0)
    runner_up = children[0]
    while best.F >= bound and best.F > NEG_INF:
        new_f = _rbf_rec(core, best, best.F, max(bound, runner_up.F), depth + 1)
        if core.aborted:
            core.discard(best)
            for child in children:
                core.discard(child)
            return NEG_INF
        best.F = new_f
        insort(children, best, key=_order_key)
        best = children.pop(0)
        runner_up = children[0]
    subtree_best = best.F
    core.discard(best)
    for child in children:
        core.discard(child)
    if depth > 0:
        core.emit(
            "BACKTRACK",
            core.node_ids(node),
            f"F={core.linear(subtree_best):.9g} bound={core.linear(bound):.9g}",
        )
    return subtree_best


def hs_tree(
    dpi: Dpi,
    pr: FaultProbabilities,
    ld: int | None,
    *,
    trace: list[TraceEvent] | None = None,
    debug: bool = False,
) -> SearchResult:
    """Reiter-style best-first hitting-set tree.

    Open nodes sit in a priority queue ordered like the RBF-HS sort; labeling
    and the conflict store are shared with rbf_hs, the only additions being
    the duplicate check against queued nodes and full tree retention
    (expanded inner nodes stay in memory until the search ends, which is what
    the peak-node metric measures).
    """
    core = _SearchCore(dpi, pr, ld, trace, debug)
    core.unique_live = False
    started = time.perf_counter()
    if _start(core) is not None:
        queue: list[_Node] = [core.make_root()]
        queued_ids = {queue[0].ids}
        retained: list[_Node] = []
        while queue:
            node = queue.pop(0)
            queued_ids.discard(node.ids)
            label = core.label(node)
            if label is _CLOSED:
                core.discard(node)
                continue
            if label is _VALID:
                core.record_diagnosis(node)
                core.discard(node)
                if core.aborted:
                    break
                continue
            children = core.expand(node, label)
            retained.append(node)
            for child in children:
                if child.ids in queued_ids:
                    core.discard(child)  # duplicate of a queued node
                    continue
                insort(queue, child, key=_order_key)
                queued_ids.add(child.ids)
        for node in queue:
            core.discard(node)
        for node in retained:
            core.discard(node)
    core.stats.wall_time = time.perf_counter() - started
    core.assert_drained()
    return core.result(HSTREE)

"""Sequential diagnosis: alternate diagnosis search and measurement until a
single candidate remains.

Queries are restricted to single axioms of K. A positive answer means the
axiom's sentence holds (it moves to the positive measurements), a negative
answer that it must not hold (negative measurements). On the abstract
backend the same update is expressed directly on the conflict family: a
correct axiom is deleted from every member, a faulty one becomes a
singleton conflict; both transforms are antichain-reduced.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Sequence

from .dpi import (
    ABSTRACT,
    Diagnosis,
    Dpi,
    FaultProbabilities,
    antichain_reduce,
    is_minimal_diagnosis,
    normalized,
    pr_of,
)
from .logic import Formula, entails, is_consistent
from .search import HSTREE, RBFHS, SearchResult, SearchStats, hs_tree, rbf_hs


@dataclass(frozen=True)
class Query:
    axiom_id: str
    sentence: Formula | None  # None on the abstract backend


@dataclass(frozen=True)
class QueryPartition:
    dplus: tuple[Diagnosis, ...]
    dminus: tuple[Diagnosis, ...]
    dzero: tuple[Diagnosis, ...]


@dataclass(frozen=True)
class SessionIteration:
    diagnoses: tuple[Diagnosis, ...]
    query: Query | None
    answer: bool | None
    stats: SearchStats


@dataclass(frozen=True)
class SessionTrace:
    iterations: tuple[SessionIteration, ...]
    final: Diagnosis

    @property
    def query_count(self) -> int:
        return sum(1 for it in self.iterations if it.query is not None)


class NonDiscriminableError(RuntimeError):
    """No admissible single-axiom query splits the remaining diagnoses.

    Cannot occur for lists of minimal diagnoses (re-adding a contained
    axiom always refutes, a missing axiom is always entailed by
    membership), but interactive answers can drive a session into it.
    Carries the iterations completed so far.
    """

    def __init__(self, message: str, iterations: tuple[SessionIteration, ...]):
        super().__init__(message)
        self.iterations = iterations


def make_query(dpi: Dpi, axiom_id: str) -> Query:
    dpi.index_of(axiom_id)  # validates the id
    sentence = dpi.formula_of(axiom_id) if dpi.kind != ABSTRACT else None
    return Query(axiom_id, sentence)


def _rest(dpi: Dpi, diag: Diagnosis) -> list[str]:
    return [a for a in dpi.k_ids if a not in diag.id_set]


def _entails_query(dpi: Dpi, rest: Sequence[str], query: Query) -> bool:
    if dpi.kind == ABSTRACT:
        return query.axiom_id in rest or query.axiom_id in dpi.positive_ids
    base = dpi.sentences(rest) + list(dpi.background) + list(dpi.positive)
    return entails(base, query.sentence)


def _valid_with_query(dpi: Dpi, rest: Sequence[str], query: Query) -> bool:
    if dpi.kind == ABSTRACT:
        assumed = frozenset(rest) | {query.axiom_id}
        return not any(member <= assumed for member in dpi.family_sets())
    base = dpi.sentences(rest) + list(dpi.background) + list(dpi.positive) + [query.sentence]
    if not is_consistent(base):
        return False
    return not any(entails(base, n) for n in dpi.negative)


def partition(dpi: Dpi, diagnoses: Sequence[Diagnosis], query: Query) -> QueryPartition:
    """Split diagnoses by the predicted measurement outcome.

    A diagnosis whose remaining system entails the queried sentence is
    confirmed by a positive answer (dplus); one that becomes invalid when
    the sentence is added is refuted by it (dminus); the rest are unaffected
    (dzero).
    """
    if not diagnoses:
        raise ValueError("partition needs at least one diagnosis")
    dplus, dminus, dzero = [], [], []
    for diag in diagnoses:
        rest = _rest(dpi, diag)
        if _entails_query(dpi, rest, query):
            dplus.append(diag)
        elif not _valid_with_query(dpi, rest, query):
            dminus.append(diag)
        else:
            dzero.append(diag)
    return QueryPartition(tuple(dplus), tuple(dminus), tuple(dzero))


def ent_select(dpi: Dpi, diagnoses: Sequence[Diagnosis], pr: FaultProbabilities) -> Query:
    """Entropy-style measurement selection.

    Scores each candidate axiom by how close the probability mass of the
    predicted-positive diagnoses (plus half the unaffected mass) comes to
    one half, i.e. by expected information gain. Ties fall to the smaller
    unaffected cell, then the lowest axiom id; scores are quantized so that
    mathematically equal splits tie exactly despite float noise. Only
    admissible queries (both dplus and dminus nonempty) qualify.
    """
    if len(diagnoses) < 2:
        raise ValueError("measurement selection needs at least two diagnoses")
    weights = normalized([pr_of(pr, dpi.k_ids, d.ids) for d in diagnoses])
    weight_of = {d: w for d, w in zip(diagnoses, weights)}
    common = set.intersection(*(set(d.ids) for d in diagnoses))
    anywhere = set.union(*(set(d.ids) for d in diagnoses))
    best: tuple[float, int, int] | None = None
    best_query: Query | None = None
    for idx, axiom in enumerate(dpi.k_ids):
        if axiom not in anywhere or axiom in common:
            continue
        query = make_query(dpi, axiom)
        cells = partition(dpi, diagnoses, query)
        if not cells.dplus or not cells.dminus:
            continue
        mass = sum(weight_of[d] for d in cells.dplus) + 0.5 * sum(
            weight_of[d] for d in cells.dzero
        )
        score = (round(abs(mass - 0.5), 9), len(cells.dzero), idx)
        if best is None or score < best:
            best = score
            best_query = query
    if best_query is None:
        raise ValueError("no admissible single-axiom query discriminates the diagnoses")
    return best_query


def oracle_answer(query: Query, actual: frozenset[str] | Diagnosis) -> bool:
    """Simulated oracle: positive iff the queried axiom is not actually faulty."""
    faulty = actual.id_set if isinstance(actual, Diagnosis) else frozenset(actual)
    return query.axiom_id not in faulty


def update_dpi(dpi: Dpi, query: Query, answer: bool) -> Dpi:
    """Fold a measurement outcome into a fresh DPI."""
    if dpi.kind != ABSTRACT:
        return dpi.with_measurement(query.sentence, answer)
    axiom = query.axiom_id
    if answer:
        family = antichain_reduce(
            tuple(e for e in member if e != axiom) for member in dpi.conflict_family
        )
        return replace(
            dpi, conflict_family=family, positive_ids=dpi.positive_ids | {axiom}
        )
    family = antichain_reduce(list(dpi.conflict_family) + [(axiom,)])
    return replace(dpi, conflict_family=family, negative_ids=dpi.negative_ids | {axiom})


_ALGOS = {RBFHS: rbf_hs, HSTREE: hs_tree}


def run_session(
    dpi: Dpi,
    pr: FaultProbabilities,
    ld: int,
    actual: frozenset[str] | Sequence[str] | Diagnosis,
    algo: str = RBFHS,
    *,
    answer_fn: Callable[[Query], bool] | None = None,
    check_actual: bool = True,
) -> SessionTrace:
    """Iterate search and measurement until one diagnosis remains.

    The measurement oracle answers from the designated actual diagnosis
    unless answer_fn overrides it (interactive mode). Search statistics of
    every iteration accumulate into the returned trace.
    """
    if ld < 2:
        raise ValueError("sessions need ld of at least 2 to detect isolation")
    if algo not in _ALGOS:
        raise ValueError(f"unknown algorithm: {algo!r}")
    search = _ALGOS[algo]
    actual_ids = actual.id_set if isinstance(actual, Diagnosis) else frozenset(actual)
    if check_actual and not is_minimal_diagnosis(dpi, actual_ids):
        raise ValueError(f"designated actual {sorted(actual_ids)} is not a minimal diagnosis")
    iterations: list[SessionIteration] = []
    current = dpi
    while True:
        result: SearchResult = search(current, pr, ld)
        found = tuple(result.diagnoses)
        if not found:
            raise RuntimeError("every diagnosis candidate was eliminated")
        if len(found) == 1:
            iterations.append(SessionIteration(found, None, None, result.stats))
            return SessionTrace(tuple(iterations), found[0])
        try:
            query = ent_select(current, found, pr)
        except ValueError as exc:
            iterations.append(SessionIteration(found, None, None, result.stats))
            raise NonDiscriminableError(str(exc), tuple(iterations)) from exc
        answer = answer_fn(query) if answer_fn else oracle_answer(query, actual_ids)
        iterations.append(SessionIteration(found, query, answer, result.stats))
        current = update_dpi(current, query, answer)

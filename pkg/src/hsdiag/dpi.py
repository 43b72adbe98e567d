"""Diagnosis problem instances.

A DPI bundles the suspect axioms K with background knowledge B, positive
measurements P and negative measurements N. Two backends exist:

* ``reasoner``: K entries are propositional formulas; validity of an
  assumption set is decided by the SAT procedure in :mod:`hsdiag.logic`.
* ``abstract``: K entries are bare component ids and the minimal conflict
  family is attached directly. This reproduces walkthrough instances whose
  axiom content is never stated, and makes property tests independent of
  the reasoner.

The module also holds the fault-probability model and the brute-force
oracles that the test suite uses as ground truth.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Sequence

from .logic import Formula, entails, is_consistent

REASONER = "reasoner"
ABSTRACT = "abstract"

BRUTE_FORCE_LIMIT = 20


@dataclass(frozen=True)
class FaultProbabilities:
    """Per-axiom failure probabilities in the open interval (0, 1)."""

    values: Mapping[str, float]
    cost_adjusted: bool = False

    def __post_init__(self):
        for axiom, p in self.values.items():
            if not 0.0 < p < 1.0:
                raise ValueError(f"probability of {axiom!r} out of (0,1): {p}")
            if self.cost_adjusted and p >= 0.5:
                raise ValueError(f"cost-adjusted probability of {axiom!r} not below 0.5: {p}")

    def __getitem__(self, axiom: str) -> float:
        try:
            return self.values[axiom]
        except KeyError:
            raise ValueError(f"missing probability entry for {axiom!r}") from None

    def as_cost_adjusted(self) -> "FaultProbabilities":
        """Flag values that already sit below 0.5 as cost-adjusted."""
        return FaultProbabilities(dict(self.values), cost_adjusted=True)


def cost_adjust(pr: FaultProbabilities, c: float) -> FaultProbabilities:
    """Scale every probability by c in (0, 0.5) so all values drop below 0.5.

    Ratios between any two axioms are preserved, so the per-component fault
    ordering is unchanged.
    """
    if not 0.0 < c < 0.5:
        raise ValueError(f"adjustment constant must be in (0, 0.5): {c}")
    return FaultProbabilities({a: c * p for a, p in pr.values.items()}, cost_adjusted=True)


def cardinality_pr(k_ids: Iterable[str], c: float = 1 / 3) -> FaultProbabilities:
    """Uniform probabilities that make best-first order equal ascending
    cardinality order."""
    if not 0.0 < c < 0.5:
        raise ValueError(f"uniform constant must be in (0, 0.5): {c}")
    return FaultProbabilities({a: c for a in k_ids}, cost_adjusted=True)


def pr_of(pr: FaultProbabilities, k_ids: Iterable[str], x: Iterable[str]) -> float:
    """Probability that exactly the axioms in x are faulty.

    Computed in K order for determinism; search code keeps these values in
    log scale, this function reports the linear value.
    """
    members = set(x)
    k = list(k_ids)
    unknown = members.difference(k)
    if unknown:
        raise ValueError(f"unknown axiom ids: {sorted(unknown)}")
    p = 1.0
    for axiom in k:
        p *= pr[axiom] if axiom in members else 1.0 - pr[axiom]
    return p


def normalized(values: Sequence[float]) -> list[float]:
    """Normalize probabilities over a given diagnosis list (on demand)."""
    total = sum(values)
    if total <= 0.0:
        raise ValueError("cannot normalize: total probability is zero")
    return [v / total for v in values]


@dataclass(frozen=True)
class Diagnosis:
    """A set of axiom ids whose removal restores validity."""

    ids: tuple[str, ...]
    pr: float | None = None

    @property
    def id_set(self) -> frozenset[str]:
        return frozenset(self.ids)

    def __str__(self) -> str:
        return "{" + ",".join(self.ids) + "}"


def antichain_reduce(members: Iterable[Iterable[str]]) -> tuple[tuple[str, ...], ...]:
    """Drop duplicates and proper supersets, preserving first-seen order."""
    as_sets: list[frozenset[str]] = []
    ordered: list[tuple[str, ...]] = []
    for m in members:
        t = tuple(m)
        s = frozenset(t)
        if any(s >= other for other in as_sets):
            continue
        keep_sets, keep_ordered = [], []
        for other_s, other_t in zip(as_sets, ordered):
            if not other_s > s:
                keep_sets.append(other_s)
                keep_ordered.append(other_t)
        as_sets = keep_sets + [s]
        ordered = keep_ordered + [t]
    return tuple(ordered)


@dataclass(frozen=True)
class Dpi:
    """A diagnosis problem instance ⟨K, B, P, N⟩ plus optional probabilities."""

    kind: str
    k_ids: tuple[str, ...]
    formulas: tuple[Formula, ...] | None = None
    background: frozenset[Formula] = frozenset()
    positive: frozenset[Formula] = frozenset()
    negative: frozenset[Formula] = frozenset()
    conflict_family: tuple[tuple[str, ...], ...] | None = None
    positive_ids: frozenset[str] = frozenset()
    negative_ids: frozenset[str] = frozenset()
    pr: FaultProbabilities | None = None

    def __post_init__(self):
        if self.kind not in (REASONER, ABSTRACT):
            raise ValueError(f"unknown backend kind: {self.kind!r}")
        if len(set(self.k_ids)) != len(self.k_ids):
            dupes = sorted({a for a in self.k_ids if self.k_ids.count(a) > 1})
            raise ValueError(f"duplicate axiom ids: {dupes}")
        if self.kind == REASONER:
            if self.formulas is None or len(self.formulas) != len(self.k_ids):
                raise ValueError("reasoner DPI needs one formula per axiom id")
        else:
            if self.conflict_family is None:
                raise ValueError("abstract DPI needs a conflict family")
            known = set(self.k_ids)
            for member in self.conflict_family:
                bad = set(member) - known
                if bad:
                    raise ValueError(f"conflict mentions unknown ids: {sorted(bad)}")
            sets = [frozenset(m) for m in self.conflict_family]
            for i, a in enumerate(sets):
                for j, b in enumerate(sets):
                    if i != j and a <= b:
                        raise ValueError("conflict family is not an antichain")
        object.__setattr__(self, "_index", {a: i for i, a in enumerate(self.k_ids)})
        if self.conflict_family is not None:
            object.__setattr__(
                self, "_family_sets", tuple(frozenset(m) for m in self.conflict_family)
            )

    @classmethod
    def propositional(
        cls,
        k: Sequence[tuple[str, Formula]],
        background: Iterable[Formula] = (),
        positive: Iterable[Formula] = (),
        negative: Iterable[Formula] = (),
        pr: FaultProbabilities | None = None,
    ) -> "Dpi":
        ids = tuple(a for a, _ in k)
        return cls(
            kind=REASONER,
            k_ids=ids,
            formulas=tuple(f for _, f in k),
            background=frozenset(background),
            positive=frozenset(positive),
            negative=frozenset(negative),
            pr=pr,
        )

    @classmethod
    def abstract(
        cls,
        components: int | Sequence[str],
        conflicts: Iterable[Iterable[str]],
        pr: FaultProbabilities | None = None,
    ) -> "Dpi":
        if isinstance(components, int):
            ids = tuple(str(i + 1) for i in range(components))
        else:
            ids = tuple(components)
        return cls(
            kind=ABSTRACT,
            k_ids=ids,
            conflict_family=tuple(tuple(m) for m in conflicts),
            pr=pr,
        )

    # -- convenience accessors -------------------------------------------

    def index_of(self, axiom: str) -> int:
        try:
            return self._index[axiom]  # type: ignore[attr-defined]
        except KeyError:
            raise ValueError(f"unknown axiom id: {axiom!r}") from None

    def sort_ids(self, ids: Iterable[str]) -> tuple[str, ...]:
        return tuple(sorted(ids, key=self.index_of))

    def formula_of(self, axiom: str) -> Formula:
        if self.kind != REASONER:
            raise ValueError("abstract DPI axioms carry no formulas")
        return self.formulas[self.index_of(axiom)]

    def sentences(self, ids: Iterable[str]) -> list[Formula]:
        return [self.formula_of(a) for a in ids]

    def family_sets(self) -> tuple[frozenset[str], ...]:
        if self.kind != ABSTRACT:
            raise ValueError("only abstract DPIs carry a conflict family")
        return self._family_sets  # type: ignore[attr-defined]

    def with_measurement(self, sentence: Formula, positive: bool) -> "Dpi":
        if self.kind != REASONER:
            raise ValueError("formula measurements need the reasoner backend")
        if positive:
            return replace(self, positive=self.positive | {sentence})
        return replace(self, negative=self.negative | {sentence})


def _check_subset(dpi: Dpi, ids: Iterable[str]) -> frozenset[str]:
    s = frozenset(ids)
    unknown = [a for a in s if a not in dpi._index]  # type: ignore[attr-defined]
    if unknown:
        raise ValueError(f"unknown axiom ids: {sorted(unknown)}")
    return s


def is_valid_set(dpi: Dpi, ids: Iterable[str]) -> bool:
    """True iff assuming exactly the axioms in ids raises no conflict.

    Reasoner backend: the sentences plus B and P are consistent and entail
    no negative measurement. Abstract backend: no attached conflict member
    is contained in the set.
    """
    s = _check_subset(dpi, ids)
    if dpi.kind == ABSTRACT:
        return not any(member <= s for member in dpi.family_sets())
    base = dpi.sentences(s) + list(dpi.background) + list(dpi.positive)
    if not is_consistent(base):
        return False
    return not any(entails(base, n) for n in dpi.negative)


def is_diagnosis(dpi: Dpi, ids: Iterable[str]) -> bool:
    """Duality: D is a diagnosis iff K minus D is a valid assumption set."""
    s = _check_subset(dpi, ids)
    return is_valid_set(dpi, [a for a in dpi.k_ids if a not in s])


def is_minimal_diagnosis(dpi: Dpi, ids: Iterable[str]) -> bool:
    """Diagnosis-hood plus failure of every one-element deletion.

    Single deletions suffice under the weak fault model because
    diagnosis-hood is monotone over supersets.
    """
    s = _check_subset(dpi, ids)
    if not is_diagnosis(dpi, s):
        return False
    return all(not is_diagnosis(dpi, s - {a}) for a in s)


class ValidityChecker:
    """Counting, memoizing front-end for is_valid_set.

    One instance per search/extraction run; the call counter backs the
    QuickXplain complexity assertions and the cache removes repeated
    reasoner work on identical assumption sets.
    """

    def __init__(self, dpi: Dpi):
        self.dpi = dpi
        self.calls = 0
        self._cache: dict[frozenset[str], bool] = {}

    def is_valid(self, ids: frozenset[str]) -> bool:
        self.calls += 1
        cached = self._cache.get(ids)
        if cached is None:
            cached = is_valid_set(self.dpi, ids)
            self._cache[ids] = cached
        return cached


# ---------------------------------------------------------------------------
# Brute-force oracles (test ground truth; exponential, size-guarded)


def _guard(dpi: Dpi) -> None:
    if len(dpi.k_ids) > BRUTE_FORCE_LIMIT:
        raise ValueError(f"brute force limited to |K| <= {BRUTE_FORCE_LIMIT}")


def _diagnosis_mask_test(dpi: Dpi):
    n = len(dpi.k_ids)
    if dpi.kind == ABSTRACT:
        member_masks = [
            sum(1 << dpi.index_of(a) for a in member) for member in dpi.conflict_family
        ]

        def test(mask: int) -> bool:
            return all(m & mask for m in member_masks)

        return test

    def test(mask: int) -> bool:
        rest = [dpi.k_ids[i] for i in range(n) if not mask >> i & 1]
        return is_valid_set(dpi, rest)

    return test


def brute_force_min_diagnoses(dpi: Dpi) -> list[Diagnosis]:
    """All subset-minimal diagnoses by ascending-cardinality enumeration,
    sorted by attached probability descending (cardinality then id order
    when no probabilities are attached)."""
    _guard(dpi)
    n = len(dpi.k_ids)
    is_diag = _diagnosis_mask_test(dpi)
    found_masks: list[int] = []
    found: list[tuple[str, ...]] = []
    for size in range(n + 1):
        for combo in itertools.combinations(range(n), size):
            mask = sum(1 << i for i in combo)
            if any(prev & mask == prev for prev in found_masks):
                continue
            if is_diag(mask):
                found_masks.append(mask)
                found.append(tuple(dpi.k_ids[i] for i in combo))
    if dpi.pr is None:
        ordered = sorted(found, key=lambda t: (len(t), tuple(dpi.index_of(a) for a in t)))
        return [Diagnosis(t) for t in ordered]
    scored = [(pr_of(dpi.pr, dpi.k_ids, t), t) for t in found]
    scored.sort(key=lambda st: (-st[0], len(st[1]), tuple(dpi.index_of(a) for a in st[1])))
    return [Diagnosis(t, p) for p, t in scored]


def brute_force_min_conflicts(dpi: Dpi) -> list[tuple[str, ...]]:
    """All subset-minimal conflicts, sorted by size then id order."""
    _guard(dpi)
    n = len(dpi.k_ids)
    if dpi.kind == ABSTRACT:
        member_masks = [
            sum(1 << dpi.index_of(a) for a in member) for member in dpi.conflict_family
        ]

        def invalid(mask: int) -> bool:
            return any(m & mask == m for m in member_masks)

    else:

        def invalid(mask: int) -> bool:
            subset = [dpi.k_ids[i] for i in range(n) if mask >> i & 1]
            return not is_valid_set(dpi, subset)

    found_masks: list[int] = []
    found: list[tuple[str, ...]] = []
    for size in range(n + 1):
        for combo in itertools.combinations(range(n), size):
            mask = sum(1 << i for i in combo)
            if any(prev & mask == prev for prev in found_masks):
                continue
            if invalid(mask):
                found_masks.append(mask)
                found.append(tuple(dpi.k_ids[i] for i in combo))
    found.sort(key=lambda t: (len(t), tuple(dpi.index_of(a) for a in t)))
    return found


def brute_force_min_hitting_sets(
    family: Sequence[Iterable[str]], universe: Sequence[str]
) -> list[tuple[str, ...]]:
    """Exhaustive minimal hitting sets of a set family (oracle for the
    hitting-set property)."""
    members = [frozenset(m) for m in family]
    order = {a: i for i, a in enumerate(universe)}
    found: list[frozenset[str]] = []
    out: list[tuple[str, ...]] = []
    for size in range(len(universe) + 1):
        for combo in itertools.combinations(universe, size):
            s = frozenset(combo)
            if any(prev <= s for prev in found):
                continue
            if all(s & m for m in members):
                found.append(s)
                out.append(combo)
    out.sort(key=lambda t: (len(t), tuple(order[a] for a in t)))
    return out


def gen_random_dpi(components: int, conflicts: int, max_size: int, seed: int) -> Dpi:
    """Deterministic random abstract DPI; the sampled conflict family is
    reduced to an antichain before construction."""
    if components <= 0 or conflicts < 0 or max_size <= 0:
        raise ValueError("counts must be positive")
    if max_size > components:
        raise ValueError("max_size cannot exceed the component count")
    rng = random.Random(seed)
    ids = [str(i + 1) for i in range(components)]
    raw = []
    for _ in range(conflicts):
        size = rng.randint(1, max_size)
        member = sorted(rng.sample(ids, size), key=ids.index)
        raw.append(tuple(member))
    return Dpi.abstract(ids, antichain_reduce(raw))

"""Minimal-conflict extraction.

``find_min_conflict`` implements the contract the searches rely on: it
returns an empty-conflict marker when the background alone is already
invalid, a no-conflict marker when the full assumption set is valid, and a
subset-minimal conflict otherwise. The reasoner backend extracts the
conflict with QuickXplain over the validity predicate; the abstract backend
reads it off the attached family (the first stored member avoiding the
exclusion set), which keeps walkthrough reproductions exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .dpi import ABSTRACT, Dpi, ValidityChecker


@dataclass(frozen=True)
class EmptyConflict:
    """The empty set is a conflict: B and P alone are invalid, no diagnosis exists."""


@dataclass(frozen=True)
class NoConflict:
    """The assumption set is valid; the empty set is the only minimal diagnosis."""


@dataclass(frozen=True)
class MinimalConflict:
    ids: tuple[str, ...]

    @property
    def id_set(self) -> frozenset[str]:
        return frozenset(self.ids)


ConflictOutcome = EmptyConflict | NoConflict | MinimalConflict


def quickxplain(
    dpi: Dpi,
    background: Iterable[str],
    candidates: Sequence[str],
    *,
    checker: ValidityChecker | None = None,
) -> tuple[str, ...]:
    """Subset-minimal conflict within candidates, relative to background.

    Preconditions: background is valid, background plus candidates is not.
    Splits at ceil(len/2); elements keep their candidate order, so the
    result is deterministic for a fixed K ordering.
    """
    checker = checker or ValidityChecker(dpi)
    bg = frozenset(background)
    cands = list(candidates)
    if not checker.is_valid(bg):
        raise ValueError("quickxplain precondition: background must be valid")
    if checker.is_valid(bg | set(cands)):
        raise ValueError("quickxplain precondition: background plus candidates must be invalid")

    def qx(base: frozenset[str], added_last: bool, cs: list[str]) -> list[str]:
        if added_last and not checker.is_valid(base):
            return []
        if len(cs) == 1:
            return list(cs)
        half = (len(cs) + 1) // 2
        c1, c2 = cs[:half], cs[half:]
        d2 = qx(base | set(c1), bool(c1), c2)
        d1 = qx(base | set(d2), bool(d2), c1)
        return d1 + d2

    return tuple(qx(bg, False, cands))


def find_min_conflict(
    dpi: Dpi,
    exclude: Iterable[str] = (),
    *,
    checker: ValidityChecker | None = None,
) -> ConflictOutcome:
    """Minimal conflict for the DPI restricted to K minus the exclusion set.

    The exclusion set stands in for the sub-instance built during search,
    avoiding a DPI copy per tree node.
    """
    excluded = frozenset(exclude)
    if dpi.kind == ABSTRACT:
        family = dpi.family_sets()
        if frozenset() in family:
            return EmptyConflict()
        for member, ordered in zip(family, dpi.conflict_family):
            if not member & excluded:
                return MinimalConflict(ordered)
        return NoConflict()
    checker = checker or ValidityChecker(dpi)
    if not checker.is_valid(frozenset()):
        return EmptyConflict()
    candidates = [a for a in dpi.k_ids if a not in excluded]
    if checker.is_valid(frozenset(candidates)):
        return NoConflict()
    return MinimalConflict(quickxplain(dpi, (), candidates, checker=checker))

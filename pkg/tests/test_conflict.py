import math
import random

import pytest

from hsdiag import (
    Dpi,
    EmptyConflict,
    MinimalConflict,
    NoConflict,
    ValidityChecker,
    brute_force_min_conflicts,
    find_min_conflict,
    gen_random_dpi,
    is_valid_set,
    parse_formula,
    quickxplain,
)
from conftest import random_propositional_dpi


def minimality_holds(dpi, conflict):
    return not is_valid_set(dpi, conflict) and all(
        is_valid_set(dpi, set(conflict) - {e}) for e in conflict
    )


def test_table1_returns_an_oracle_verified_minimal_conflict(table1):
    dpi, _ = table1
    outcome = find_min_conflict(dpi)
    assert isinstance(outcome, MinimalConflict)
    assert frozenset(outcome.ids) in {frozenset(c) for c in brute_force_min_conflicts(dpi)}
    assert minimality_holds(dpi, outcome.ids)


def test_table1_conflict_is_deterministic(table1):
    dpi, _ = table1
    assert find_min_conflict(dpi) == find_min_conflict(dpi)
    # K file order with the ceil-half split lands on the two-element conflict
    assert find_min_conflict(dpi).ids == ("ax1", "ax2")


def test_invalid_background_yields_empty_conflict():
    a = parse_formula("A")
    dpi = Dpi.propositional([("ax1", parse_formula("B"))], background=[a, parse_formula("!A")])
    assert find_min_conflict(dpi) == EmptyConflict()


def test_consistent_instance_yields_no_conflict():
    dpi = Dpi.propositional(
        [("ax1", parse_formula("A -> B")), ("ax2", parse_formula("B -> C"))],
        negative=[parse_formula("A & !A")],
    )
    assert find_min_conflict(dpi) == NoConflict()


def test_exclusion_set_restricts_candidates(ex4):
    dpi, _ = ex4
    # matches the walkthrough's sub-instance labels
    assert find_min_conflict(dpi).ids == ("1", "2", "5")
    assert find_min_conflict(dpi, exclude={"1"}).ids == ("2", "4", "6")
    assert find_min_conflict(dpi, exclude={"2"}).ids == ("1", "3", "4")
    assert find_min_conflict(dpi, exclude={"2", "4"}).ids == ("1", "5", "6", "7")
    assert find_min_conflict(dpi, exclude={"1", "4"}) == NoConflict()


def test_quickxplain_whole_set_is_the_conflict():
    dpi = Dpi.abstract(2, [["1", "2"]])
    assert quickxplain(dpi, (), ["1", "2"]) == ("1", "2")


def test_quickxplain_singleton_base_case():
    dpi = Dpi.abstract(3, [["2"]])
    assert quickxplain(dpi, ("1",), ["2"]) == ("2",)


def test_quickxplain_on_table1_is_minimal(table1):
    dpi, _ = table1
    conflict = quickxplain(dpi, (), list(dpi.k_ids))
    assert minimality_holds(dpi, conflict)


def test_quickxplain_precondition_violations(table1):
    dpi, _ = table1
    with pytest.raises(ValueError, match="must be invalid"):
        quickxplain(dpi, (), ["ax2", "ax4", "ax5"])
    bad = Dpi.abstract(3, [["1"]])
    with pytest.raises(ValueError, match="must be valid"):
        quickxplain(bad, ("1",), ["2"])


def test_quickxplain_agrees_with_oracle_on_random_abstract_instances():
    for seed in range(40):
        dpi = gen_random_dpi(8, 4, 4, seed)
        if not dpi.conflict_family:
            continue
        conflict = quickxplain(dpi, (), list(dpi.k_ids))
        assert frozenset(conflict) in {frozenset(c) for c in brute_force_min_conflicts(dpi)}
        assert minimality_holds(dpi, conflict)


def test_find_min_conflict_agrees_with_oracle_on_random_propositional_instances():
    rng = random.Random(1234)
    hits = 0
    for _ in range(25):
        dpi = random_propositional_dpi(rng, max_axioms=6, max_atoms=4)
        outcome = find_min_conflict(dpi)
        if isinstance(outcome, MinimalConflict):
            hits += 1
            oracle = {frozenset(c) for c in brute_force_min_conflicts(dpi)}
            assert frozenset(outcome.ids) in oracle
            assert minimality_holds(dpi, outcome.ids)
        elif isinstance(outcome, NoConflict):
            assert brute_force_min_conflicts(dpi) == []
    assert hits >= 3  # the generator produces enough conflicting instances


def test_quickxplain_call_count_bound():
    # Junker's bound: 2k*log2(n/k) + 2k validity checks, k the conflict
    # size, n the candidate count. Two extra calls cover the preconditions.
    for seed in range(60):
        dpi = gen_random_dpi(10, 3, 5, seed)
        if not dpi.conflict_family:
            continue
        checker = ValidityChecker(dpi)
        conflict = quickxplain(dpi, (), list(dpi.k_ids), checker=checker)
        k, n = len(conflict), len(dpi.k_ids)
        bound = 2 * k * math.log2(n / k) + 2 * k
        assert checker.calls - 2 <= math.ceil(bound)


def test_abstract_empty_member_means_empty_conflict():
    dpi = Dpi.abstract(2, [[]])
    assert find_min_conflict(dpi) == EmptyConflict()

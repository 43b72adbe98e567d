import random
from pathlib import Path

import pytest
from hypothesis import settings

from hsdiag import Dpi, cardinality_pr, load_dpi_file

settings.register_profile("ci", derandomize=True, max_examples=60)
settings.load_profile("ci")

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture(scope="session")
def table1():
    dpi, pr = load_dpi_file(FIXTURES / "table1.dpi")
    return dpi, pr


@pytest.fixture(scope="session")
def ex4():
    dpi, pr = load_dpi_file(FIXTURES / "ex4.dpi")
    return dpi, pr.as_cost_adjusted()


@pytest.fixture(scope="session")
def table1_card(table1):
    dpi, _ = table1
    return cardinality_pr(dpi.k_ids, 1 / 3)


def random_formula(rng: random.Random, atoms, depth: int = 3):
    """Random formula AST for property tests (independent of the parser)."""
    from hsdiag import And, Atom, Const, Iff, Implies, Not, Or

    if depth == 0 or rng.random() < 0.3:
        roll = rng.random()
        if roll < 0.08:
            return Const(rng.random() < 0.5)
        return Atom(rng.choice(atoms))
    op = rng.choice(("not", "and", "or", "implies", "iff"))
    if op == "not":
        return Not(random_formula(rng, atoms, depth - 1))
    ctor = {"and": And, "or": Or, "implies": Implies, "iff": Iff}[op]
    return ctor(
        random_formula(rng, atoms, depth - 1),
        random_formula(rng, atoms, depth - 1),
    )


def random_propositional_dpi(rng: random.Random, max_axioms: int = 8, max_atoms: int = 5) -> Dpi:
    """Random reasoner-backend DPI over a small atom alphabet."""
    atoms = [f"x{i}" for i in range(1, rng.randint(2, max_atoms) + 1)]
    n_axioms = rng.randint(2, max_axioms)
    k = [(f"ax{i + 1}", random_formula(rng, atoms, depth=2)) for i in range(n_axioms)]
    negative = [random_formula(rng, atoms, depth=2) for _ in range(rng.randint(0, 2))]
    background = [random_formula(rng, atoms, depth=1) for _ in range(rng.randint(0, 1))]
    return Dpi.propositional(k, background=background, negative=negative)

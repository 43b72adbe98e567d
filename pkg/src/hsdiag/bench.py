"""Benchmark harness: factorial sequential-diagnosis runs and CSV emission.

One BenchRow summarizes one session cell (dpi, algorithm, ld, session
index): counters are summed over the session's searches, the peak node
count is the maximum, and diagnoses_found reports the largest single-search
yield. The summary aggregates the two comparison families: factor of memory
saved, peak(hstree) / peak(rbfhs), and factor of extra time spent,
runtime(rbfhs) / runtime(hstree), averaged over paired sessions.
"""

from __future__ import annotations

import csv
import io
import zlib
import random
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Iterable, Sequence

from .dpi import (
    BRUTE_FORCE_LIMIT,
    Diagnosis,
    Dpi,
    FaultProbabilities,
    brute_force_min_diagnoses,
    cardinality_pr,
    cost_adjust,
)
from .dpifile import load_dpi_file
from .search import HSTREE, RBFHS, rbf_hs
from .sequential import SessionTrace, run_session

CSV_HEADER = (
    "dpi,algo,ld,session,runtime_ms,peak_live_nodes,nodes_generated,"
    "label_calls,conflict_computations,conflict_reuses,diagnoses_found"
)

SUMMARY_HEADER = "dpi,ld,memory_factor,time_factor"

DEFAULT_LD = (2, 6, 10, 20)


@dataclass(frozen=True)
class BenchRow:
    dpi: str
    algo: str
    ld: int
    session: int
    runtime_ms: float
    peak_live_nodes: int
    nodes_generated: int
    label_calls: int
    conflict_computations: int
    conflict_reuses: int
    diagnoses_found: int

    def __post_init__(self):
        if self.diagnoses_found > self.ld:
            raise ValueError("diagnoses_found exceeds ld")
        for name in (
            "peak_live_nodes",
            "nodes_generated",
            "label_calls",
            "conflict_computations",
            "conflict_reuses",
            "diagnoses_found",
        ):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    def to_csv(self) -> str:
        return ",".join(
            [
                self.dpi,
                self.algo,
                str(self.ld),
                str(self.session),
                repr(self.runtime_ms),
                str(self.peak_live_nodes),
                str(self.nodes_generated),
                str(self.label_calls),
                str(self.conflict_computations),
                str(self.conflict_reuses),
                str(self.diagnoses_found),
            ]
        )

    @classmethod
    def from_csv(cls, line: str) -> "BenchRow":
        parts = next(csv.reader(io.StringIO(line)))
        names = [f.name for f in fields(cls)]
        if len(parts) != len(names):
            raise ValueError(f"expected {len(names)} columns, got {len(parts)}")
        return cls(
            dpi=parts[0],
            algo=parts[1],
            ld=int(parts[2]),
            session=int(parts[3]),
            runtime_ms=float(parts[4]),
            peak_live_nodes=int(parts[5]),
            nodes_generated=int(parts[6]),
            label_calls=int(parts[7]),
            conflict_computations=int(parts[8]),
            conflict_reuses=int(parts[9]),
            diagnoses_found=int(parts[10]),
        )


def write_rows(rows: Iterable[BenchRow]) -> str:
    return "\n".join([CSV_HEADER] + [r.to_csv() for r in rows]) + "\n"


def read_rows(text: str) -> list[BenchRow]:
    lines = [l for l in text.splitlines() if l.strip()]
    if not lines or lines[0] != CSV_HEADER:
        raise ValueError("missing or wrong CSV header")
    return [BenchRow.from_csv(l) for l in lines[1:]]


def session_row(name: str, algo: str, ld: int, session: int, trace: SessionTrace) -> BenchRow:
    stats = [it.stats for it in trace.iterations]
    return BenchRow(
        dpi=name,
        algo=algo,
        ld=ld,
        session=session,
        runtime_ms=sum(s.wall_time for s in stats) * 1000.0,
        peak_live_nodes=max(s.peak_live_nodes for s in stats),
        nodes_generated=sum(s.nodes_generated for s in stats),
        label_calls=sum(s.label_calls for s in stats),
        conflict_computations=sum(s.conflict_computations for s in stats),
        conflict_reuses=sum(s.conflict_reuses for s in stats),
        diagnoses_found=max(len(it.diagnoses) for it in trace.iterations),
    )


def derive_seed(*parts) -> int:
    """Stable cross-process seed derivation (hash() is randomized)."""
    return zlib.crc32(":".join(str(p) for p in parts).encode("utf-8"))


def pick_probabilities(dpi: Dpi, file_pr: FaultProbabilities | None, mode: str) -> FaultProbabilities:
    if mode == "card":
        return cardinality_pr(dpi.k_ids, 1 / 3)
    if mode == "prob":
        if file_pr is None:
            raise ValueError("mode 'prob' needs a [PR] section in the DPI file")
        # Pre-adjusted vectors (all below 0.5) are taken as given; scaling
        # them again would reshuffle the diagnosis ranking.
        if all(p < 0.5 for p in file_pr.values.values()):
            return file_pr.as_cost_adjusted()
        return cost_adjust(file_pr, 0.25)
    raise ValueError(f"unknown probability mode: {mode!r}")


def sample_actuals(
    dpi: Dpi, pr: FaultProbabilities, count: int, seed: int, ld_hint: int
) -> list[Diagnosis]:
    """Designated actual diagnoses for simulated sessions.

    Drawn uniformly from the brute-force diagnosis list on small instances,
    and from a first search's result list on larger ones. Distinct targets
    are preferred while the pool allows.
    """
    if len(dpi.k_ids) <= BRUTE_FORCE_LIMIT:
        pool = brute_force_min_diagnoses(dpi)
    else:
        pool = rbf_hs(dpi, pr, max(ld_hint, 20)).diagnoses
    if not pool:
        raise ValueError("instance has no minimal diagnosis to designate as actual")
    rng = random.Random(seed)
    if count <= len(pool):
        return rng.sample(pool, count)
    return [rng.choice(pool) for _ in range(count)]


@dataclass(frozen=True)
class CellFailure:
    dpi: str
    algo: str
    ld: int
    session: int
    error: str


def run_bench(
    fixture_dir: str | Path,
    ld_values: Sequence[int] = DEFAULT_LD,
    sessions: int = 5,
    seed: int = 0,
    mode: str = "card",
) -> tuple[list[BenchRow], list[CellFailure]]:
    """Full factorial over fixtures x algorithms x ld x sessions."""
    rows: list[BenchRow] = []
    failures: list[CellFailure] = []
    for path in sorted(Path(fixture_dir).glob("*.dpi")):
        name = path.stem
        try:
            dpi, file_pr = load_dpi_file(path)
            pr = pick_probabilities(dpi, file_pr, mode)
            actuals = sample_actuals(dpi, pr, sessions, derive_seed(seed, name), max(ld_values))
        except Exception as exc:
            failures.append(CellFailure(name, "*", 0, 0, str(exc)))
            continue
        for algo in (RBFHS, HSTREE):
            for ld in ld_values:
                for session, actual in enumerate(actuals):
                    try:
                        trace = run_session(dpi, pr, ld, actual, algo)
                        rows.append(session_row(name, algo, ld, session, trace))
                    except Exception as exc:
                        failures.append(CellFailure(name, algo, ld, session, str(exc)))
    return rows, failures


@dataclass(frozen=True)
class SummaryRow:
    dpi: str
    ld: int
    memory_factor: float
    time_factor: float

    def to_csv(self) -> str:
        return f"{self.dpi},{self.ld},{self.memory_factor!r},{self.time_factor!r}"


def summarize(rows: Sequence[BenchRow]) -> list[SummaryRow]:
    """Per (dpi, ld) factors averaged over paired sessions."""
    cells: dict[tuple[str, int, int], dict[str, BenchRow]] = {}
    for row in rows:
        cells.setdefault((row.dpi, row.ld, row.session), {})[row.algo] = row
    grouped: dict[tuple[str, int], list[tuple[float, float]]] = {}
    for (name, ld, _session), pair in sorted(cells.items()):
        if RBFHS not in pair or HSTREE not in pair:
            continue
        rbf, hst = pair[RBFHS], pair[HSTREE]
        memory = hst.peak_live_nodes / max(rbf.peak_live_nodes, 1)
        time_factor = rbf.runtime_ms / max(hst.runtime_ms, 1e-9)
        grouped.setdefault((name, ld), []).append((memory, time_factor))
    out = []
    for (name, ld), factors in sorted(grouped.items()):
        mem = sum(f[0] for f in factors) / len(factors)
        tim = sum(f[1] for f in factors) / len(factors)
        out.append(SummaryRow(name, ld, mem, tim))
    return out


def write_summary(rows: Sequence[SummaryRow]) -> str:
    return "\n".join([SUMMARY_HEADER] + [r.to_csv() for r in rows]) + "\n"

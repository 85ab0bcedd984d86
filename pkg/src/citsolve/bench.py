"""Benchmark harness: monolithic versus decomposed solving over a corpus.

Emits one CSV row per program; a mismatch between the two answers is a
correctness regression.  ``--plot`` renders the timing comparison to an
image file alongside the CSV stream.
"""

from __future__ import annotations

import csv
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .config import Cutoffs, default_cutoffs
from .errors import ResourceCutoffError
from .cit import build_cit, cit_sizes, solve_decomposed
from .program import Program, parse_program
from .semantics import solve_monolithic

CSV_FIELDS = (
    "file",
    "atoms",
    "rules",
    "cs",
    "monolithic_time",
    "decomposed_time",
    "speedup",
    "answers_equal",
)


def chain_program(blocks: int) -> str:
    """A chain of independent infection-style blocks sharing one source
    atom: three atoms per block plus the shared pivot."""
    lines = ["src."]
    for i in range(1, blocks + 1):
        lines.append(f"reach_{i} :- src, link_{i}, not off_{i}.")
        lines.append(f"link_{i}.")
    return "\n".join(lines) + "\n"


def write_chain_corpus(directory: str | Path, block_counts: Iterable[int]) -> list[Path]:
    out = []
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for k in block_counts:
        path = directory / f"chain_{k:03d}.lp"
        path.write_text(chain_program(k))
        out.append(path)
    return out


@dataclass(frozen=True)
class BenchRow:
    file: str
    atoms: int
    rules: int
    cs: int
    monolithic_time: float | None  # None marks a resource cutoff
    decomposed_time: float
    answers_equal: bool | None

    @property
    def speedup(self) -> float | None:
        if self.monolithic_time is None or self.decomposed_time == 0:
            return None
        return self.monolithic_time / self.decomposed_time

    def as_csv(self) -> dict:
        return {
            "file": self.file,
            "atoms": self.atoms,
            "rules": self.rules,
            "cs": self.cs,
            "monolithic_time": (
                "cutoff" if self.monolithic_time is None else f"{self.monolithic_time:.6f}"
            ),
            "decomposed_time": f"{self.decomposed_time:.6f}",
            "speedup": "" if self.speedup is None else f"{self.speedup:.2f}",
            "answers_equal": (
                "n/a" if self.answers_equal is None else str(self.answers_equal).lower()
            ),
        }


def _best_of(fn, repeat: int):
    best = None
    value = None
    for _ in range(max(1, repeat)):
        t0 = time.perf_counter()
        value = fn()
        elapsed = time.perf_counter() - t0
        best = elapsed if best is None else min(best, elapsed)
    return value, best


def bench_file(
    path: str | Path,
    semantics: str,
    repeat: int = 1,
    jobs: int | None = None,
    cutoffs: Cutoffs | None = None,
) -> BenchRow:
    cutoffs = cutoffs if cutoffs is not None else default_cutoffs()
    path = Path(path)
    program = parse_program(path.read_text())
    tree = build_cit(program)
    sizes = cit_sizes(tree)
    deco, deco_time = _best_of(
        lambda: solve_decomposed(program, tree, semantics, jobs, cutoffs), repeat
    )
    try:
        mono, mono_time = _best_of(
            lambda: solve_monolithic(program, semantics, cutoffs=cutoffs), repeat
        )
    except ResourceCutoffError:
        return BenchRow(
            path.name, program.n_atoms, program.n_rules, sizes.cs, None, deco_time, None
        )
    return BenchRow(
        path.name,
        program.n_atoms,
        program.n_rules,
        sizes.cs,
        mono_time,
        deco_time,
        mono.models == deco.models,
    )


def bench_corpus(
    directory: str | Path,
    semantics: str,
    repeat: int = 1,
    jobs: int | None = None,
    cutoffs: Cutoffs | None = None,
) -> list[BenchRow]:
    files = sorted(Path(directory).glob("*.lp"))
    return [bench_file(f, semantics, repeat, jobs, cutoffs) for f in files]


def write_csv(rows: Sequence[BenchRow], stream=None) -> None:
    stream = stream if stream is not None else sys.stdout
    writer = csv.DictWriter(stream, fieldnames=CSV_FIELDS)
    writer.writeheader()
    for row in rows:
        writer.writerow(row.as_csv())


def linear_fit(xs: Sequence[float], ys: Sequence[float]) -> tuple[float, float, float]:
    """Least-squares line through (xs, ys); returns (slope, intercept, r2)."""
    n = len(xs)
    if n < 2:
        raise ValueError("need at least two points")
    mx = sum(xs) / n
    my = sum(ys) / n
    sxx = sum((x - mx) ** 2 for x in xs)
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    if sxx == 0:
        raise ValueError("degenerate x values")
    slope = sxy / sxx
    intercept = my - slope * mx
    ss_res = sum((y - (slope * x + intercept)) ** 2 for x, y in zip(xs, ys))
    ss_tot = sum((y - my) ** 2 for y in ys)
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return slope, intercept, r2


def plot_rows(rows: Sequence[BenchRow], path: str | Path) -> Path:
    """Render per-file timings and speedups next to the CSV output."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    path = Path(path)
    labels = [r.file for r in rows]
    idx = range(len(rows))
    deco = [r.decomposed_time for r in rows]
    mono = [r.monolithic_time if r.monolithic_time is not None else 0.0 for r in rows]
    cut = [r.monolithic_time is None for r in rows]

    fig, (ax_t, ax_s) = plt.subplots(1, 2, figsize=(11, 4.2))
    width = 0.4
    ax_t.bar([i - width / 2 for i in idx], mono, width, label="monolithic",
             color=["lightgray" if c else "#1f77b4" for c in cut])
    ax_t.bar([i + width / 2 for i in idx], deco, width, label="decomposed",
             color="#ff7f0e")
    for i, c in enumerate(cut):
        if c:
            ax_t.text(i - width / 2, 0, "cutoff", rotation=90, ha="center",
                      va="bottom", fontsize=8)
    ax_t.set_xticks(list(idx))
    ax_t.set_xticklabels(labels, rotation=45, ha="right", fontsize=8)
    ax_t.set_ylabel("seconds")
    ax_t.set_title("wall-clock per program")
    ax_t.legend()

    speedups = [(i, r.speedup) for i, r in zip(idx, rows) if r.speedup is not None]
    if speedups:
        ax_s.plot([i for i, _ in speedups], [s for _, s in speedups], "o-")
    ax_s.axhline(1.0, color="gray", linewidth=0.8, linestyle="--")
    ax_s.set_xticks(list(idx))
    ax_s.set_xticklabels(labels, rotation=45, ha="right", fontsize=8)
    ax_s.set_ylabel("monolithic / decomposed")
    ax_s.set_title("speedup")

    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path

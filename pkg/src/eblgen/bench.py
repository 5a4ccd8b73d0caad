"""Timing EBL generation against chart generation, step by step."""
from __future__ import annotations

import statistics
import time
from dataclasses import dataclass, field
from typing import Sequence

from .apply import EXACT, STEPS, TERMINAL_MATCHING, ApplyOptions, StepTimer, generate
from .chart import chart_generate
from .dtree import DecisionTree
from .grammar import Grammar
from .mrs import Mrs


@dataclass
class QueryTiming:
    label: str
    relations: int
    ebl_ms: float
    chart_ms: float
    steps_ms: dict[str, float]
    ebl_strings: frozenset[str]
    chart_strings: frozenset[str]

    @property
    def succeeded(self) -> bool:
        return bool(self.ebl_strings)

    @property
    def ratio(self) -> float | None:
        """Chart time over EBL time; None when EBL found nothing."""
        if not self.succeeded or self.ebl_ms <= 0:
            return None
        return self.chart_ms / self.ebl_ms

    @property
    def sound(self) -> bool:
        return self.ebl_strings <= self.chart_strings

    def share(self, step: str) -> float:
        """Percentage of EBL time spent in ``step``."""
        return 100.0 * self.steps_ms[step] / self.ebl_ms if self.ebl_ms > 0 else 0.0


@dataclass
class BenchReport:
    queries: list[QueryTiming] = field(default_factory=list)
    repetitions: int = 1
    mode: str = EXACT
    precompute_expansion: bool = False

    @property
    def ratios(self) -> list[float]:
        return [q.ratio for q in self.queries if q.ratio is not None]

    def table(self) -> str:
        head = ["query", "rels", "chart ms", "ebl ms", "speed-up"] + [s for s in STEPS]
        rows = [head]
        for q in self.queries:
            ratio = "absent" if q.ratio is None else f"{q.ratio:.1f}x"
            rows.append([q.label, str(q.relations), f"{q.chart_ms:.3f}", f"{q.ebl_ms:.3f}", ratio]
                        + [f"{q.steps_ms[s]:.3f} ({q.share(s):.0f}%)" for s in STEPS])
        widths = [max(len(r[i]) for r in rows) for i in range(len(head))]
        lines = ["  ".join(c.ljust(w) if i == 0 else c.rjust(w)
                           for i, (c, w) in enumerate(zip(r, widths))) for r in rows]
        lines.insert(1, "-" * len(lines[0]))
        if self.ratios:
            lines.append("")
            lines.append(f"speed-up median {statistics.median(self.ratios):.1f}x, "
                         f"min {min(self.ratios):.1f}x, max {max(self.ratios):.1f}x; "
                         f"terminal matching median share "
                         f"{statistics.median(q.share(TERMINAL_MATCHING) for q in self.queries if q.succeeded):.0f}%")
        return "\n".join(lines)

    def data_lines(self) -> list[str]:
        out = [f"#data config repetitions={self.repetitions} mode={self.mode} "
               f"precompute_expansion={'on' if self.precompute_expansion else 'off'}"]
        for q in self.queries:
            ratio = "absent" if q.ratio is None else f"{q.ratio:.4f}"
            steps = " ".join(f"{s.replace(' ', '_')}_ms={q.steps_ms[s]:.5f}" for s in STEPS)
            out.append(f"#data query={q.label} relations={q.relations} chart_ms={q.chart_ms:.5f} "
                       f"ebl_ms={q.ebl_ms:.5f} ratio={ratio} {steps} "
                       f"sound={'yes' if q.sound else 'no'}")
        return out


def _median_ms(xs: Sequence[float]) -> float:
    return 1000.0 * statistics.median_low(xs)


def time_query(label: str, m: Mrs, d: DecisionTree, grammar: Grammar, repetitions: int,
               mode: str = EXACT, options: ApplyOptions | None = None) -> QueryTiming:
    options = options or ApplyOptions()
    full = len(m.liszt)
    ebl_runs, chart_runs = [], []
    step_runs: dict[str, list[float]] = {s: [] for s in STEPS}
    ebl_strings: frozenset[str] = frozenset()
    chart_strings: frozenset[str] = frozenset()
    if options.precompute_expansion:
        generate(d, m, grammar, mode, options)      # fill the expansion cache outside the clock
    for _ in range(repetitions):
        timer = StepTimer()
        t0 = time.perf_counter()
        results = generate(d, m, grammar, mode, options, timer=timer)
        ebl_runs.append(time.perf_counter() - t0)
        for s in STEPS:
            step_runs[s].append(timer.totals[s])
        t0 = time.perf_counter()
        readings = chart_generate(m, grammar)
        chart_runs.append(time.perf_counter() - t0)
        ebl_strings = frozenset(r.string for r in results if len(r.covered) == full)
        chart_strings = frozenset(r.string for r in readings)
    # steps come from the median EBL run, so they never add up to more than its total
    mid = sorted(range(repetitions), key=ebl_runs.__getitem__)[(repetitions - 1) // 2]
    return QueryTiming(label, full, 1000.0 * ebl_runs[mid], _median_ms(chart_runs),
                       {s: 1000.0 * v[mid] for s, v in step_runs.items()}, ebl_strings,
                       chart_strings)


def run_bench(queries: Sequence[tuple[str, Mrs]], d: DecisionTree, grammar: Grammar,
              repetitions: int = 11, mode: str = EXACT,
              precompute_expansion: bool = False) -> BenchReport:
    if repetitions < 1:
        raise ValueError("repetitions must be positive")
    options = ApplyOptions(precompute_expansion)
    report = BenchReport([], repetitions, mode, precompute_expansion)
    for label, m in queries:
        report.queries.append(time_query(label, m, d, grammar, repetitions, mode, options))
    return report

"""Running EBL results through the chart as pre-built passive edges."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .apply import EXACT, ApplyOptions, InstantiationResult, generate
from .chart import EBL, Chart, ChartStats, Edge, GenResult, coverage_priority
from .dtree import DecisionTree
from .grammar import Grammar
from .mrs import Mrs


class IntegrityError(ValueError):
    """An injected result claims relations the input does not have."""


def passive_edge(r: InstantiationResult) -> Edge:
    mask = 0
    for i in r.covered:
        mask |= 1 << i
    return Edge(r.fs, mask, r.string, r.derivation, EBL)


def inject(chart: Chart, results: Sequence[InstantiationResult]) -> list[Edge]:
    """Put each result on the chart's agenda; returns the edges actually added.

    Results equal to one already known or injected (same coverage, same
    sign) are skipped.
    """
    n = len(chart.mrs.liszt)
    added: list[Edge] = []
    pending: set = set()
    for r in results:
        if not r.covered:
            raise IntegrityError(f"result {r.string!r} covers no relation")
        if len(set(r.covered)) != len(r.covered) or not all(0 <= i < n for i in r.covered):
            raise IntegrityError(f"result {r.string!r} covers {r.covered}, input has {n} relations")
        edge = passive_edge(r)
        key = (edge.covered, edge.fs)
        if key in pending or chart.known(*key):
            continue
        pending.add(key)
        chart.add(edge)
        added.append(edge)
    return added


@dataclass
class HybridRun:
    results: list[GenResult]
    injected: list[Edge] = field(default_factory=list)
    stats: ChartStats = field(default_factory=ChartStats)


def hybrid_run(m: Mrs, d: DecisionTree, grammar: Grammar, mode: str = EXACT,
               options: ApplyOptions | None = None) -> HybridRun:
    chart = Chart(grammar, m, coverage_priority)
    if not m.liszt:
        return HybridRun([], [], chart.stats)
    injected = inject(chart, generate(d, m, grammar, mode, options))
    chart.seed_lexical()
    return HybridRun(chart.run(), injected, chart.stats)


def hybrid_generate(m: Mrs, d: DecisionTree, grammar: Grammar, mode: str = EXACT,
                    options: ApplyOptions | None = None) -> list[GenResult]:
    """Complete results of a chart run seeded with EBL results, in completion order."""
    return hybrid_run(m, d, grammar, mode, options).results


def provenance_of(result: GenResult) -> set[str]:
    """Provenance labels found below the root of a result's derivation."""
    return {n.provenance for c in result.derivation.children for n in c.nodes()}


def uses_ebl(result: GenResult) -> bool:
    return any(n.provenance == EBL for n in result.derivation.nodes())


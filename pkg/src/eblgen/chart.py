"""Agenda-driven chart generation over flat semantics.

Edges cover sub-multisets of the input relations (kept as bitmasks over the
liszt positions).  A rule combines passive edges with pairwise disjoint
coverage; the mother's relations are the union of its daughters' and its
ORTH is the concatenation of theirs.  Complete results cover every relation
and unify with the goal description (start category plus the input's top
handle and index).
"""
from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .grammar import CAT, ORTH, Grammar, GrammarRule, dtr
from .mrs import Mrs
from .tfs import Builder, FeatureStructure, string_atom, unify_at

GRAMMAR = "grammar"
EBL = "ebl"


@dataclass(frozen=True)
class Derivation:
    """A derivation tree.  Leaves name lexical entries and cover one relation."""
    label: str
    rels: tuple[int, ...]
    children: tuple[Derivation, ...] = ()
    cat: str | None = None
    provenance: str = GRAMMAR

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def leaves(self) -> list[Derivation]:
        if self.is_leaf:
            return [self]
        return [leaf for c in self.children for leaf in c.leaves()]

    def nodes(self):
        yield self
        for c in self.children:
            yield from c.nodes()

    def local_mrs(self, m: Mrs) -> Mrs:
        return m.with_liszt(m.liszt[i] for i in self.rels)

    def __str__(self) -> str:
        if self.is_leaf:
            return self.label
        return f"({self.label} {' '.join(map(str, self.children))})"


@dataclass(frozen=True)
class GenResult:
    fs: FeatureStructure
    string: str
    derivation: Derivation
    mrs: Mrs


def join_orth(parts: Iterable[str]) -> str:
    return " ".join(p for p in parts if p)


def popcount(mask: int) -> int:
    return bin(mask).count("1")


@dataclass(eq=False)
class Edge:
    fs: FeatureStructure
    covered: int
    string: str
    derivation: Derivation
    provenance: str = GRAMMAR
    depth: int = 0

    @property
    def size(self) -> int:
        return popcount(self.covered)

    @property
    def cat(self) -> str | None:
        return self.fs.value((CAT,))


@dataclass(eq=False)
class _Active:
    rule: GrammarRule
    k: int
    fs: FeatureStructure
    covered: int
    children: tuple[Edge, ...]


def coverage_priority(edge: Edge) -> tuple:
    """Wider coverage first; EBL edges before grammar edges of equal span."""
    return (-edge.size, 0 if edge.provenance == EBL else 1)


Priority = Callable[[Edge], tuple]


@dataclass
class ChartStats:
    rule_applications: int = 0
    passive_edges: int = 0
    active_edges: int = 0
    rule_applications_at_first_goal: int | None = None


class Chart:
    """Single-use chart for one input MRS."""

    def __init__(self, grammar: Grammar, mrs: Mrs, priority: Priority = coverage_priority,
                 unary_limit: int = 3):
        self.grammar = grammar
        self.hierarchy = grammar.hierarchy
        self.mrs = mrs
        self.priority = priority
        self.unary_limit = unary_limit
        self.full = (1 << len(mrs.liszt)) - 1
        self.stats = ChartStats()
        self.passives: list[Edge] = []
        self._seen: set[tuple[int, FeatureStructure]] = set()
        self._actives: list[_Active] = []
        self._agenda: list = []
        self._counter = itertools.count()
        self.results: list[GenResult] = []

    def add(self, edge: Edge) -> None:
        heapq.heappush(self._agenda, (self.priority(edge), next(self._counter), edge))

    def known(self, covered: int, fs: FeatureStructure) -> bool:
        return (covered, fs) in self._seen

    def seed_lexical(self) -> None:
        g = self.grammar
        for i, rel in enumerate(self.mrs.liszt):
            for entry in g.lexical_lookup(rel.pred):
                fs = g.instance(entry, rel)
                if fs is None:
                    continue
                leaf = Derivation(entry.name, (i,), cat=fs.value((CAT,)))
                self.add(Edge(fs, 1 << i, entry.orth, leaf))

    def run(self) -> list[GenResult]:
        """Process the agenda to exhaustion; results in completion order."""
        while self._agenda:
            _, _, edge = heapq.heappop(self._agenda)
            key = (edge.covered, edge.fs)
            if key in self._seen:
                continue
            self._seen.add(key)
            self.passives.append(edge)
            self.stats.passive_edges += 1
            if edge.covered == self.full and self.grammar.is_goal(edge.fs, self.mrs):
                if self.stats.rule_applications_at_first_goal is None:
                    self.stats.rule_applications_at_first_goal = self.stats.rule_applications
                self.results.append(GenResult(edge.fs, edge.string, edge.derivation, self.mrs))
            for rule in self.grammar.rules.values():
                if self._fits(rule, 1, edge):
                    self._fill(_Active(rule, 1, rule.sign, 0, ()), edge)
            for act in list(self._actives):
                if not act.covered & edge.covered and self._fits(act.rule, act.k, edge):
                    self._fill(act, edge)
        return self.results

    def _fits(self, rule: GrammarRule, k: int, edge: Edge) -> bool:
        want = rule.daughter_cats[k - 1]
        have = edge.cat
        return want is None or have is None or self.hierarchy.meet(want, have) is not None

    def _fill(self, act: _Active, edge: Edge) -> None:
        self.stats.rule_applications += 1
        fs = unify_at(act.fs, (dtr(act.k),), edge.fs, self.hierarchy)
        if fs is None:
            return
        nxt = _Active(act.rule, act.k + 1, fs, act.covered | edge.covered, act.children + (edge,))
        if nxt.k > nxt.rule.arity:
            self._complete(nxt)
            return
        self._actives.append(nxt)
        self.stats.active_edges += 1
        for p in list(self.passives):
            if not p.covered & nxt.covered and self._fits(nxt.rule, nxt.k, p):
                self._fill(nxt, p)

    def _complete(self, act: _Active) -> None:
        rule = act.rule
        depth = 0
        if rule.arity == 1:
            depth = act.children[0].depth + 1
            if depth > self.unary_limit:
                return
        string = join_orth(c.string for c in act.children)
        b = Builder(self.hierarchy)
        root = b.add(act.fs)
        if not b.constrain(b.follow(root, (ORTH,)), string_atom(string)):
            return
        fs = b.finish(root, frozenset(rule.daughter_features))
        if (act.covered, fs) in self._seen:
            return
        rels = tuple(sorted(i for c in act.children for i in c.derivation.rels))
        deriv = Derivation(rule.name, rels, tuple(c.derivation for c in act.children),
                           cat=fs.value((CAT,)))
        self.add(Edge(fs, act.covered, string, deriv, GRAMMAR, depth))


def _sort_key(r: GenResult):
    return (r.string, str(r.derivation))


def chart_generate(m: Mrs, grammar: Grammar, priority: Priority = coverage_priority,
                   unary_limit: int = 3) -> list[GenResult]:
    """Every complete realization of ``m``, sorted by string."""
    if not m.liszt:
        return []
    chart = Chart(grammar, m, priority, unary_limit)
    chart.seed_lexical()
    return sorted(chart.run(), key=_sort_key)


@dataclass
class CorpusItem:
    mrs: Mrs
    select: tuple[int, ...] | None = None
    label: str = ""


@dataclass
class TrainingFailure:
    item: int
    label: str
    reason: str


@dataclass
class ProcessedCorpus:
    results: list[GenResult] = field(default_factory=list)
    per_item: list[list[GenResult]] = field(default_factory=list)
    failures: list[TrainingFailure] = field(default_factory=list)


def train_corpus_process(corpus: Sequence[CorpusItem], grammar: Grammar) -> ProcessedCorpus:
    """Generate every corpus item and keep the selected readings."""
    out = ProcessedCorpus()
    for n, item in enumerate(corpus):
        readings = chart_generate(item.mrs, grammar)
        kept: list[GenResult] = []
        if not readings:
            out.failures.append(TrainingFailure(n, item.label, "no readings"))
        elif item.select is None:
            kept = readings
        else:
            bad = [i for i in item.select if not 0 <= i < len(readings)]
            if bad:
                out.failures.append(TrainingFailure(
                    n, item.label, f"selection {bad} out of range (0..{len(readings) - 1})"))
            else:
                kept = [readings[i] for i in item.select]
        out.per_item.append(kept)
        out.results.extend(kept)
    return out

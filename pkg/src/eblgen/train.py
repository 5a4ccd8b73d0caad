"""Training phase: corpus readings to templates in a decision tree."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .chart import CorpusItem, TrainingFailure, train_corpus_process
from .dtree import DecisionTree
from .grammar import Grammar
from .template import (PhrasalFilter, Template, TemplateIntegrityError, TNode, extract_template,
                       passes, subtemplate)


@dataclass
class TrainOptions:
    abstraction: bool = True
    phrasal: bool = False
    filters: tuple[PhrasalFilter, ...] = ()


@dataclass
class TrainReport:
    inserted: list[Template] = field(default_factory=list)
    phrasal: list[Template] = field(default_factory=list)
    duplicates: int = 0
    failures: list[TrainingFailure] = field(default_factory=list)
    readings: int = 0

    def summary(self) -> str:
        return (f"{self.readings} readings, {len(self.inserted)} sentence templates, "
                f"{len(self.phrasal)} phrasal templates, {self.duplicates} duplicates, "
                f"{len(self.failures)} failures")


def insert_phrasal(d: DecisionTree, t: Template, node: TNode, grammar: Grammar,
                   filters: Sequence[PhrasalFilter], report: TrainReport) -> None:
    """Insert the phrasal subtrees below ``node``.

    A subtree whose template is already stored stops the recursion on that
    branch, since everything below it was stored along with it.  Subtrees
    rejected by a filter are not stored but their children are still visited.
    """
    for child in node.children:
        if child.is_terminal:
            continue
        if passes(child, filters):
            sub = subtemplate(t, child)
            if not d.insert(sub, grammar.hierarchy):
                report.duplicates += 1
                continue
            report.phrasal.append(sub)
        insert_phrasal(d, t, child, grammar, filters, report)


def train(corpus: Sequence[CorpusItem], grammar: Grammar, options: TrainOptions | None = None,
          tree: DecisionTree | None = None) -> tuple[DecisionTree, TrainReport]:
    """Generate each corpus item, extract templates and index them.

    Passing an existing ``tree`` extends it; a tree built under another
    grammar raises StaleIndexError before any work is done.
    """
    options = options or TrainOptions()
    d = tree if tree is not None else DecisionTree(grammar.fingerprint, options.abstraction)
    d.check(grammar.fingerprint)
    report = TrainReport()
    processed = train_corpus_process(corpus, grammar)
    report.failures.extend(processed.failures)
    for n, (item, readings) in enumerate(zip(corpus, processed.per_item)):
        for reading in readings:
            report.readings += 1
            try:
                t = extract_template(reading, grammar, options.abstraction)
            except TemplateIntegrityError as exc:
                report.failures.append(TrainingFailure(n, item.label, str(exc)))
                continue
            if d.insert(t, grammar.hierarchy):
                report.inserted.append(t)
            else:
                report.duplicates += 1
            if options.phrasal:
                insert_phrasal(d, t, t.root, grammar, options.filters, report)
    return d, report

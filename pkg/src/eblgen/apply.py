"""Application phase: retrieval, expansion, lexical lookup, terminal matching."""
from __future__ import annotations

import itertools
import time
from contextlib import nullcontext
from dataclasses import dataclass, field
from typing import Sequence

from .chart import EBL, Derivation, join_orth
from .compiled import UNSUPPORTED, CompiledTemplate, compile_template
from .dtree import DecisionTree, QueryElem, Walk
from .grammar import CAT, ORTH, Grammar, LexicalEntry, dtr
from .mrs import Mrs, abstract, canonical_key, generalize
from .template import Template, TNode
from .tfs import (TOP, Builder, CycleError, FeatureStructure, Path, TypeHierarchy, string_atom,
                  unify_many)

EXACT = "exact"
PARTIAL_EXHAUSTIVE = "partial-exhaustive"
PARTIAL_LONGEST = "partial-longest"
MODES = (EXACT, PARTIAL_EXHAUSTIVE, PARTIAL_LONGEST)

EXHAUSTIVE = "exhaustive"
LONGEST = "longest-prefix"

# step names used by the timing hooks
INDEXING = "indexing"
INSTANTIATION = "instantiation"
LEXICAL_LOOKUP = "lexical lookup"
TERMINAL_MATCHING = "terminal matching"
STEPS = (INDEXING, INSTANTIATION, LEXICAL_LOOKUP, TERMINAL_MATCHING)


class GrammarDriftError(RuntimeError):
    """A template no longer expands under the grammar it names."""


class LexicalGapError(LookupError):
    def __init__(self, pred: str):
        self.pred = pred
        super().__init__(f"no lexical entry for {pred}")


class StepTimer:
    """Accumulates wall time per application step."""

    def __init__(self):
        self.totals = dict.fromkeys(STEPS, 0.0)

    def step(self, name: str) -> _Step:
        return _Step(self.totals, name)


class _Step:
    __slots__ = ("totals", "name", "t0")

    def __init__(self, totals, name):
        self.totals, self.name = totals, name

    def __enter__(self):
        self.t0 = time.perf_counter()

    def __exit__(self, *exc):
        self.totals[self.name] += time.perf_counter() - self.t0
        return False


class _NoTimer:
    _null = nullcontext()

    def step(self, name):
        return self._null


_NO_TIMER = _NoTimer()


@dataclass(frozen=True)
class RetrievalHit:
    template: Template
    binding: tuple[int, ...]          # key slot -> liszt position of the input
    handles: tuple[tuple[str, str], ...]

    @property
    def covered(self) -> tuple[int, ...]:
        return tuple(sorted(self.binding))


@dataclass(frozen=True)
class InstantiationResult:
    fs: FeatureStructure          # root sign, daughters dropped (as a chart edge holds it)
    string: str
    covered: tuple[int, ...]
    template_id: str
    derivation: Derivation


@dataclass(frozen=True)
class Skeleton:
    fs: FeatureStructure
    terminals: tuple[tuple[Path, TNode], ...]      # yield order
    internals: tuple[tuple[Path, TNode], ...]      # preorder


def query_key(m: Mrs, h: TypeHierarchy, abstraction: bool) -> list[QueryElem]:
    g = generalize(m)
    ordered = abstract(g, h) if abstraction else g
    key = canonical_key(ordered)
    return [QueryElem(e.pred, m.liszt[i].pred, e.handel, i) for e, i in zip(key.elems, key.order)]


def _hits(walks: Sequence[Walk], query: Sequence[QueryElem]) -> list[RetrievalHit]:
    return [RetrievalHit(w.template, tuple(query[p].source for p in w.binding), w.handles)
            for w in walks]


def retrieve_exact(d: DecisionTree, m: Mrs, grammar: Grammar) -> list[RetrievalHit]:
    """Templates whose whole key matches the whole input."""
    d.check(grammar.fingerprint)
    if not d.templates:
        return []
    query = query_key(m, grammar.hierarchy, bool(d.abstraction))
    return _hits(d.walks(query, grammar.hierarchy, full=True), query)


def suppress_contained(items, covered=lambda x: x.covered):
    """Drop items whose coverage is strictly inside a kept item's coverage."""
    items = sorted(items, key=lambda x: -len(covered(x)))
    kept = []
    for x in items:
        c = set(covered(x))
        if not any(c < set(covered(k)) for k in kept):
            kept.append(x)
    return kept


def retrieve_partial(d: DecisionTree, m: Mrs, grammar: Grammar,
                     mode: str = EXHAUSTIVE) -> list[RetrievalHit]:
    """Templates matching parts of the input.

    ``exhaustive`` returns every hit; ``longest-prefix`` drops hits covered
    by a strictly larger one.
    """
    if mode not in (EXHAUSTIVE, LONGEST):
        raise ValueError(f"unknown partial mode {mode!r}")
    d.check(grammar.fingerprint)
    if not d.templates:
        return []
    query = query_key(m, grammar.hierarchy, bool(d.abstraction))
    hits = _hits(d.walks(query, grammar.hierarchy, full=False), query)
    if mode == LONGEST:
        hits = suppress_contained(hits)
    return sorted(hits, key=lambda x: (-len(x.binding), x.template.id, x.binding))


def expand(t: Template, grammar: Grammar) -> Skeleton:
    """Replay the template's rules top-down into one structure."""
    h = grammar.hierarchy
    terminals: list[tuple[Path, TNode]] = []
    internals: list[tuple[Path, TNode]] = []
    parts: list[tuple[Path, FeatureStructure]] = []

    def visit(node: TNode, path: Path) -> None:
        if node.is_terminal:
            terminals.append((path, node))
            parts.append((path, node.skeleton))
            return
        internals.append((path, node))
        try:
            rule = grammar.rules[node.rule]
        except KeyError:
            raise GrammarDriftError(f"template {t.id} uses unknown rule {node.rule!r}") from None
        parts.append((path, rule.sign))
        for i, c in enumerate(node.children, 1):
            visit(c, path + (dtr(i),))

    visit(t.root, ())
    fs = unify_many(FeatureStructure.of_type(), parts, h)
    if fs is None:
        raise GrammarDriftError(f"template {t.id} does not expand under the current grammar")
    return Skeleton(fs, tuple(terminals), tuple(internals))


def instantiate_hits(skeleton: Skeleton, t: Template, hits: Sequence[RetrievalHit], m: Mrs,
                     grammar: Grammar, timer=_NO_TIMER, compiled: CompiledTemplate | None = None
                     ) -> tuple[list[InstantiationResult], list[tuple[RetrievalHit, str]]]:
    """Fill the terminal slots of ``t`` left to right with lexical entries.

    Each slot takes the input relation a hit binds to it, looks up its
    entries and unifies entry and relation into the slot, backtracking over
    entries.  Hits into the same template differ only in which of several
    same-typed relations fills a slot, so they are searched together: the
    work on a common prefix of slot choices is done once.

    With ``compiled`` the slots are filled by type assignment alone; hits
    it cannot express go through the general search.

    Returns the results and, for every hit that produced none, the reason.
    """
    failed: list[tuple[RetrievalHit, str]] = []
    entries_at: dict[int, list[LexicalEntry]] = {}
    with timer.step(LEXICAL_LOOKUP):
        live = []
        for hit in hits:
            gap = None
            for _, node in skeleton.terminals:
                pos = hit.binding[node.slot]
                if pos not in entries_at:
                    entries_at[pos] = grammar.lexical_lookup(m.liszt[pos].pred)
                if not entries_at[pos]:
                    gap = m.liszt[pos].pred
            if gap is None:
                live.append(hit)
            else:
                failed.append((hit, str(LexicalGapError(gap))))

    results: list[InstantiationResult] = []
    produced: set[int] = set()
    general = live
    if compiled is not None and live:
        with timer.step(TERMINAL_MATCHING):
            general = _fill_compiled(compiled, skeleton, live, entries_at, m, grammar, results,
                                     produced)
    with timer.step(TERMINAL_MATCHING):
        terminals = skeleton.terminals
        choice: list[tuple[int, LexicalEntry]] = []
        base = Builder(grammar.hierarchy)
        root = base.add(skeleton.fs) if general else 0

        # the working graph is only copied where alternatives remain
        def fill(k: int, b: Builder, group: list[RetrievalHit]) -> None:
            if k == len(terminals):
                hit = group[0]
                r = _finish(b, root, t, terminals, choice, hit)
                if r is not None:
                    results.append(r)
                    produced.add(id(hit))
                return
            path, node = terminals[k]
            by_pos: dict[int, list[RetrievalHit]] = {}
            for hit in group:
                by_pos.setdefault(hit.binding[node.slot], []).append(hit)
            options = [(pos, e) for pos in by_pos for e in entries_at[pos]]
            for n, (pos, entry) in enumerate(options):
                bb = b if n == len(options) - 1 else b.copy()
                if not _place(bb, bb.follow(root, path), entry, node, grammar, m.liszt[pos]):
                    continue
                choice.append((pos, entry))
                fill(k + 1, bb, by_pos[pos])
                choice.pop()

        if general:
            fill(0, base, general)
    failed += [(hit, "terminal matching failed") for hit in live if id(hit) not in produced]
    return results, failed


def _fill_compiled(c: CompiledTemplate, skeleton: Skeleton, hits, entries_at, m, grammar,
                   results, produced) -> list[RetrievalHit]:
    """Instantiate through ``c``; returns the hits that need the general search."""
    slots = [node.slot for _, node in skeleton.terminals]
    rest: list[RetrievalHit] = []
    for hit in hits:
        positions = [hit.binding[s] for s in slots]
        if not c.consistent(positions, m):
            continue
        found = []
        options = [[(hit.binding[s], e) for e in entries_at[hit.binding[s]]] for s in slots]
        for choice in itertools.product(*options):
            r = c.instantiate(choice, m, grammar)
            if r is UNSUPPORTED:
                rest.append(hit)
                break
            if r is not None:
                fs, string, deriv = r
                found.append(InstantiationResult(fs, string, hit.covered, c.template.id, deriv))
        else:
            results.extend(found)
            if found:
                produced.add(id(hit))
    return rest


def _place(b: Builder, slot: int, entry: LexicalEntry, node: TNode, grammar: Grammar,
           rel) -> bool:
    """Unify ``entry``, bound to ``rel``, into the terminal at ``slot``."""
    if entry.skeleton is node.skeleton or entry.skeleton == node.skeleton:
        # the slot already holds the entry's skeleton; only ORTH and KEY are new
        for paths, t in entry.delta:
            x = b.follow(slot, paths[0])
            for p in paths[1:]:
                if not b.merge(x, b.follow(slot, p)):
                    return False
            if t != TOP and not b.constrain(x, t):
                return False
        return grammar.bind_relation(b, slot, rel)
    lex = b.add(entry.fs)
    return grammar.bind_relation(b, lex, rel) and b.merge(slot, lex)


def instantiate(skeleton: Skeleton, t: Template, hit: RetrievalHit, m: Mrs, grammar: Grammar,
                timer=_NO_TIMER) -> list[InstantiationResult]:
    """Instantiate a single hit.  Raises LexicalGapError if a bound relation has no entry."""
    results, failed = instantiate_hits(skeleton, t, [hit], m, grammar, timer)
    for _, reason in failed:
        if reason.startswith("no lexical entry"):
            raise LexicalGapError(reason.rsplit(" ", 1)[1])
    return results


def _finish(b: Builder, root: int, t, slots, choice, hit) -> InstantiationResult | None:
    orth_at: dict[Path, str] = {}
    leaves: dict[Path, Derivation] = {}

    def cat_at(path: Path) -> str | None:
        node = b.find(root)
        for f in path + (CAT,):
            node = b.arcs[node].get(f)
            if node is None:
                return None
            node = b.find(node)
        return b.types[node]

    for (path, _), (rel_pos, entry) in zip(slots, choice):
        orth_at[path] = entry.orth
        leaves[path] = Derivation(entry.name, (rel_pos,), cat=cat_at(path), provenance=EBL)

    def build(node: TNode, path: Path) -> Derivation | None:
        if node.is_terminal:
            return leaves[path]
        kids = []
        for i, c in enumerate(node.children, 1):
            kid = build(c, path + (dtr(i),))
            if kid is None:
                return None
            kids.append(kid)
        orth_at[path] = join_orth(orth_at[path + (dtr(i),)] for i in range(1, len(kids) + 1))
        if not b.constrain(b.follow(root, path + (ORTH,)), string_atom(orth_at[path])):
            return None
        rels = tuple(sorted(r for k in kids for r in k.rels))
        return Derivation(node.rule, rels, tuple(kids), cat=cat_at(path), provenance=EBL)

    deriv = build(t.root, ())
    if deriv is None:
        return None
    try:
        fs = b.finish(root, frozenset(dtr(i) for i in range(1, len(t.root.children) + 1)))
    except CycleError:
        return None
    return InstantiationResult(fs, orth_at[()], hit.covered, t.id, deriv)


@dataclass
class ApplyFailure:
    template_id: str
    covered: tuple[int, ...]
    reason: str


@dataclass
class ApplyOptions:
    """``precompute_expansion`` keeps each template's expansion across inputs;
    ``compiled_matching`` (only with it) also keeps a compiled form for fast
    terminal matching."""
    precompute_expansion: bool = False
    compiled_matching: bool = True
    _cache: dict = field(default_factory=dict, repr=False)
    _compiled: dict = field(default_factory=dict, repr=False)

    def skeleton(self, t: Template, grammar: Grammar) -> Skeleton:
        if not self.precompute_expansion:
            return expand(t, grammar)
        sk = self._cache.get(id(t))
        if sk is None:
            sk = self._cache[id(t)] = expand(t, grammar)
        return sk

    def compiled(self, t: Template, sk: Skeleton, grammar: Grammar) -> CompiledTemplate | None:
        if not (self.precompute_expansion and self.compiled_matching):
            return None
        if id(t) not in self._compiled:
            self._compiled[id(t)] = compile_template(sk.fs, sk.terminals, sk.internals, t, grammar)
        return self._compiled[id(t)]


def generate(d: DecisionTree, m: Mrs, grammar: Grammar, mode: str = EXACT,
             options: ApplyOptions | None = None, failures: list | None = None,
             timer=_NO_TIMER) -> list[InstantiationResult]:
    """The whole application phase for one input.

    Exact mode keeps complete results only (full coverage, goal category).
    Partial modes keep fragments too; ``partial-longest`` drops any result
    whose coverage lies strictly inside another result's.  Ordered by
    coverage size (largest first), then string.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    options = options or ApplyOptions()
    with timer.step(INDEXING):
        if mode == EXACT:
            hits = retrieve_exact(d, m, grammar)
        else:
            hits = retrieve_partial(d, m, grammar, EXHAUSTIVE)
    full = tuple(range(len(m.liszt)))
    results: list[InstantiationResult] = []
    seen = set()
    groups: dict[str, list[RetrievalHit]] = {}
    for hit in hits:
        groups.setdefault(hit.template.id, []).append(hit)
    for group in groups.values():
        t = group[0].template
        try:
            with timer.step(INSTANTIATION):
                sk = options.skeleton(t, grammar)
                compiled = options.compiled(t, sk, grammar)
        except GrammarDriftError as exc:
            if failures is not None:
                failures.extend(ApplyFailure(t.id, hit.covered, str(exc)) for hit in group)
            continue
        found, failed = instantiate_hits(sk, t, group, m, grammar, timer, compiled)
        if failures is not None:
            failures.extend(ApplyFailure(t.id, hit.covered, why) for hit, why in failed)
        for r in found:
            if mode == EXACT and not (r.covered == full and grammar.is_goal(r.fs, m)):
                continue
            key = (r.covered, r.fs)
            if key in seen:
                continue
            seen.add(key)
            results.append(r)
    if mode == PARTIAL_LONGEST:
        results = suppress_contained(results)
    return sorted(results, key=lambda r: (-len(r.covered), r.string, r.template_id))

"""Templates: generalized derivation trees, and their extraction."""
from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Sequence

from .chart import Derivation, GenResult
from .grammar import Grammar
from .mrs import GElem, GMrs, abstract, canonical_key, generalize
from .tfs import FeatureStructure, TypeHierarchy, fs_subsumes


class TemplateIntegrityError(ValueError):
    pass


@dataclass(frozen=True)
class TNode:
    """One template node.

    Internal nodes name a rule; terminals carry the syntactic skeleton of the
    lexical entry seen in training.  ``span`` lists the root-key slots the
    node covers (a terminal covers exactly one).
    """
    rule: str | None
    span: tuple[int, ...]
    cat: str | None = None
    children: tuple[TNode, ...] = ()
    skeleton: FeatureStructure | None = None

    @property
    def is_terminal(self) -> bool:
        return self.rule is None

    @property
    def slot(self) -> int:
        return self.span[0]

    def terminals(self) -> list[TNode]:
        if self.is_terminal:
            return [self]
        return [t for c in self.children for t in c.terminals()]

    def nodes(self):
        yield self
        for c in self.children:
            yield from c.nodes()

    def __str__(self) -> str:
        if self.is_terminal:
            return f"<{self.cat}:{self.slot}>"
        return f"({self.rule} {' '.join(map(str, self.children))})"


@dataclass
class Template:
    key: tuple[GElem, ...]
    root: TNode
    fingerprint: str
    abstraction: bool = True
    id: str | None = None
    origin: str = ""
    phrasal: bool = False

    def terminals(self) -> list[TNode]:
        return self.root.terminals()

    def local_gmrs(self, node: TNode) -> tuple[GElem, ...]:
        return tuple(self.key[s] for s in node.span)

    def __str__(self) -> str:
        return f"{self.id or '?'} {list(map(str, self.key))} {self.root}"


def gmrs_of(result: GenResult, h: TypeHierarchy, abstraction: bool) -> GMrs:
    g = generalize(result.mrs)
    if abstraction:
        g = abstract(g, h)
    return canonical_key(g)


def extract_template(result: GenResult, grammar: Grammar, abstraction: bool = True) -> Template:
    """Generalize the derivation of a generation result into a template."""
    key = gmrs_of(result, grammar.hierarchy, abstraction)
    slot_of = {rel: k for k, rel in enumerate(key.order)}

    def convert(d: Derivation) -> TNode:
        if d.is_leaf:
            try:
                entry = grammar.entry(d.label)
            except KeyError:
                raise TemplateIntegrityError(f"unknown lexical entry {d.label!r}") from None
            return TNode(None, (slot_of[d.rels[0]],), d.cat, (), entry.skeleton)
        if d.label not in grammar.rules:
            raise TemplateIntegrityError(f"derivation uses unknown rule {d.label!r}")
        kids = tuple(convert(c) for c in d.children)
        if len(kids) != grammar.rules[d.label].arity:
            raise TemplateIntegrityError(f"arity mismatch at rule {d.label!r}")
        span = tuple(sorted(s for k in kids for s in k.span))
        return TNode(d.label, span, d.cat, kids)

    root = convert(result.derivation)
    if sorted(root.span) != list(range(len(key))):
        raise TemplateIntegrityError("derivation leaves do not cover the input relations")
    return Template(key.elems, root, grammar.fingerprint, abstraction, origin=result.string)


def subtemplate(t: Template, node: TNode) -> Template:
    """Standalone template rooted at ``node`` with its own index key."""
    sub = canonical_key([t.key[s] for s in node.span])
    new_slot = {node.span[old_pos]: k for k, old_pos in enumerate(sub.order)}

    def remap(n: TNode) -> TNode:
        span = tuple(sorted(new_slot[s] for s in n.span))
        return replace(n, span=span, children=tuple(remap(c) for c in n.children))

    return Template(sub.elems, remap(node), t.fingerprint, t.abstraction, origin=t.origin,
                    phrasal=True)


@dataclass(frozen=True)
class PhrasalFilter:
    name: str
    test: Callable[[TNode], bool] = field(compare=False)

    def __call__(self, node: TNode) -> bool:
        return self.test(node)


def saturated_np() -> PhrasalFilter:
    return PhrasalFilter("saturated-np", lambda n: n.cat == "np")


def min_daughters(k: int) -> PhrasalFilter:
    return PhrasalFilter(f"min-daughters:{k}", lambda n: len(n.children) >= k)


def no_immediate_recursion() -> PhrasalFilter:
    return PhrasalFilter("no-immediate-recursion",
                         lambda n: all(c.rule != n.rule for c in n.children))


_FILTER_RE = re.compile(r"(saturated-np|no-immediate-recursion|min-daughters:(\d+))")


def parse_filter(spec: str) -> PhrasalFilter:
    m = _FILTER_RE.fullmatch(spec.strip())
    if m is None:
        raise ValueError(f"unknown filter {spec!r} "
                         "(known: saturated-np, min-daughters:K, no-immediate-recursion)")
    if m.group(2):
        return min_daughters(int(m.group(2)))
    return saturated_np() if m.group(1) == "saturated-np" else no_immediate_recursion()


def passes(node: TNode, filters: Sequence[PhrasalFilter]) -> bool:
    return all(f(node) for f in filters)


def phrasal_nodes(node: TNode) -> Iterable[TNode]:
    """Proper descendants that are built by a rule (phrasal signs)."""
    for c in node.children:
        if not c.is_terminal:
            yield c
            yield from phrasal_nodes(c)


def extract_phrasal_templates(t: Template, filters: Sequence[PhrasalFilter] = ()) -> list[Template]:
    """Every rule-built proper subtree of ``t`` accepted by all filters."""
    return [subtemplate(t, n) for n in phrasal_nodes(t.root) if passes(n, filters)]


def same_template(a: Template, b: Template, h: TypeHierarchy) -> bool:
    """Structural equality: key, shape, rules, spans and terminal skeletons."""
    if a.key != b.key or a.fingerprint != b.fingerprint:
        return False

    def same(x: TNode, y: TNode) -> bool:
        if (x.rule, x.span, x.cat, len(x.children)) != (y.rule, y.span, y.cat, len(y.children)):
            return False
        if x.is_terminal:
            return (fs_subsumes(x.skeleton, y.skeleton, h)
                    and fs_subsumes(y.skeleton, x.skeleton, h))
        return all(same(c, d) for c, d in zip(x.children, y.children))

    return same(a.root, b.root)


def node_to_json(n: TNode) -> dict:
    d: dict = {"rule": n.rule, "span": list(n.span), "cat": n.cat}
    if n.is_terminal:
        d["skeleton"] = n.skeleton.to_json()
    else:
        d["children"] = [node_to_json(c) for c in n.children]
    return d


def node_from_json(d: dict) -> TNode:
    if d["rule"] is None:
        return TNode(None, tuple(d["span"]), d["cat"], (), FeatureStructure.from_json(d["skeleton"]))
    return TNode(d["rule"], tuple(d["span"]), d["cat"],
                 tuple(node_from_json(c) for c in d["children"]))


def template_to_json(t: Template) -> dict:
    return {
        "id": t.id,
        "key": [[e.pred, e.handel] for e in t.key],
        "abstraction": t.abstraction,
        "phrasal": t.phrasal,
        "origin": t.origin,
        "root": node_to_json(t.root),
    }


def template_from_json(d: dict, fingerprint: str) -> Template:
    return Template(tuple(GElem(p, h) for p, h in d["key"]), node_from_json(d["root"]),
                    fingerprint, d["abstraction"], d["id"], d["origin"], d["phrasal"])

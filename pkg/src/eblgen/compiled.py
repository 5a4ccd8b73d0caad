"""Templates compiled against the grammar for fast terminal matching.

Once a template's skeleton is expanded, every lexical entry that fits a
terminal adds the same ORTH and KEY structure up to two types: the KEY
type (its relation) and the ORTH string.  Compiling places that shared
structure once.  What is left per input is to meet the input's relation
types and variable atoms into fixed KEY nodes, and to write the surface
string into the root sign.  No graph is copied or merged at that point.

Inputs the compiled form cannot express exactly (a relation repeating a
variable, a role missing from a KEY the root sign can see, an entry with another shape) are
reported as unsupported so the caller can use the general path.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .chart import EBL, Derivation, join_orth
from .grammar import CAT, HANDEL, KEY, ORTH, Grammar, LexicalEntry, dtr
from .mrs import Mrs
from .template import Template, TNode
from .tfs import TOP, Builder, CycleError, FeatureStructure, Path, string_atom, var_atom

UNSUPPORTED = object()


@dataclass(frozen=True)
class _Slot:
    key: int                          # builder node of the terminal's KEY
    roles: dict[str, int]             # KEY feature -> builder node
    shape: tuple
    hidden: bool                      # KEY not reachable from the root sign


@dataclass
class CompiledTemplate:
    template: Template
    slots: tuple[_Slot, ...]          # yield order
    types: list[str]                  # builder node types after compilation
    root_sign: FeatureStructure       # ORTH and KEY atoms still open
    out: dict[int, int]               # builder node -> root_sign position
    shared: tuple[tuple[tuple[int, str], ...], ...]   # (slot, role) groups on one node
    leaf_orth_out: tuple[int | None, ...]             # root_sign position of each leaf ORTH
    # postorder (rule, arity, cat, ORTH position); leaves as (None, yield index, cat, None)
    plan: tuple[tuple[str | None, int, str | None, int | None], ...]

    def consistent(self, positions: Sequence[int], m: Mrs) -> bool:
        """Cheap necessary condition: roles sharing a node carry the same variable."""
        liszt = m.liszt
        for group in self.shared:
            seen = None
            for k, f in group:
                rel = liszt[positions[k]]
                v = rel.handel if f == HANDEL else rel.role(f)
                if v is None:
                    continue
                if seen is None:
                    seen = v
                elif v != seen:
                    return False
        return True

    def instantiate(self, choice: Sequence[tuple[int, LexicalEntry]], m: Mrs, grammar: Grammar):
        """Result fields for one slot filling, None on a clash, or UNSUPPORTED."""
        meet = grammar.hierarchy.meet
        assign: dict[int, str] = {}
        types = self.types
        for slot, (pos, entry) in zip(self.slots, choice):
            if entry.shape != slot.shape:
                return UNSUPPORTED
            rel = m.liszt[pos]
            node = slot.key
            t = meet(assign.get(node, types[node]), rel.pred)
            t = t and meet(t, entry.key_type)
            if t is None:
                return None
            assign[node] = t
            seen = set()
            for f, v in ((HANDEL, rel.handel), *rel.roles):
                if v in seen:
                    return UNSUPPORTED
                node = slot.roles.get(f)
                if node is None:
                    # a role the entry never mentions lands on a fresh arc; harmless
                    # unless the arc would show in the root sign
                    if slot.hidden:
                        seen.add(v)
                        continue
                    return UNSUPPORTED
                seen.add(v)
                t = meet(assign.get(node, types[node]), var_atom(v))
                if t is None:
                    return None
                assign[node] = t
        out_types = list(self.root_sign.types)
        for node, t in assign.items():
            i = self.out.get(node)
            if i is not None:
                out_types[i] = t
        orth: list[str] = []
        built: list[Derivation] = []
        # postorder: a leaf step pushes, a rule step replaces its children by their mother
        for rule, n, cat, orth_node in self.plan:
            if rule is None:
                pos, e = choice[n]
                orth.append(e.orth)
                built.append(Derivation(e.name, (pos,), (), cat, EBL))
                continue
            kids = tuple(built[-n:])
            del built[-n:]
            text = join_orth(orth[-n:])
            del orth[-n:]
            if orth_node is not None:
                out_types[orth_node] = string_atom(text)
            orth.append(text)
            rels = tuple(sorted(r for k in kids for r in k.rels))
            built.append(Derivation(rule, rels, kids, cat, EBL))
        for i, (_, e) in zip(self.leaf_orth_out, choice):
            if i is not None:
                out_types[i] = string_atom(e.orth)
        fs = FeatureStructure(out_types, self.root_sign.arcs)
        return fs, orth[0], built[0]


def _shape_for(node: TNode, grammar: Grammar) -> tuple | None:
    """The delta shape shared by most entries fitting ``node``."""
    counts: dict[tuple, int] = {}
    for e in grammar.lexicon:
        if e.skeleton == node.skeleton:
            counts[e.shape] = counts.get(e.shape, 0) + 1
    if not counts:
        return None
    return max(counts, key=counts.get)


def compile_template(skeleton_fs: FeatureStructure, terminals, internals, t: Template,
                     grammar: Grammar) -> CompiledTemplate | None:
    """Compile an expanded template; None if it cannot be expressed this way."""
    b = Builder(grammar.hierarchy)
    root = b.add(skeleton_fs)
    shapes = []
    for path, node in terminals:
        shape = _shape_for(node, grammar)
        if shape is None:
            return None
        shapes.append(shape)
        slot = b.follow(root, path)
        for paths, typ in shape:
            x = b.follow(slot, paths[0])
            for p in paths[1:]:
                if not b.merge(x, b.follow(slot, p)):
                    return None
            if typ is not None and typ != TOP and not b.constrain(x, typ):
                return None
    orth_at = {p: b.follow(root, p + (ORTH,)) for p, _ in list(terminals) + list(internals)}
    keys = [b.follow(root, p + (KEY,)) for p, _ in terminals]
    orth_at = {p: b.find(x) for p, x in orth_at.items()}
    orth_nodes = list(orth_at.values())
    # every ORTH must be a private, unconstrained leaf so that writing strings cannot fail
    if len(set(orth_nodes)) != len(orth_nodes):
        return None
    if any(b.types[x] != TOP or b.arcs[x] for x in orth_nodes):
        return None
    keys = [b.find(k) for k in keys]
    assignable = set(keys)
    for key in keys:
        assignable.update(b.find(n) for n in b.arcs[key].values())
    if assignable & set(orth_nodes):
        return None
    cats: dict[Path, str | None] = {}
    for path, _ in list(terminals) + list(internals):
        node = b.follow(root, path)
        c = b.arcs[node].get(CAT)
        if c is not None and b.find(c) in assignable:
            return None
        cats[path] = None if c is None else b.types[b.find(c)]
    ids: dict[int, int] = {}
    try:
        sign = b.finish(root, frozenset(dtr(i) for i in range(1, len(t.root.children) + 1)), ids)
    except CycleError:
        return None
    out = {b.find(k): v for k, v in ids.items()}
    slots = tuple(_Slot(key, {f: b.find(n) for f, n in b.arcs[key].items()}, shape, key not in out)
                  for key, shape in zip(keys, shapes))
    on_node: dict[int, list[tuple[int, str]]] = {}
    for k, slot in enumerate(slots):
        for f, node in slot.roles.items():
            on_node.setdefault(node, []).append((k, f))
    shared = tuple(tuple(g) for g in on_node.values() if len(g) > 1)
    post: list[tuple[str | None, int, str | None, int | None]] = []
    leaf_index = {p: k for k, (p, _) in enumerate(terminals)}

    def visit(node: TNode, path: Path) -> None:
        if node.is_terminal:
            post.append((None, leaf_index[path], cats[path], None))
            return
        for i, c in enumerate(node.children, 1):
            visit(c, path + (dtr(i),))
        post.append((node.rule, len(node.children), cats[path], out.get(orth_at[path])))

    visit(t.root, ())
    return CompiledTemplate(
        t, slots, [b.types[b.find(i)] for i in range(len(b.types))], sign, out, shared,
        tuple(out.get(orth_at[p]) for p, _ in terminals), tuple(post))

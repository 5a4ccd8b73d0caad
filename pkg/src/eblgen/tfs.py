"""Typed feature structures over a finite type hierarchy.

Feature structures are immutable rooted graphs.  Every node carries a type
name; arcs are labelled by feature names and at most one arc per feature
leaves a node.  Re-entrancy is a shared target node.  Nodes are numbered in
a canonical preorder (features visited in sorted order), so two structures
are isomorphic exactly when they compare equal.

Besides declared types the hierarchy knows two families of atoms:

    "text"   string atoms, placed directly below the type ``string``
    @x5      variable atoms (handles, individuals, events), below ``var``

Distinct atoms never unify with each other.
"""
from __future__ import annotations

import re
from typing import Iterable, Mapping, Sequence

TOP = "TOP"
STRING = "string"
VAR = "var"

Path = tuple[str, ...]


class HierarchyError(ValueError):
    """The declared type hierarchy violates a structural requirement."""


class UnknownTypeError(LookupError):
    pass


class CycleError(ValueError):
    """A merge produced a cyclic structure (distinct from a clash)."""


def is_atom(name: str) -> bool:
    return name.startswith('"') or name.startswith("@")


def string_atom(text: str) -> str:
    return '"' + text + '"'


def var_atom(name: str) -> str:
    return "@" + name


class TypeHierarchy:
    """Partially ordered named types with unique greatest lower bounds.

    ``parents`` maps each type to its immediate supertypes; ``TOP`` needs no
    entry.  ``upper_bounds`` are the abstraction ceilings used when
    generalizing semantic types.
    """

    def __init__(self, parents: Mapping[str, Iterable[str]], upper_bounds: Iterable[str] = ()):
        if not parents and TOP not in parents:
            raise HierarchyError("no TOP type declared")
        self._parents: dict[str, tuple[str, ...]] = {TOP: ()}
        for child, ps in parents.items():
            if child == TOP:
                if tuple(ps):
                    raise HierarchyError("TOP cannot have supertypes")
                continue
            ps = tuple(dict.fromkeys(ps))
            if not ps:
                raise HierarchyError(f"type {child!r} has no supertype")
            self._parents[child] = ps
        for child, ps in self._parents.items():
            for p in ps:
                if p not in self._parents:
                    raise HierarchyError(f"type {child!r} has undeclared supertype {p!r}")
            if is_atom(child):
                raise HierarchyError(f"atom syntax is reserved: {child!r}")
        self._ancestors = self._close()
        self._descendants: dict[str, set[str]] = {t: set() for t in self._parents}
        for t, anc in self._ancestors.items():
            for a in anc:
                self._descendants[a].add(t)
        self._meets: dict[tuple[str, str], str | None] = {}
        self._check_meets()
        self.upper_bounds = tuple(upper_bounds)
        for ub in self.upper_bounds:
            self._check(ub)
        for i, a in enumerate(self.upper_bounds):
            for b in self.upper_bounds[i + 1:]:
                if self.subsumes(a, b) or self.subsumes(b, a):
                    raise HierarchyError(f"upper bounds {a!r} and {b!r} are comparable")
        self._atom_ancestors: dict[str, frozenset[str]] = {}
        self._upper: dict[str, str | None] = {}

    def _close(self) -> dict[str, frozenset[str]]:
        ancestors: dict[str, frozenset[str]] = {}
        visiting: set[str] = set()

        def visit(t: str) -> frozenset[str]:
            if t in ancestors:
                return ancestors[t]
            if t in visiting:
                raise HierarchyError(f"is-a cycle through {t!r}")
            visiting.add(t)
            acc = {t}
            for p in self._parents[t]:
                acc |= visit(p)
            visiting.discard(t)
            ancestors[t] = frozenset(acc)
            return ancestors[t]

        for t in self._parents:
            visit(t)
        return ancestors

    def _check_meets(self) -> None:
        names = sorted(self._parents)
        for i, a in enumerate(names):
            for b in names[i:]:
                self._meets[a, b] = self._meets[b, a] = self._glb(a, b)

    def _glb(self, a: str, b: str) -> str | None:
        common = self._descendants[a] & self._descendants[b]
        if not common:
            return None
        maximal = [t for t in common
                   if not any(o != t and o in self._ancestors[t] for o in common)]
        if len(maximal) > 1:
            raise HierarchyError(f"types {a!r} and {b!r} have no unique meet: {sorted(maximal)}")
        return maximal[0]

    @property
    def types(self) -> frozenset[str]:
        return frozenset(self._parents)

    def parents(self, t: str) -> tuple[str, ...]:
        self._check(t)
        return self._parents[t]

    def __contains__(self, t: str) -> bool:
        return t in self._parents or is_atom(t)

    def __len__(self) -> int:
        return len(self._parents)

    def _check(self, t: str) -> None:
        if t not in self:
            raise UnknownTypeError(t)

    def ancestors(self, t: str) -> frozenset[str]:
        anc = self._ancestors.get(t)
        if anc is not None:
            return anc
        if not is_atom(t):
            raise UnknownTypeError(t)
        anc = self._atom_ancestors.get(t)
        if anc is None:
            parent = STRING if t.startswith('"') else VAR
            if parent not in self._parents:
                parent = TOP
            anc = self._atom_ancestors[t] = self._ancestors[parent] | {t}
        return anc

    def subsumes(self, general: str, specific: str) -> bool:
        """True iff ``specific`` is ``general`` or one of its subtypes."""
        anc = self._ancestors.get(specific)
        if anc is not None and general in self._parents:
            return general in anc
        if general == specific:
            self._check(general)
            return True
        self._check(general)
        return general in self.ancestors(specific)

    def meet(self, a: str, b: str) -> str | None:
        """Greatest lower bound of two types, or None when they clash."""
        if a == b or b == TOP:
            return a
        if a == TOP:
            return b
        m = self._meets.get((a, b), False)
        if m is not False:
            return m
        if self.subsumes(a, b):
            return b
        if self.subsumes(b, a):
            return a
        return None

    def upper_bound_of(self, t: str) -> str | None:
        """The upper bound strictly above ``t``, if one governs it."""
        if t in self._upper:
            return self._upper[t]
        found = [ub for ub in self.upper_bounds if ub != t and self.subsumes(ub, t)]
        if len(found) > 1:
            raise HierarchyError(f"{t!r} lies below several upper bounds: {found}")
        ub = self._upper[t] = found[0] if found else None
        return ub


class FeatureStructure:
    """Immutable typed feature structure in canonical node order.

    ``types[i]`` is the type of node ``i``; ``arcs[i]`` is a sorted tuple of
    ``(feature, target)`` pairs.  Node 0 is the root.
    """

    __slots__ = ("types", "arcs", "_hash")

    def __init__(self, types: Sequence[str], arcs: Sequence[Sequence[tuple[str, int]]]):
        self.types = tuple(types)
        self.arcs = tuple(tuple(a) for a in arcs)
        self._hash = hash((self.types, self.arcs))

    @classmethod
    def of_type(cls, t: str = TOP) -> FeatureStructure:
        return cls((t,), ((),))

    @classmethod
    def from_equations(cls, h: TypeHierarchy,
                       equations: Iterable[tuple[Path, str]]) -> FeatureStructure:
        """Build a structure from ``(path, value)`` pairs.

        A value starting with ``#`` is a tag: every path carrying the same
        tag shares one node.  Anything else is a type name or atom.  Raises
        ValueError if the equations are inconsistent.
        """
        b = Builder(h)
        root = b.new(TOP)
        tags: dict[str, int] = {}
        for path, value in equations:
            node = b.follow(root, path)
            if value.startswith("#"):
                if value in tags:
                    ok = b.merge(node, tags[value])
                else:
                    tags[value] = node
                    ok = True
            else:
                h._check(value)
                ok = b.constrain(node, value)
            if not ok:
                raise ValueError(f"inconsistent equation {'.'.join(path)} = {value}")
        return b.finish(root)

    def __eq__(self, other: object) -> bool:
        return (isinstance(other, FeatureStructure) and self._hash == other._hash
                and self.types == other.types and self.arcs == other.arcs)

    def __hash__(self) -> int:
        return self._hash

    def __len__(self) -> int:
        return len(self.types)

    @property
    def type(self) -> str:
        return self.types[0]

    def features(self) -> tuple[str, ...]:
        return tuple(f for f, _ in self.arcs[0])

    def node(self, path: Path) -> int | None:
        """Position of the node at ``path``, None if absent."""
        node = 0
        for f in path:
            for g, t in self.arcs[node]:
                if g == f:
                    node = t
                    break
            else:
                return None
        return node

    def value(self, path: Path) -> str | None:
        """Type of the node at ``path``, None if the path is absent."""
        node = self.node(path)
        return None if node is None else self.types[node]

    def get(self, path: Path) -> FeatureStructure | None:
        node = self.node(path)
        if node is None:
            return None
        if node == 0:
            return self
        b = Builder(None)
        return b.finish(b.add(self) + node)

    def restrict(self, drop: Iterable[str]) -> FeatureStructure:
        """Copy without the given root features (unreachable parts vanish)."""
        b = Builder(None)
        return b.finish(b.add(self), drop=frozenset(drop))

    def shares(self, p: Path, q: Path) -> bool:
        a, b = self.node(p), self.node(q)
        return a is not None and a == b

    def paths(self) -> dict[Path, str]:
        """Every arc-path to a node, mapped to the node's type."""
        out: dict[Path, str] = {(): self.types[0]}
        stack: list[tuple[int, Path]] = [(0, ())]
        while stack:
            node, path = stack.pop()
            for f, t in self.arcs[node]:
                out[path + (f,)] = self.types[t]
                stack.append((t, path + (f,)))
        return out

    def to_json(self) -> dict:
        return {"types": list(self.types), "arcs": [[list(a) for a in arcs] for arcs in self.arcs]}

    @classmethod
    def from_json(cls, data: Mapping) -> FeatureStructure:
        return cls(data["types"], [[(f, t) for f, t in arcs] for arcs in data["arcs"]])

    def __repr__(self) -> str:
        return f"FeatureStructure({self})"

    def __str__(self) -> str:
        counts = [0] * len(self.types)
        for arcs in self.arcs:
            for _, t in arcs:
                counts[t] += 1
        tags: dict[int, int] = {}
        seen: set[int] = set()

        def show(node: int) -> str:
            prefix = ""
            if counts[node] > 1:
                tag = tags.setdefault(node, len(tags) + 1)
                prefix = f"#{tag}="
                if node in seen:
                    return f"#{tag}"
            seen.add(node)
            if not self.arcs[node]:
                return prefix + self.types[node]
            inner = " ".join(f"{f} {show(t)}" for f, t in self.arcs[node])
            typ = "" if self.types[node] == TOP else self.types[node] + " "
            return f"{prefix}[{typ}{inner}]"

        return show(0)


class Builder:
    """Mutable union-find graph used to construct and merge structures.

    ``add`` copies a structure in and returns its root id; ``merge`` unifies
    two nodes in place (False on a clash); ``finish`` reads a canonical
    structure back out.  ``copy`` gives an independent snapshot, which makes
    cheap backtracking possible.
    """

    __slots__ = ("h", "types", "arcs", "parent")

    def __init__(self, h: TypeHierarchy | None):
        self.h = h
        self.types: list[str] = []
        self.arcs: list[dict[str, int]] = []
        self.parent: list[int] = []

    def new(self, t: str) -> int:
        self.types.append(t)
        self.arcs.append({})
        self.parent.append(len(self.parent))
        return len(self.parent) - 1

    def copy(self) -> Builder:
        b = Builder.__new__(Builder)
        b.h = self.h
        b.types = self.types[:]
        b.parent = self.parent[:]
        b.arcs = [a.copy() for a in self.arcs]
        return b

    def add(self, fs: FeatureStructure) -> int:
        off = len(self.types)
        self.types.extend(fs.types)
        self.parent.extend(range(off, off + len(fs.types)))
        self.arcs.extend({f: t + off for f, t in arcs} for arcs in fs.arcs)
        return off

    def find(self, x: int) -> int:
        parent = self.parent
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    def follow(self, x: int, path: Path) -> int:
        x = self.find(x)
        for f in path:
            nxt = self.arcs[x].get(f)
            if nxt is None:
                nxt = self.new(TOP)
                self.arcs[x][f] = nxt
            x = self.find(nxt)
        return x

    def constrain(self, x: int, t: str) -> bool:
        """Narrow node ``x`` to type ``t`` in place (same as merging a fresh ``t`` node)."""
        x = self.find(x)
        m = self.h.meet(self.types[x], t)
        if m is None:
            return False
        self.types[x] = m
        return True

    def merge(self, x: int, y: int) -> bool:
        meet = self.h.meet
        types, arcs, parent, find = self.types, self.arcs, self.parent, self.find
        stack = [(x, y)]
        while stack:
            x, y = stack.pop()
            x, y = find(x), find(y)
            if x == y:
                continue
            t = meet(types[x], types[y])
            if t is None:
                return False
            if len(arcs[x]) < len(arcs[y]):
                x, y = y, x
            parent[y] = x
            types[x] = t
            ax = arcs[x]
            for f, v in arcs[y].items():
                w = ax.get(f)
                if w is None:
                    ax[f] = v
                else:
                    stack.append((w, v))
            arcs[y] = {}
        return True

    def finish(self, root: int, drop: frozenset[str] = frozenset(),
               ids: dict[int, int] | None = None) -> FeatureStructure:
        """Canonical structure below ``root``, leaving out root features in ``drop``.

        If ``ids`` is given it is filled with builder node -> output position.
        """
        find, types, arcs_of = self.find, self.types, self.arcs
        if ids is None:
            ids = {}
        open_nodes: set[int] = set()
        out_types: list[str] = []
        out_arcs: list[tuple] = []

        def visit(x: int) -> int:
            x = find(x)
            i = ids.get(x)
            if i is not None:
                if x in open_nodes:
                    raise CycleError("cyclic feature structure")
                return i
            i = ids[x] = len(out_types)
            out_types.append(types[x])
            out_arcs.append(())
            arcs = arcs_of[x]
            if arcs:
                open_nodes.add(x)
                out_arcs[i] = tuple([(f, visit(arcs[f])) for f in sorted(arcs)])
                open_nodes.discard(x)
            return i

        root = find(root)
        ids[root] = 0
        out_types.append(types[root])
        out_arcs.append(())
        open_nodes.add(root)
        arcs = arcs_of[root]
        out_arcs[0] = tuple([(f, visit(arcs[f])) for f in sorted(arcs) if f not in drop])
        return FeatureStructure(out_types, out_arcs)


def unify(a: FeatureStructure, b: FeatureStructure, h: TypeHierarchy) -> FeatureStructure | None:
    """Most general structure subsumed by both, or None on a type clash.

    Raises CycleError when the merge would create a cycle.
    """
    bld = Builder(h)
    ra = bld.add(a)
    rb = bld.add(b)
    if not bld.merge(ra, rb):
        return None
    return bld.finish(ra)


def unify_at(a: FeatureStructure, path: Path, b: FeatureStructure,
             h: TypeHierarchy) -> FeatureStructure | None:
    """Unify ``b`` into the node of ``a`` at ``path`` (created if missing)."""
    bld = Builder(h)
    ra = bld.add(a)
    rb = bld.add(b)
    if not bld.merge(bld.follow(ra, path), rb):
        return None
    return bld.finish(ra)


def unify_many(a: FeatureStructure, parts: Iterable[tuple[Path, FeatureStructure]],
               h: TypeHierarchy) -> FeatureStructure | None:
    """Unify several structures into ``a`` at their paths in one pass."""
    bld = Builder(h)
    ra = bld.add(a)
    for path, fs in parts:
        rb = bld.add(fs)
        if not bld.merge(bld.follow(ra, path), rb):
            return None
    return bld.finish(ra)


def fs_subsumes(a: FeatureStructure, b: FeatureStructure, h: TypeHierarchy) -> bool:
    """True iff ``a`` is at least as general as ``b``.

    Checks for a root-preserving homomorphism from ``a`` into ``b`` that
    never weakens a type and keeps every re-entrancy of ``a``.
    """
    mapping: dict[int, int] = {}
    stack = [(0, 0)]
    while stack:
        i, j = stack.pop()
        seen = mapping.get(i)
        if seen is not None:
            if seen != j:
                return False
            continue
        mapping[i] = j
        if not h.subsumes(a.types[i], b.types[j]):
            return False
        barcs = dict(b.arcs[j])
        for f, t in a.arcs[i]:
            if f not in barcs:
                return False
            stack.append((t, barcs[f]))
    return True


_PATH_RE = re.compile(r"[A-Za-z0-9_\-*]+")


def parse_path(text: str) -> Path:
    text = text.strip()
    if not text:
        return ()
    parts = tuple(text.split("."))
    for p in parts:
        if not _PATH_RE.fullmatch(p):
            raise ValueError(f"bad feature name {p!r} in path {text!r}")
    return parts



def reroot(fs: FeatureStructure, root: Path, arcs: Mapping[str, Path]) -> FeatureStructure:
    """Make the node at ``root`` the new root and give it extra arcs.

    ``arcs`` maps new feature names to paths in the original structure.
    Used to turn a rule body with MOTHER/DTRn into a mother sign that
    points at its daughters.
    """
    b = Builder(None)
    r = b.add(fs)
    new_root = b.follow(r, root)
    for f, path in arcs.items():
        if f in b.arcs[new_root]:
            raise ValueError(f"feature {f} already present at the new root")
        b.arcs[new_root][f] = b.follow(r, path)
    return b.finish(new_root)

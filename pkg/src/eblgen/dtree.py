"""The decision tree: a trie over sorted generalized-MRS elements.

Edges are labelled with (type, canonical handle) elements.  Lookups walk
the trie with a sorted query key; an edge is followed when its type
subsumes the query element's concrete type and the handle correspondence
built so far stays a bijection.

Partial walks may start anywhere.  Inside a walk the sorted key must be
consumed contiguously, with one exception: members of a run of equal types
may be passed over when the walk takes another member of the same run and
the passed-over member is distinguishable from it (different handle or
concrete type).  Identical elements are interchangeable, so passing one
over never makes a different match possible.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path as FilePath
from typing import Iterator, Sequence

from .mrs import GElem
from .template import Template, same_template, template_from_json, template_to_json
from .tfs import TypeHierarchy

MAGIC = "EBLGEN-INDEX"
FORMAT_VERSION = 1


class StaleIndexError(ValueError):
    """The index was built under a different grammar."""


class IndexFormatError(ValueError):
    pass


@dataclass(frozen=True)
class QueryElem:
    pred: str        # type used for ordering and grouping
    concrete: str    # type tested against edge labels
    handel: str
    source: int      # position in the originating liszt

    @property
    def ident(self) -> tuple[str, str, str]:
        return (self.pred, self.concrete, self.handel)


@dataclass(frozen=True)
class Walk:
    """A template reached by a walk; ``binding[k]`` is the query position of key slot k."""
    template: Template
    binding: tuple[int, ...]
    handles: tuple[tuple[str, str], ...]

    @property
    def positions(self) -> frozenset[int]:
        return frozenset(self.binding)


class TrieNode:
    __slots__ = ("children", "templates", "by_pred", "depths", "_edges_for")

    def __init__(self):
        self.children: dict[GElem, TrieNode] = {}
        self.templates: list[Template] = []
        self.by_pred: dict[str, list[tuple[GElem, TrieNode]]] = {}
        self.depths: frozenset[int] = frozenset()   # edges down to each template below
        self._edges_for: dict[str, list[tuple[GElem, TrieNode]]] = {}

    def child(self, label: GElem) -> TrieNode:
        """The child along ``label``, created if missing."""
        node = self.children.get(label)
        if node is None:
            node = self.children[label] = TrieNode()
            self.by_pred.setdefault(label.pred, []).append((label, node))
            self._edges_for = {}
        return node

    def edges_for(self, concrete: str, h: TypeHierarchy) -> list[tuple[GElem, TrieNode]]:
        """Outgoing edges whose type subsumes ``concrete``, by label type in sorted order."""
        edges = self._edges_for.get(concrete)
        if edges is None:
            edges = self._edges_for[concrete] = [
                e for p in sorted(self.by_pred) if h.subsumes(p, concrete) for e in self.by_pred[p]]
        return edges


class DecisionTree:
    def __init__(self, fingerprint: str | None = None, abstraction: bool | None = None):
        self.fingerprint = fingerprint
        self.abstraction = abstraction
        self.root = TrieNode()
        self.templates: list[Template] = []
        self._depths_stale = True

    def __len__(self) -> int:
        return len(self.templates)

    def nodes(self) -> Iterator[TrieNode]:
        stack = [self.root]
        while stack:
            n = stack.pop()
            yield n
            stack.extend(n.children.values())

    @property
    def node_count(self) -> int:
        return sum(1 for _ in self.nodes())

    @property
    def edge_count(self) -> int:
        return self.node_count - 1

    def check(self, fingerprint: str) -> None:
        if self.fingerprint is not None and self.fingerprint != fingerprint:
            raise StaleIndexError(
                f"index built for grammar {self.fingerprint}, current grammar is {fingerprint}")

    def holder(self, key: Sequence[GElem]) -> TrieNode | None:
        node = self.root
        for e in key:
            node = node.children.get(e)
            if node is None:
                return None
        return node

    def insert(self, t: Template, h: TypeHierarchy) -> bool:
        """Store ``t`` under its key.  False if an equal template is already there."""
        self.check(t.fingerprint)
        if self.abstraction is not None and self.abstraction != t.abstraction:
            raise ValueError("template abstraction setting differs from the index")
        self.fingerprint = t.fingerprint
        self.abstraction = t.abstraction
        node = self.root
        for e in t.key:
            node = node.child(e)
        if any(same_template(t, o, h) for o in node.templates):
            return False
        if t.id is None:
            t.id = f"t{len(self.templates) + 1}"
        node.templates.append(t)
        self.templates.append(t)
        self._depths_stale = True
        return True

    def _refresh_depths(self) -> None:
        def visit(node: TrieNode) -> frozenset[int]:
            ds = {0} if node.templates else set()
            for c in node.children.values():
                ds.update(d + 1 for d in visit(c))
            node.depths = frozenset(ds)
            return node.depths

        visit(self.root)
        self._depths_stale = False

    def walks(self, query: Sequence[QueryElem], h: TypeHierarchy, full: bool) -> list[Walk]:
        """All template-yielding walks over the sorted ``query``.

        With ``full`` every query element must be consumed; otherwise every
        admissible contiguous walk is reported.
        """
        n = len(query)
        if n == 0:
            return []
        if self._depths_stale:
            self._refresh_depths()
        if full and n not in self.root.depths:
            return []
        group = [0] * n
        for i in range(1, n):
            group[i] = group[i - 1] + (query[i].pred != query[i - 1].pred)
        members: dict[int, list[int]] = {}
        for i, g in enumerate(group):
            members.setdefault(g, []).append(i)
        # a walk continues in its current group or the next one
        after = [members[group[i]] + members.get(group[i] + 1, []) for i in range(n)]
        left = {g: len(ms) for g, ms in members.items()}
        # among identical elements only the first unused one is ever tried
        twin_before = [next((j for j in range(i) if query[j].ident == query[i].ident), None)
                       for i in range(n)]
        found: dict[tuple, Walk] = {}
        used = [False] * n
        path: list[int] = []
        fwd: dict[str, str] = {}
        bwd: dict[str, str] = {}

        def closed() -> bool:
            if full:
                return len(path) == n
            first, last = group[path[0]], group[path[-1]]
            for g in range(first + 1, last):
                taken = {query[i].ident for i in members[g] if used[i]}
                if any(not used[i] and query[i].ident in taken for i in members[g]):
                    return False
            return True

        def record(node: TrieNode) -> None:
            if node.templates and path and closed():
                handles = tuple(sorted(fwd.items()))
                for t in node.templates:
                    walk = Walk(t, tuple(path), handles)
                    found.setdefault((t.id, walk.binding), walk)

        def step(node: TrieNode) -> None:
            if node.templates:
                record(node)
            if not node.children:
                return
            if path:
                last = path[-1]
                # a full walk never comes back to a group it has left
                cands = members[group[last]] if full and left[group[last]] else after[last]
            else:
                cands = members[0] if full else range(n)
            rest = n - len(path) - 1
            for i in cands:
                if used[i]:
                    continue
                twin = twin_before[i]
                if twin is not None and not used[twin]:
                    continue
                q = query[i]
                for label, child in node.edges_for(q.concrete, h):
                    if full and rest not in child.depths:
                        continue
                    f, b = fwd.get(label.handel), bwd.get(q.handel)
                    if (f is not None and f != q.handel) or (b is not None and b != label.handel):
                        continue
                    fresh = f is None
                    if fresh:
                        fwd[label.handel] = q.handel
                        bwd[q.handel] = label.handel
                    used[i] = True
                    left[group[i]] -= 1
                    path.append(i)
                    step(child)
                    path.pop()
                    left[group[i]] += 1
                    used[i] = False
                    if fresh:
                        del fwd[label.handel]
                        del bwd[q.handel]

        step(self.root)
        return sorted(found.values(), key=lambda w: (w.template.id, w.binding))

    def dumps(self) -> str:
        body = {
            "abstraction": self.abstraction,
            "templates": [template_to_json(t) for t in self.templates],
        }
        return (f"{MAGIC} {FORMAT_VERSION}\n"
                f"fingerprint {self.fingerprint or '-'}\n"
                + json.dumps(body, indent=1, sort_keys=True) + "\n")

    def save(self, path) -> None:
        FilePath(path).write_text(self.dumps(), encoding="utf-8")

    @classmethod
    def loads(cls, text: str, h: TypeHierarchy) -> DecisionTree:
        lines = text.split("\n", 2)
        if len(lines) < 3 or not lines[0].startswith(MAGIC + " "):
            raise IndexFormatError("not an index file (bad magic header)")
        try:
            version = int(lines[0].split()[1])
        except (IndexError, ValueError):
            raise IndexFormatError("bad format version") from None
        if version != FORMAT_VERSION:
            raise IndexFormatError(f"unsupported index format version {version}")
        parts = lines[1].split()
        if len(parts) != 2 or parts[0] != "fingerprint":
            raise IndexFormatError("missing fingerprint line")
        fingerprint = None if parts[1] == "-" else parts[1]
        try:
            body = json.loads(lines[2])
        except json.JSONDecodeError as exc:
            raise IndexFormatError(f"corrupt index body: {exc}") from None
        d = cls(fingerprint, body["abstraction"])
        for td in body["templates"]:
            t = template_from_json(td, fingerprint)
            node = d.root
            for e in t.key:
                node = node.child(e)
            node.templates.append(t)
            d.templates.append(t)
        d._depths_stale = True
        return d

    @classmethod
    def load(cls, path, h: TypeHierarchy) -> DecisionTree:
        return cls.loads(FilePath(path).read_text(encoding="utf-8"), h)

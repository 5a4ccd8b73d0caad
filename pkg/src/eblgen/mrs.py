"""Flat semantics: relations, generalization, type abstraction, index keys.

An MRS here is a top handle, an index variable and a bag of relations.  The
bag order never matters; every function below is invariant under
permutation of ``Mrs.liszt``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

from .tfs import TypeHierarchy


class MrsSyntaxError(ValueError):
    pass


@dataclass(frozen=True)
class Rel:
    pred: str
    handel: str
    roles: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "roles", tuple(sorted(self.roles)))

    def role(self, name: str) -> str | None:
        for r, v in self.roles:
            if r == name:
                return v
        return None

    def __str__(self) -> str:
        args = "".join(f" {r}={v}" for r, v in self.roles)
        return f"[{self.pred} {self.handel}{args}]"


@dataclass(frozen=True)
class Mrs:
    top: str
    index: str
    liszt: tuple[Rel, ...]

    def __len__(self) -> int:
        return len(self.liszt)

    def with_liszt(self, liszt: Iterable[Rel]) -> Mrs:
        return Mrs(self.top, self.index, tuple(liszt))

    def __str__(self) -> str:
        return f"TOP={self.top} INDEX={self.index} " + " ".join(map(str, self.liszt))


@dataclass(frozen=True, order=True)
class GElem:
    pred: str
    handel: str

    def __str__(self) -> str:
        return f"({self.pred} {self.handel})"


@dataclass(frozen=True)
class GMrs:
    """A canonical, sorted generalized MRS.

    ``order[k]`` is the position, in the bag handed to ``canonical_key``, of
    the element that ended up at position ``k``.
    """
    elems: tuple[GElem, ...]
    order: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.elems)

    def __iter__(self):
        return iter(self.elems)

    def __getitem__(self, k: int) -> GElem:
        return self.elems[k]

    def __str__(self) -> str:
        return "[" + ", ".join(map(str, self.elems)) + "]"


def generalize(m: Mrs) -> list[GElem]:
    """Keep only (type, handle) per relation."""
    return [GElem(r.pred, r.handel) for r in m.liszt]


def abstract(g: Iterable[GElem], h: TypeHierarchy) -> list[GElem]:
    """Replace each type by the upper bound governing it, if any."""
    out = []
    for e in g:
        ub = h.upper_bound_of(e.pred)
        out.append(GElem(ub, e.handel) if ub else e)
    return out


@lru_cache(maxsize=4096)
def _natural(name: str) -> tuple[str, int]:
    m = re.fullmatch(r"(\D*)(\d*)", name)
    if m is None:
        return (name, -1)
    return (m.group(1), int(m.group(2)) if m.group(2) else -1)


def canonical_key(g: Sequence[GElem]) -> GMrs:
    """Sort by type name and renumber handles by first occurrence.

    Equal type names are ordered by the types of the other elements sharing
    their handle, then by the original handle name.
    """
    g = list(g)
    mates: list[tuple[str, ...]] = []
    for i, e in enumerate(g):
        mates.append(tuple(sorted(o.pred for j, o in enumerate(g) if j != i and o.handel == e.handel)))
    order = sorted(range(len(g)), key=lambda i: (g[i].pred, mates[i], _natural(g[i].handel)))
    renumber: dict[str, str] = {}
    elems = []
    for i in order:
        e = g[i]
        if e.handel not in renumber:
            renumber[e.handel] = f"h{len(renumber) + 1}"
        elems.append(GElem(e.pred, renumber[e.handel]))
    return GMrs(tuple(elems), tuple(order))


@dataclass(frozen=True)
class Binding:
    """Correspondence found by ``handle_consistent_match``.

    ``pairs[k] = (index_position, input_position)``; ``handles`` maps index
    handles to input handles.
    """
    pairs: tuple[tuple[int, int], ...]
    handles: tuple[tuple[str, str], ...]

    def target(self, k: int) -> int:
        return dict(self.pairs)[k]


def handle_consistent_match(index: GMrs | Sequence[GElem], input: GMrs | Sequence[GElem],
                            h: TypeHierarchy) -> Binding | None:
    """Match every index element to a distinct input element.

    Each index type must subsume the matched input type and the handle
    correspondence must be a bijection between the handles involved.
    Returns the first binding found, or None.
    """
    idx = list(index)
    inp = list(input)
    used = [False] * len(inp)
    fwd: dict[str, str] = {}
    bwd: dict[str, str] = {}
    pairs: list[tuple[int, int]] = []

    def search(k: int) -> bool:
        if k == len(idx):
            return True
        e = idx[k]
        for j, q in enumerate(inp):
            if used[j] or not h.subsumes(e.pred, q.pred):
                continue
            f, b = fwd.get(e.handel), bwd.get(q.handel)
            if (f is not None and f != q.handel) or (b is not None and b != e.handel):
                continue
            fresh = f is None
            if fresh:
                fwd[e.handel] = q.handel
                bwd[q.handel] = e.handel
            used[j] = True
            pairs.append((k, j))
            if search(k + 1):
                return True
            pairs.pop()
            used[j] = False
            if fresh:
                del fwd[e.handel]
                del bwd[q.handel]
        return False

    if len(idx) > len(inp) or not search(0):
        return None
    return Binding(tuple(pairs), tuple(sorted(fwd.items())))


_REL_RE = re.compile(r"\[([^\[\]]*)\]")
_HEAD_RE = re.compile(r"(TOP|INDEX)=(\S+)")


def parse_rel(text: str, roles: Iterable[str] | None = None) -> Rel:
    toks = text.split()
    if len(toks) < 2:
        raise MrsSyntaxError(f"relation needs a type and a handle: [{text}]")
    pred, handel, rest = toks[0], toks[1], toks[2:]
    args = []
    allowed = None if roles is None else set(roles)
    for tok in rest:
        if "=" not in tok:
            raise MrsSyntaxError(f"expected ROLE=value, got {tok!r}")
        r, v = tok.split("=", 1)
        if allowed is not None and r not in allowed:
            raise MrsSyntaxError(f"unknown role {r!r}")
        args.append((r, v))
    if len({r for r, _ in args}) != len(args):
        raise MrsSyntaxError(f"duplicate role in [{text}]")
    return Rel(pred, handel, tuple(args))


def parse_mrs(text: str, roles: Iterable[str] | None = None) -> Mrs:
    """Read ``TOP=h1 INDEX=e2 [GiveRel h1 EVENT=e2 ...] ...``."""
    head = _REL_RE.sub(" ", text)
    found = dict(_HEAD_RE.findall(head))
    leftover = _HEAD_RE.sub(" ", head).split()
    if leftover:
        raise MrsSyntaxError(f"unexpected text {' '.join(leftover)!r}")
    rels = tuple(parse_rel(m.group(1), roles) for m in _REL_RE.finditer(text))
    top = found.get("TOP")
    index = found.get("INDEX")
    if top is None or index is None:
        raise MrsSyntaxError("MRS needs TOP= and INDEX=")
    return Mrs(top, index, rels)

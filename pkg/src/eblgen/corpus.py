"""Corpus files, a small MRS constructor, and seeded random inputs.

A corpus file holds records separated by blank lines.  Each record is one
MRS literal (it may span several lines) plus optional annotations::

    ; comment lines start with ; or #
    :name sandy
    :select 0
    TOP=h1 INDEX=e2 [GiveRel h1 EVENT=e2 ACT=x5 ...] ...

``:select`` lists the reading indices (in the chart's string order) to
train on; without it every reading is used.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .chart import CorpusItem
from .grammar import Grammar
from .mrs import Mrs, MrsSyntaxError, Rel, parse_mrs


class CorpusSyntaxError(ValueError):
    def __init__(self, message: str, line: int):
        self.line = line
        super().__init__(f"line {line}: {message}")


def parse_corpus(text: str, roles: Iterable[str] | None = None) -> list[CorpusItem]:
    items: list[CorpusItem] = []
    buf: list[str] = []
    name = ""
    select: tuple[int, ...] | None = None
    start = 0

    def flush() -> None:
        nonlocal buf, name, select
        if buf:
            try:
                m = parse_mrs(" ".join(buf), roles)
            except MrsSyntaxError as exc:
                raise CorpusSyntaxError(str(exc), start) from None
            items.append(CorpusItem(m, select, name or f"item{len(items) + 1}"))
        elif name or select is not None:
            raise CorpusSyntaxError("annotation without an MRS", start)
        buf, name, select = [], "", None

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if line.startswith((";", "#")):
            continue
        if not line:
            flush()
            continue
        if not buf and not name and select is None:
            start = lineno
        if line.startswith(":name"):
            name = line[len(":name"):].strip()
        elif line.startswith(":select"):
            try:
                select = tuple(int(x) for x in line[len(":select"):].split())
            except ValueError:
                raise CorpusSyntaxError(f"bad selection {line!r}", lineno) from None
            if not select or any(i < 0 for i in select):
                raise CorpusSyntaxError(f"bad selection {line!r}", lineno)
        elif line.startswith(":"):
            raise CorpusSyntaxError(f"unknown annotation {line.split()[0]}", lineno)
        else:
            buf.append(line)
    flush()
    return items


def load_corpus(path, roles: Iterable[str] | None = None) -> list[CorpusItem]:
    return parse_corpus(Path(path).read_text(encoding="utf-8"), roles)


def format_corpus(items: Sequence[CorpusItem], header: str = "") -> str:
    out = [f"; {line}" for line in header.splitlines()]
    for item in items:
        if out:
            out.append("")
        if item.label:
            out.append(f":name {item.label}")
        if item.select is not None:
            out.append(":select " + " ".join(map(str, item.select)))
        m = item.mrs
        out.append(f"TOP={m.top} INDEX={m.index}")
        out.extend(f"  {r}" for r in m.liszt)
    return "\n".join(out) + "\n"


@dataclass(frozen=True)
class NP:
    """A noun phrase description: a name, or determiner + noun + adjectives."""
    head: str
    det: str | None = None
    adjs: tuple[str, ...] = ()


@dataclass
class MrsBuilder:
    """Assembles clause MRSs with fresh handle and variable names."""
    counter: int = 0
    rels: list[Rel] = field(default_factory=list)

    def fresh(self, prefix: str) -> str:
        self.counter += 1
        return f"{prefix}{self.counter}"

    def np(self, np: NP) -> str:
        x = self.fresh("x")
        if np.det is None:
            self.rels.append(Rel(np.head, self.fresh("h"), (("INST", x),)))
            return x
        restr = self.fresh("h")
        self.rels.append(Rel(np.det, self.fresh("h"),
                             (("BV", x), ("RESTR", restr), ("SCOPE", self.fresh("h")))))
        self.rels.append(Rel(np.head, restr, (("INST", x),)))
        for a in np.adjs:
            self.rels.append(Rel(a, restr, (("ARG", x),)))
        return x

    def clause(self, verb: str, subj: NP, obj: NP | None = None, goal: NP | None = None) -> Mrs:
        top, event = self.fresh("h"), self.fresh("e")
        roles = [("EVENT", event), ("ACT", self.np(subj))]
        if obj is not None:
            roles.append(("UND", self.np(obj)))
        if goal is not None:
            g = self.np(goal)
            roles.append(("PREPARG", g))
            self.rels.append(Rel("To", self.fresh("h"), (("ARG", self.fresh("v")), ("PREP", g))))
        self.rels.append(Rel(verb, top, tuple(roles)))
        self.rels.append(Rel("TempOver", top, (("EVENT", event),)))
        return Mrs(top, event, tuple(self.rels))


def clause(verb: str, subj: NP, obj: NP | None = None, goal: NP | None = None) -> Mrs:
    return MrsBuilder().clause(verb, subj, obj, goal)


def rename(m: Mrs, rng: random.Random) -> Mrs:
    """Same MRS with shuffled liszt and randomly renumbered variables."""
    names = sorted({m.top, m.index} | {r.handel for r in m.liszt}
                   | {v for r in m.liszt for _, v in r.roles})
    numbers = rng.sample(range(1, 10 * len(names) + 1), len(names))
    new = {v: v.rstrip("0123456789") + str(k) for v, k in zip(names, numbers)}
    liszt = [Rel(r.pred, new[r.handel], tuple((role, new[v]) for role, v in r.roles))
             for r in m.liszt]
    rng.shuffle(liszt)
    return Mrs(new[m.top], new[m.index], tuple(liszt))


@dataclass(frozen=True)
class Vocabulary:
    names: tuple[str, ...]
    nouns: tuple[str, ...]
    adjs: tuple[str, ...]
    dets: tuple[str, ...]
    intrans: tuple[str, ...]
    trans: tuple[str, ...]
    dative: tuple[str, ...]

    @classmethod
    def from_grammar(cls, g: Grammar) -> Vocabulary:
        h = g.hierarchy
        lexical = sorted({e.relation for e in g.lexicon})

        def below(t: str) -> tuple[str, ...]:
            return tuple(p for p in lexical if p != t and h.subsumes(t, p))

        return cls(below("Named"), below("RegNom"), below("IntersAdj"), ("Some", "Def"),
                   below("ActOnly"), below("ActUnd"), below("ActUndPrep"))


def random_np(rng: random.Random, v: Vocabulary, max_adjs: int = 2) -> NP:
    if rng.random() < 0.4:
        return NP(rng.choice(v.names))
    k = rng.randint(0, max_adjs)
    return NP(rng.choice(v.nouns), rng.choice(v.dets), tuple(rng.sample(v.adjs, k)))


def random_clause(rng: random.Random, v: Vocabulary, max_adjs: int = 2) -> Mrs:
    kind = rng.choice(("intrans", "trans", "dative", "dative"))
    subj = random_np(rng, v, max_adjs)
    if kind == "intrans":
        return clause(rng.choice(v.intrans), subj)
    if kind == "trans":
        return clause(rng.choice(v.trans), subj, random_np(rng, v, max_adjs))
    return clause(rng.choice(v.dative), subj, random_np(rng, v, max_adjs),
                  random_np(rng, v, max_adjs))


def random_inputs(g: Grammar, n: int, seed: int = 0, max_adjs: int = 2) -> list[Mrs]:
    """``n`` seeded random clause MRSs, renamed and shuffled."""
    rng = random.Random(seed)
    v = Vocabulary.from_grammar(g)
    return [rename(random_clause(rng, v, max_adjs), rng) for _ in range(n)]


def substitute(m: Mrs, g: Grammar, rng: random.Random) -> Mrs:
    """Swap each lexical pred for a random one below the same upper bound."""
    h = g.hierarchy
    lexical = sorted({e.relation for e in g.lexicon})
    liszt = []
    for r in m.liszt:
        bound = h.upper_bound_of(r.pred)
        pool = [p for p in lexical if bound and p != bound and h.subsumes(bound, p)]
        liszt.append(Rel(rng.choice(pool), r.handel, r.roles) if pool else r)
    return m.with_liszt(liszt)


def paraphrase_inputs(corpus: Sequence[Mrs], g: Grammar, n: int, seed: int = 0) -> list[Mrs]:
    """``n`` seeded variants of corpus MRSs: new words, new names, new order."""
    rng = random.Random(seed)
    return [rename(substitute(rng.choice(corpus), g, rng), rng) for _ in range(n)]


def toy_corpus_path() -> Path:
    return Path(__file__).parent / "data" / "toy.corpus"

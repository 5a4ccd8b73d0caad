"""Grammar source format, rules and lexicon.

A grammar file has directives and three sections::

    :roles EVENT ACT ...          role vocabulary for MRS relations
    :start s                      CAT of complete results
    :types
    child1 child2 < parent        subtype declarations (repeat a child for
    :upper-bound Named RegNom     multiple inheritance); abstraction ceilings
    :rules
    rule NAME : DTR1 DTR2         header lists the daughters in order
      PATH = VALUE ; PATH = VALUE equations; VALUE is a type, "string" or #tag
    :lexicon
    macro NAME                    reusable equation block
    entry NAME REL [: macro ...] [; PATH = VALUE ...]

Lines starting with ``;`` are comments.  Rule paths start at MOTHER or a
DTRn.  A lexical entry's KEY node is typed by its relation name and is
unified with the input relation during lookup.

Conventions shared with the generator: ORTH holds the surface string, KEY
the realized relation (role values are variable atoms), HOOK.LTOP and
HOOK.INDEX the handle and variable exposed to the rest of the sentence.
"""
from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path as FilePath

from .mrs import Mrs, Rel
from .tfs import (TOP, Builder, FeatureStructure, HierarchyError, Path, TypeHierarchy, parse_path,
                  reroot, string_atom, unify, var_atom)

ORTH = "ORTH"
KEY = "KEY"
CAT = "CAT"
HANDEL = "HANDEL"
HOOK_LTOP = ("HOOK", "LTOP")
HOOK_INDEX = ("HOOK", "INDEX")

_DTR_RE = re.compile(r"DTR([1-9][0-9]*)")
_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_\-]*")


class GrammarError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def dtr(i: int) -> str:
    return f"DTR{i}"


@dataclass(frozen=True)
class GrammarRule:
    name: str
    arity: int
    body: FeatureStructure
    sign: FeatureStructure

    @cached_property
    def daughter_cats(self) -> tuple[str | None, ...]:
        return tuple(self.sign.value((dtr(i), CAT)) for i in range(1, self.arity + 1))

    @property
    def daughter_features(self) -> tuple[str, ...]:
        return tuple(dtr(i) for i in range(1, self.arity + 1))


@dataclass(frozen=True)
class LexicalEntry:
    name: str
    relation: str
    fs: FeatureStructure

    @property
    def orth(self) -> str:
        v = self.fs.value((ORTH,))
        return v[1:-1] if v and v.startswith('"') else ""

    @cached_property
    def skeleton(self) -> FeatureStructure:
        """Syntactic constraints only: the entry without ORTH and KEY."""
        return self.fs.restrict((ORTH, KEY))

    @cached_property
    def delta(self) -> tuple[tuple[tuple[Path, ...], str], ...]:
        """What the entry adds to its skeleton, as (equal paths, type) per node.

        Every node reachable through ORTH or KEY is listed with all its
        paths, skeleton paths first.  Applying these equations to a node
        already subsumed by the skeleton is the same as unifying the entry
        into it.
        """
        paths: dict[int, list[Path]] = {}

        def walk(node: int, prefix: Path) -> None:
            paths.setdefault(node, []).append(prefix)
            for f, t in self.fs.arcs[node]:
                walk(t, prefix + (f,))

        walk(0, ())
        out = []
        for node, ps in paths.items():
            if not any(p and p[0] in (ORTH, KEY) for p in ps):
                continue
            ps.sort(key=lambda p: (p[0] in (ORTH, KEY), len(p), p))
            out.append((tuple(ps), self.fs.types[node]))
        return tuple(out)

    @cached_property
    def shape(self) -> tuple:
        """``delta`` with the KEY and ORTH types blanked: what entries of one kind share."""
        return tuple((ps, None if (KEY,) in ps or (ORTH,) in ps else t) for ps, t in self.delta)

    @cached_property
    def key_type(self) -> str:
        return self.fs.value((KEY,)) or TOP


@dataclass
class Grammar:
    hierarchy: TypeHierarchy
    rules: dict[str, GrammarRule]
    lexicon: tuple[LexicalEntry, ...]
    roles: tuple[str, ...]
    start: str
    source: str = ""
    _index: dict[str, list[LexicalEntry]] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._index = {}
        for e in self.lexicon:
            self._index.setdefault(e.relation, []).append(e)
        self._by_name = {e.name: e for e in self.lexicon}
        self._goal_cache: dict[tuple[str, str], FeatureStructure] = {}

    @cached_property
    def fingerprint(self) -> str:
        return hashlib.sha256(self.source.encode("utf-8")).hexdigest()[:16]

    def lexical_lookup(self, relation: str) -> list[LexicalEntry]:
        """All entries realizing ``relation``, in file order."""
        return list(self._index.get(relation, ()))

    def entry(self, name: str) -> LexicalEntry:
        return self._by_name[name]

    def rel_fs(self, rel: Rel) -> FeatureStructure:
        """The relation as a structure: typed by its pred, role values as atoms."""
        types = [rel.pred]
        node_of: dict[str, int] = {}
        arcs = []
        for f, v in sorted([(HANDEL, rel.handel), *rel.roles]):
            if v not in node_of:
                node_of[v] = len(types)
                types.append(var_atom(v))
            arcs.append((f, node_of[v]))
        return FeatureStructure(types, [arcs] + [()] * (len(types) - 1))

    def bind_relation(self, b: Builder, node: int, rel: Rel) -> bool:
        """Unify ``rel`` into the KEY of the sign at builder node ``node``."""
        key = b.follow(node, (KEY,))
        if not b.constrain(key, rel.pred):
            return False
        atoms: dict[str, int] = {}
        for f, v in ((HANDEL, rel.handel), *rel.roles):
            target = b.follow(key, (f,))
            seen = atoms.get(v)
            if seen is None:
                atoms[v] = target
                if not b.constrain(target, var_atom(v)):
                    return False
            elif not b.merge(target, seen):
                return False
        return True

    def instance(self, entry: LexicalEntry, rel: Rel) -> FeatureStructure | None:
        """The entry with its KEY unified against a concrete input relation."""
        b = Builder(self.hierarchy)
        root = b.add(entry.fs)
        return b.finish(root) if self.bind_relation(b, root, rel) else None

    def goal_fs(self, m: Mrs) -> FeatureStructure:
        key = (m.top, m.index)
        fs = self._goal_cache.get(key)
        if fs is None:
            fs = self._goal_cache[key] = FeatureStructure.from_equations(self.hierarchy, [
                ((CAT,), self.start),
                (HOOK_LTOP, var_atom(m.top)),
                (HOOK_INDEX, var_atom(m.index)),
            ])
        return fs

    def is_goal(self, fs: FeatureStructure, m: Mrs) -> bool:
        # when every goal path is present, unifying only narrows those nodes
        meet = self.hierarchy.meet
        narrowed: dict[int, str] = {}
        for path, t in (((CAT,), self.start), (HOOK_LTOP, var_atom(m.top)),
                        (HOOK_INDEX, var_atom(m.index))):
            node = fs.node(path)
            if node is None:
                return unify(fs, self.goal_fs(m), self.hierarchy) is not None
            t = meet(narrowed.get(node, fs.types[node]), t)
            if t is None:
                return False
            narrowed[node] = t
        return True

    def __str__(self) -> str:
        return (f"Grammar({len(self.hierarchy)} types, {len(self.rules)} rules, "
                f"{len(self.lexicon)} entries, fingerprint {self.fingerprint})")


def _split_equations(text: str, lineno: int) -> list[tuple[Path, str]]:
    eqs = []
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        if part.count("=") != 1:
            raise GrammarError(f"expected PATH = VALUE, got {part!r}", lineno)
        lhs, rhs = (s.strip() for s in part.split("="))
        try:
            path = parse_path(lhs)
        except ValueError as exc:
            raise GrammarError(str(exc), lineno) from None
        if not path:
            raise GrammarError("empty path", lineno)
        if not rhs:
            raise GrammarError(f"missing value for {lhs}", lineno)
        if rhs.startswith('"'):
            if len(rhs) < 2 or not rhs.endswith('"'):
                raise GrammarError(f"unterminated string {rhs}", lineno)
            rhs = string_atom(rhs[1:-1])
        elif not (rhs.startswith("#") or _NAME_RE.fullmatch(rhs)):
            raise GrammarError(f"bad value {rhs!r}", lineno)
        eqs.append((path, rhs))
    return eqs


class _Block:
    def __init__(self, kind: str, name: str, lineno: int, header: dict):
        self.kind, self.name, self.lineno, self.header = kind, name, lineno, header
        self.eqs: list[tuple[Path, str, int]] = []


def _build(h: TypeHierarchy, eqs, lineno: int, what: str) -> FeatureStructure:
    for _, value, line in eqs:
        if not value.startswith("#") and value not in h:
            raise GrammarError(f"unknown type {value!r} in {what}", line)
    try:
        return FeatureStructure.from_equations(h, [(p, v) for p, v, _ in eqs])
    except ValueError as exc:
        raise GrammarError(f"{what} is unsatisfiable: {exc}", lineno) from None


def load_grammar(text: str) -> Grammar:
    """Parse and validate grammar source text."""
    parents: dict[str, list[str]] = {}
    upper: list[str] = []
    roles: tuple[str, ...] = ()
    start: str | None = None
    section = None
    blocks: list[_Block] = []
    current: _Block | None = None

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith(";"):
            continue
        if line.startswith(":"):
            word, _, rest = line.partition(" ")
            rest = rest.strip()
            current = None
            if word in (":types", ":rules", ":lexicon"):
                section = word
            elif word == ":roles":
                roles = tuple(rest.split())
            elif word == ":start":
                start = rest
            elif word == ":upper-bound":
                if section != ":types":
                    raise GrammarError(":upper-bound outside :types", lineno)
                upper.extend(rest.split())
            else:
                raise GrammarError(f"unknown directive {word}", lineno)
            continue
        if section == ":types":
            if "<" not in line:
                raise GrammarError(f"expected 'child ... < parent', got {line!r}", lineno)
            lhs, rhs = line.split("<", 1)
            kids, ps = lhs.split(), rhs.split()
            if not kids or len(ps) != 1:
                raise GrammarError("a type line needs children and exactly one parent", lineno)
            for name in kids + ps:
                if not _NAME_RE.fullmatch(name):
                    raise GrammarError(f"bad type name {name!r}", lineno)
            for k in kids:
                parents.setdefault(k, []).append(ps[0])
        elif section == ":rules":
            if line.startswith("rule "):
                head, sep, dtrs = line[5:].partition(":")
                name = head.strip()
                if not sep or not _NAME_RE.fullmatch(name):
                    raise GrammarError("expected 'rule NAME : DTR1 ...'", lineno)
                names = dtrs.split()
                if len(set(names)) != len(names):
                    raise GrammarError(f"duplicate daughter path in rule {name}", lineno)
                if names != [dtr(i) for i in range(1, len(names) + 1)] or not names:
                    raise GrammarError(f"daughters of {name} must be DTR1..DTRn in order", lineno)
                current = _Block("rule", name, lineno, {"arity": len(names)})
                blocks.append(current)
            elif current is not None:
                current.eqs += [(p, v, lineno) for p, v in _split_equations(line, lineno)]
            else:
                raise GrammarError(f"equation outside a rule: {line!r}", lineno)
        elif section == ":lexicon":
            if line.startswith(("macro ", "entry ")):
                kind, _, rest = line.partition(" ")
                head, _, eqtext = rest.partition(";")
                names, _, macros = head.partition(":")
                names = names.split()
                if kind == "macro":
                    if len(names) != 1:
                        raise GrammarError("expected 'macro NAME'", lineno)
                    current = _Block("macro", names[0], lineno, {})
                else:
                    if len(names) != 2:
                        raise GrammarError("expected 'entry NAME RELATION'", lineno)
                    current = _Block("entry", names[0], lineno,
                                     {"relation": names[1], "macros": macros.split()})
                blocks.append(current)
                current.eqs += [(p, v, lineno) for p, v in _split_equations(eqtext, lineno)]
            elif current is not None:
                current.eqs += [(p, v, lineno) for p, v in _split_equations(line, lineno)]
            else:
                raise GrammarError(f"equation outside an entry: {line!r}", lineno)
        else:
            raise GrammarError("content before any section", lineno)

    if TOP not in {p for ps in parents.values() for p in ps}:
        raise GrammarError("no TOP type")
    try:
        h = TypeHierarchy(parents, upper)
    except (HierarchyError, LookupError) as exc:
        raise GrammarError(f"type hierarchy: {exc}") from None
    if start is None:
        raise GrammarError("missing :start")
    if start not in h.types:
        raise GrammarError(f"unknown start category {start!r}")

    rules: dict[str, GrammarRule] = {}
    macros: dict[str, list] = {}
    lexicon: list[LexicalEntry] = []
    names_seen: set[str] = set()
    for b in blocks:
        if b.kind == "rule":
            if b.name in rules:
                raise GrammarError(f"duplicate rule {b.name}", b.lineno)
            arity = b.header["arity"]
            for path, _, line in b.eqs:
                m = _DTR_RE.fullmatch(path[0])
                if path[0] != "MOTHER" and not (m and int(m.group(1)) <= arity):
                    raise GrammarError(f"rule path must start at MOTHER or DTR1..DTR{arity}", line)
            extra = [(("MOTHER",), TOP, b.lineno)]
            extra += [((dtr(i),), TOP, b.lineno) for i in range(1, arity + 1)]
            body = _build(h, b.eqs + extra, b.lineno, f"rule {b.name}")
            if any(body.value(("MOTHER", dtr(i))) is not None for i in range(1, arity + 1)):
                raise GrammarError(f"rule {b.name} constrains MOTHER.DTRn", b.lineno)
            try:
                sign = reroot(body, ("MOTHER",), {dtr(i): (dtr(i),) for i in range(1, arity + 1)})
            except ValueError as exc:
                raise GrammarError(f"rule {b.name}: {exc}", b.lineno) from None
            rules[b.name] = GrammarRule(b.name, arity, body, sign)
        elif b.kind == "macro":
            macros[b.name] = b.eqs
        else:
            if b.name in names_seen:
                raise GrammarError(f"duplicate entry {b.name}", b.lineno)
            names_seen.add(b.name)
            rel = b.header["relation"]
            if rel not in h.types:
                raise GrammarError(f"unknown relation {rel!r}", b.lineno)
            eqs = []
            for mname in b.header["macros"]:
                if mname not in macros:
                    raise GrammarError(f"unknown macro {mname!r}", b.lineno)
                eqs += macros[mname]
            eqs += b.eqs + [((KEY,), rel, b.lineno)]
            fs = _build(h, eqs, b.lineno, f"entry {b.name}")
            if fs.value((KEY,)) != rel:
                raise GrammarError(f"entry {b.name}: KEY must be typed {rel}", b.lineno)
            lexicon.append(LexicalEntry(b.name, rel, fs))
    return Grammar(h, rules, tuple(lexicon), roles, start, source=text)


def load_grammar_file(path) -> Grammar:
    return load_grammar(FilePath(path).read_text(encoding="utf-8"))


def toy_grammar_path() -> FilePath:
    return FilePath(__file__).parent / "data" / "toy.grammar"


_TOY: Grammar | None = None


def toy_grammar() -> Grammar:
    """The shipped grammar, loaded once."""
    global _TOY
    if _TOY is None:
        _TOY = load_grammar_file(toy_grammar_path())
    return _TOY

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eblgen.apply import query_key
from eblgen.dtree import DecisionTree, IndexFormatError, QueryElem, StaleIndexError
from eblgen.mrs import GElem, canonical_key
from eblgen.template import Template, TNode
from eblgen.tfs import TypeHierarchy
from oracles import subsequence_hits

LETTERS = TypeHierarchy({c: ["TOP"] for c in "abcdef"})


def letter_key(word: str) -> tuple[GElem, ...]:
    # one handle per letter, so repeated letters are identical elements
    return canonical_key([GElem(c, f"h{ord(c) - 96}") for c in word]).elems


def letter_template(word: str, tid: str | None = None) -> Template:
    key = letter_key(word)
    return Template(key, TNode("r", tuple(range(len(key)))), "fp", False, tid)


def letter_query(word: str) -> list[QueryElem]:
    return [QueryElem(c, c, f"h{ord(c) - 96}", i) for i, c in enumerate(sorted(word))]


def letter_tree(keys: dict[str, str]) -> DecisionTree:
    d = DecisionTree("fp", False)
    for tid, word in keys.items():
        d.insert(letter_template(word, tid), LETTERS)
    return d


def hit_ids(d: DecisionTree, query: str, full: bool = False) -> set[str]:
    return {w.template.id for w in d.walks(letter_query(query), LETTERS, full)}


EXAMPLE = {"t1": "ab", "t2": "abcd", "t3": "bcd"}


def test_prefix_sharing():
    d = letter_tree({"t1": "ab", "t2": "abcd"})
    assert d.edge_count == 4
    assert d.holder(letter_key("ab")).templates[0].id == "t1"
    d.insert(letter_template("bcd", "t3"), LETTERS)
    assert d.edge_count == 7


@pytest.mark.parametrize("query, expected", [
    ("abcd", {"t1", "t2", "t3"}),
    ("aabbcd", {"t1", "t3"}),
    ("abc", {"t1"}),
])
def test_letter_example(query, expected):
    d = letter_tree(EXAMPLE)
    assert hit_ids(d, query) == expected
    assert subsequence_hits(EXAMPLE, query) == expected


def test_full_walks_need_whole_query():
    d = letter_tree(EXAMPLE)
    assert hit_ids(d, "abcd", full=True) == {"t2"}
    assert hit_ids(d, "aabbcd", full=True) == set()
    assert hit_ids(d, "bcd", full=True) == {"t3"}


words = st.lists(st.sampled_from("abcd"), min_size=1, max_size=4).map(lambda w: "".join(sorted(w)))


@settings(max_examples=300, deadline=None)
@given(st.lists(words, min_size=1, max_size=5, unique=True),
       st.lists(st.sampled_from("abcde"), min_size=1, max_size=7).map("".join))
def test_walks_agree_with_group_window_oracle(keys, query):
    named = {f"t{i + 1}": w for i, w in enumerate(keys)}
    assert hit_ids(letter_tree(named), query) == subsequence_hits(named, query)


def test_walk_bindings_are_consistent():
    d = letter_tree(EXAMPLE)
    q = letter_query("aabbcd")
    for w in d.walks(q, LETTERS, full=False):
        assert len(set(w.binding)) == len(w.binding)
        assert [q[p].pred for p in w.binding] == [e.pred for e in w.template.key]


def test_handle_bijection_enforced():
    d = DecisionTree("fp", False)
    d.insert(Template((GElem("a", "h1"), GElem("b", "h1")), TNode("r", (0, 1)), "fp", False), LETTERS)
    split = [QueryElem("a", "a", "h1", 0), QueryElem("b", "b", "h2", 1)]
    shared = [QueryElem("a", "a", "h5", 0), QueryElem("b", "b", "h5", 1)]
    assert d.walks(split, LETTERS, full=True) == []
    assert len(d.walks(shared, LETTERS, full=True)) == 1


def test_duplicate_and_mismatched_inserts():
    d = letter_tree({"t1": "ab"})
    assert not d.insert(letter_template("ab"), LETTERS)
    assert len(d) == 1
    with pytest.raises(StaleIndexError):
        d.insert(Template(letter_key("c"), TNode("r", (0,)), "other", False), LETTERS)
    with pytest.raises(ValueError, match="abstraction"):
        d.insert(Template(letter_key("c"), TNode("r", (0,)), "fp", True), LETTERS)


def test_new_templates_get_sequential_ids():
    d = DecisionTree()
    for w in ("ab", "c", "bcd"):
        d.insert(letter_template(w), LETTERS)
    assert [t.id for t in d.templates] == ["t1", "t2", "t3"]


# -- persistence ----------------------------------------------------------------------------

def test_roundtrip_identity(corpus_tree, grammar, corpus):
    text = corpus_tree.dumps()
    back = DecisionTree.loads(text, grammar.hierarchy)
    assert back.dumps() == text
    assert back.fingerprint == corpus_tree.fingerprint
    assert back.edge_count == corpus_tree.edge_count
    assert [t.id for t in back.templates] == [t.id for t in corpus_tree.templates]
    for item in corpus:
        q = query_key(item.mrs, grammar.hierarchy, True)
        before = [(w.template.id, w.binding) for w in corpus_tree.walks(q, grammar.hierarchy, False)]
        after = [(w.template.id, w.binding) for w in back.walks(q, grammar.hierarchy, False)]
        assert before == after


def test_save_and_load(tmp_path, sandy_tree, grammar):
    path = tmp_path / "x.idx"
    sandy_tree.save(path)
    assert path.read_text().startswith(f"EBLGEN-INDEX 1\nfingerprint {grammar.fingerprint}\n")
    assert DecisionTree.load(path, grammar.hierarchy).dumps() == sandy_tree.dumps()


def test_stale_index_detected(sandy_tree, grammar):
    back = DecisionTree.loads(sandy_tree.dumps(), grammar.hierarchy)
    back.check(grammar.fingerprint)
    with pytest.raises(StaleIndexError, match="different|built for"):
        back.check("0" * 16)


@pytest.mark.parametrize("text, message", [
    ("hello\n", "magic"),
    ("EBLGEN-INDEX x\nfingerprint -\n{}", "version"),
    ("EBLGEN-INDEX 9\nfingerprint -\n{}", "unsupported"),
    ("EBLGEN-INDEX 1\nprint -\n{}", "fingerprint"),
    ("EBLGEN-INDEX 1\nfingerprint -\n{not json", "corrupt"),
])
def test_bad_index_files(text, message):
    with pytest.raises(IndexFormatError, match=message):
        DecisionTree.loads(text, LETTERS)

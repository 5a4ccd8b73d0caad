from dataclasses import replace

import pytest

from eblgen.apply import (EXACT, EXHAUSTIVE, LONGEST, MODES, PARTIAL_EXHAUSTIVE, PARTIAL_LONGEST, STEPS,
                          ApplyOptions, LexicalGapError, StepTimer, expand, generate, instantiate,
                          retrieve_exact, retrieve_partial)
from eblgen.chart import EBL, chart_generate
from eblgen.corpus import paraphrase_inputs
from eblgen.dtree import DecisionTree, StaleIndexError
from eblgen.grammar import load_grammar
from eblgen.mrs import parse_mrs
from eblgen.train import TrainOptions, train


def strings(results):
    return {r.string for r in results}


def test_exact_generalizes_over_abstracted_types(sandy_tree, kim, noam, grammar):
    assert strings(generate(sandy_tree, kim, grammar, EXACT)) == {"kim gives a table to peter"}
    assert strings(generate(sandy_tree, noam, grammar, EXACT)) == {"noam donates a book to peter"}


def test_exact_fails_on_unseen_structure(sandy_tree, man, grammar):
    assert retrieve_exact(sandy_tree, man, grammar) == []
    assert generate(sandy_tree, man, grammar, EXACT) == []


def test_partial_longest_on_unseen_structure(sandy_tree, man, grammar):
    results = generate(sandy_tree, man, grammar, PARTIAL_LONGEST)
    assert strings(results) == {"a man", "gives a book to kim"}
    assert sorted(len(r.covered) for r in results) == [2, 6]
    assert not set(results[0].covered) & set(results[1].covered)


def test_partial_exhaustive_adds_contained_fragments(sandy_tree, man, grammar):
    results = generate(sandy_tree, man, grammar, PARTIAL_EXHAUSTIVE)
    assert strings(results) == {"a man", "gives a book to kim", "a book", "kim"}


def test_results_are_ordered_widest_first(sandy_tree, man, grammar):
    results = generate(sandy_tree, man, grammar, PARTIAL_EXHAUSTIVE)
    sizes = [len(r.covered) for r in results]
    assert sizes == sorted(sizes, reverse=True)


def test_retrieval_modes(sandy_tree, man, grammar):
    exhaustive = retrieve_partial(sandy_tree, man, grammar, EXHAUSTIVE)
    longest = retrieve_partial(sandy_tree, man, grammar, LONGEST)
    assert {h.covered for h in longest} <= {h.covered for h in exhaustive}
    for h in exhaustive:
        assert any(set(h.covered) <= set(k.covered) for k in longest)
    with pytest.raises(ValueError, match="partial mode"):
        retrieve_partial(sandy_tree, man, grammar, "sideways")


def test_exact_hit_binds_every_relation_once(sandy_tree, kim, grammar):
    # the two names can fill either Named slot; retrieval keeps both bindings
    hits = retrieve_exact(sandy_tree, kim, grammar)
    assert [h.template.id for h in hits] == ["t1", "t1"]
    assert len({h.binding for h in hits}) == 2
    for hit in hits:
        assert hit.covered == tuple(range(len(kim)))
        for slot, pos in enumerate(hit.binding):
            assert grammar.hierarchy.subsumes(hit.template.key[slot].pred, kim.liszt[pos].pred)


def test_swapped_binding_fails_in_terminal_matching(sandy_tree, kim, grammar):
    failures = []
    assert len(generate(sandy_tree, kim, grammar, EXACT, failures=failures)) == 1
    assert [f.reason for f in failures] == ["terminal matching failed"]


def test_result_signs_equal_chart_signs(sandy_tree, kim, grammar):
    ebl = generate(sandy_tree, kim, grammar, EXACT)
    chart = chart_generate(kim, grammar)
    assert {(r.string, r.fs) for r in ebl} == {(r.string, r.fs) for r in chart}


def test_result_derivations(sandy_tree, man, grammar):
    for r in generate(sandy_tree, man, grammar, PARTIAL_EXHAUSTIVE):
        assert all(n.provenance == EBL for n in r.derivation.nodes())
        assert sorted(leaf.rels[0] for leaf in r.derivation.leaves()) == list(r.covered)
        assert r.derivation.rels == r.covered


def _sample(corpus, grammar, seed):
    return [i.mrs for i in corpus] + paraphrase_inputs([i.mrs for i in corpus], grammar, 20, seed)


def test_mode_monotonicity(corpus_tree, corpus, grammar, seed):
    for m in _sample(corpus, grammar, seed):
        exact = {(r.covered, r.string) for r in generate(corpus_tree, m, grammar, EXACT)}
        longest = {(r.covered, r.string) for r in generate(corpus_tree, m, grammar, PARTIAL_LONGEST)}
        exhaustive = {(r.covered, r.string)
                      for r in generate(corpus_tree, m, grammar, PARTIAL_EXHAUSTIVE)}
        assert exact <= longest <= exhaustive
        for covered, _ in exhaustive:
            assert any(set(covered) <= set(c) for c, _ in longest)


def test_exact_is_sound_against_chart(corpus_tree, corpus, grammar, seed):
    for m in _sample(corpus, grammar, seed):
        ebl = generate(corpus_tree, m, grammar, EXACT)
        assert strings(ebl) <= strings(chart_generate(m, grammar))


def test_corpus_inputs_are_reproduced(corpus_tree, corpus, grammar):
    for item in corpus:
        assert (strings(generate(corpus_tree, item.mrs, grammar, EXACT))
                == strings(chart_generate(item.mrs, grammar))), item.label


def test_precomputed_expansion_gives_same_results(corpus_tree, corpus, grammar):
    options = ApplyOptions(precompute_expansion=True)
    for item in corpus[:8]:
        a = generate(corpus_tree, item.mrs, grammar, PARTIAL_EXHAUSTIVE)
        b = generate(corpus_tree, item.mrs, grammar, PARTIAL_EXHAUSTIVE, options)
        assert [(r.covered, r.string, r.fs) for r in a] == [(r.covered, r.string, r.fs) for r in b]
    assert options._cache


def _signature(results):
    return sorted((r.covered, r.string, r.fs, r.derivation, r.template_id) for r in results)


@pytest.mark.parametrize("mode", MODES)
def test_compiled_matching_agrees_with_the_general_search(corpus_tree, corpus, grammar, seed,
                                                          mode):
    fast = ApplyOptions(precompute_expansion=True)
    slow = ApplyOptions(precompute_expansion=True, compiled_matching=False)
    inputs = [i.mrs for i in corpus] + paraphrase_inputs([i.mrs for i in corpus], grammar, 20, seed)
    for m in inputs:
        fails_fast, fails_slow = [], []
        a = generate(corpus_tree, m, grammar, mode, fast, fails_fast)
        b = generate(corpus_tree, m, grammar, mode, slow, fails_slow)
        assert _signature(a) == _signature(b), str(m)
        assert sorted((f.template_id, f.covered, f.reason) for f in fails_fast) == sorted(
            (f.template_id, f.covered, f.reason) for f in fails_slow)
    # every trained template compiles under the toy grammar
    assert fast._compiled and all(c is not None for c in fast._compiled.values())
    assert not slow._compiled


def test_step_timer_records_every_step(sandy_tree, kim, grammar):
    timer = StepTimer()
    generate(sandy_tree, kim, grammar, EXACT, timer=timer)
    assert set(timer.totals) == set(STEPS)
    assert all(v >= 0 for v in timer.totals.values())


def test_bad_mode_and_stale_tree(sandy_tree, kim, grammar):
    with pytest.raises(ValueError, match="unknown mode"):
        generate(sandy_tree, kim, grammar, "fastest")
    other = load_grammar(grammar.source + "\n; edit\n")
    with pytest.raises(StaleIndexError):
        generate(sandy_tree, kim, other, EXACT)


def test_empty_tree_gives_nothing(kim, grammar):
    assert generate(DecisionTree(), kim, grammar, PARTIAL_EXHAUSTIVE) == []


def test_lexical_gap_is_reported(sandy_item, kim, grammar):
    source = grammar.source.replace("SandyRel KimRel", "ZedRel SandyRel KimRel", 1)
    assert source != grammar.source
    gapped = load_grammar(source)
    d, _ = train([sandy_item], gapped, TrainOptions())
    zed = parse_mrs(str(kim).replace("KimRel", "ZedRel"))
    hits = retrieve_exact(d, zed, gapped)
    assert len(hits) == 2
    with pytest.raises(LexicalGapError, match="ZedRel"):
        instantiate(expand(hits[0].template, gapped), hits[0].template, hits[0], zed, gapped)
    failures = []
    assert generate(d, zed, gapped, EXACT, failures=failures) == []
    assert [f.reason for f in failures] == ["no lexical entry for ZedRel"] * 2


def test_grammar_drift_is_reported(sandy_item, kim, grammar):
    d, _ = train([sandy_item], grammar, TrainOptions())
    t = d.templates[0]
    t.root = replace(t.root, rule="gone_rule")
    failures = []
    assert generate(d, kim, grammar, EXACT, failures=failures) == []
    assert len(failures) == 2 and all("unknown rule" in f.reason for f in failures)


def test_terminal_matching_failure_is_reported(sandy_item, grammar):
    d, _ = train([sandy_item], grammar, TrainOptions())
    # the verb's subject is not the name's variable, so no slot filling succeeds
    broken = parse_mrs("TOP=h1 INDEX=e2 [SandyRel h4 INST=x9] "
                       "[GiveRel h1 EVENT=e2 ACT=x5 PREPARG=x6 UND=x7] [TempOver h1 EVENT=e2] "
                       "[Some h9 BV=x7 RESTR=h10 SCOPE=h11] [ChairRel h10 INST=x7] "
                       "[To h12 ARG=v13 PREP=x6] [KimRel h14 INST=x6]")
    failures = []
    assert generate(d, broken, grammar, EXACT, failures=failures) == []
    assert [f.reason for f in failures] == ["terminal matching failed"] * 2


def test_compiled_matching_needs_no_fallback_on_the_corpus(corpus_tree, corpus, grammar):
    from eblgen.apply import _fill_compiled
    options = ApplyOptions(precompute_expansion=True)
    handled = 0
    for item in corpus:
        hits = retrieve_partial(corpus_tree, item.mrs, grammar, EXHAUSTIVE)
        for hit in hits:
            sk = options.skeleton(hit.template, grammar)
            c = options.compiled(hit.template, sk, grammar)
            entries = {p: grammar.lexical_lookup(item.mrs.liszt[p].pred) for p in hit.binding}
            assert _fill_compiled(c, sk, [hit], entries, item.mrs, grammar, [], set()) == []
            handled += 1
    assert handled > 100

"""Command line: ``train``, ``generate`` and ``bench``."""
from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .apply import EXACT, MODES, ApplyOptions, generate
from .bench import run_bench
from .corpus import CorpusSyntaxError, load_corpus, paraphrase_inputs, toy_corpus_path
from .dtree import DecisionTree, IndexFormatError, StaleIndexError
from .grammar import Grammar, GrammarError, load_grammar_file, toy_grammar_path
from .mrs import MrsSyntaxError, parse_mrs
from .template import parse_filter
from .train import TrainOptions, train

EXIT_OK = 0
EXIT_NO_RESULT = 1
EXIT_INPUT_ERROR = 2
EXIT_STALE_INDEX = 3


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    grammar_path: str = str(toy_grammar_path())
    corpus_path: str = str(toy_corpus_path())
    index_path: str = "eblgen.idx"
    mode: str = EXACT
    abstraction: bool = True
    phrasal: bool = False
    filters: list[str] = field(default_factory=list)
    precompute_expansion: bool = False
    bench_repetitions: int = 11
    seed: int = 0

    def validate(self) -> None:
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}; expected one of {', '.join(MODES)}")
        for f in self.filters:
            parse_filter(f)
        if self.bench_repetitions < 1:
            raise ConfigError("bench repetitions must be a positive integer")

    @property
    def phrasal_filters(self):
        return tuple(parse_filter(f) for f in self.filters)


def _on_off(text: str) -> bool:
    if text not in ("on", "off"):
        raise argparse.ArgumentTypeError(f"expected on or off, got {text!r}")
    return text == "on"


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    d = RunConfig()
    common.add_argument("--grammar", dest="grammar_path", default=d.grammar_path,
                        help="grammar file (default: the shipped toy grammar)")
    common.add_argument("--corpus", dest="corpus_path", default=d.corpus_path,
                        help="corpus file (default: the shipped toy corpus)")
    common.add_argument("--index", dest="index_path", default=d.index_path,
                        help="decision tree index file (default: %(default)s)")
    common.add_argument("--mode", default=d.mode, help=f"one of {', '.join(MODES)}")
    common.add_argument("--abstraction", type=_on_off, default=d.abstraction, metavar="on|off")
    common.add_argument("--phrasal", type=_on_off, default=d.phrasal, metavar="on|off")
    common.add_argument("--filter", dest="filters", action="append", default=[],
                        help="phrasal filter: saturated-np, min-daughters:K, "
                             "no-immediate-recursion (repeatable)")
    common.add_argument("--precompute-expansion", dest="precompute_expansion", type=_on_off,
                        default=d.precompute_expansion, metavar="on|off")
    common.add_argument("--repetitions", dest="bench_repetitions", type=int,
                        default=d.bench_repetitions, help="bench repetitions per query")
    common.add_argument("--seed", type=int, default=d.seed, help="seed for random inputs")

    ap = argparse.ArgumentParser(prog="eblgen", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("train", parents=[common], help="train on a corpus and write the index")
    g = sub.add_parser("generate", parents=[common], help="generate from an MRS")
    src = g.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", help="file with one or more MRS records (corpus syntax)")
    src.add_argument("--mrs", help="MRS literal")
    b = sub.add_parser("bench", parents=[common], help="time EBL against chart generation")
    b.add_argument("--queries", help="query file (corpus syntax; default: the corpus)")
    b.add_argument("--paraphrases", type=int, default=0,
                   help="also bench this many seeded paraphrases of the queries")
    return ap


def config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(args.grammar_path, args.corpus_path, args.index_path, args.mode,
                     args.abstraction, args.phrasal, list(args.filters),
                     args.precompute_expansion, args.bench_repetitions, args.seed)


def _grammar(cfg: RunConfig) -> Grammar:
    return load_grammar_file(cfg.grammar_path)


def _load_index(cfg: RunConfig, grammar: Grammar) -> DecisionTree:
    d = DecisionTree.load(cfg.index_path, grammar.hierarchy)
    d.check(grammar.fingerprint)
    return d


def cmd_train(cfg: RunConfig, out=None) -> int:
    out = out or sys.stdout
    grammar = _grammar(cfg)
    corpus = load_corpus(cfg.corpus_path, grammar.roles)
    existing = None
    if Path(cfg.index_path).exists():
        existing = DecisionTree.load(cfg.index_path, grammar.hierarchy)
        existing.check(grammar.fingerprint)
    d, report = train(corpus, grammar,
                      TrainOptions(cfg.abstraction, cfg.phrasal, cfg.phrasal_filters), existing)
    d.save(cfg.index_path)
    print(f"trained {len(corpus)} items: {report.summary()}", file=out)
    for t in report.inserted:
        print(f"template {t.id}\t{len(t.key)} rels\t{t.origin}", file=out)
    for t in report.phrasal:
        print(f"phrasal {t.id}\t{len(t.key)} rels\t{t.root}", file=out)
    for f in report.failures:
        print(f"failure item {f.item} ({f.label}): {f.reason}", file=out)
    print(f"index written to {cfg.index_path} ({len(d)} templates, grammar {d.fingerprint})",
          file=out)
    return EXIT_OK


def cmd_generate(cfg: RunConfig, inputs: Sequence[tuple[str, object]], out=None) -> int:
    out = out or sys.stdout
    grammar = _grammar(cfg)
    d = _load_index(cfg, grammar)
    options = ApplyOptions(cfg.precompute_expansion)
    ok = bool(inputs)
    for label, m in inputs:
        if len(inputs) > 1:
            print(f"# {label}", file=out)
        results = generate(d, m, grammar, cfg.mode, options)
        n = len(m.liszt)
        for r in results:
            print(f"{len(r.covered)}/{n}\t{r.string}\t{r.template_id}", file=out)
        if cfg.mode == EXACT:
            ok = ok and any(len(r.covered) == n for r in results)
        else:
            ok = ok and bool(results)
    return EXIT_OK if ok else EXIT_NO_RESULT


def cmd_bench(cfg: RunConfig, queries_path: str | None = None, paraphrases: int = 0,
              out=None) -> int:
    out = out or sys.stdout
    grammar = _grammar(cfg)
    d = _load_index(cfg, grammar)
    items = load_corpus(queries_path or cfg.corpus_path, grammar.roles)
    queries = [(it.label, it.mrs) for it in items]
    extra = paraphrase_inputs([m for _, m in queries], grammar, paraphrases, cfg.seed)
    queries += [(f"paraphrase{k + 1}", m) for k, m in enumerate(extra)]
    report = run_bench(queries, d, grammar, cfg.bench_repetitions, cfg.mode,
                       cfg.precompute_expansion)
    print(report.table(), file=out)
    for line in report.data_lines():
        print(line, file=out)
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    cfg = config_from_args(args)
    try:
        cfg.validate()
        if args.command == "train":
            return cmd_train(cfg)
        if args.command == "generate":
            if args.mrs is not None:
                inputs = [("input", parse_mrs(args.mrs))]
            else:
                inputs = [(it.label, it.mrs) for it in load_corpus(args.input)]
            return cmd_generate(cfg, inputs)
        return cmd_bench(cfg, args.queries, args.paraphrases)
    except StaleIndexError as exc:
        print(f"error: stale index: {exc}", file=sys.stderr)
        return EXIT_STALE_INDEX
    except (ConfigError, GrammarError, CorpusSyntaxError, MrsSyntaxError, IndexFormatError,
            OSError, LookupError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())

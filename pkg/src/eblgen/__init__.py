"""Explanation-based learning for tactical generation from flat semantics.

Training runs a chart generator over a corpus of MRS inputs and stores the
generalized derivations (templates) in a decision tree.  At application
time an input is looked up in the tree and the retrieved templates are
replayed with the input's lexical entries, either on their own or as
pre-built edges inside the chart.
"""
from .apply import (EXACT, MODES, PARTIAL_EXHAUSTIVE, PARTIAL_LONGEST, ApplyOptions, generate,
                    retrieve_exact, retrieve_partial)
from .chart import chart_generate
from .dtree import DecisionTree, StaleIndexError
from .grammar import Grammar, load_grammar, load_grammar_file, toy_grammar
from .integrate import hybrid_generate
from .mrs import Mrs, Rel, canonical_key, parse_mrs
from .tfs import FeatureStructure, TypeHierarchy, unify
from .train import TrainOptions, train

__all__ = [
    "EXACT", "MODES", "PARTIAL_EXHAUSTIVE", "PARTIAL_LONGEST", "ApplyOptions", "DecisionTree",
    "FeatureStructure", "Grammar", "Mrs", "Rel", "StaleIndexError", "TrainOptions",
    "TypeHierarchy", "canonical_key", "chart_generate", "generate", "hybrid_generate",
    "load_grammar", "load_grammar_file", "parse_mrs", "retrieve_exact", "retrieve_partial",
    "toy_grammar", "train", "unify",
]

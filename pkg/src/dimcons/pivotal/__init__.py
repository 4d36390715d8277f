"""Chains, chain shadows, Schottky sets and pivotal times on free groups."""
from .chains import ChainParams, chain_shadow_contains, is_chain
from .coupling import PivotalReport, pivotal_stats_and_entropy_gap, setup_coupling
from .schottky import (Counterexample, SchottkyCertificate, build_schottky_words, schottky_certify,
                       search_schottky)
from .times import PivotalConstants, PivotalState, pivotal_times, pivoted_class

__all__ = [
    "ChainParams", "chain_shadow_contains", "is_chain", "PivotalReport", "pivotal_stats_and_entropy_gap",
    "setup_coupling", "Counterexample", "SchottkyCertificate", "build_schottky_words", "schottky_certify",
    "search_schottky", "PivotalConstants", "PivotalState", "pivotal_times", "pivoted_class",
]

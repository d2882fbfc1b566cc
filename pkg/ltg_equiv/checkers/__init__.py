"""
Equivalence checkers sharing one interface: the decision procedure, the
brute-force oracle, and a composite running both side by side.
"""
from .base import EquivalenceChecker
from .brute_force import BruteForceChecker
from .composite import CompositeChecker
from .pair_grammar import PairGrammarChecker

__all__ = ["EquivalenceChecker", "PairGrammarChecker", "BruteForceChecker", "CompositeChecker"]

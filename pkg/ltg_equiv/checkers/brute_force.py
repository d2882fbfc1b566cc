import logging

from ..harness import DEFAULT_ORACLE_DEPTH, brute_force_equiv
from ..pair_checker import Verdict
from ..tree_model import Dta, Transducer
from .base import EquivalenceChecker

logger = logging.getLogger(__name__)


class BruteForceChecker(EquivalenceChecker):
    """Exhaustive comparison on all domain trees below a depth horizon."""

    name = "BruteForce"

    def __init__(self, depth: int = DEFAULT_ORACLE_DEPTH, workers: int = 1):
        if depth < 1:
            raise ValueError(f"depth must be at least 1, got {depth}")
        self.depth = depth
        self.workers = workers

    def check(self, m: Transducer, m2: Transducer, b: Dta) -> Verdict:
        logger.debug(f"Enumerating domain trees of depth < {self.depth}")
        return brute_force_equiv(m, m2, b, self.depth, self.workers)

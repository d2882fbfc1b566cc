import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from typing import Dict, Optional, Tuple, Union

from ..harness import verdicts_consistent
from ..pair_checker import Verdict
from ..tree_model import Dta, Transducer
from .base import EquivalenceChecker
from .brute_force import BruteForceChecker
from .pair_grammar import PairGrammarChecker

logger = logging.getLogger(__name__)


class CompositeChecker(EquivalenceChecker):
    """
    Runs the decision procedure and the brute-force oracle concurrently.

    The decision procedure's verdict is reported; the oracle cross-validates
    it, and takes over when the decision procedure fails.
    """

    name = "Composite"

    def __init__(self, primary: Optional[EquivalenceChecker] = None,
                 oracle: Optional[EquivalenceChecker] = None):
        self.primary = primary or PairGrammarChecker()
        self.oracle = oracle or BruteForceChecker()
        logger.info(f"Initialized Composite checker with {self.primary.name} and {self.oracle.name}")

    def _run_checker(self, checker: EquivalenceChecker, m: Transducer, m2: Transducer,
                     b: Dta) -> Tuple[str, Union[Verdict, Exception]]:
        """
        Run one checker, capturing its failure instead of raising.

        Returns:
            Tuple of (checker name, verdict or exception)
        """
        try:
            start_time = time.time()
            verdict = checker.check(m, m2, b)
            elapsed = time.time() - start_time
            logger.debug(f"{checker.name} returned {verdict.outcome.value} in {elapsed:.2f}s")
            return checker.name, verdict
        except Exception as e:
            logger.error(f"[{checker.name}] Check failed: {e}")
            return checker.name, e

    def _labels(self) -> Tuple[str, str]:
        """Stats keys for (primary, oracle); equal names get their role appended."""
        if self.primary.name != self.oracle.name:
            return self.primary.name, self.oracle.name
        return f"{self.primary.name} (primary)", f"{self.oracle.name} (oracle)"

    def check_with_stats(self, m: Transducer, m2: Transducer,
                         b: Dta) -> Tuple[Verdict, Dict[str, str]]:
        """
        Run both checkers and merge their verdicts.

        Returns:
            Tuple of (merged verdict, per-checker outcomes plus a 'consistent' entry)

        Raises:
            Exception: the primary checker's error when both checkers fail.
        """
        with ThreadPoolExecutor(max_workers=2) as executor:
            primary_future = executor.submit(self._run_checker, self.primary, m, m2, b)
            oracle_future = executor.submit(self._run_checker, self.oracle, m, m2, b)
            _, primary = primary_future.result()
            _, oracle = oracle_future.result()

        stats = {
            label: (outcome.outcome.value if isinstance(outcome, Verdict) else "error")
            for label, outcome in zip(self._labels(), (primary, oracle))
        }

        if isinstance(primary, Exception):
            if isinstance(oracle, Exception):
                raise primary
            stats["consistent"] = "unknown"
            logger.warning(f"{self.primary.name} failed; reporting the oracle verdict")
            return oracle, stats

        if isinstance(oracle, Exception):
            stats["consistent"] = "unknown"
            return primary, stats

        consistent = verdicts_consistent(primary, oracle)
        stats["consistent"] = "yes" if consistent else "no"
        if consistent:
            note = f"{primary.note}; oracle agrees up to depth {oracle.depth_bounded}"
        else:
            note = f"{primary.note}; ORACLE DISAGREES ({oracle.outcome.value})"
            logger.error(f"Cross-validation failed: {self.primary.name} says "
                         f"{primary.outcome.value}, {self.oracle.name} says {oracle.outcome.value}")
        logger.info(f"Merged verdicts: {stats}")
        return replace(primary, note=note.lstrip("; ")), stats

    def check(self, m: Transducer, m2: Transducer, b: Dta) -> Verdict:
        verdict, _ = self.check_with_stats(m, m2, b)
        return verdict

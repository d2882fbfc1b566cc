# Base checker definition
from abc import ABC, abstractmethod

from ..pair_checker import Verdict
from ..tree_model import Dta, Transducer


class EquivalenceChecker(ABC):
    name = "checker"

    @abstractmethod
    def check(self, m: Transducer, m2: Transducer, b: Dta) -> Verdict:
        """Compare two transducers relative to a domain automaton.

        Args:
            m: first transducer
            m2: second transducer
            b: domain automaton

        Returns:
            The verdict of this checker
        """
        pass

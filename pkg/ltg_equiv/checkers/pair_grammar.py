import logging
from typing import Optional

from ..pair_checker import CheckConfig, Verdict, decide_equiv
from ..tree_model import Dta, Transducer
from .base import EquivalenceChecker

logger = logging.getLogger(__name__)


class PairGrammarChecker(EquivalenceChecker):
    """Normalization followed by the pair-grammar morphism test."""

    name = "PairGrammar"

    def __init__(self, config: Optional[CheckConfig] = None):
        self.config = config or CheckConfig.from_env()

    def check(self, m: Transducer, m2: Transducer, b: Dta) -> Verdict:
        logger.debug(f"Deciding with bound {self.config.bound}")
        return decide_equiv(m, m2, b, self.config)

"""
LTG Equiv

A library and CLI that decides equivalence of deterministic linear tree
transducers with output in a free group, relative to a top-down
deterministic domain automaton.
"""

__version__ = '0.1.0'

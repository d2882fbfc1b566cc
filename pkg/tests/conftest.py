import pytest

from ltg_equiv.formats import parse_dta, parse_transducer

RUNNING_TRANSDUCER = """\
# three states over f/2, g/1, k/0 with output in the free group on a, b
alphabet f:2 g:1 k:0
output a b
axiom _ q0 _
rule q0 f -> _ q1:2 b q2:1 _
rule q0 g -> q0:1
rule q0 k -> _
rule q1 f -> q0:1 q0:2
rule q1 g -> ab q1:1
rule q1 k -> a
rule q2 f -> q0:1 q0:2
rule q2 g -> ab q2:1
rule q2 k -> ab
"""

RUNNING_DTA = """\
alphabet f:2 g:1 k:0
dta start h0
delta h0 f -> h1 h1
delta h1 g -> h1
delta h1 k ->
"""


def with_rule(text: str, old: str, new: str) -> str:
    assert old in text
    return text.replace(old, new)


@pytest.fixture
def running_text():
    return RUNNING_TRANSDUCER


@pytest.fixture
def running():
    return parse_transducer(RUNNING_TRANSDUCER, "running.lt")


@pytest.fixture
def running_dta():
    return parse_dta(RUNNING_DTA, source="running.dta")


@pytest.fixture
def reordered():
    """The f-rule of q0 with q2 moved in front of q1, constants adjusted."""
    return parse_transducer(with_rule(RUNNING_TRANSDUCER, "rule q0 f -> _ q1:2 b q2:1 _",
                                      "rule q0 f -> ab q2:1 b-a- q1:2 b"))


@pytest.fixture
def simply_reordered():
    return parse_transducer(with_rule(RUNNING_TRANSDUCER, "rule q0 f -> _ q1:2 b q2:1 _",
                                      "rule q0 f -> q2:1 q1:2 b"))


@pytest.fixture
def wrongly_reordered():
    """Moves q2 in front but only cancels a instead of shifting by ba."""
    return parse_transducer(with_rule(RUNNING_TRANSDUCER, "rule q0 f -> _ q1:2 b q2:1 _",
                                      "rule q0 f -> ab q2:1 a- q1:2"))


@pytest.fixture
def mutated():
    return parse_transducer(with_rule(RUNNING_TRANSDUCER, "rule q2 k -> ab", "rule q2 k -> a"))


@pytest.fixture
def files(tmp_path, running_text):
    """Writes the running instance and variants to disk, returning their paths."""
    paths = {
        "m": tmp_path / "m.lt",
        "bad": tmp_path / "bad.lt",
        "reordered": tmp_path / "reordered.lt",
        "dta": tmp_path / "b.dta",
        "empty": tmp_path / "empty.dta",
    }
    paths["m"].write_text(running_text)
    paths["bad"].write_text(with_rule(running_text, "rule q2 k -> ab", "rule q2 k -> a"))
    paths["reordered"].write_text(with_rule(running_text, "rule q0 f -> _ q1:2 b q2:1 _",
                                            "rule q0 f -> ab q2:1 b-a- q1:2 b"))
    paths["dta"].write_text(RUNNING_DTA)
    paths["empty"].write_text("dta start h0\ndelta h0 g -> h0\n")
    return paths

import logging
import sys
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, List, NoReturn, Optional, TypeVar

import typer
from typing_extensions import Annotated

from .checkers import BruteForceChecker, CompositeChecker, PairGrammarChecker
from .errors import LtgError, OffDomainError
from .formats import parse_dta_file, parse_transducer_file, write_dta, write_transducer
from .harness import DEFAULT_ORACLE_DEPTH, GenParams, brute_force_equiv, gen_instance, run_differential
from .normalizer import make_compatible, order_transducer
from .pair_checker import (DEFAULT_BOUND, DEFAULT_SEARCH_DEPTH, DEFAULT_SEARCH_TREES,
                           CheckConfig, Outcome, Verdict)
from .periodicity_domain import analyze
from .tree_model import Dta, Transducer, dom_member, dta_reduce, evaluate, parse_tree
from .utils import configure_logging, get_log_level

# Application instance
app = typer.Typer(
    name="ltg",
    help="LTG Equiv: decide equivalence of linear tree transducers with output in the free group.",
)

logger = logging.getLogger(__name__)

T = TypeVar("T")

EXIT_EQUIVALENT = 0
EXIT_INEQUIVALENT = 1
EXIT_ERROR = 2


class OutputFormat(str, Enum):
    TEXT = "text"
    LINES = "lines"


@dataclass
class RunConfig:
    """Options of one CLI invocation, validated before any file is read."""
    command: str
    inputs: List[Path] = field(default_factory=list)
    dta: Optional[Path] = None
    depth: int = DEFAULT_ORACLE_DEPTH
    bound: int = DEFAULT_BOUND
    output_format: OutputFormat = OutputFormat.TEXT

    def validate(self) -> None:
        if self.depth < 1:
            fail(f"--depth must be at least 1, got {self.depth}")
        if self.bound < 1:
            fail(f"--bound must be at least 1, got {self.bound}")


def fail(message: str, code: int = EXIT_ERROR) -> NoReturn:
    """Log, report on stderr and exit."""
    logger.error(message)
    print(f"Error: {message}", file=sys.stderr)
    raise typer.Exit(code=code)


def guarded(action: Callable[[], T]) -> T:
    """Run a library call, turning its errors into an exit with status 2."""
    try:
        return action()
    except OffDomainError as e:
        fail(f"input leaves the domain at subtree {e.subtree} (state {e.state})")
    except LtgError as e:
        fail(str(e))
    except Exception as e:
        logger.error(f"An unexpected error occurred: {e}", exc_info=True)
        fail(f"unexpected failure: {e}. Check logs for details.")


def emit(keyword: str, value: str, config: RunConfig) -> None:
    """Result lines carry their keyword in both formats; other lines only in `lines` mode."""
    if keyword in ("RESULT", "WITNESS", "LEFT", "RIGHT") or config.output_format == OutputFormat.LINES:
        print(f"{keyword} {value}")
    else:
        print(value)


def report_verdict(verdict: Verdict, config: RunConfig) -> NoReturn:
    emit("RESULT", verdict.outcome.value, config)
    if verdict.witness is not None:
        emit("WITNESS", str(verdict.witness), config)
        emit("LEFT", str(verdict.left), config)
        emit("RIGHT", str(verdict.right), config)
    if verdict.note:
        if config.output_format == OutputFormat.LINES:
            print(f"NOTE {verdict.note}")
        else:
            print(f"note: {verdict.note}", file=sys.stderr)
    codes = {
        Outcome.EQUIVALENT: EXIT_EQUIVALENT,
        Outcome.INEQUIVALENT: EXIT_INEQUIVALENT,
        Outcome.EMPTY_DOMAIN: EXIT_ERROR,
    }
    raise typer.Exit(code=codes[verdict.outcome])


def load_instance(paths: List[Path], dta_path: Path):
    transducers: List[Transducer] = [guarded(lambda p=p: parse_transducer_file(p)) for p in paths]
    dta: Dta = guarded(lambda: parse_dta_file(dta_path, transducers[0].input_alphabet))
    return transducers, dta


TransducerArg = Annotated[Path, typer.Argument(
    help="Transducer file.",
    exists=True, file_okay=True, dir_okay=False, readable=True, resolve_path=True,
)]
DtaOption = Annotated[Path, typer.Option(
    "--dta",
    help="Domain automaton file.",
    exists=True, file_okay=True, dir_okay=False, readable=True, resolve_path=True,
)]
FormatOption = Annotated[OutputFormat, typer.Option(
    "--format",
    help="'lines' prefixes every output line with a keyword (RESULT, WITNESS, LEFT, RIGHT, STATE, NOTE).",
)]


@app.callback()
def main_options(
    verbose: Annotated[bool, typer.Option("--verbose", "-v", help="Log debug detail to stderr.")] = False,
    log_file: Annotated[Optional[Path], typer.Option(
        "--log-file", help="Also write the log to this file.", dir_okay=False, resolve_path=True,
    )] = None,
):
    """
    Decide equivalence of linear tree transducers relative to a domain automaton.

    Exit status: 0 equivalent, 1 inequivalent, 2 error or empty domain.
    """
    configure_logging("DEBUG" if verbose else get_log_level(), log_file)


@app.command()
def check(
    first: TransducerArg,
    second: TransducerArg,
    dta: DtaOption,
    bound: Annotated[int, typer.Option("--bound", help="Test-set repetition bound per nonterminal and path.", min=1)] = DEFAULT_BOUND,
    search_depth: Annotated[int, typer.Option("--search-depth", help="Depth budget of the witness search.", min=1)] = DEFAULT_SEARCH_DEPTH,
    search_trees: Annotated[int, typer.Option("--search-trees", help="Tree budget of the witness search.", min=1)] = DEFAULT_SEARCH_TREES,
    depth: Annotated[int, typer.Option("--depth", help="Oracle horizon used by --cross-validate.", min=1)] = DEFAULT_ORACLE_DEPTH,
    cross_validate: Annotated[bool, typer.Option("--cross-validate", help="Also run the brute-force oracle and compare.")] = False,
    output_format: FormatOption = OutputFormat.TEXT,
):
    """
    Decide whether two transducers agree on every tree the DTA accepts.
    """
    config = RunConfig("check", [first, second], dta, depth, bound, output_format)
    config.validate()
    (m, m2), b = load_instance(config.inputs, dta)
    check_config = guarded(lambda: CheckConfig.from_env(bound=bound, search_depth=search_depth,
                                                          search_trees=search_trees))
    if cross_validate:
        checker = CompositeChecker(PairGrammarChecker(check_config),
                                   BruteForceChecker(depth, check_config.workers))
    else:
        checker = PairGrammarChecker(check_config)
    logger.info(f"Checking {first.name} against {second.name} with {checker.name}")
    verdict = guarded(lambda: checker.check(m, m2, b))
    report_verdict(verdict, config)


@app.command()
def normalize(transducer: TransducerArg, dta: DtaOption):
    """
    Print the equivalent ordered transducer without trivial states.
    """
    (m,), b = load_instance([transducer], dta)
    normalized = guarded(lambda: order_transducer(m, b))
    if normalized is None:
        print("RESULT empty-domain")
        fail("the domain automaton accepts no tree")
    print(write_transducer(normalized.transducer), end="")


@app.command()
def abstract(transducer: TransducerArg, dta: DtaOption, output_format: FormatOption = OutputFormat.TEXT):
    """
    Print the periodicity abstraction of every state of the product with the DTA.
    """
    config = RunConfig("abstract", [transducer], dta, output_format=output_format)
    (m,), b = load_instance([transducer], dta)
    reduced = dta_reduce(b)
    if reduced is None:
        print("RESULT empty-domain")
        fail("the domain automaton accepts no tree")
    product, iota = guarded(lambda: make_compatible(m, reduced))
    analysis = guarded(lambda: analyze(product, reduced, iota))
    for q in product.states:
        emit("STATE", f"{q} {analysis[q]}", config)


@app.command("eval")
def eval_command(
    transducer: TransducerArg,
    tree: Annotated[str, typer.Option("--tree", help="Input tree literal, e.g. 'f(g(k),k)'.")],
    dta: Annotated[Optional[Path], typer.Option(
        "--dta", help="Reject trees outside this DTA's language.",
        exists=True, file_okay=True, dir_okay=False, readable=True, resolve_path=True,
    )] = None,
    output_format: FormatOption = OutputFormat.TEXT,
):
    """
    Evaluate a transducer on one input tree.
    """
    config = RunConfig("eval", [transducer], dta, output_format=output_format)
    m = guarded(lambda: parse_transducer_file(transducer))
    t = guarded(lambda: parse_tree(tree, m.input_alphabet))
    if dta is not None:
        b = guarded(lambda: parse_dta_file(dta, m.input_alphabet))
        if not dom_member(b, b.start, t):
            fail(f"tree {t} is not accepted by the DTA")
    result = guarded(lambda: evaluate(m, t))
    if config.output_format == OutputFormat.LINES:
        print(f"RESULT {result}")
    else:
        print(result)


@app.command()
def oracle(
    first: TransducerArg,
    second: TransducerArg,
    dta: DtaOption,
    depth: Annotated[int, typer.Option("--depth", help="Compare on all trees of depth below this.", min=1)] = DEFAULT_ORACLE_DEPTH,
    output_format: FormatOption = OutputFormat.TEXT,
):
    """
    Compare two transducers on every domain tree below a depth horizon.
    """
    config = RunConfig("oracle", [first, second], dta, depth, output_format=output_format)
    config.validate()
    (m, m2), b = load_instance(config.inputs, dta)
    verdict = guarded(lambda: brute_force_equiv(m, m2, b, depth))
    report_verdict(verdict, config)


@app.command()
def gen(
    seed: Annotated[int, typer.Option("--seed", help="Random seed.")] = 0,
    max_states: Annotated[int, typer.Option("--max-states", min=1)] = 5,
    max_rank: Annotated[int, typer.Option("--max-rank", min=1)] = 2,
    input_symbols: Annotated[int, typer.Option("--input-symbols", min=1)] = 3,
    output_generators: Annotated[int, typer.Option("--generators", min=1)] = 2,
    max_word_length: Annotated[int, typer.Option("--max-word-length", min=1)] = 4,
    out_dir: Annotated[Optional[Path], typer.Option(
        "--out-dir", help="Write instance-<seed>.lt and instance-<seed>.dta here instead of printing.",
        file_okay=False, dir_okay=True, resolve_path=True,
    )] = None,
):
    """
    Generate a random transducer and DTA.
    """
    params = guarded(lambda: GenParams(seed, max_states, max_rank, input_symbols,
                                       output_generators, max_word_length))
    m, b = guarded(lambda: gen_instance(params))
    if out_dir is None:
        print(f"# seed {seed}: transducer")
        print(write_transducer(m), end="")
        print(f"# seed {seed}: dta")
        print(write_dta(b), end="")
        return
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / f"instance-{seed}.lt").write_text(write_transducer(m), encoding="utf-8")
        (out_dir / f"instance-{seed}.dta").write_text(write_dta(b), encoding="utf-8")
    except OSError as e:
        fail(f"could not write instance to {out_dir}: {e}")
    logger.info(f"Instance written to {out_dir}")
    print(f"Instance saved to: {out_dir / f'instance-{seed}.lt'}")


@app.command()
def differential(
    count: Annotated[int, typer.Option("--count", "-n", help="Number of seeded instances.", min=1)] = 200,
    seed: Annotated[int, typer.Option("--seed", help="First seed.")] = 0,
    depth: Annotated[int, typer.Option("--depth", help="Oracle horizon.", min=1)] = DEFAULT_ORACLE_DEPTH,
    bound: Annotated[int, typer.Option("--bound", help="Test-set repetition bound.", min=1)] = DEFAULT_BOUND,
):
    """
    Cross-check the decision procedure against the oracle on random instances.
    """
    check_config = guarded(lambda: CheckConfig.from_env(bound=bound))
    report = guarded(lambda: run_differential(count, GenParams(seed=seed), depth, check_config))
    print(f"instances {report.instances}")
    print(f"checks {report.checks}")
    print(f"agreements {report.agreements}")
    print(f"skipped {report.skipped}")
    for line in report.disagreements:
        print(f"DISAGREEMENT {line}")
    if not report.all_agree:
        raise typer.Exit(code=EXIT_INEQUIVALENT)


def main(argv: Optional[List[str]] = None):
    app(args=argv)


if __name__ == "__main__":
    main()

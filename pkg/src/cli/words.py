import click
from rich import print

from cli.common import EXIT_BUDGET, InputError, echo_json, load_presentation, parse_word
from fibrecl.area import AreaCaps, AreaExhausted, area, naive_area
from fibrecl.oracles import OracleBudget, Verdict, oracle_for
from fibrecl.utils import FibreclError


@click.command()
@click.argument("presentation", type=str)
@click.argument("word", type=str)
@click.option("--equals", "other", type=str, help="Compare WORD with this word instead of 1")
@click.option("--moves", default=8, show_default=True, help="Relator applications per search")
@click.option("--json", "as_json", is_flag=True, help="Print the verdict and oracle stats as JSON")
@click.pass_context
def wp(ctx, presentation: str, word: str, other: str | None, moves: int, as_json: bool):
    """
    Decide whether <word> is trivial (or equal to --equals) in <presentation>
    """
    group = load_presentation(presentation)
    u = parse_word(group, word)
    try:
        oracle = oracle_for(group, OracleBudget(move_cap=moves))
    except FibreclError as e:
        raise InputError(str(e)) from e
    verdict = oracle.query(u) if other is None else oracle.equal(u, parse_word(group, other))
    if as_json:
        data = {"word": word, "equals": other or "1", "verdict": verdict.value}
        echo_json({**data, **oracle.describe()})
    else:
        print(f"{verdict.value} ({oracle.kind} oracle)")
    if verdict is Verdict.UNKNOWN:
        ctx.exit(EXIT_BUDGET)


@click.command(name="area")
@click.argument("presentation", type=str)
@click.argument("word", type=str)
@click.option("--area-cap", default=32, show_default=True)
@click.option("--states", default=200_000, show_default=True, help="Expanded states cap")
@click.option("--length-cap", type=int, help="Fixed cap on intermediate words")
@click.option("--naive", is_flag=True, help="Use the plain breadth-first search")
@click.pass_context
def area_command(
    ctx,
    presentation: str,
    word: str,
    area_cap: int,
    states: int,
    length_cap: int | None,
    naive: bool,
):
    """
    Van Kampen area of a null-homotopic <word> with a verified certificate
    """
    group = load_presentation(presentation)
    w = parse_word(group, word)
    try:
        if naive:
            value = naive_area(group, w, length_cap, area_cap)
            echo_json({"word": word, "area": value, "found": value is not None})
            if value is None:
                ctx.exit(EXIT_BUDGET)
            return
        result = area(group, w, AreaCaps(length_cap, area_cap, states))
    except AreaExhausted as e:
        echo_json(
            {"word": word, "lower_bound": e.lower_bound, "states": e.states, "reason": e.reason}
        )
        ctx.exit(EXIT_BUDGET)
    except FibreclError as e:
        raise InputError(str(e)) from e
    echo_json({"word": word, **result.to_dict(group)})

from pathlib import Path

import click

from cli.common import EXIT_BUDGET, InputError, echo_json, load_presentation
from fibrecl.cyclics import ball_for, tau_report, umc_estimate, uqc_estimate
from fibrecl.oracles import oracle_for
from fibrecl.utils import FibreclError

REPORTS = {"uqc": uqc_estimate, "umc": umc_estimate, "tau": tau_report}


@click.command()
@click.argument("presentation", type=str)
@click.option(
    "--report",
    "reports",
    type=click.Choice(list(REPORTS)),
    multiple=True,
    help="Reports to compute (default: all)",
)
@click.option("--radius", default=3, show_default=True, help="Cayley ball radius")
@click.option("--powers", default=5, show_default=True, help="Largest power examined")
@click.option("--elements", default=20_000, show_default=True, help="Ball element cap")
@click.option("--graphml", type=Path, help="Also write the Cayley ball as GraphML")
@click.pass_context
def cyclics(ctx, presentation, reports, radius, powers, elements, graphml):
    """
    Geometry of cyclic subgroups over the ball of radius --radius: the UQC constant,
    the UMC constant and translation-number bounds
    """
    group = load_presentation(presentation)
    try:
        oracle = oracle_for(group)
        results = {
            name: REPORTS[name](oracle, radius, powers, elements).to_dict()
            for name in (reports or REPORTS)
        }
        if graphml is not None:
            ball_for(oracle, radius, elements).write_graphml(graphml)
    except FibreclError as e:
        raise InputError(str(e)) from e
    echo_json({"presentation": group.name, **results})
    if any(report["uncertified"] or not report["ball_complete"] for report in results.values()):
        ctx.exit(EXIT_BUDGET)

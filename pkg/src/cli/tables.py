from pathlib import Path

import click

from cli.common import (
    TABLE_FORMATS,
    InputError,
    load_presentation,
    print_table,
    split_names,
    table_exit_code,
)
from fibrecl.conjugacy import ConjugatorCaps, Flavor, cl_table
from fibrecl.experiment import ExperimentConfig, run_experiment
from fibrecl.fibre import FibreCaps, make_fibre_system
from fibrecl.oracles import oracle_for
from fibrecl.tables import FUNCTION_NAMES, FunctionTable
from fibrecl.utils import FibreclError


def caps_options(func):
    """Caps shared by the table-producing verbs."""
    options = [
        click.option("--area-cap", default=32, show_default=True),
        click.option("--states", default=200_000, show_default=True),
        click.option("--exponent", default=8, show_default=True, help="Order and exponent cap"),
        click.option("--elements", default=20_000, show_default=True, help="Ball element cap"),
        click.option("--p-radius", default=6, show_default=True, help="P-ball radius"),
        click.option("--radius", default=4, show_default=True, help="Conjugator search radius"),
        click.option("--quantifier", type=click.Choice(["sum", "max"]), default="sum"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _caps(area_cap, states, exponent, elements, p_radius, radius, quantifier) -> dict:
    return {
        "area": area_cap,
        "states": states,
        "exponent": exponent,
        "elements": elements,
        "p_radius": p_radius,
        "radius": radius,
        "quantifier": quantifier,
    }


@click.command()
@click.argument("function", type=click.Choice(FUNCTION_NAMES))
@click.argument("presentation", type=str)
@click.option("--n-min", default=0, show_default=True)
@click.option("--n-max", required=True, type=int)
@click.option("--normal", type=str, help="Normal generators A, for dist, cl and cl_rel")
@caps_options
@click.option("--format", "fmt", type=TABLE_FORMATS, default="rich", show_default=True)
@click.pass_context
def table(ctx, function, presentation, n_min, n_max, normal, fmt, **caps):
    """
    Sample <function> over <presentation> for n in [--n-min, --n-max]
    """
    data = {
        "presentation": presentation,
        "functions": [function],
        "normal_generators": split_names(normal),
        "n": {"min": n_min, "max": n_max},
        "caps": _caps(**caps),
    }
    try:
        config = ExperimentConfig.from_dict(data, Path.cwd())
        result = run_experiment(config)
    except FibreclError as e:
        raise InputError(str(e)) from e
    sampled = result.tables[0]
    print_table(sampled, fmt)
    ctx.exit(table_exit_code(sampled))


@click.command()
@click.argument("presentation", type=str)
@click.option("--n-min", default=0, show_default=True)
@click.option("--n-max", required=True, type=int)
@click.option(
    "--flavor",
    type=click.Choice([f.value for f in Flavor]),
    default="g",
    show_default=True,
    help="g: in G, p: in P, rel: pairs measured in G x G, conjugators in P",
)
@click.option("--normal", type=str, help="Normal generators A (flavors p and rel)")
@caps_options
@click.option("--format", "fmt", type=TABLE_FORMATS, default="rich", show_default=True)
@click.pass_context
def cl(ctx, presentation, n_min, n_max, flavor, normal, fmt, **caps):
    """
    Conjugator length function of <presentation> or of its fibre product
    """
    group = load_presentation(presentation)
    flavor = Flavor(flavor)
    if n_min > n_max:
        raise InputError(f"Empty n range {n_min}..{n_max}")
    try:
        fibre = FibreCaps(caps["p_radius"], caps["elements"])
        conjugator_caps = ConjugatorCaps(
            radius=caps["radius"],
            exponent_cap=caps["exponent"],
            quantifier=caps["quantifier"],
            fibre=fibre,
        )
        if flavor is Flavor.G:
            target = oracle_for(group)
        else:
            names = split_names(normal)
            if not names:
                raise InputError(f"Flavor {flavor.value} needs --normal")
            target = make_fibre_system(group, names)
        sampled = FunctionTable(
            "cl_rel" if flavor is Flavor.REL else "cl",
            budget=conjugator_caps.to_dict(),
            label=group.name,
        )
        for n in range(n_min, n_max + 1):
            sampled.add(cl_table(target, n, flavor, conjugator_caps).to_sample())
    except FibreclError as e:
        raise InputError(str(e)) from e
    print_table(sampled, fmt)
    ctx.exit(table_exit_code(sampled))

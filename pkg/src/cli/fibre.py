import click

from cli.common import (
    EXIT_AUDIT_FAILURE,
    EXIT_BUDGET,
    TABLE_FORMATS,
    InputError,
    echo_json,
    load_presentation,
    parse_pair,
    print_table,
    split_names,
    table_exit_code,
)
from fibrecl.conjugacy import (
    ConjugatorCaps,
    ConjugatorExhausted,
    construct_P_conjugator,
    hard_conjugacy_instance,
)
from fibrecl.fibre import (
    FibreCaps,
    FibreSystem,
    distortion,
    hard_distortion_witness,
    make_fibre_system,
)
from fibrecl.tables import FunctionTable
from fibrecl.utils import FibreclError


def _system(presentation: str, normal: str) -> FibreSystem:
    group = load_presentation(presentation)
    names = split_names(normal)
    if not names:
        raise InputError("--normal names no generators")
    try:
        return make_fibre_system(group, names)
    except FibreclError as e:
        raise InputError(str(e)) from e


@click.group(name="fibre")
def fibre():
    """Fibre product commands"""


@fibre.command()
@click.argument("presentation", type=str)
@click.option("--normal", required=True, type=str, help="Generators A normally generating N")
def make(presentation: str, normal: str):
    """
    Describe the fibre system of <presentation> over the normal closure of --normal
    """
    echo_json(_system(presentation, normal).describe())


@fibre.command()
@click.argument("presentation", type=str)
@click.option("--normal", required=True, type=str)
@click.option("--n-min", default=0, show_default=True)
@click.option("--n-max", required=True, type=int)
@click.option("--p-radius", default=6, show_default=True)
@click.option("--elements", default=20_000, show_default=True)
@click.option("--format", "fmt", type=TABLE_FORMATS, default="rich", show_default=True)
@click.pass_context
def dist(ctx, presentation, normal, n_min, n_max, p_radius, elements, fmt):
    """
    Distortion of the fibre product P in G x G for n in [--n-min, --n-max]
    """
    system = _system(presentation, normal)
    try:
        caps = FibreCaps(p_radius, elements)
        sampled = FunctionTable("dist", budget=caps.to_dict(), label=system.G.name)
        for n in range(n_min, n_max + 1):
            sampled.add(distortion(system, n, caps))
    except FibreclError as e:
        raise InputError(str(e)) from e
    print_table(sampled, fmt)
    ctx.exit(table_exit_code(sampled))


@fibre.command()
@click.argument("presentation", type=str)
@click.option("--normal", required=True, type=str)
@click.option("--n", "n", required=True, type=int, help="Bound on |gamma|_G")
@click.option("--p-radius", default=6, show_default=True)
@click.option("--elements", default=20_000, show_default=True)
@click.pass_context
def witness(ctx, presentation, normal, n, p_radius, elements):
    """
    Element gamma of N with |gamma|_G <= --n maximizing |(gamma, 1)|_P
    """
    system = _system(presentation, normal)
    try:
        found = hard_distortion_witness(system, n, FibreCaps(p_radius, elements))
    except FibreclError as e:
        raise InputError(str(e)) from e
    echo_json(found.to_dict(system))
    if not found.exact:
        ctx.exit(EXIT_BUDGET)


@click.command()
@click.argument("presentation", type=str)
@click.option("--normal", required=True, type=str)
@click.option("--u", "u", type=str, help="First pair 'g1, g2'")
@click.option("--v", "v", type=str, help="Second pair 'h1, h2'")
@click.option("--hard", type=int, help="Use the hard instance built from gamma with |gamma| <= N")
@click.option("--radius", default=4, show_default=True)
@click.option("--exponent", default=8, show_default=True)
@click.option("--p-radius", default=6, show_default=True)
@click.pass_context
def conjugator(ctx, presentation, normal, u, v, hard, radius, exponent, p_radius):
    """
    Construct and verify a conjugator in P from --u to --v, or for a hard instance
    """
    system = _system(presentation, normal)
    caps = ConjugatorCaps(
        radius=radius, exponent_cap=exponent, fibre=FibreCaps(p_radius=p_radius)
    )
    instance = None
    try:
        if hard is not None:
            instance = hard_conjugacy_instance(system, hard, caps)
            U, V = instance.U, instance.V
        elif u is not None and v is not None:
            U, V = parse_pair(system.G, u), parse_pair(system.G, v)
        else:
            raise InputError("Give --u and --v, or --hard")
        certificate = construct_P_conjugator(U, V, system, caps)
    except ConjugatorExhausted as e:
        click.echo(f"Conjugator budget exhausted: {e}", err=True)
        ctx.exit(EXIT_BUDGET)
    except FibreclError as e:
        raise InputError(str(e)) from e
    data = certificate.to_dict(system)
    if instance is not None:
        data["instance"] = instance.to_dict(system)
    echo_json(data)
    if not certificate.verified:
        ctx.exit(EXIT_AUDIT_FAILURE)

from pathlib import Path

import click
from rich import print

from cli.common import EXIT_AUDIT_FAILURE, InputError, load_presentation
from fibrecl.constructions import DEFAULT_WORD_LENGTH, dagger, rips
from fibrecl.utils import FibreclError, dump_json


def _sidecar(path: Path) -> Path:
    return path.with_suffix(".cert.json")


@click.command(name="rips")
@click.option("--in", "source", required=True, type=str, help="Presentation of Q")
@click.option("--out", "target", required=True, type=Path, help="Where to write G")
@click.option("--tails", default=DEFAULT_WORD_LENGTH, show_default=True, help="Tail length")
@click.option("--seed", default=0, show_default=True, help="Seed for the Dehn smoke test")
@click.pass_context
def rips_command(ctx, source: str, target: Path, tails: int, seed: int):
    """
    Rips construction: write a C'(1/6) presentation G with G / <<a, b>> = Q to --out,
    and its certificate next to it
    """
    q = load_presentation(source)
    try:
        g, kernel, certificate = rips(q, tails, seed=seed)
    except FibreclError as e:
        raise InputError(str(e)) from e
    g.to_file(target)
    _sidecar(target).write_text(dump_json(certificate.to_dict()), encoding="utf-8")
    print(
        f"{g.name}: {g.rank} generators, {len(g.relators)} relators, lambda = {certificate.lam}, "
        f"kernel {', '.join(kernel)}"
    )
    if not certificate.passed:
        ctx.exit(EXIT_AUDIT_FAILURE)


@click.command(name="dagger")
@click.option("--in", "source", required=True, type=str, help="Presentation of Q")
@click.option("--out", "target", required=True, type=Path, help="Where to write Q-dagger")
@click.option("--tails", default=DEFAULT_WORD_LENGTH, show_default=True, help="Tail length")
@click.pass_context
def dagger_command(ctx, source: str, target: Path, tails: int):
    """
    Dagger construction: (G x G) extended by a stable letter commuting with P, written to
    --out with its provenance next to it
    """
    q = load_presentation(source)
    try:
        qd, provenance = dagger(q, tails)
    except FibreclError as e:
        raise InputError(str(e)) from e
    qd.to_file(target)
    _sidecar(target).write_text(dump_json(provenance.to_dict()), encoding="utf-8")
    print(f"{qd.name}: {qd.rank} generators, {len(qd.relators)} relators")
    if not (provenance.rips.passed and all(provenance.audits.values())):
        ctx.exit(EXIT_AUDIT_FAILURE)

from pathlib import Path

import click
from rich.console import Console
from rich.table import Table

from fibrecl.experiment import resolve_presentation
from fibrecl.presentation import Presentation
from fibrecl.tables import FunctionTable
from fibrecl.utils import FibreclError, dump_json
from fibrecl.words import Word

EXIT_OK = 0
EXIT_AUDIT_FAILURE = 2
EXIT_BUDGET = 3


class InputError(click.ClickException):
    """Unreadable presentation, bad word syntax, invalid caps or config."""

    exit_code = 4


class FibcliGroup(click.Group):
    """Parser errors exit with the bad-input code rather than click's 2."""

    def make_context(self, info_name, args, parent=None, **extra):
        try:
            return super().make_context(info_name, args, parent=parent, **extra)
        except click.UsageError as e:
            e.exit_code = InputError.exit_code
            raise

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except click.UsageError as e:
            e.exit_code = InputError.exit_code
            raise


def load_presentation(reference: str) -> Presentation:
    """A .pres path, or the name of a bundled presentation (z2, f2, ...)."""
    try:
        return Presentation.from_file(resolve_presentation(reference, Path.cwd()))
    except (FibreclError, OSError) as e:
        raise InputError(f"Error loading presentation {reference}: {e}") from e


def parse_word(presentation: Presentation, text: str) -> Word:
    try:
        return presentation.word(text)
    except FibreclError as e:
        raise InputError(f"Error parsing word {text!r}: {e}") from e


def parse_pair(presentation: Presentation, text: str) -> tuple[Word, Word]:
    """'g1, g2' as a pair of words; a missing second coordinate is the identity."""
    first, _, second = text.partition(",")
    return parse_word(presentation, first.strip()), parse_word(presentation, second.strip())


def split_names(text: str | None) -> list[str]:
    if not text:
        return []
    return [name for name in text.replace(",", " ").split() if name]


def echo_json(data):
    click.echo(dump_json(data), nl=False)


def print_table(table: FunctionTable, fmt: str):
    if fmt == "json":
        echo_json(table.to_dict())
    elif fmt == "csv":
        click.echo(table.to_csv(), nl=False)
    elif fmt == "markdown":
        click.echo(table.to_markdown())
    else:
        rich_table = Table(show_header=True, header_style="bold", title=table.label)
        for header in ("n", table.name, "exactness"):
            rich_table.add_column(header)
        for sample in table.samples:
            rich_table.add_row(str(sample.n), str(sample.value), sample.exactness.value)
        Console().print(rich_table)


def table_exit_code(table: FunctionTable) -> int:
    return EXIT_OK if all(s.is_exact for s in table.samples) else EXIT_BUDGET


TABLE_FORMATS = click.Choice(["rich", "markdown", "csv", "json"])

import click
from cli.common import FibcliGroup
from cli.constructions import dagger_command, rips_command
from cli.cyclics import cyclics
from cli.experiment import run
from cli.fibre import conjugator, fibre
from cli.tables import cl, table
from cli.words import area_command, wp
from rich import print as richprint

from fibrecl.utils import setup_logging


@click.group(cls=FibcliGroup)
@click.option(
    "--log-level",
    default="WARNING",
    show_default=True,
    type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False),
    help="Console log level; the log file always records DEBUG",
)
def cli(log_level: str):
    setup_logging(log_level)


cli.add_command(wp)
cli.add_command(area_command)
cli.add_command(table)
cli.add_command(cyclics)
cli.add_command(fibre)
cli.add_command(cl)
cli.add_command(conjugator)
cli.add_command(rips_command)
cli.add_command(dagger_command)
cli.add_command(run)


@cli.command(name="help")
@click.argument("commands", required=False, nargs=-1)
@click.pass_context
def help_command(ctx, commands):
    """
    Display help information for the given command.
    If no command is given, display help for the main CLI.
    """
    if not commands:
        richprint(ctx.parent.get_help())
        return

    # Recurse down the subcommands, fetching the command object for each
    cmd_obj = cli
    for command in commands:
        cmd_obj = cmd_obj.get_command(ctx, command)
        if cmd_obj is None:
            richprint(f'Unknown command "{command}" in {commands}')
            return
        ctx = click.Context(cmd_obj, info_name=command, parent=ctx)

    help_info = cmd_obj.get_help(ctx).strip()
    help_info = help_info.replace("Usage: fibcli help [COMMANDS]...", "Usage: fibcli", 1)
    richprint(help_info)


if __name__ == "__main__":
    cli()

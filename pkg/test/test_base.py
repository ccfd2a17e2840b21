import atexit
import os
import shutil
import traceback
from pathlib import Path
from tempfile import mkdtemp

from click.testing import CliRunner
from cli.main import cli
from presentations import PRESENTATIONS

from fibrecl.presentation import Presentation


class TestBase:
    __test__ = False

    def __init__(self):
        # fibcli log file gets written here
        self.tmpdir = Path(mkdtemp(prefix="fibrecl-test-"))

        os.environ["XDG_STATE_HOME"] = f"{self.tmpdir}"

        self.runner = CliRunner(mix_stderr=False)

        atexit.register(self.cleanup)

    def cleanup(self):
        shutil.rmtree(self.tmpdir, ignore_errors=True)

    # Execute a fibcli command in-process; returns the click Result
    def fibcli(self, args: str | list[str]):
        if isinstance(args, str):
            args = args.split()
        return self.runner.invoke(cli, args, catch_exceptions=False)

    def presentation(self, name: str) -> Presentation:
        return Presentation.from_file(PRESENTATIONS / f"{name}.pres")

    def workdir(self, name: str) -> Path:
        path = self.tmpdir / name
        path.mkdir(parents=True, exist_ok=True)
        return path

    # Run every test_* function of a test module when it is executed as a script
    def run_all(self, namespace: dict):
        tests = [(name, func) for name, func in namespace.items() if name.startswith("test_")]
        failed = []
        for name, func in tests:
            print(f"\n{name}")
            try:
                func()
            except Exception:
                traceback.print_exc()
                failed.append(name)
        print(f"\n{len(tests) - len(failed)} passed, {len(failed)} failed")
        if failed:
            raise SystemExit(1)

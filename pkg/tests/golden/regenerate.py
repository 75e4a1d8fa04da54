"""Rewrite the --help snapshots: ``python tests/golden/regenerate.py``."""

import contextlib
import io
import os
from pathlib import Path

from ergolab.cli import COMMANDS, main

HERE = Path(__file__).parent


def help_text(*argv: str) -> str:
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf), contextlib.suppress(SystemExit):
        main([*argv, "--help"])
    return buf.getvalue()


def targets() -> dict[str, tuple[str, ...]]:
    out = {"ergolab": ()}
    out.update({name: (name,) for name in COMMANDS})
    return out


if __name__ == "__main__":
    os.environ["COLUMNS"] = "100"
    for name, argv in targets().items():
        (HERE / f"{name}.help.txt").write_text(help_text(*argv))

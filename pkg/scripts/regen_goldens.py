"""Rewrite tests/golden from tests/fixtures (run after an intended format change)."""

import json
import sys
from pathlib import Path

from sidecomp.cli import main

ROOT = Path(__file__).resolve().parent.parent
GOLDEN = ROOT / "tests" / "golden"


def run() -> int:
    manifest = json.loads((GOLDEN / "manifest.json").read_text())
    for entry in manifest:
        out = GOLDEN / entry["golden"]
        args = list(entry["args"])
        args = [str(ROOT / a) if a.startswith("tests/") else a for a in args]
        code = main(args + ["-o", str(out)])
        print(f"{entry['golden']}: exit {code}")
    return 0


if __name__ == "__main__":
    sys.exit(run())

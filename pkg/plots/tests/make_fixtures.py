"""Regenerate the checked-in fixture files.

Runs the experiment command line tool (which must be on PATH) with the
committed fixture_config.json and replaces everything under fixtures/.
For a fixed config the grids, masks, records, and summary come back byte
for byte; only the manifest files differ, in their creation timestamp.

    python plots/tests/make_fixtures.py
"""

import pathlib
import subprocess
import sys

HERE = pathlib.Path(__file__).resolve().parent
FIXTURES = HERE / "fixtures"


def main() -> int:
    FIXTURES.mkdir(exist_ok=True)
    for stale in FIXTURES.iterdir():
        stale.unlink()
    proc = subprocess.run(
        ["qlandscape", "sweep", str(HERE / "fixture_config.json"),
         "--output-dir", str(FIXTURES)],
        check=False,
    )
    if proc.returncode != 0:
        return proc.returncode
    names = sorted(p.name for p in FIXTURES.iterdir())
    print(f"{len(names)} fixture files:")
    for name in names:
        print(f"  {name}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

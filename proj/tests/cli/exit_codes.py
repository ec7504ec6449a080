#!/usr/bin/env python3
"""Checks the exit codes of the real executable.

usage: exit_codes.py <origins binary> <data dir>
"""

import shutil
import subprocess
import sys
import tempfile
from pathlib import Path


def main():
    exe, data = sys.argv[1], Path(sys.argv[2]).resolve()
    tmp = Path(tempfile.mkdtemp(prefix="origins-exit-"))
    try:
        broken = tmp / "broken"
        shutil.copytree(data, broken)
        with open(broken / "conflicts.csv", "a") as f:
            f.write("Nowhere,3.0,8.0,1830,1829,2,Oyo,synthetic\n")
        missing = tmp / "missing"
        shutil.copytree(data, missing)
        (missing / "nodes.csv").unlink()

        cases = [
            ("valid data", ["validate", "--data", str(data)], 0),
            ("small simulation", ["simulate", "--data", str(data), "--years", "1824",
                                  "--samples", "20", "--out", str(tmp / "arch")], 0),
            ("export", ["export-map", "--archive", str(tmp / "arch"), "--out", str(tmp / "maps"),
                        "--year", "1824", "--ports", "all"], 0),
            ("domain error", ["validate", "--data", str(broken)], 1),
            ("unknown port", ["export-map", "--archive", str(tmp / "arch"), "--out",
                              str(tmp / "maps"), "--year", "1824", "--ports", "atlantis"], 1),
            ("missing file", ["validate", "--data", str(missing)], 2),
            ("missing archive", ["export-map", "--archive", str(tmp / "none"), "--out",
                                 str(tmp / "maps"), "--year", "1824", "--ports", "all"], 2),
            ("no subcommand", [], 64),
            ("unknown option", ["simulate", "--bogus"], 64),
            ("bad value", ["simulate", "--data", str(data), "--samples", "0", "--out",
                           str(tmp / "x")], 64),
        ]
        failures = 0
        for name, args, expect in cases:
            r = subprocess.run([exe, *args], capture_output=True, text=True, timeout=300)
            ok = r.returncode == expect
            failures += not ok
            print(f"{'ok  ' if ok else 'FAIL'} {name}: exit {r.returncode} (expected {expect})")
            if not ok:
                print(r.stdout + r.stderr)
        return 1 if failures else 0
    finally:
        shutil.rmtree(tmp, ignore_errors=True)


if __name__ == "__main__":
    sys.exit(main())

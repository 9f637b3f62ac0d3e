#!/usr/bin/env python3
"""Run the acceptance suite and print one status line per criterion.

Usage: python scripts/run_acceptance.py [extra pytest args]
"""

import subprocess
import sys
from pathlib import Path


def main() -> int:
    root = Path(__file__).resolve().parent.parent
    cmd = [sys.executable, "-m", "pytest", str(root / "tests" / "test_acceptance.py"),
           "-v", "-s", *sys.argv[1:]]
    return subprocess.call(cmd, cwd=root)


if __name__ == "__main__":
    sys.exit(main())

#!/usr/bin/env python3
"""
Run the workbench test suite by marker: unit, integration, slow, fast or coverage
"""

import argparse
import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent

MARKERS = {
    "unit": "unit",
    "integration": "integration",
    "slow": "slow",
    "fast": "not slow and not integration",
}
COVERAGE = ["--cov=src/yoneda_workbench", "--cov-report=term-missing", "--cov-fail-under=80"]


def pytest_args(kind: str, verbose: bool) -> list[str]:
    args = [sys.executable, "-m", "pytest", "tests/"]
    if kind in MARKERS:
        args += ["-m", MARKERS[kind]]
    if kind == "fast":
        args += ["-x", "--tb=short"]
    if kind == "coverage":
        args += COVERAGE
    if verbose:
        args.append("-v")
    return args


def main() -> int:
    parser = argparse.ArgumentParser(description="Run Yoneda workbench tests")
    parser.add_argument("--type", choices=["all", *MARKERS, "coverage"], default="all", help="Tests to run")
    parser.add_argument("--verbose", "-v", action="store_true", help="Verbose output")
    args = parser.parse_args()

    command = pytest_args(args.type, args.verbose)
    print(f"Running {args.type} tests: {' '.join(command[1:])}")
    code = subprocess.run(command, cwd=ROOT).returncode
    print(f"\n{args.type} tests {'passed' if code == 0 else f'failed with exit code {code}'}")
    return code


if __name__ == "__main__":
    sys.exit(main())

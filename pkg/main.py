#!/usr/bin/env python3
"""
Main entry point for the Yoneda workbench.

This script runs the command-line interface from the src package.
"""

import sys

from src.yoneda_workbench.cli import main

if __name__ == "__main__":
    sys.exit(main())

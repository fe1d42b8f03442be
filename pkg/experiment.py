"""Thin launcher: `python experiment.py <command> ...` is `dnts <command> ...`."""

import sys

from dnts.cli import main

if __name__ == "__main__":
    sys.exit(main())

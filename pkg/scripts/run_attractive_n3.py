#!/usr/bin/env python3
"""Attractive model, N = 3, a = 100 au: solve, then per-state observables.

The BEC state is the lowest positive-energy state above the self-bound
cluster states; compare its energy against 4.510 hbar*omega.
"""

import sys

from bosetrap.cli import main

CONFIG = "scripts/configs/attractive_n3.yaml"

if __name__ == "__main__":
    status = main(["solve", "--config", CONFIG])
    if status not in (0, 3):
        sys.exit(status)
    sys.exit(main(["observables", "--config", CONFIG]))

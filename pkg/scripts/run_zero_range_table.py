#!/usr/bin/env python3
"""Zero-range BEC energies for N = 3, 5, 10, 20 at a = 100 au.

Hyper-radial basis, seconds per system size.  Writes out/table1.csv with
the reference column and deviations.
"""

import sys

from bosetrap.cli import main

if __name__ == "__main__":
    sys.exit(main([
        "repro", "--which", "table1",
        "--config", "scripts/configs/zero_range.yaml",
    ]))

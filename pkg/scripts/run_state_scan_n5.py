#!/usr/bin/env python3
"""N = 5 attractive, a = 500 au: per-state condensate fraction and
inverse scaled central density around the BEC state.

Both observables jump sharply at the lowest positive-energy state, which
is how the BEC state is identified among the self-bound cluster states.
Long run (tens of minutes); writes out/fig_states.csv.
"""

import sys

from bosetrap.cli import main

if __name__ == "__main__":
    sys.exit(main([
        "repro", "--which", "fig_states",
        "--config", "scripts/configs/state_scan_n5.yaml",
    ]))

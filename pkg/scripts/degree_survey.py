#!/usr/bin/env python3
"""Empirical degree sampling across fixtures and depths.

Degree boundedness is decided elsewhere; this survey only reports the maximum
degree observed among bounded models, which is a lower bound on the true
supremum and stabilizes quickly for the bounded-degree fixtures.
"""

import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent.parent / "src"))

from clhavoc.analysis import degree_sample
from clhavoc.frontend import parse_system

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "fixtures"

ROWS = [
    ("ring.clsys", "Ring_1_1"),
    ("chain.clsys", "Chain_1_1"),
    ("tll.clsys", "Root"),
    ("tll_pcr.clsys", "Root"),
]


def main() -> int:
    for name, pred in ROWS:
        sf = parse_system((FIXTURES / name).read_text())
        samples = [degree_sample(sf.sid, pred, d) for d in (2, 3, 4)]
        print(f"{name:16} {pred:10} degrees at depth 2..4: {samples}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

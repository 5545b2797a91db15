#!/usr/bin/env python3
"""Sweep truncation depths and report the two-sided metric bracket widths.

The free mode (gaps kept as edges) bounds the scar metric from above, the
collapse mode (gap groups contracted) from below; the table shows the gap
between the two shrinking with the truncation tail on both built-ins.
"""

import os
import random
import sys
from fractions import Fraction as F

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from paperfold import builtin_example, truncate
from paperfold.scar import ScarPair


def sweep(name: str, eps_list, n_pairs: int = 12, seed: int = 5):
    scheme = builtin_example(name)
    rng = random.Random(seed)
    pts = [(F(rng.randrange(0, 4 * 512), 512), F(rng.randrange(0, 4 * 512), 512))
           for _ in range(n_pairs)]
    print(f"{name}: bracket widths for {n_pairs} fixed random parameter pairs")
    print(f"  {'eps':>8} {'tail':>12} {'max width':>12} {'mean width':>12}")
    for eps in eps_list:
        pair = ScarPair(truncate(scheme, eps))
        widths = []
        for (x, y) in pts:
            lo, hi = pair.distance(x, y)
            widths.append(float(hi - lo))
        print(f"  {str(eps):>8} {float(pair.fs.tail_measure):>12.6f} "
              f"{max(widths):>12.6f} {sum(widths)/len(widths):>12.6f}")


if __name__ == "__main__":
    sweep("seq", [F(1, 16), F(1, 64), F(1, 256), F(1, 1024)])
    sweep("cantor", [F(1, 4), F(1, 8), F(1, 16), F(1, 32)])

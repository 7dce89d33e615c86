"""How evenly the reachable endpoints ``f_l(y) + L`` cover the cycle.

With m**k traffic vectors the natural gap is s = n / m**k.  This compares
the closest approach to 0, the largest gap and the window counts against
that scale for random lengths on a prime cycle.
"""

import numpy as np

from ringmix.graph import make_rng
from ringmix.spread import default_m, expected_window_hits, sampled_window_hits, spread_report


def main():
    n, k, alpha = 10007, 2, 0.5
    m = default_m(n, k)
    rng = make_rng(7)
    print(f"n={n} k={k} m={m} s={n / m ** k:.1f}")
    for _ in range(5):
        l = rng.integers(1, n, size=k)
        print("  ", spread_report(l, n, m, L=0, alpha=alpha).row())

    hits = sampled_window_hits(n, k, m, alpha, 2000, seed=8)
    print(f"window hits: sample mean {hits.mean():.3f} vs exact {expected_window_hits(n, k, m, alpha):.3f}"
          f" (P[0 hits] = {np.mean(hits == 0):.3f})")


if __name__ == "__main__":
    main()

"""Loop-erased tracks: hub decisions, edge traffic and the endpoint identity.

A walk is run until its displacement reaches L.  Its loop-erased track
determines how often each extra edge was used, and the endpoint is then
fixed by ``x0 + L + sum_i y_i l_i (mod n)``.
"""

import numpy as np

from ringmix import WalkParams, estimate_decisions, pg_closed_form, run_track, sample_instance
from ringmix.graph import check_B1, make_rng
from ringmix.walker import predicted_endpoint


def main():
    w = WalkParams()
    g = sample_instance(3000, 2, seed=4)
    print("instance:", g.lengths, "B1 spacing holds:", check_B1(g))

    L = 2 * g.n
    hits, ys = 0, []
    for i in range(200):
        tr = run_track(g, w, 0, L, seed=make_rng(4, i))
        hits += tr.endpoint == predicted_endpoint(g, 0, L, tr.y)
        ys.append(tr.y)
    ys = np.array(ys)
    print(f"endpoint identity held on {hits}/200 tracks")
    print("mean traffic per edge:", ys.mean(axis=0), " spread:", ys.std(axis=0))

    est = estimate_decisions(g, w, hub=0, trials=20000, seed=5)
    pg, pj = pg_closed_form(w)
    print(f"hub 0 exits: G {est.p_G:.4f} +- {est.se_G:.4f} (limit {pg:.4f}), "
          f"J {est.p_J:.4f} (limit {pj:.4f}), back {est.p_back:.4f}")


if __name__ == "__main__":
    main()

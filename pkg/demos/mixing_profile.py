"""How a few extra edges speed up a drifting walk on a cycle.

Prints worst-start mixing times for a plain cycle and for random instances
with one and two matching edges, then the distance profile of one instance.
Runs in a few seconds.
"""

import logging

from ringmix import WalkParams, distance_profile, mixing_time, sample_instance, serialize

logger = logging.getLogger(__name__)


def main():
    w = WalkParams()
    n = 400
    print(f"n = {n}, p/q/a = {w.p}/{w.q}/{w.a}, eps = 0.25, all start vertices")
    for k in (0, 1, 2):
        g = sample_instance(n, k, seed=1)
        t = mixing_time(g, w, 0.25, starts="all")
        print(f"  k={k}  t_mix={t:7d}  t_mix/n^2={t / n ** 2:.3f}   {serialize(g)}")

    g = sample_instance(n, 2, seed=1)
    prof = distance_profile(g, w, starts="all", eps=(0.45, 0.25, 0.05), record_every=100)
    print("\nprofile for the k=2 instance (t, worst-start TV distance):")
    for t, d in list(zip(prof.t, prof.d))[::3]:
        print(f"  {int(t):7d}  {d:.4f}")
    print("first passage below eps:", {e: prof.tmix[e] for e in sorted(prof.tmix)})


if __name__ == "__main__":
    main()

"""Build ordered orbit instances for linear contractions and solve them.

For f(x) = k x on the plane and a bent start path gamma0 from x0 to f(x0),
reports the orbit length, the certificate, and how much slack the direct
tail bound k^n l(gamma0) / (1 - k) leaves over the true tail distances.

    python3 scripts/orbit_reduction.py --k 0.3 0.5 0.9 --N 30
"""

import argparse

import numpy as np

from relfix.expr import RealMap
from relfix.paths import Polyline, build_orbit_instance, polyline_length, orbit_tail_bound
from relfix.picard import solve_t3


def run(k, N, bend):
    fmap = RealMap.from_strings([f"{k!r}*x1", f"{k!r}*x2"])
    x0 = np.array([1.0, 0.0])
    mid = (x0 + k * x0) / 2 + [0.0, bend]
    gamma0 = Polyline([x0, mid, k * x0])
    l0 = polyline_length(gamma0)
    bundle = build_orbit_instance(gamma0, fmap, N, 1.01 * l0, k)
    res = solve_t3(bundle.instance)
    pts = len(bundle.points)
    slack = min(
        orbit_tail_bound(l0, k, n) - bundle.ambient_dists[n, m]
        for n in range(pts) for m in range(n + 1, pts)
    )
    return {"k": k, "points": pts, "l0": l0, "xstar": res.xstar,
            "certified": res.certificate.overall, "min_tail_slack": slack}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--k", type=float, nargs="+", default=[0.3, 0.5, 0.8])
    ap.add_argument("--N", type=int, default=20)
    ap.add_argument("--bend", type=float, default=0.2)
    args = ap.parse_args()
    for k in args.k:
        r = run(k, args.N, args.bend)
        print(f"k={r['k']:<5} points={r['points']:<3} l0={r['l0']:.6f} x*={r['xstar']} "
              f"certified={r['certified']} min tail slack={r['min_tail_slack']:.3e}")


if __name__ == "__main__":
    main()

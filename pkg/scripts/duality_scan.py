#!/usr/bin/env python3
"""Scan spectral duality across kinds and particle numbers.

For each kind and n, draws a generic level-set point (diagonal in neither
q nor p), reduces it at both slices, and prints the worst char-poly
coefficient deviation between the unreduced, reduced, and dual Lax
matrices over the default 20-point lambda grid.
"""
import argparse

import numpy as np

from cplab.lax import spectral_match
from cplab.phase import SystemKind
from cplab.reduction import Slice, reduce
from cplab.sampling import random_level_set_point, spec_for

KINDS = (SystemKind.P_I, SystemKind.P_II, SystemKind.P_IV, SystemKind.HARM_OSC)


def scan(seed: int, g: float, ns):
    rng = np.random.default_rng(seed)
    print(f"{'kind':10s} {'n':>2s}  unred/red    unred/dual   red/dual")
    for kind in KINDS:
        spec = spec_for(kind, autonomous=True, tau=1.0)
        for n in ns:
            pt = random_level_set_point(rng, n, g)
            xq = reduce(pt, Slice.Q_DIAG, g, tol=1e-5)
            xp = reduce(pt, Slice.P_DIAG, g, tol=1e-5)
            devs = [spectral_match(spec, a, b)[1]
                    for a, b in ((pt, xq), (pt, xp), (xq, xp))]
            print(f"{kind.value:10s} {n:2d}  " + "  ".join(f"{d:.3e}" for d in devs))


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--g", type=float, default=1.0)
    ap.add_argument("--n", type=int, nargs="+", default=[2, 3, 4, 5])
    args = ap.parse_args()
    scan(args.seed, args.g, args.n)

"""Decide, verify and use a uniform intertwiner between two 1-D walks."""

import argparse

import numpy as np

from qwcat.category import MaterializedIntertwiner, has_uniform_intertwiner, verify_intertwiner, window_from_samples
from qwcat.dynamics import StateVector, evolve, kolmogorov_distance, velocity_distribution
from qwcat.registry import resolve
from qwcat.spectral import TWO_PI


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("source", nargs="?", default="@s3-walk")
    ap.add_argument("target", nargs="?", default="@grover4")
    ap.add_argument("--grid", type=int, default=2048)
    ap.add_argument("--window", type=int, default=1024)
    ap.add_argument("--t", type=int, default=2000)
    args = ap.parse_args()

    w1, w2 = resolve(args.source), resolve(args.target)
    rep = has_uniform_intertwiner(w1, w2, args.grid)
    if not rep.verdict:
        print("no uniform intertwiner")
        return
    for p in rep.pairs:
        print(f"{rep.source.parts[p.part1].describe()}  ->  {rep.target.parts[p.part2].describe()}  shift {p.shift:.3g}")
    print(f"intertwining defect on a 256-site window: {verify_intertwiner(rep, window=256):.2e}")

    N = args.window
    ks = TWO_PI * np.arange(N) / N
    W = MaterializedIntertwiner(ks, rep.source, rep.target, rep.pairs)
    for c in range(w1.n):
        xi = StateVector.delta((0,), c, w1.n)
        amps = window_from_samples(W.transform(xi), ks, -N // 2)
        wxi = StateVector(amps / np.linalg.norm(amps), (-N // 2,))
        n1 = velocity_distribution(evolve(w1, xi, args.t), args.t)
        n2 = velocity_distribution(evolve(w2, wxi, args.t), args.t)
        ks_dist = kolmogorov_distance(n1.points, n1.masses, n2.points, n2.masses)
        print(f"component {c}: |W xi| = {np.linalg.norm(amps):.6f}, Kolmogorov(nu_1, nu_2) at t={args.t}: {ks_dist:.4f}")


if __name__ == "__main__":
    main()

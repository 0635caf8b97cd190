"""Compare the spectral velocity limit with the empirical velocity law at several times."""

import argparse

import numpy as np
from scipy.stats import wasserstein_distance

from qwcat.dynamics import StateVector, step, velocity_distribution
from qwcat.registry import resolve
from qwcat.spectral import limit_velocity_distribution
from qwcat.symbol import propagation_radius


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("walk", nargs="?", default="@coin(1/sqrt(2))")
    ap.add_argument("--component", type=int, default=0)
    ap.add_argument("--times", default="250,500,1000,2000")
    ap.add_argument("--grid", type=int, default=4096)
    args = ap.parse_args()

    w = resolve(args.walk)
    xi = StateVector.delta((0,), args.component, w.n)
    R = propagation_radius(w)
    lim = limit_velocity_distribution(w, xi, args.grid)
    print(f"{args.walk}: branch masses {np.round(lim.branch_mass, 4).tolist()}")
    print(f"{'t':>6} {'kolmogorov':>11} {'wasserstein':>12} {'outside':>9}")
    state, done = xi, 0
    for t in sorted(int(s) for s in args.times.split(",")):
        for _ in range(done, t):
            state = step(w, state)
        done = t
        nu = velocity_distribution(state, t)
        v = nu.points[:, 0]
        ks = lim.kolmogorov(v, nu.masses)
        w1 = wasserstein_distance(lim.velocities, v, lim.masses, nu.masses)
        print(f"{t:>6} {ks:>11.4f} {w1:>12.2e} {nu.mass_outside(R + 0.05):>9.1e}")


if __name__ == "__main__":
    main()

"""Characteristic-function drift of a time-periodic schedule of walks."""

import argparse

import numpy as np

from qwcat.dynamics import PeriodicSchedule, StateVector, characteristic_function, step, velocity_distribution
from qwcat.registry import resolve


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("walks", nargs="*", default=["@coin(0.6)", "@coin(0.8)"])
    ap.add_argument("--times", default="500,1000,1500,2000,2500")
    ap.add_argument("--kpoints", type=int, default=16)
    args = ap.parse_args()

    sched = PeriodicSchedule(tuple(resolve(r) for r in args.walks))
    ks = np.linspace(-np.pi, np.pi, args.kpoints)
    state, done, prev = StateVector.delta((0,), 0, sched.factors[0].n), 0, None
    print(f"{'t':>6} {'max|phi_t - phi_prev|':>22}")
    for t in sorted(int(s) for s in args.times.split(",")):
        for s in range(done, t):
            state = step(sched.factors[s % sched.period], state)
        done = t
        phi = characteristic_function(velocity_distribution(state, t), ks)
        drift = float("nan") if prev is None else float(np.max(np.abs(phi - prev)))
        print(f"{t:>6} {drift:>22.2e}")
        prev = phi


if __name__ == "__main__":
    main()

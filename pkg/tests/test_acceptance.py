"""Acceptance criteria, one test per criterion, each printing a PASS/FAIL line with the measured values."""

import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest
from scipy.stats import wasserstein_distance

from qwcat.category import Pairing, has_uniform_intertwiner, verify_intertwiner
from qwcat.cli import main
from qwcat.ctqw import build_generator, realizable, verify_realization
from qwcat.dynamics import (
    PeriodicSchedule,
    StateVector,
    characteristic_function,
    difference_norm,
    evolve,
    step,
    velocity_distribution,
)
from qwcat.oracle import oracle_evolve, truncated_matrix
from qwcat.registry import REGISTRY, resolve
from qwcat.spectral import limit_velocity_distribution, track_branches
from qwcat.symbol import propagation_radius

from closed_forms import CLOSED_FORMS, branch_error, grover4_branch, match_closed_forms

PI = np.pi
STAMP = "2000-01-01T00:00:00+00:00"


@pytest.fixture
def verdict(capsys):
    def record(n, ok, detail):
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
        assert ok, detail

    return record


def test_criterion_1_windings(verdict):
    coin = track_branches(resolve("@coin(0.6)"))
    g3 = track_branches(resolve("@grover3"))
    g4 = track_branches(resolve("@grover4"))
    real = track_branches(resolve("@coin-realizable(0.6)"))
    plus = min(g4.branches, key=lambda lam: branch_error(lam, grover4_branch(1), 2 * PI))
    got = {
        "coin(0.6)": [lam.winding for lam in coin.branches],
        "grover3 lambda2": [lam.winding for lam in g3.branches if not lam.is_constant],
        "grover4 lambda+": [plus.winding],
        "coin-realizable(0.6)": [lam.winding for lam in real.branches],
    }
    want = {"coin(0.6)": [1], "grover3 lambda2": [0], "grover4 lambda+": [1], "coin-realizable(0.6)": [0, 0]}
    verdict(1, got == want, f"windings {got}")


def test_criterion_2_closed_forms(verdict):
    errors = {ref: match_closed_forms(track_branches(resolve(ref), 4096), forms) for ref, forms in CLOSED_FORMS.items()}
    worst = max(errors.values())
    verdict(2, worst <= 1e-8, "max grid error " + ", ".join(f"{r} {e:.1e}" for r, e in errors.items()))


def test_criterion_3_minimal_periods(verdict):
    (coin,) = track_branches(resolve("@coin(0.6)")).branches
    (cube,) = track_branches(resolve("@cube")).branches
    dc, dq = abs(coin.minimal_period - 4 * PI), abs(cube.minimal_period - 3 * PI)
    verdict(3, dc <= 1e-9 and dq <= 1e-9, f"coin {coin.minimal_period:.12f} (4pi err {dc:.1e}), cube {cube.minimal_period:.12f} (3pi err {dq:.1e})")


def test_criterion_4_intertwiners(verdict, capsys):
    start = time.time()
    codes = {}
    for name in ("coin", "coin-decomposable"):
        codes[name] = main(["intertwine", f"@{name}(0.6)", f"@{name}(0.8)"], timestamp=STAMP)
    capsys.readouterr()
    rep = has_uniform_intertwiner(resolve("@s3-walk"), resolve("@grover4"), 4096)
    pairing = sorted(
        (rep.source.parts[p.part1].eigenfunction.winding, rep.target.parts[p.part2].eigenfunction.winding)
        for p in rep.pairs
    )
    defect = verify_intertwiner(rep, window=256, states=20, seed=0)
    a, b = rep.pairs
    swapped = [Pairing(a.part1, b.part2, 0.0), Pairing(b.part1, a.part2, 0.0)]
    control = verify_intertwiner(rep, swapped, window=256, states=20, seed=0)
    elapsed = time.time() - start
    ok = (
        all(c == 3 for c in codes.values())
        and rep.verdict
        and pairing == [(-1, -1), (1, 1)]
        and defect <= 1e-6
        and control > 0.1
        and elapsed < 60
    )
    verdict(
        4,
        ok,
        f"0.6 vs 0.8 exit codes {codes}; s3-walk -> grover4 pairs (winding src, tgt) {pairing} "
        f"i.e. lambda+ and lambda-; defect {defect:.1e}; swapped-pairing control {control:.2f}; {elapsed:.1f}s",
    )


def test_criterion_5_ctqw(verdict):
    start = time.time()
    expect = {
        "@coin(0.3)": False,
        "@coin(0.6)": False,
        "@coin(1/sqrt(2))": False,
        "@coin-realizable(0.3)": True,
        "@coin-realizable(0.6)": True,
        "@grover3": True,
        "@grover4": False,
    }
    got, defects = {}, {}
    for ref in expect:
        w = resolve(ref)
        got[ref] = realizable(w).realizable
        if got[ref]:
            defects[ref] = verify_realization(build_generator(w), window=512, trials=20, seed=0)
    elapsed = time.time() - start
    ok = got == expect and all(d <= 1e-6 for d in defects.values()) and elapsed < 120
    shown = ", ".join(f"{r} {d:.1e}" for r, d in defects.items())
    verdict(5, ok, f"verdicts {got}; realization defects {shown}; {elapsed:.1f}s")


def limit_check(ref):
    w = resolve(ref)
    xi = StateVector.delta((0,), 0, w.n)
    R = propagation_radius(w)
    lim = limit_velocity_distribution(w, xi, 4096)
    early = velocity_distribution(evolve(w, xi, 500), 500)
    state = evolve(w, xi, 2000)
    nu = velocity_distribution(state, 2000)
    v = nu.points[:, 0]
    ks = lim.kolmogorov(v, nu.masses)
    outside = max(early.mass_outside(R + 0.05), nu.mass_outside(R + 0.05))
    grid = np.linspace(-R, R, 4001)
    grid = grid[np.abs(grid) > 0.02]
    off_zero = float(np.max(np.abs(lim.cdf(grid) - np.array([nu.masses[v <= g].sum() for g in grid]))))
    w1 = wasserstein_distance(lim.velocities, v, lim.masses, nu.masses)
    atom = lim.masses[np.abs(lim.velocities) < 1e-9].sum()
    diag = (
        f"limit atom at 0 {atom:.3f}, empirical mass at x=0 {nu.masses[v == 0].sum():.3f}, "
        f"KS off |v|<0.02 {off_zero:.3f}, W1 {w1:.1e}"
    )
    return ks, outside, diag


@pytest.mark.parametrize("ref", ["@coin(1/sqrt(2))", "@grover3"])
def test_criterion_6_limit_distribution(verdict, ref):
    start = time.time()
    ks, outside, diag = limit_check(ref)
    elapsed = time.time() - start
    verdict(
        6,
        ks <= 0.05 and outside <= 1e-3 and elapsed < 120,
        f"{ref} KS at t=2000 {ks:.4f} (<= 0.05), mass outside [-R-0.05, R+0.05] {outside:.1e}; {diag}; {elapsed:.1f}s",
    )


def test_criterion_7_time_periodic(verdict):
    start = time.time()
    sched = PeriodicSchedule((resolve("@coin(0.6)"), resolve("@coin(0.8)")))
    ks = np.linspace(-PI, PI, 16)
    state, done, phis = StateVector.delta((0,), 0, 2), 0, {}
    for t in (1500, 2000, 2500):
        for s in range(done, t):
            state = step(sched.factors[s % sched.period], state)
        done = t
        phis[t] = characteristic_function(velocity_distribution(state, t), ks)
    drift = max(float(np.max(np.abs(phis[a] - phis[b]))) for a in phis for b in phis)
    elapsed = time.time() - start
    verdict(7, drift <= 0.02 and elapsed < 120, f"schedule [coin(0.6), coin(0.8)] drift {drift:.1e} over t in 1500/2000/2500; {elapsed:.1f}s")


def test_criterion_8_oracle(verdict):
    start = time.time()
    half = 100  # 201 sites per axis
    rng = np.random.default_rng(0)
    worst = {}
    for name, make in REGISTRY.items():
        w = make()
        R = propagation_radius(w)
        t = 50 if R == 0 else min(50, (half - 3) // R)
        m = truncated_matrix(w, half)
        amps = rng.normal(size=(w.n,) + (5,) * w.d) + 1j * rng.normal(size=(w.n,) + (5,) * w.d)
        states = [StateVector.delta((0,) * w.d, c, w.n) for c in range(w.n)]
        states.append(StateVector(amps / np.linalg.norm(amps), (-2,) * w.d))
        worst[name] = max(difference_norm(evolve(w, xi, t), oracle_evolve(w, xi, t, half, m)) for xi in states)
    elapsed = time.time() - start
    top = max(worst.values())
    verdict(8, top <= 1e-12 and elapsed < 60, f"max difference {top:.1e} over {len(worst)} registry walks (2-D included); {elapsed:.1f}s")


def test_criterion_9_invariant_suites(verdict):
    start = time.time()
    here = Path(__file__).parent
    suites = [
        str(here / "test_properties.py"),
        str(here / "test_symbol.py") + "::test_registry_walks_validate",
        str(here / "test_spectral.py") + "::test_coverage_and_closure",
        str(here / "test_spectral.py") + "::test_group_velocity_bound",
        str(here / "test_spectral.py") + "::test_grid_doubling_is_stable",
        str(here / "test_category.py") + "::test_similarity_reflexive_and_chain",
        str(here / "test_category.py") + "::test_multiplier_family",
    ]
    run = subprocess.run(
        [sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider", *suites],
        capture_output=True,
        text=True,
        cwd=here.parent,
    )
    elapsed = time.time() - start
    summary = run.stdout.strip().splitlines()[-1] if run.stdout.strip() else run.stderr[-200:]
    verdict(9, run.returncode == 0 and elapsed < 300, f"invariant suites: {summary}; {elapsed:.1f}s")

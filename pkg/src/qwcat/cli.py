"""``qwcat`` command line.

Exit codes: 0 success or affirmative verdict, 3 negative verdict (no
intertwiner, not realizable), 1 error.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import category, ctqw, dynamics, spectral
from .errors import QWCatError
from .registry import REGISTRY, parse_number, resolve
from .report import RunConfig, build_report, emit_report, rows_to_csv, write_output
from .symbol import classify_regularity, load_walk, propagation_radius, unitarity_defect, validate

NEGATIVE = 3


def load_walk_arg(ref: str):
    return resolve(ref) if ref.startswith("@") else load_walk(ref)


def initial_state(cfg: RunConfig, w) -> dynamics.StateVector:
    if cfg.state:
        xi = dynamics.load_state(cfg.state)
        if xi.n != w.n or xi.d != w.d:
            raise QWCatError(f"state has (n, d) = ({xi.n}, {xi.d}) but the walk has ({w.n}, {w.d})")
        return xi
    if not 0 <= cfg.component < w.n:
        raise QWCatError(f"--component must lie in [0, {w.n})")
    return dynamics.StateVector.delta((0,) * w.d, cfg.component, w.n, w.d)


def parse_kgrid(text: str) -> np.ndarray:
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError("--kgrid expects a:b:m")
    return np.linspace(parse_number(parts[0]), parse_number(parts[1]), int(parts[2]))


def _check_window(cfg: RunConfig, w, xi) -> None:
    if cfg.window is None:
        return
    lo, hi = xi.support_box()
    need = int(np.max(hi - lo)) + 1 + 2 * propagation_radius(w) * cfg.t
    if cfg.window < need:
        raise QWCatError(f"window {cfg.window} is below the required {need} sites (2*R*t plus the initial support)")


# --- commands ------------------------------------------------------------
# each returns (results, provenance, csv header, csv rows, exit code)

def cmd_validate(cfg):
    w = load_walk_arg(cfg.inputs[0])
    defect, worst = unitarity_defect(w)
    validate(w)
    res = {
        "name": w.name, "n": w.n, "d": w.d, "defect": defect, "worst_k": worst,
        "propagation_radius": propagation_radius(w), "regularity": str(classify_regularity(w)),
    }
    prov = {"defect": "max Frobenius norm of U(k)U(k)^* - I on a 256-point-per-axis grid"}
    return res, prov, ["defect"], [[defect]], 0


def cmd_simulate(cfg):
    w = load_walk_arg(cfg.inputs[0])
    xi = initial_state(cfg, w)
    _check_window(cfg, w, xi)
    mu = dynamics.position_distribution(dynamics.evolve(w, xi, cfg.t))
    cols = ["x", "y", "z"][: w.d] if w.d <= 3 else [f"x{i}" for i in range(w.d)]
    rows = [list(p) + [m] for p, m in zip(mu.points.tolist(), mu.masses.tolist())]
    res = {"t": cfg.t, "total": mu.total(), "points": mu.points, "masses": mu.masses}
    prov = {"masses": "exact sparse convolution of the symbol terms, t steps"}
    return res, prov, cols + ["probability"], rows, 0


def cmd_velocity(cfg):
    w = load_walk_arg(cfg.inputs[0])
    xi = initial_state(cfg, w)
    nu = dynamics.velocity_distribution(dynamics.evolve(w, xi, cfg.t), cfg.t)
    mom = dynamics.moments(nu, 2)
    cols = ["v"] if w.d == 1 else [f"v{i}" for i in range(w.d)]
    rows = [list(p) + [m] for p, m in zip(nu.points.tolist(), nu.masses.tolist())]
    res = {"t": cfg.t, "velocities": nu.points, "masses": nu.masses, "mean": mom.mean, "variance": mom.variance}
    prov = {"masses": "position law of U^t xi pushed through x -> x/t"}
    return res, prov, cols + ["mass"], rows, 0


def cmd_charfn(cfg):
    w = load_walk_arg(cfg.inputs[0])
    if w.d != 1:
        raise QWCatError("charfn supports d = 1")
    ks = parse_kgrid(cfg.kgrid or "-pi:pi:65")
    nu = dynamics.velocity_distribution(dynamics.evolve(w, initial_state(cfg, w), cfg.t), cfg.t)
    phi = np.atleast_1d(dynamics.characteristic_function(nu, ks))
    res = {"t": cfg.t, "k": ks, "phi": [complex(z) for z in phi]}
    prov = {"phi": "sum of mass * exp(i k v) over the velocity law at time t"}
    return res, prov, ["k", "re", "im"], [[k, z.real, z.imag] for k, z in zip(ks.tolist(), phi)], 0


def cmd_spectrum(cfg):
    w = load_walk_arg(cfg.inputs[0])
    spec = spectral.track_branches(w, cfg.grid)
    branches, rows = [], []
    for b, lam in enumerate(spec.branches):
        entry = {
            "branch": b, "period": lam.period, "minimal_period": lam.minimal_period,
            "winding": lam.winding, "constant": lam.is_constant, "closure_defect": lam.closure_defect,
        }
        if lam.is_constant:
            entry["value"] = lam.constant_value()
        branches.append(entry)
        ks = lam.spacing * np.arange(len(lam.samples))
        rows += [[k, b, z.real, z.imag, v] for k, z, v in zip(ks.tolist(), lam.samples, lam.velocity_samples.tolist())]
    res = {"grid": cfg.grid, "branches": branches, "coverage_defect": spec.coverage_defect()}
    prov = {
        "branches": "eigenvalue continuation with Hungarian matching; monodromy glues 2*pi turns",
        "minimal_period": "largest divisor m <= 2n with sup |lambda(k + p/m) - lambda(k)| <= 1e-7",
        "winding": "sum of principal phase increments over one minimal period",
    }
    return res, prov, ["k", "branch", "re", "im", "velocity"], rows, 0


def cmd_limit(cfg):
    w = load_walk_arg(cfg.inputs[0])
    lim = spectral.limit_velocity_distribution(w, initial_state(cfg, w), cfg.grid)
    order = np.argsort(lim.velocities, kind="stable")
    v, m = lim.velocities[order], lim.masses[order]
    res = {
        "grid": cfg.grid, "total": lim.total(), "branch_mass": lim.branch_mass,
        "mean": float(v @ m), "second_moment": float(v**2 @ m), "velocities": v, "masses": m,
    }
    prov = {"masses": "|<v_b(k), xi_hat(k)>|^2 / N at group velocity of every branch translate"}
    return res, prov, ["v", "mass"], [[a, b] for a, b in zip(v.tolist(), m.tolist())], 0


def cmd_decompose(cfg):
    w = load_walk_arg(cfg.inputs[0])
    dec = category.decompose(w, cfg.grid)
    parts = [p.describe() for p in dec.parts]
    res = {"parts": parts, "dimension_count": dec.dimension_count(), "indecomposable": len(parts) == 1 and (not dec.parts[0].is_constant or w.n == 1)}
    prov = {"parts": "tracked branches split to minimal periods"}
    rows = [[i, p["branch"], p["copy"], p["period"], p["constant"]] for i, p in enumerate(parts)]
    return res, prov, ["part", "branch", "copy", "period", "constant"], rows, 0


def cmd_intertwine(cfg):
    if len(cfg.inputs) != 2:
        raise QWCatError("intertwine needs two walks")
    w1, w2 = (load_walk_arg(x) for x in cfg.inputs)
    rep = category.has_uniform_intertwiner(w1, w2, cfg.grid)
    pairs = [
        {"source_part": p.part1, "target_part": p.part2, "shift": p.shift,
         "source": rep.source.parts[p.part1].describe(), "target": rep.target.parts[p.part2].describe()}
        for p in rep.pairs
    ]
    res = {"verdict": rep.verdict, "pairs": pairs}
    prov = {"shift": "Fourier cross-correlation on the minimal period, refined by bounded search and Newton steps"}
    if cfg.verify and rep.verdict:
        res["defect"] = category.verify_intertwiner(rep, window=cfg.window or 256, states=cfg.states, seed=cfg.seed)
        prov["defect"] = "max ||W U1 xi - U2 W xi|| over seeded random states on a periodic window"
    rows = [[p["source_part"], p["target_part"], p["shift"]] for p in pairs]
    return res, prov, ["source_part", "target_part", "shift"], rows, 0 if rep.verdict else NEGATIVE


def cmd_ctqw(cfg, generator_out=None):
    w = load_walk_arg(cfg.inputs[0])
    verdict = ctqw.realizable(w, cfg.grid)
    res = verdict.as_dict()
    prov = {"windings": "phase increments per minimal period; realizable iff all vanish"}
    if verdict.realizable and (cfg.build or cfg.verify or generator_out):
        g = ctqw.build_generator(w, cfg.grid, verdict.spectrum)
        res["residual"] = g.residual()
        prov["residual"] = "max |exp(i h) - lambda| on the branch grid"
        if generator_out:
            ctqw.save_generator(g, generator_out)
        if cfg.verify:
            res["defect"] = ctqw.verify_realization(g, w, cfg.window or 512, cfg.states, cfg.seed)
            prov["defect"] = "max ||V(1) xi - U xi|| over seeded random states on a periodic window"
    rows = [[b, n] for b, n in verdict.windings]
    return res, prov, ["branch", "winding"], rows, 0 if verdict.realizable else NEGATIVE


def cmd_examples(cfg):
    rows, items = [], []
    for name, make in REGISTRY.items():
        w = make()
        items.append({"name": name, "n": w.n, "d": w.d, "radius": propagation_radius(w)})
        rows.append([name, w.n, w.d, propagation_radius(w)])
    return {"examples": items}, {"examples": "built-in registry"}, ["name", "n", "d", "radius"], rows, 0


COMMANDS = {
    "validate": cmd_validate, "simulate": cmd_simulate, "velocity": cmd_velocity, "charfn": cmd_charfn,
    "spectrum": cmd_spectrum, "limit": cmd_limit, "decompose": cmd_decompose,
    "intertwine": cmd_intertwine, "ctqw": cmd_ctqw, "examples": cmd_examples,
}


HELP = {
    "validate": "check unitarity of the symbol and report radius and regularity",
    "simulate": "evolve a state for --t steps and report the position distribution",
    "velocity": "velocity distribution X_t / t after --t steps",
    "charfn": "characteristic function of the velocity distribution on --kgrid",
    "spectrum": "eigenvalue branches with periods, minimal periods and windings",
    "limit": "spectral limit of the velocity distribution",
    "decompose": "split a 1-D walk into minimal model walks",
    "intertwine": "decide whether a uniform unitary intertwiner exists",
    "ctqw": "decide realizability as the time-one map of a continuous-time walk",
    "examples": "list the registry walks",
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qwcat", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=HELP[name], description=HELP[name])
        if name == "intertwine":
            p.add_argument("inputs", nargs=2, metavar="WALK")
        elif name != "examples":
            p.add_argument("inputs", nargs=1, metavar="WALK", help="walk JSON file or @name(args)")
        p.add_argument("--grid", type=int, default=4096, help="k-grid points per 2*pi (power of two >= 512)")
        p.add_argument("--window", type=int, help="periodic window size in sites")
        p.add_argument("--t", type=int, default=100, help="number of steps")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", help="write the report here instead of stdout")
        p.add_argument("--format", choices=["json", "csv"], default="json")
        p.add_argument("--component", type=int, default=0)
        p.add_argument("--init", "--state", dest="state", help="initial state JSON (default: delta at the origin)")
        p.add_argument("--states", type=int, default=20, help="random states for verification")
        if name == "charfn":
            p.add_argument("--kgrid", default="-pi:pi:65", help="a:b:m, evenly spaced")
        if name in ("intertwine", "ctqw"):
            p.add_argument("--verify", action="store_true", help="measure the defect on seeded random states")
        if name == "ctqw":
            p.add_argument("--build", action="store_true", help="construct the phase generator")
            p.add_argument("--generator", help="write the phase generator JSON here")
    return ap


def main(argv=None, timestamp: str | None = None) -> int:
    args = build_parser().parse_args(argv)
    fields = {k: v for k, v in vars(args).items() if k in RunConfig.__dataclass_fields__}
    cfg = RunConfig(**fields)
    try:
        cfg.check()
        fn = COMMANDS[cfg.command]
        out = fn(cfg, args.generator) if cfg.command == "ctqw" else fn(cfg)
    except (QWCatError, ValueError, OSError) as exc:
        print(f"qwcat {cfg.command}: error: {exc}", file=sys.stderr)
        return 1
    results, prov, header, rows, code = out
    if cfg.format == "csv":
        text = rows_to_csv(header, rows)
    else:
        text = emit_report(build_report(cfg, results, prov, timestamp))
    try:
        write_output(text, cfg.out)
    except BrokenPipeError:
        # reader closed the pipe early (e.g. ``| head``); stop quietly
        sys.stdout = open(os.devnull, "w")
        return code
    if cfg.out is not None:
        summary = {k: results[k] for k in ("verdict", "realizable", "defect") if k in results}
        print(f"qwcat {cfg.command}: wrote {cfg.out} {summary if summary else ''}".rstrip())
    return code


if __name__ == "__main__":
    sys.exit(main())

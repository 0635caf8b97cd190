"""Continuous-time realization of 1-D walks.

A walk U is the time-one map of a strongly continuous unitary group exactly
when every eigenvalue branch has winding number 0.  Then each branch has a
continuous periodic logarithm h with exp(i h) = lambda, and V(t) acts on the
branch by exp(i t h).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .category import periodic_step, window_from_samples, random_states
from .dynamics import StateVector
from .errors import NotRealizable, SchemaError, WindowTooSmall
from .spectral import (
    DEFAULT_GRID,
    TWO_PI,
    SpectrumDecomposition,
    eigensections,
    fourier_state,
    track_branches,
    unwrapped_phase,
)
from .symbol import WalkDefinition, parse_walk, walk_to_document

RESIDUAL_TOL = 1e-8
AMPLITUDE_CUTOFF = 1e-12
EDGE_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class RealizabilityVerdict:
    realizable: bool
    windings: list[tuple[int, int]]
    obstruction: tuple[int, int] | None = None
    spectrum: SpectrumDecomposition | None = None

    def as_dict(self) -> dict:
        return {
            "realizable": self.realizable,
            "windings": [{"branch": b, "winding": n} for b, n in self.windings],
            "obstruction": None if self.obstruction is None else {"branch": self.obstruction[0], "winding": self.obstruction[1]},
        }


def realizable(w: WalkDefinition, grid_size: int = DEFAULT_GRID, spectrum: SpectrumDecomposition | None = None) -> RealizabilityVerdict:
    """Realizable by a continuous-time walk iff all winding numbers vanish."""
    spec = track_branches(w, grid_size) if spectrum is None else spectrum
    windings = [(b, lam.winding) for b, lam in enumerate(spec.branches)]
    bad = next(((b, n) for b, n in windings if n != 0), None)
    return RealizabilityVerdict(bad is None, windings, bad, spec)


@dataclass(frozen=True, eq=False)
class PhaseGenerator:
    """Branchwise logarithms h_b of a realizable walk, sampled like the branches."""

    walk: WalkDefinition
    spectrum: SpectrumDecomposition
    phases: list[np.ndarray]

    def branch_phase(self, b: int, k) -> np.ndarray:
        """h_b at arbitrary points, corrected so exp(i h_b) equals the tracked eigenvalue."""
        lam = self.spectrum.branches[b]
        k = np.asarray(k, dtype=float)
        h = self.phases[b]
        idx = lam._grid_index(k)
        if idx is not None:
            return h[idx]
        c = np.fft.fft(h) / len(h)
        freqs = lam._freqs
        raw = np.real(np.exp(1j * np.multiply.outer(k, freqs)) @ c)
        return raw + np.angle(lam(k) * np.exp(-1j * raw))

    def translate_phases(self, ks) -> np.ndarray:
        """h at k + 2*pi*m for every label (b, m), shape (len(ks), n)."""
        ks = np.asarray(ks, dtype=float)
        return np.stack([self.branch_phase(b, ks + TWO_PI * m) for b, m in self.spectrum.labels], axis=1)

    def residual(self) -> float:
        """max over branches and grid of |exp(i h) - lambda|."""
        return max(
            float(np.max(np.abs(np.exp(1j * h) - lam.samples)))
            for h, lam in zip(self.phases, self.spectrum.branches)
        )

    def to_document(self) -> dict:
        return {
            "walk": walk_to_document(self.walk),
            "grid": self.spectrum.grid_size,
            "branches": [
                {"branch": b, "period": lam.period, "phase_samples": h.tolist()}
                for b, (h, lam) in enumerate(zip(self.phases, self.spectrum.branches))
            ],
        }


def build_generator(w: WalkDefinition, grid_size: int = DEFAULT_GRID, spectrum: SpectrumDecomposition | None = None) -> PhaseGenerator:
    verdict = realizable(w, grid_size, spectrum)
    if not verdict.realizable:
        b, n = verdict.obstruction
        raise NotRealizable(f"branch {b} has winding number {n}")
    spec = verdict.spectrum
    phases = []
    for lam in spec.branches:
        if lam.is_constant:
            phases.append(np.full(len(lam.samples), np.angle(lam.constant_value())))
        else:
            phases.append(unwrapped_phase(lam))
    return PhaseGenerator(w, spec, phases)


def generator_from_document(doc: dict) -> PhaseGenerator:
    try:
        w = parse_walk(doc["walk"])
        grid = int(doc["grid"])
        rows = sorted(doc["branches"], key=lambda r: r["branch"])
        phases = [np.asarray(r["phase_samples"], dtype=float) for r in rows]
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed generator document: {exc}") from exc
    spec = track_branches(w, grid)
    if [len(p) for p in phases] != [len(lam.samples) for lam in spec.branches]:
        raise SchemaError("phase samples do not match the walk's branch structure")
    g = PhaseGenerator(w, spec, phases)
    if g.residual() > RESIDUAL_TOL:
        raise SchemaError(f"stored phases do not exponentiate to the eigenvalues (residual {g.residual():.2e})")
    return g


def save_generator(g: PhaseGenerator, path) -> None:
    Path(path).write_text(json.dumps(g.to_document()))


def load_generator(path) -> PhaseGenerator:
    return generator_from_document(json.loads(Path(path).read_text()))


def _propagator(g: PhaseGenerator, t: float, ks: np.ndarray) -> np.ndarray:
    """V(t)^(k) = sum over translates of exp(i t h) v v^*, shape (K, n, n)."""
    _, vecs = eigensections(g.walk, g.spectrum, ks)
    ph = np.exp(1j * t * g.translate_phases(ks))
    return np.einsum("kic,kc,kjc->kij", vecs, ph, np.conj(vecs))


def _evolve_window(g: PhaseGenerator, t: float, xi: StateVector, window: int, x0: int) -> np.ndarray:
    ks = TWO_PI * np.arange(window) / window
    vhat = np.einsum("kij,kj->ki", _propagator(g, t, ks), fourier_state(xi, ks))
    return window_from_samples(vhat, ks, x0)


def _window_origin(xi: StateVector, window: int) -> int:
    box = xi.support_box()
    if box is None:
        return -(window // 2)
    lo, hi = box[0][0], box[1][0]
    if hi - lo + 1 > window:
        raise WindowTooSmall(f"state of width {hi - lo + 1} does not fit a window of {window}")
    return (lo + hi) // 2 - window // 2


def evolve_continuous(g: PhaseGenerator, t: float, xi: StateVector, window: int = 512) -> StateVector:
    """V(t) xi computed on a periodic window centred on xi; tiny amplitudes dropped."""
    x0 = _window_origin(xi, window)
    amps = _evolve_window(g, t, xi, window, x0)
    edge = max(1, window // 16)
    if np.linalg.norm(np.concatenate([amps[:, :edge], amps[:, -edge:]], axis=1)) > EDGE_TOL:
        raise WindowTooSmall(f"evolved state reaches the edge of the {window}-site window")
    amps = np.where(np.abs(amps) < AMPLITUDE_CUTOFF, 0.0, amps)
    return StateVector(amps, (x0,)).trimmed()


def verify_realization(g: PhaseGenerator, w: WalkDefinition | None = None, window: int = 512, trials: int = 20, seed: int = 0) -> float:
    """max ||V(1) xi - U xi|| over seeded random unit states on the window."""
    w = g.walk if w is None else w
    x0 = -(window // 2)
    worst = 0.0
    for xi in random_states(w.n, trials, seed, half_width=min(16, window // 8)):
        lhs = _evolve_window(g, 1.0, xi, window, x0)
        rhs = periodic_step(w, xi.embed((x0,), (window,)))
        worst = max(worst, float(np.linalg.norm(lhs - rhs)))
    return worst

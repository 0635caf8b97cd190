"""Model-walk decompositions and uniform intertwiners between 1-D walks.

A walk splits into model walks (lambda, p): multiplication by lambda on L^2 of
the circle of length p.  Between two non-constant model walks at minimal
period the uniform intertwiners are exactly M[f] sigma_l, where sigma_l
translates by l and lambda_2(k) = lambda_1(k - l).  Intertwiners are carried
around as (pairing, shift) data and only materialized on a finite window when
they are checked.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from scipy.optimize import minimize_scalar
from scipy.sparse.csgraph import maximum_bipartite_matching

from .dynamics import StateVector, step
from .errors import DimensionMismatch, WindowTooSmall
from .spectral import (
    DEFAULT_GRID,
    TWO_PI,
    EigenvalueFunction,
    SpectrumDecomposition,
    eigensections,
    fourier_state,
    track_branches,
)
from .symbol import WalkDefinition

SHIFT_TOL = 1e-7
SHIFT_GRID = 4096
CONSTANT_MATCH_TOL = 1e-7


@dataclass(frozen=True, eq=False)
class ModelWalk:
    """Model walk (lambda, period).

    ``branch`` indexes the tracked branch it came from; a branch of period
    ``copies * period`` splits into ``copies`` model walks numbered by ``copy``.
    """

    eigenfunction: EigenvalueFunction
    period: float
    branch: int = 0
    copy: int = 0
    copies: int = 1

    @property
    def is_constant(self) -> bool:
        return self.eigenfunction.is_constant

    @property
    def minimal(self) -> bool:
        if self.is_constant:
            return True
        return abs(self.period - self.eigenfunction.minimal_period) < 1e-9

    @property
    def splittable(self) -> bool:
        return not self.minimal

    def describe(self) -> dict:
        lam = self.eigenfunction
        out = {"period": self.period, "constant": self.is_constant, "branch": self.branch, "copy": self.copy}
        if self.is_constant:
            c = lam.constant_value()
            out["value"] = [c.real, c.imag]
        else:
            out["winding"] = lam.winding
        return out


def split_model(m: ModelWalk) -> list[ModelWalk]:
    """Split (lambda, c*q) into c copies of (lambda, q), q the minimal period."""
    if m.is_constant:
        return [m]
    q = m.eigenfunction.minimal_period
    c = int(round(m.period / q))
    if c <= 1:
        return [m]
    return [ModelWalk(m.eigenfunction, m.period / c, m.branch, r, c) for r in range(c)]


@dataclass(frozen=True, eq=False)
class Decomposition:
    walk: WalkDefinition
    spectrum: SpectrumDecomposition
    parts: list[ModelWalk]

    def section_samples(self, ks=None) -> tuple[np.ndarray, np.ndarray]:
        """Unit eigenvectors for every branch translate, see :func:`eigensections`."""
        if ks is None:
            ks = TWO_PI * np.arange(self.spectrum.grid_size) / self.spectrum.grid_size
        return eigensections(self.walk, self.spectrum, ks)

    def dimension_count(self) -> int:
        """Sum over parts of period / 2*pi; equals n for a complete decomposition."""
        return int(round(sum(p.period for p in self.parts) / TWO_PI))


def decompose(w: WalkDefinition, grid_size: int = DEFAULT_GRID, spectrum: SpectrumDecomposition | None = None) -> Decomposition:
    spec = track_branches(w, grid_size) if spectrum is None else spectrum
    parts: list[ModelWalk] = []
    for b, lam in enumerate(spec.branches):
        if lam.is_constant:
            parts += [ModelWalk(lam, TWO_PI, b, r, lam.turns) for r in range(lam.turns)]
        else:
            parts += split_model(ModelWalk(lam, lam.period, b))
    return Decomposition(w, spec, parts)


# --- translations --------------------------------------------------------

def _coeffs_on_period(lam: EigenvalueFunction, q: float, size: int) -> np.ndarray:
    """Fourier coefficients of lambda on period q, in numpy order of length ``size``."""
    m = int(round(lam.period / q))
    c = np.fft.fft(lam.samples) / len(lam.samples)
    f = np.rint(np.fft.fftfreq(len(c), 1.0 / len(c))).astype(np.int64)
    keep = (f % m == 0) & (np.abs(f // m) < size // 2)
    out = np.zeros(size, dtype=complex)
    out[(f[keep] // m) % size] = c[keep]
    return out


def _correlation(a: np.ndarray, freqs: np.ndarray, l: float, order: int = 0) -> complex:
    return complex(np.sum(a * (-1j * freqs) ** order * np.exp(-1j * freqs * l)))


def translation_shift(lam1: EigenvalueFunction, lam2: EigenvalueFunction) -> float | None:
    """l in [0, q) with lambda_2(k) = lambda_1(k - l), or None."""
    if lam1.is_constant or lam2.is_constant:
        return None
    q = lam1.minimal_period
    if abs(q - lam2.minimal_period) > 1e-9:
        return None
    K = SHIFT_GRID
    c1 = _coeffs_on_period(lam1, q, K)
    c2 = _coeffs_on_period(lam2, q, K)
    a = c1 * np.conj(c2)
    freqs = TWO_PI * np.fft.fftfreq(K, 1.0 / K) / q
    corr = np.fft.fft(a)
    s = int(np.argmax(corr.real))
    h = q / K

    def loss(l):
        return 1.0 - _correlation(a, freqs, l).real

    res = minimize_scalar(loss, bounds=(s * h - h, s * h + h), method="bounded", options={"xatol": 1e-13})
    l = float(res.x)
    for _ in range(4):
        d1 = _correlation(a, freqs, l, 1).real
        d2 = _correlation(a, freqs, l, 2).real
        if d2 >= 0:
            break
        l -= d1 / d2
    shifted = np.fft.ifft(c1 * np.exp(-1j * freqs * l)) * K
    target = np.fft.ifft(c2) * K
    if np.max(np.abs(shifted - target)) > SHIFT_TOL:
        return None
    l %= q
    return 0.0 if min(l, q - l) < 1e-12 else float(l)


@dataclass(frozen=True)
class IntertwinerDescriptor:
    """``kind`` is "none" or "translation"; translations come with the family {M[f] sigma_l}."""

    kind: str
    shift: float | None = None
    period: float | None = None
    note: str = ""

    @property
    def exists(self) -> bool:
        return self.kind == "translation"


NONE = IntertwinerDescriptor("none", note="no non-zero uniform intertwiner")


def intertwiner_space(m1: ModelWalk, m2: ModelWalk) -> IntertwinerDescriptor:
    if m1.is_constant and m2.is_constant:
        c1, c2 = m1.eigenfunction.constant_value(), m2.eigenfunction.constant_value()
        if abs(c1 - c2) <= CONSTANT_MATCH_TOL:
            return IntertwinerDescriptor("translation", 0.0, TWO_PI, "equal constants: full commutant {M[f]}")
        return NONE
    if m1.is_constant or m2.is_constant:
        return NONE
    if not (m1.minimal and m2.minimal):
        raise ValueError("intertwiner_space expects model walks at their minimal periods")
    l = translation_shift(m1.eigenfunction, m2.eigenfunction)
    if l is None:
        return NONE
    return IntertwinerDescriptor("translation", l, m1.period, "all uniform intertwiners are M[f] sigma_l, f continuous")


@dataclass(frozen=True)
class Pairing:
    part1: int
    part2: int
    shift: float


@dataclass(frozen=True, eq=False)
class IntertwinerReport:
    verdict: bool
    pairs: list[Pairing]
    source: Decomposition
    target: Decomposition
    defect: float | None = None


def _pairs(d1: Decomposition, d2: Decomposition) -> list[Pairing]:
    out = []
    for i, p1 in enumerate(d1.parts):
        for j, p2 in enumerate(d2.parts):
            desc = intertwiner_space(p1, p2)
            if desc.exists:
                out.append(Pairing(i, j, desc.shift))
    return out


def has_uniform_intertwiner(
    w1: WalkDefinition, w2: WalkDefinition, grid_size: int = DEFAULT_GRID,
    d1: Decomposition | None = None, d2: Decomposition | None = None,
) -> IntertwinerReport:
    if w1.d != 1 or w2.d != 1:
        raise DimensionMismatch("intertwiner analysis is implemented for d = 1")
    d1 = decompose(w1, grid_size) if d1 is None else d1
    d2 = decompose(w2, grid_size) if d2 is None else d2
    pairs = _pairs(d1, d2)
    return IntertwinerReport(bool(pairs), pairs, d1, d2)


def is_indecomposable(w: WalkDefinition, grid_size: int = DEFAULT_GRID) -> bool:
    parts = decompose(w, grid_size).parts
    return len(parts) == 1 and (not parts[0].is_constant or w.n == 1)


def _matching(d1: Decomposition, d2: Decomposition, pairs: Sequence[Pairing]) -> list[Pairing]:
    if not pairs:
        return []
    graph = sp.csr_matrix(
        (np.ones(len(pairs)), ([p.part1 for p in pairs], [p.part2 for p in pairs])),
        shape=(len(d1.parts), len(d2.parts)),
    )
    match = maximum_bipartite_matching(graph, perm_type="column")
    by_edge = {(p.part1, p.part2): p for p in pairs}
    return [by_edge[(i, int(j))] for i, j in enumerate(match) if j >= 0]


def common_divisor(w1: WalkDefinition, w2: WalkDefinition, grid_size: int = DEFAULT_GRID) -> list[ModelWalk]:
    """Largest multiset of model parts embeddable isometrically in both walks."""
    rep = has_uniform_intertwiner(w1, w2, grid_size)
    return [rep.source.parts[p.part1] for p in _matching(rep.source, rep.target, rep.pairs)]


@dataclass(frozen=True, eq=False)
class SimilarityReport:
    verdict: bool
    pairing: list[Pairing]
    defect: float | None = None


def similarity(w1: WalkDefinition, w2: WalkDefinition, grid_size: int = DEFAULT_GRID, verify: bool = False, **kw) -> SimilarityReport:
    """Similar iff the model parts can be matched one-to-one up to translation."""
    rep = has_uniform_intertwiner(w1, w2, grid_size)
    match = _matching(rep.source, rep.target, rep.pairs)
    ok = len(match) == len(rep.source.parts) == len(rep.target.parts)
    defect = verify_intertwiner(rep, match, **kw) if (ok and verify) else None
    return SimilarityReport(ok, match if ok else [], defect)


# --- materialization -----------------------------------------------------

def _sections_at(dec: Decomposition, branch: int, kappa: np.ndarray) -> np.ndarray:
    """Unit eigenvectors of branch ``branch`` at arbitrary points, shape (*kappa.shape, n)."""
    spec = dec.spectrum
    lam = spec.branches[branch]
    flat = np.asarray(kappa, dtype=float).reshape(-1)
    turn = np.floor(flat / TWO_PI).astype(np.int64)
    k = flat - TWO_PI * turn
    order = np.argsort(k)
    _, vecs = eigensections(dec.walk, spec, k[order])
    col_of = {lab: c for c, lab in enumerate(spec.labels)}
    cols = np.array([col_of[(branch, int(t % lam.turns))] for t in turn[order]])
    out = np.empty((len(flat), dec.walk.n), dtype=complex)
    out[order] = vecs[np.arange(len(flat)), :, cols]
    return out.reshape(np.shape(kappa) + (dec.walk.n,))


class MaterializedIntertwiner:
    """W = sum over pairs of Phi_2 M[f] sigma_l Phi_1^*, sampled at wavenumbers ``ks``.

    Phi_b maps L^2 of the branch circle into the walk through the eigenvector
    section; split parts go through the isometry that keeps every c-th
    Fourier mode.  Sections are computed once, so applying W to a state only
    costs the evaluation of its Fourier transform.
    """

    def __init__(self, ks, source: Decomposition, target: Decomposition, pairs: Sequence[Pairing], multiplier=None):
        self.ks = np.asarray(ks, dtype=float)
        self.n_in, self.n_out = source.walk.n, target.walk.n
        self._blocks = []
        for pair in pairs:
            p1, p2 = source.parts[pair.part1], target.parts[pair.part2]
            q = p2.period
            turns2 = target.spectrum.branches[p2.branch].turns
            kap2 = self.ks[:, None] + TWO_PI * np.arange(turns2)[None, :]
            u = np.mod(kap2, q)
            out_vec = _sections_at(target, p2.branch, kap2)
            out_vec = out_vec * (np.exp(1j * TWO_PI * p2.copy * kap2 / (p2.copies * q)) / np.sqrt(p2.copies))[..., None]
            if multiplier is not None:
                out_vec = out_vec * np.asarray(multiplier(u))[..., None]
            c1 = p1.copies
            kap1 = np.mod(u - pair.shift, q)[..., None] + p1.period * np.arange(c1)
            in_vec = np.conj(_sections_at(source, p1.branch, kap1))
            in_vec = in_vec * (np.exp(-1j * TWO_PI * p1.copy * kap1 / (c1 * p1.period)) / np.sqrt(c1))[..., None]
            self._blocks.append((np.mod(kap1, TWO_PI), in_vec, out_vec))

    def transform(self, xi: StateVector) -> np.ndarray:
        """(W xi)^ at ``ks``, shape (K, n_out)."""
        out = np.zeros((len(self.ks), self.n_out), dtype=complex)
        for kap1, in_vec, out_vec in self._blocks:
            xhat = fourier_state(xi, kap1.reshape(-1)).reshape(kap1.shape + (self.n_in,))
            h = np.einsum("kmci,kmci->km", in_vec, xhat)
            out += np.einsum("kmi,km->ki", out_vec, h)
        return out


def window_from_samples(values: np.ndarray, ks: np.ndarray, x0: int) -> np.ndarray:
    """Inverse transform of samples on the window grid, shape (n, window)."""
    return (np.fft.fft(values * np.exp(-1j * ks * x0)[:, None], axis=0) / len(ks)).T


def periodic_step(w: WalkDefinition, amps: np.ndarray) -> np.ndarray:
    rows, cols, shifts, coeffs = w.term_table
    out = np.zeros_like(amps)
    for i, j, s, c in zip(rows, cols, shifts, coeffs):
        out[i] += c * np.roll(amps[j], s[0])
    return out


def random_states(n: int, count: int, seed: int = 0, half_width: int = 16) -> list[StateVector]:
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        a = rng.normal(size=(n, 2 * half_width + 1)) + 1j * rng.normal(size=(n, 2 * half_width + 1))
        out.append(StateVector(a / np.linalg.norm(a), (-half_width,)))
    return out


def _inside(xi: StateVector, x0: int, window: int) -> bool:
    box = xi.support_box()
    return box is None or (box[0][0] >= x0 and box[1][0] < x0 + window)


def verify_intertwiner(
    report: IntertwinerReport,
    pairs: Sequence[Pairing] | None = None,
    window: int = 256,
    states: int = 20,
    seed: int = 0,
    multiplier=None,
) -> float:
    """max ||W U_1 xi - U_2 W xi|| over seeded random unit states on a periodic window."""
    pairs = report.pairs if pairs is None else pairs
    w1, w2 = report.source.walk, report.target.walk
    ks = TWO_PI * np.arange(window) / window
    x0 = -(window // 2)
    W = MaterializedIntertwiner(ks, report.source, report.target, pairs, multiplier)
    worst = 0.0
    for xi in random_states(w1.n, states, seed, half_width=min(16, window // 8)):
        u1xi = step(w1, xi)
        if not (_inside(xi, x0, window) and _inside(u1xi, x0, window)):
            raise WindowTooSmall(f"window of {window} sites cannot hold the test states")
        lhs = window_from_samples(W.transform(u1xi), ks, x0)
        wxi = window_from_samples(W.transform(xi), ks, x0)
        rhs = periodic_step(w2, wxi)
        worst = max(worst, float(np.linalg.norm(lhs - rhs)))
    return worst

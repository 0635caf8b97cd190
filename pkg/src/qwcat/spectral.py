"""Eigenvalue functions of one-dimensional walks.

Branches are followed through k by continuation: every new eigenvalue set is
matched to a polynomial extrapolation of the last few tracked points, and a
step is halved whenever that matching is not clearly separated.  Tracking one
2*pi period is enough; the permutation picked up by the eigenvalues after a
full turn (the monodromy) glues tracks into branches of period 2*pi*L.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.linalg
from scipy.optimize import linear_sum_assignment

from .dynamics import StateVector, kolmogorov_distance
from .errors import DimensionMismatch, NonUnitarySymbol, NotNormalized, TrackingAmbiguity, UnwrapFailure
from .symbol import WalkDefinition, evaluate_symbol, evaluate_symbol_derivative

TWO_PI = 2 * np.pi
DEFAULT_GRID = 4096
UNIT_TOL = 1e-9
SAME_TOL = 1e-9  # eigenvalues closer than this are treated as one value
AMBIGUITY_RATIO = 4.0
MAX_BISECT = 12
CONSTANT_VAR = 1e-12
PERIOD_TOL = 1e-7
FOURIER_CUTOFF = 1e-12
MAX_PHASE_STEP = np.pi / 2


def _require_1d(w: WalkDefinition):
    if w.d != 1:
        raise DimensionMismatch(f"spectral analysis needs d = 1, walk has d = {w.d}")


def eigenvalues_at(w: WalkDefinition, k: float) -> np.ndarray:
    """Eigenvalues of U_hat(k) as an array of n unit complex numbers."""
    _require_1d(w)
    ev = np.linalg.eigvals(evaluate_symbol(w, float(k)))
    if np.max(np.abs(np.abs(ev) - 1.0)) > UNIT_TOL:
        raise NonUnitarySymbol(f"eigenvalue modulus off the unit circle at k={k}: {np.abs(ev)}")
    return ev


@dataclass(frozen=True, eq=False)
class EigenvalueFunction:
    """One analytic eigenvalue branch sampled on [0, period).

    Samples sit at k = 2*pi*j / grid_size for j = 0 .. grid_size*period/(2*pi) - 1.
    """

    samples: np.ndarray
    period: float
    grid_size: int
    degree: int = 1
    closure_defect: float = 0.0
    label: str = ""

    @property
    def spacing(self) -> float:
        return TWO_PI / self.grid_size

    @property
    def turns(self) -> int:
        """Number of 2*pi turns in the declared period."""
        return len(self.samples) // self.grid_size

    @cached_property
    def is_constant(self) -> bool:
        return bool(np.var(self.samples) <= CONSTANT_VAR)

    @cached_property
    def _coeffs(self) -> np.ndarray:
        return np.fft.fft(self.samples) / len(self.samples)

    @cached_property
    def _freqs(self) -> np.ndarray:
        m = len(self.samples)
        return TWO_PI * np.fft.fftfreq(m, 1.0 / m) / self.period

    @cached_property
    def fourier(self) -> tuple[np.ndarray, np.ndarray]:
        """(angular frequencies, coefficients), small coefficients dropped."""
        c = self._coeffs
        keep = np.abs(c) >= FOURIER_CUTOFF * np.abs(c).max()
        return self._freqs[keep], c[keep]

    def _grid_index(self, k: np.ndarray):
        pos = k / self.spacing
        idx = np.rint(pos)
        if np.all(np.abs(pos - idx) < 1e-9):
            return idx.astype(np.int64) % len(self.samples)
        return None

    def __call__(self, k):
        k = np.asarray(k, dtype=float)
        idx = self._grid_index(k)
        if idx is not None:
            return self.samples[idx]
        freqs, coeffs = self.fourier
        flat = k.reshape(-1)
        out = np.empty(flat.shape, dtype=complex)
        for s in range(0, len(flat), 2048):
            chunk = flat[s : s + 2048]
            out[s : s + 2048] = np.exp(1j * np.multiply.outer(chunk, freqs)) @ coeffs
        return out.reshape(k.shape) if k.ndim else complex(out[0])

    def derivative(self, k):
        k = np.asarray(k, dtype=float)
        freqs, coeffs = self.fourier
        vals = np.exp(1j * np.multiply.outer(k, freqs)) @ (1j * freqs * coeffs)
        return vals

    @cached_property
    def velocity_samples(self) -> np.ndarray:
        """Group velocity d(arg lambda)/dk at every sample point."""
        if self.is_constant:
            return np.zeros(len(self.samples))
        dl = np.fft.ifft(np.fft.fft(self.samples) * 1j * self._freqs)
        return np.imag(np.conj(self.samples) * dl) / np.abs(self.samples) ** 2

    def shifted_samples(self, l: float) -> np.ndarray:
        """Samples of k -> lambda(k - l) on the same grid."""
        return np.fft.ifft(np.fft.fft(self.samples) * np.exp(-1j * self._freqs * l))

    def max_period_defect(self, q: float) -> float:
        """sup over the grid of |lambda(k + q) - lambda(k)|."""
        return float(np.max(np.abs(self.shifted_samples(-q) - self.samples)))

    def __mul__(self, other: "EigenvalueFunction") -> "EigenvalueFunction":
        if not isinstance(other, EigenvalueFunction):
            return NotImplemented
        if len(self.samples) != len(other.samples) or self.grid_size != other.grid_size:
            raise ValueError("pointwise product needs identical sample grids")
        return EigenvalueFunction(
            self.samples * other.samples, self.period, self.grid_size, max(self.degree, other.degree)
        )

    def __pow__(self, e: int) -> "EigenvalueFunction":
        return EigenvalueFunction(self.samples**e, self.period, self.grid_size, self.degree)

    def constant_value(self) -> complex:
        return complex(np.mean(self.samples))

    @cached_property
    def minimal_period(self) -> float:
        return minimal_period(self)

    @cached_property
    def winding(self) -> int:
        return winding_number(self)


def minimal_period(lam: EigenvalueFunction, max_divisor: int | None = None) -> float:
    """Smallest period of the form p/m, 1 <= m <= 2n; 0.0 for a constant branch."""
    if lam.is_constant:
        return 0.0
    max_divisor = 2 * lam.degree if max_divisor is None else max_divisor
    best = 1
    for m in range(2, max_divisor + 1):
        if lam.max_period_defect(lam.period / m) <= PERIOD_TOL:
            best = max(best, m)
    return lam.period / best


def phase_increments(lam: EigenvalueFunction) -> np.ndarray:
    s = lam.samples
    return np.angle(np.roll(s, -1) / s)


def unwrapped_phase(lam: EigenvalueFunction) -> np.ndarray:
    """Continuous phase of the samples starting from the principal value at k = 0."""
    inc = phase_increments(lam)
    if np.max(np.abs(inc)) > MAX_PHASE_STEP:
        raise UnwrapFailure(
            f"phase jumps by {np.max(np.abs(inc)):.3f} rad between samples; refine the grid"
        )
    return np.angle(lam.samples[0]) + np.concatenate([[0.0], np.cumsum(inc[:-1])])


def winding_number(lam: EigenvalueFunction) -> int:
    """Turns of lambda around 0 over one minimal period."""
    if lam.is_constant:
        return 0
    inc = phase_increments(lam)
    if np.max(np.abs(inc)) > MAX_PHASE_STEP:
        raise UnwrapFailure(
            f"phase jumps by {np.max(np.abs(inc)):.3f} rad between samples; refine the grid"
        )
    copies = lam.period / lam.minimal_period
    turns = inc.sum() / TWO_PI / copies
    w = int(np.rint(turns))
    if abs(turns - w) > 0.01:
        raise UnwrapFailure(f"phase change {turns:.4f} turns is not close to an integer")
    return w


def group_velocity(lam: EigenvalueFunction, k):
    """d/dk of the continuous phase of lambda, by spectral differentiation."""
    k = np.asarray(k, dtype=float)
    if lam.is_constant:
        return np.zeros(k.shape) if k.ndim else 0.0
    idx = lam._grid_index(k)
    if idx is not None:
        v = lam.velocity_samples[idx]
    else:
        val = lam(k)
        v = np.imag(np.conj(val) * lam.derivative(k)) / np.abs(val) ** 2
    return v if k.ndim else float(v)


# --- tracking ------------------------------------------------------------

def _extrapolate(history, k: float) -> np.ndarray:
    pts = list(history)
    out = np.zeros_like(pts[-1][1])
    for a, (ka, va) in enumerate(pts):
        weight = 1.0
        for b, (kb, _) in enumerate(pts):
            if a != b:
                weight *= (k - kb) / (ka - kb)
        out = out + weight * va
    return out


def _match(pred: np.ndarray, vals: np.ndarray) -> tuple[np.ndarray, bool]:
    cost = np.abs(pred[:, None] - vals[None, :])
    _, col = linear_sum_assignment(cost)
    err = cost[np.arange(len(pred)), col]
    ambiguous = False
    for i, c in enumerate(col):
        others = np.abs(vals - vals[c]) > SAME_TOL
        if np.any(others) and cost[i, others].min() <= AMBIGUITY_RATIO * err[i]:
            ambiguous = True
            break
    return col, ambiguous


class _Tracker:
    def __init__(self, w: WalkDefinition):
        self.w = w

    def eig(self, k: float) -> np.ndarray:
        return eigenvalues_at(self.w, k)

    def advance(self, history, k: float, vals: np.ndarray, depth: int = 0):
        pred = _extrapolate(history, k)
        col, ambiguous = _match(pred, vals)
        if not ambiguous:
            history.append((k, vals[col]))
            return
        if depth >= MAX_BISECT:
            raise TrackingAmbiguity(
                f"eigenvalue continuation stays ambiguous near k={k:.12f} after {MAX_BISECT} bisections"
            )
        k_mid = 0.5 * (history[-1][0] + k)
        self.advance(history, k_mid, self.eig(k_mid), depth + 1)
        self.advance(history, k, vals, depth + 1)


@dataclass(frozen=True, eq=False)
class SpectrumDecomposition:
    """Branches whose 2*pi-translates reproduce the spectrum at every grid point."""

    branches: list[EigenvalueFunction]
    grid_size: int
    eigvals: np.ndarray  # (grid_size, n) raw eigenvalues on the grid
    start_index: int = 0
    walk: WalkDefinition | None = None

    @cached_property
    def anchor_components(self) -> list[int]:
        """Per branch, the eigenvector component used to fix the phase (-1: none suitable).

        The component with the largest minimum modulus over a scan of every
        translate is chosen; when it stays above PHASE_ANCHOR_MIN the phase
        convention yields an analytic section.
        """
        if self.walk is None:
            return [-1] * len(self.branches)
        ks = TWO_PI * np.arange(ANCHOR_SCAN) / ANCHOR_SCAN
        _, vecs = _sections(self.walk, self, ks, [-1] * len(self.branches))
        low = np.abs(vecs).min(axis=0)  # (component, label)
        out = []
        for b in range(len(self.branches)):
            cols = [c for c, (bb, _) in enumerate(self.labels) if bb == b]
            floor = low[:, cols].min(axis=1)
            j = int(np.argmax(floor))
            out.append(j if floor[j] >= PHASE_ANCHOR_MIN else -1)
        return out

    @property
    def n(self) -> int:
        return self.eigvals.shape[1]

    @cached_property
    def labels(self) -> list[tuple[int, int]]:
        """(branch, translate) for every column of :meth:`translate_values`."""
        return [(b, m) for b, br in enumerate(self.branches) for m in range(br.turns)]

    def translate_values(self, ks) -> np.ndarray:
        """lambda_b(k + 2*pi*m) for each label, shape (len(ks), n)."""
        ks = np.asarray(ks, dtype=float)
        return np.stack(
            [self.branches[b](ks + TWO_PI * m) for b, m in self.labels], axis=-1
        )

    def translate_velocities(self, ks) -> np.ndarray:
        ks = np.asarray(ks, dtype=float)
        return np.stack(
            [group_velocity(self.branches[b], ks + TWO_PI * m) for b, m in self.labels], axis=-1
        )

    def coverage_defect(self) -> float:
        """Largest mismatch between branch translates and raw eigenvalues on the grid."""
        ks = TWO_PI * np.arange(self.grid_size) / self.grid_size
        tv = self.translate_values(ks)
        worst = 0.0
        for j in range(self.grid_size):
            cost = np.abs(tv[j][:, None] - self.eigvals[j][None, :])
            r, c = linear_sum_assignment(cost)
            worst = max(worst, float(cost[r, c].max()))
        return worst


def track_branches(w: WalkDefinition, grid_size: int = DEFAULT_GRID) -> SpectrumDecomposition:
    _require_1d(w)
    if grid_size < 512:
        raise ValueError("grid_size must be at least 512")
    n, N = w.n, grid_size
    h = TWO_PI / N
    ks = h * np.arange(N)
    ev = np.linalg.eigvals(evaluate_symbol(w, ks))
    if np.max(np.abs(np.abs(ev) - 1.0)) > UNIT_TOL:
        raise NonUnitarySymbol("symbol has eigenvalues off the unit circle")

    if n > 1:
        gaps = np.abs(ev[:, :, None] - ev[:, None, :]) + np.eye(n) * 10
        j0 = int(np.argmax(gaps.min(axis=(1, 2))))
    else:
        j0 = 0
    k0 = ks[j0]
    vals0, vecs0 = np.linalg.eig(evaluate_symbol(w, k0))
    ev[j0] = vals0
    dU = evaluate_symbol_derivative(w, k0)
    slopes = np.einsum("ij,ik,kj->j", np.conj(vecs0), dU, vecs0) / np.einsum(
        "ij,ij->j", np.conj(vecs0), vecs0
    )

    tracker = _Tracker(w)
    history = deque([(k0 - h, vals0 - h * slopes), (k0, vals0)], maxlen=3)
    tracks = np.empty((N + 1, n), dtype=complex)
    tracks[0] = vals0
    for s in range(1, N + 1):
        tracker.advance(history, k0 + s * h, ev[(j0 + s) % N])
        tracks[s] = history[-1][1]

    r, perm = linear_sum_assignment(np.abs(tracks[N][:, None] - tracks[0][None, :]))
    seen = np.zeros(n, dtype=bool)
    branches = []
    for i0 in range(n):
        if seen[i0]:
            continue
        cycle = [i0]
        seen[i0] = True
        while perm[cycle[-1]] != i0:
            cycle.append(int(perm[cycle[-1]]))
            seen[cycle[-1]] = True
        L = len(cycle)
        joined = np.concatenate([tracks[:N, c] for c in cycle])
        samples = joined[(np.arange(N * L) - j0) % (N * L)]
        closure = float(abs(tracks[N, cycle[-1]] - tracks[0, cycle[0]]))
        branches.append(
            EigenvalueFunction(samples, TWO_PI * L, N, degree=n, closure_defect=closure)
        )
    return SpectrumDecomposition(branches, N, ev, start_index=j0, walk=w)


# --- eigenvector sections ------------------------------------------------

SECTION_CLUSTER_TOL = 1e-7
PHASE_ANCHOR_MIN = 0.05
ANCHOR_SCAN = 512


def _fix_phase(v: np.ndarray, prev: np.ndarray | None, anchor: int = -1) -> np.ndarray:
    """Make ``v[anchor]`` real-positive.

    Without a usable anchor component, the first component is used while it is
    not small; near its zeros the phase follows the previous vector.
    """
    if anchor >= 0 and abs(v[anchor]) > 1e-12:
        return v * np.conj(v[anchor]) / abs(v[anchor])
    if abs(v[0]) >= PHASE_ANCHOR_MIN or prev is None:
        big = np.nonzero(np.abs(v) >= PHASE_ANCHOR_MIN)[0]
        ref = v[big[0]] if len(big) else v[np.argmax(np.abs(v))]
        return v * np.conj(ref) / abs(ref)
    ov = np.vdot(v, prev)
    return v * ov / abs(ov) if abs(ov) > 1e-12 else v


def eigensections(w: WalkDefinition, spec: SpectrumDecomposition, ks) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal eigenvectors of U_hat(k) ordered by ``spec.labels``.

    Returns (values, vectors) with shapes (K, n) and (K, n, n); ``vectors[j, :, c]``
    is the unit eigenvector for label c at ks[j].  Points are processed in the
    given order, and degenerate eigenspaces are rotated to stay close to the
    previous point's vectors.
    """
    anchors = spec.anchor_components if spec.walk == w else [-1] * len(spec.branches)
    return _sections(w, spec, ks, anchors)


def _sections(w: WalkDefinition, spec: SpectrumDecomposition, ks, anchors) -> tuple[np.ndarray, np.ndarray]:
    ks = np.asarray(ks, dtype=float)
    targets = spec.translate_values(ks)
    mats = evaluate_symbol(w, ks)
    n = w.n
    vecs = np.empty((len(ks), n, n), dtype=complex)
    vals = np.empty((len(ks), n), dtype=complex)
    prev = None
    for j in range(len(ks)):
        t, z = scipy.linalg.schur(mats[j], output="complex")
        lam = np.diag(t)
        cost = np.abs(targets[j][:, None] - lam[None, :])
        _, col = linear_sum_assignment(cost)
        z = z[:, col]
        lam = lam[col]
        if prev is not None:
            done = np.zeros(n, dtype=bool)
            for c in range(n):
                if done[c]:
                    continue
                cluster = np.nonzero(np.abs(lam - lam[c]) < SECTION_CLUSTER_TOL)[0]
                done[cluster] = True
                if len(cluster) > 1:
                    a, _, bh = np.linalg.svd(np.conj(z[:, cluster]).T @ prev[:, cluster])
                    z[:, cluster] = z[:, cluster] @ (a @ bh)
        for c in range(n):
            z[:, c] = _fix_phase(z[:, c], None if prev is None else prev[:, c], anchors[spec.labels[c][0]])
        vecs[j] = z
        vals[j] = lam
        prev = z
    return vals, vecs


# --- limit distribution --------------------------------------------------

def fourier_state(xi: StateVector, ks) -> np.ndarray:
    """xi_hat(k) = sum_x xi(x) exp(i k x), shape (len(ks), n)."""
    ks = np.asarray(ks, dtype=float)
    x = xi.positions(0)
    return np.exp(1j * np.multiply.outer(ks, x)) @ xi.amps.T


@dataclass(frozen=True, eq=False)
class LimitDistribution:
    velocities: np.ndarray
    masses: np.ndarray
    branch_mass: list[float] = field(default_factory=list)

    def total(self) -> float:
        return float(self.masses.sum())

    def cdf(self, v) -> np.ndarray:
        order = np.argsort(self.velocities)
        cum = np.cumsum(self.masses[order])
        idx = np.searchsorted(self.velocities[order], v, side="right")
        return np.where(idx > 0, cum[np.maximum(idx - 1, 0)], 0.0)

    def kolmogorov(self, velocities, masses) -> float:
        return kolmogorov_distance(self.velocities, self.masses, velocities, masses)


def limit_velocity_distribution(
    w: WalkDefinition,
    xi: StateVector,
    grid_size: int = DEFAULT_GRID,
    spec: SpectrumDecomposition | None = None,
) -> LimitDistribution:
    """Weak limit of the velocity law, pushed forward through the group velocities."""
    _require_1d(w)
    if abs(xi.norm() - 1.0) > 1e-10:
        raise NotNormalized("initial state must be a unit vector")
    spec = track_branches(w, grid_size) if spec is None else spec
    N = spec.grid_size
    ks = TWO_PI * np.arange(N) / N
    _, vecs = eigensections(w, spec, ks)
    xhat = fourier_state(xi, ks)
    weights = np.abs(np.einsum("jic,ji->jc", np.conj(vecs), xhat)) ** 2 / N
    vel = spec.translate_velocities(ks)
    per_branch = [0.0] * len(spec.branches)
    for c, (b, _) in enumerate(spec.labels):
        per_branch[b] += float(weights[:, c].sum())
    return LimitDistribution(vel.ravel(), weights.ravel(), per_branch)

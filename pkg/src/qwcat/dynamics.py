"""Time evolution of finitely supported states and the distributions they induce.

States are kept as a dense box of amplitudes plus the lattice coordinate of the
box corner; evolution is a sparse convolution with the symbol's terms, which is
exact for Laurent walks.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .errors import DimensionMismatch, NotNormalized, SchemaError
from .symbol import (
    WalkDefinition,
    _header,
    _read_document,
    _terms_from_doc,
    propagation_radius,
)

NORM_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class StateVector:
    """Amplitudes on a box of Z^d x {0..n-1}.

    ``amps`` has shape (n, *box); ``origin`` is the lattice point stored at
    index 0 of every spatial axis.
    """

    amps: np.ndarray
    origin: tuple[int, ...]

    @property
    def n(self) -> int:
        return self.amps.shape[0]

    @property
    def d(self) -> int:
        return self.amps.ndim - 1

    @property
    def shape(self) -> tuple[int, ...]:
        return self.amps.shape[1:]

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def normalized(self) -> "StateVector":
        return StateVector(self.amps / self.norm(), self.origin)

    @classmethod
    def delta(cls, site=0, component: int = 0, n: int = 1, d: int | None = None) -> "StateVector":
        site = (site,) if np.isscalar(site) else tuple(site)
        d = len(site) if d is None else d
        amps = np.zeros((n,) + (1,) * d, dtype=complex)
        amps[(component,) + (0,) * d] = 1.0
        return cls(amps, tuple(int(s) for s in site))

    @classmethod
    def from_map(cls, mapping: Mapping, n: int, d: int) -> "StateVector":
        """Build from {(site, component): amplitude}; ``site`` is an int for d = 1."""
        if not mapping:
            return cls(np.zeros((n,) + (1,) * d, dtype=complex), (0,) * d)
        keys = []
        for (site, comp), amp in mapping.items():
            site = (site,) if np.isscalar(site) else tuple(site)
            if len(site) != d or not 0 <= comp < n:
                raise DimensionMismatch(f"bad key {(site, comp)} for d={d}, n={n}")
            keys.append((site, comp, complex(amp)))
        lo = np.min([k[0] for k in keys], axis=0)
        hi = np.max([k[0] for k in keys], axis=0)
        amps = np.zeros((n,) + tuple(hi - lo + 1), dtype=complex)
        for site, comp, amp in keys:
            amps[(comp,) + tuple(np.array(site) - lo)] += amp
        return cls(amps, tuple(int(x) for x in lo))

    def to_map(self) -> dict:
        out = {}
        for idx in zip(*np.nonzero(self.amps)):
            site = tuple(int(i + o) for i, o in zip(idx[1:], self.origin))
            out[(site[0] if self.d == 1 else site, int(idx[0]))] = complex(self.amps[idx])
        return out

    def positions(self, axis: int) -> np.ndarray:
        return self.origin[axis] + np.arange(self.shape[axis])

    def support_box(self) -> tuple[np.ndarray, np.ndarray] | None:
        """Inclusive lower and upper corners of the nonzero support."""
        nz = np.nonzero(np.any(self.amps != 0, axis=0))
        if len(nz[0]) == 0:
            return None
        lo = np.array([a.min() for a in nz]) + self.origin
        hi = np.array([a.max() for a in nz]) + self.origin
        return lo, hi

    def trimmed(self) -> "StateVector":
        box = self.support_box()
        if box is None:
            return StateVector.delta((0,) * self.d, 0, self.n).scaled(0.0)
        lo, hi = box
        start = lo - np.array(self.origin)
        sl = (slice(None),) + tuple(slice(s, s + h - l + 1) for s, l, h in zip(start, lo, hi))
        return StateVector(self.amps[sl], tuple(int(x) for x in lo))

    def scaled(self, c: complex) -> "StateVector":
        return StateVector(self.amps * c, self.origin)

    def embed(self, lo: Sequence[int], shape: Sequence[int]) -> np.ndarray:
        """Copy amplitudes into a zero array covering ``shape`` sites from ``lo``."""
        out = np.zeros((self.n,) + tuple(shape), dtype=complex)
        start = np.array(self.origin) - np.array(lo)
        if np.any(start < 0) or np.any(start + np.array(self.shape) > np.array(shape)):
            raise ValueError("state does not fit in the requested box")
        sl = (slice(None),) + tuple(slice(s, s + m) for s, m in zip(start, self.shape))
        out[sl] = self.amps
        return out


def difference_norm(a: StateVector, b: StateVector) -> float:
    """Euclidean distance between two states on a common box."""
    if (a.n, a.d) != (b.n, b.d):
        raise DimensionMismatch("states live on different spaces")
    lo = np.minimum(a.origin, b.origin)
    hi = np.maximum(np.array(a.origin) + a.shape, np.array(b.origin) + b.shape)
    shape = tuple(hi - lo)
    return float(np.linalg.norm(a.embed(lo, shape) - b.embed(lo, shape)))


def gaussian_state(n: int, width: float, component=None, center=0, d: int = 1, tail: float = 1e-8) -> StateVector:
    """Gaussian envelope cut where the discarded norm is below ``tail``, renormalized."""
    if component is None:
        component = np.ones(n) / math.sqrt(n)
    component = np.asarray(component, dtype=complex)
    # |amp|^2 ~ exp(-x^2 / (2 w^2)); the discarded squared norm is below tail^2
    half = int(math.ceil(width * math.sqrt(4 * math.log(1 / tail) + 2 * math.log(width + 1)))) + 1
    center = (center,) * d if np.isscalar(center) else tuple(center)
    axes = [np.arange(-half, half + 1)] * d
    grids = np.meshgrid(*axes, indexing="ij")
    env = np.exp(-sum(g.astype(float) ** 2 for g in grids) / (4 * width**2))
    amps = component.reshape((n,) + (1,) * d) * env
    amps /= np.linalg.norm(amps)
    return StateVector(amps, tuple(c - half for c in center))


def _check_shapes(w: WalkDefinition, xi: StateVector):
    if (w.d, w.n) != (xi.d, xi.n):
        raise DimensionMismatch(f"walk has (d, n)=({w.d}, {w.n}), state has ({xi.d}, {xi.n})")


def step(w: WalkDefinition, xi: StateVector) -> StateVector:
    _check_shapes(w, xi)
    r = propagation_radius(w)
    rows, cols, shifts, coeffs = w.term_table
    out = np.zeros((w.n,) + tuple(s + 2 * r for s in xi.shape), dtype=complex)
    for i, j, s, c in zip(rows, cols, shifts, coeffs):
        sl = (i,) + tuple(slice(r + sa, r + sa + m) for sa, m in zip(s, xi.shape))
        out[sl] += c * xi.amps[j]
    return StateVector(out, tuple(o - r for o in xi.origin)).trimmed()


def evolve(w: WalkDefinition, xi: StateVector, t: int) -> StateVector:
    if t < 0:
        raise ValueError("t must be non-negative")
    _check_shapes(w, xi)
    for _ in range(t):
        xi = step(w, xi)
    return xi


@dataclass(frozen=True)
class PeriodicSchedule:
    """Factors V_1..V_p applied cyclically, V_1 first."""

    factors: tuple[WalkDefinition, ...]

    def __post_init__(self):
        if len(self.factors) < 1:
            raise ValueError("a schedule needs at least one factor")
        dn = {(f.d, f.n) for f in self.factors}
        if len(dn) != 1:
            raise DimensionMismatch(f"schedule factors disagree on (d, n): {sorted(dn)}")

    @property
    def period(self) -> int:
        return len(self.factors)


def periodic_evolve(sched: PeriodicSchedule, xi: StateVector, t: int) -> StateVector:
    if t < 0:
        raise ValueError("t must be non-negative")
    _check_shapes(sched.factors[0], xi)
    for s in range(t):
        xi = step(sched.factors[s % sched.period], xi)
    return xi


# --- distributions -------------------------------------------------------

@dataclass(frozen=True)
class Distribution:
    points: np.ndarray  # (m, d)
    masses: np.ndarray  # (m,)

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def total(self) -> float:
        return float(self.masses.sum())

    def mass_outside(self, bound: float) -> float:
        outside = np.any(np.abs(self.points) > bound, axis=1)
        return float(self.masses[outside].sum())

    def as_dict(self) -> dict:
        key = (lambda p: p[0]) if self.d == 1 else tuple
        return {key(p.tolist()): float(m) for p, m in zip(self.points, self.masses)}


@dataclass(frozen=True)
class PositionDistribution(Distribution):
    pass


@dataclass(frozen=True)
class VelocityDistribution(Distribution):
    t: int = 1


def _check_unit(xi: StateVector):
    nrm = xi.norm()
    if abs(nrm - 1.0) > NORM_TOL:
        raise NotNormalized(f"state norm {nrm!r} is not 1 within {NORM_TOL}")


def position_distribution(xi: StateVector) -> PositionDistribution:
    _check_unit(xi)
    mass = np.sum(np.abs(xi.amps) ** 2, axis=0)
    idx = np.nonzero(mass)
    pts = np.stack([i + o for i, o in zip(idx, xi.origin)], axis=1)
    return PositionDistribution(pts.astype(int), mass[idx])


def velocity_distribution(xi: StateVector, t: int) -> VelocityDistribution:
    """Velocity law of an already evolved state ``xi`` after ``t`` steps."""
    if t <= 0:
        raise ValueError("t must be a positive integer")
    mu = position_distribution(xi)
    return VelocityDistribution(mu.points / t, mu.masses, t=t)


def characteristic_function(dist: Distribution, k) -> complex | np.ndarray:
    """sum of mass * exp(i x . k); ``k`` may be a single point or an array of points."""
    k = np.asarray(k, dtype=float)
    if dist.d == 1:
        phase = np.multiply.outer(k, dist.points[:, 0])
    else:
        phase = k @ dist.points.T
    vals = np.exp(1j * phase) @ dist.masses
    return complex(vals) if np.ndim(vals) == 0 else vals


@dataclass(frozen=True)
class MomentReport:
    mean: np.ndarray
    variance: np.ndarray
    raw: np.ndarray  # raw[r, axis] = E[x_axis ** r]


def moments(dist: Distribution, order: int = 2) -> MomentReport:
    if not 0 <= order <= 8:
        raise ValueError("order must be between 0 and 8")
    pts = dist.points.astype(float)
    raw = np.array([(pts**r * dist.masses[:, None]).sum(axis=0) for r in range(order + 1)])
    mean = (pts * dist.masses[:, None]).sum(axis=0)
    var = ((pts - mean) ** 2 * dist.masses[:, None]).sum(axis=0)
    return MomentReport(mean=mean, variance=np.maximum(var, 0.0), raw=raw)


def kolmogorov_distance(points_a, masses_a, points_b, masses_b) -> float:
    """sup_v |F_a(v) - F_b(v)| for two discrete laws on the real line."""
    pa, ma = np.ravel(points_a), np.ravel(masses_a)
    pb, mb = np.ravel(points_b), np.ravel(masses_b)
    grid = np.union1d(pa, pb)
    fa = np.cumsum(np.bincount(np.searchsorted(grid, pa), weights=ma, minlength=len(grid)))
    fb = np.cumsum(np.bincount(np.searchsorted(grid, pb), weights=mb, minlength=len(grid)))
    return float(np.max(np.abs(fa - fb)))


# --- state documents -----------------------------------------------------

def parse_state(doc) -> StateVector:
    """State document: ``entries`` holds one term list per internal component."""
    doc = _read_document(doc)
    d, n = _header(doc)
    entries = doc["entries"]
    if not isinstance(entries, list) or len(entries) != n:
        raise SchemaError(f"entries must list {n} components")
    mapping = {}
    for j, comp in enumerate(entries):
        poly = _terms_from_doc(comp, d, f"entries[{j}]")
        for t in poly.terms:
            mapping[(t.shift, j)] = t.coeff
    return StateVector.from_map(mapping, n=n, d=d)


def state_to_document(xi: StateVector, name: str = "state") -> dict:
    comps: list[list] = [[] for _ in range(xi.n)]
    for (site, j), amp in sorted(xi.to_map().items(), key=lambda kv: (kv[0][1], kv[0][0])):
        site = [site] if xi.d == 1 else list(site)
        comps[j].append({"shift": site, "re": amp.real, "im": amp.imag})
    return {"name": name, "d": xi.d, "n": xi.n, "entries": comps}


def load_state(path) -> StateVector:
    return parse_state(Path(path))


def dump_state(xi: StateVector, name: str = "state") -> str:
    return json.dumps(state_to_document(xi, name), indent=1)

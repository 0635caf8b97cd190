"""Homogeneous walks as matrices of Laurent polynomials in commuting shifts.

A walk on Z^d with n internal states is stored as an n x n array of Laurent
polynomials.  The shift S_a along axis a moves the support of a vector by +1,
and contributes exp(+i k_a) to the symbol, so that

    U_hat(k)[i, j] = sum over terms of coeff * exp(i shift . k).
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from functools import cached_property
from numbers import Integral, Real
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .errors import DimensionMismatch, NonUnitaryError, SchemaError

UNITARITY_TOL = 1e-10
UNITARITY_GRID = 256


@dataclass(frozen=True)
class LaurentTerm:
    shift: tuple[int, ...]
    coeff: complex


@dataclass(frozen=True)
class LaurentPoly:
    """Finite sum of coeff * S^shift with pairwise distinct shifts."""

    terms: tuple[LaurentTerm, ...] = ()

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[Iterable[int], complex]]) -> "LaurentPoly":
        acc: dict[tuple[int, ...], complex] = {}
        for shift, coeff in pairs:
            key = tuple(int(s) for s in shift)
            acc[key] = acc.get(key, 0j) + complex(coeff)
        terms = tuple(
            LaurentTerm(s, c) for s, c in sorted(acc.items()) if c != 0
        )
        return cls(terms)

    @classmethod
    def monomial(cls, shift, coeff=1.0) -> "LaurentPoly":
        if isinstance(shift, Integral):
            shift = (shift,)
        return cls.from_pairs([(shift, coeff)])

    def __add__(self, other: "LaurentPoly") -> "LaurentPoly":
        return LaurentPoly.from_pairs(
            [(t.shift, t.coeff) for t in self.terms + other.terms]
        )

    def scale(self, c: complex) -> "LaurentPoly":
        return LaurentPoly.from_pairs([(t.shift, c * t.coeff) for t in self.terms])

    @property
    def radius(self) -> int:
        return max((max(abs(s) for s in t.shift) for t in self.terms), default=0)

    @property
    def is_constant(self) -> bool:
        return all(not any(t.shift) for t in self.terms)

    def as_dict(self) -> dict[tuple[int, ...], complex]:
        return {t.shift: t.coeff for t in self.terms}


def zero_poly() -> LaurentPoly:
    return LaurentPoly()


class Regularity(enum.IntEnum):
    """Regularity classes; a larger value implies every smaller one."""

    UNIFORM = 0
    SMOOTH = 1
    ANALYTIC = 2
    FINITE_PROPAGATION = 3


@dataclass(frozen=True)
class RegularityClass:
    kind: Regularity
    radius: int | None = None

    def implies(self, other: Regularity) -> bool:
        return self.kind >= other

    @property
    def analytic(self) -> bool:
        return self.implies(Regularity.ANALYTIC)

    @property
    def smooth(self) -> bool:
        return self.implies(Regularity.SMOOTH)

    @property
    def uniform(self) -> bool:
        return self.implies(Regularity.UNIFORM)

    def __str__(self):
        if self.kind is Regularity.FINITE_PROPAGATION:
            return f"FinitePropagation(R={self.radius})"
        return self.kind.name.title()


@dataclass(frozen=True, eq=False)
class WalkDefinition:
    """A space-homogeneous walk on Z^d x {1..n}.

    Build instances through :func:`make_walk` or :func:`parse_walk`, which
    enforce the unitarity gate; the raw constructor does not validate.
    """

    d: int
    n: int
    entries: tuple[tuple[LaurentPoly, ...], ...]
    name: str = "walk"

    @cached_property
    def term_table(self):
        """Flat arrays (rows, cols, shifts, coeffs) over every term."""
        rows, cols, shifts, coeffs = [], [], [], []
        for i, row in enumerate(self.entries):
            for j, poly in enumerate(row):
                for t in poly.terms:
                    rows.append(i)
                    cols.append(j)
                    shifts.append(t.shift)
                    coeffs.append(t.coeff)
        return (
            np.array(rows, dtype=int),
            np.array(cols, dtype=int),
            np.array(shifts, dtype=int).reshape(len(shifts), self.d),
            np.array(coeffs, dtype=complex),
        )

    def __eq__(self, other):
        if not isinstance(other, WalkDefinition):
            return NotImplemented
        return (self.d, self.n, self.entries) == (other.d, other.n, other.entries)

    def __hash__(self):
        return hash((self.d, self.n, self.entries))


def _as_kpoints(k, d: int) -> tuple[np.ndarray, tuple[int, ...]]:
    k = np.asarray(k, dtype=float)
    if d == 1:
        return k.reshape(-1, 1), k.shape
    if k.shape[-1] != d:
        raise DimensionMismatch(f"wavenumber has {k.shape[-1]} components, walk has d={d}")
    return k.reshape(-1, d), k.shape[:-1]


def evaluate_symbol(w: WalkDefinition, k) -> np.ndarray:
    """Symbol U_hat(k) as an (..., n, n) complex array.

    For d = 1 ``k`` may be a scalar or any array of wavenumbers; for d > 1 its
    last axis must have length d.
    """
    kp, batch = _as_kpoints(k, w.d)
    rows, cols, shifts, coeffs = w.term_table
    out = np.zeros((kp.shape[0], w.n * w.n), dtype=complex)
    if len(coeffs):
        phases = np.exp(1j * (kp @ shifts.T)) * coeffs
        np.add.at(out.T, rows * w.n + cols, phases.T)
    return out.reshape(batch + (w.n, w.n))


def evaluate_symbol_derivative(w: WalkDefinition, k, axis: int = 0) -> np.ndarray:
    """Partial derivative of the symbol along one wavenumber axis."""
    kp, batch = _as_kpoints(k, w.d)
    rows, cols, shifts, coeffs = w.term_table
    out = np.zeros((kp.shape[0], w.n * w.n), dtype=complex)
    if len(coeffs):
        phases = np.exp(1j * (kp @ shifts.T)) * coeffs * (1j * shifts[:, axis])
        np.add.at(out.T, rows * w.n + cols, phases.T)
    return out.reshape(batch + (w.n, w.n))


def unitarity_defect(w: WalkDefinition, grid: int = UNITARITY_GRID) -> tuple[float, np.ndarray]:
    """Largest Frobenius norm of U U* - I over a uniform grid, and where it occurs."""
    axes = [2 * np.pi * np.arange(grid) / grid] * w.d
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, w.d)
    u = evaluate_symbol(w, mesh if w.d > 1 else mesh[:, 0])
    gram = u @ np.conj(np.swapaxes(u, -1, -2)) - np.eye(w.n)
    defects = np.linalg.norm(gram, axis=(-2, -1))
    worst = int(np.argmax(defects))
    return float(defects[worst]), mesh[worst]


def validate(w: WalkDefinition, tol: float = UNITARITY_TOL) -> float:
    defect, worst_k = unitarity_defect(w)
    if not defect <= tol:
        raise NonUnitaryError(defect, worst_k)
    return defect


def make_walk(entries, d: int = 1, name: str = "walk", check: bool = True) -> WalkDefinition:
    """Build a walk from an n x n nested list of LaurentPoly (or mappings shift -> coeff)."""
    rows = []
    for row in entries:
        polys = []
        for e in row:
            if isinstance(e, LaurentPoly):
                polys.append(e)
            elif isinstance(e, Mapping):
                polys.append(
                    LaurentPoly.from_pairs(
                        ((s,) if isinstance(s, Integral) else s, c) for s, c in e.items()
                    )
                )
            else:
                polys.append(LaurentPoly.from_pairs([((0,) * d, e)]))
        rows.append(tuple(polys))
    n = len(rows)
    if n < 1 or d < 1 or any(len(r) != n for r in rows):
        raise SchemaError(f"entries must be a non-empty square array, got {n} rows")
    for r in rows:
        for p in r:
            for t in p.terms:
                if len(t.shift) != d:
                    raise SchemaError(f"shift {t.shift} does not have length d={d}")
    w = WalkDefinition(d=d, n=n, entries=tuple(rows), name=name)
    if check:
        validate(w)
    return w


def propagation_radius(w: WalkDefinition) -> int:
    return max((p.radius for row in w.entries for p in row), default=0)


def classify_regularity(w: WalkDefinition) -> RegularityClass:
    # every constructible walk is a Laurent polynomial matrix
    return RegularityClass(Regularity.FINITE_PROPAGATION, propagation_radius(w))


def direct_sum(w1: WalkDefinition, w2: WalkDefinition) -> WalkDefinition:
    if w1.d != w2.d:
        raise DimensionMismatch(f"cannot sum walks with d={w1.d} and d={w2.d}")
    n = w1.n + w2.n
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            if i < w1.n and j < w1.n:
                row.append(w1.entries[i][j])
            elif i >= w1.n and j >= w1.n:
                row.append(w2.entries[i - w1.n][j - w1.n])
            else:
                row.append(zero_poly())
        rows.append(tuple(row))
    return WalkDefinition(d=w1.d, n=n, entries=tuple(rows), name=f"{w1.name}+{w2.name}")


# --- documents -----------------------------------------------------------

def _number(x, where: str) -> float:
    if isinstance(x, bool) or not isinstance(x, Real):
        raise SchemaError(f"{where}: expected a number, got {x!r}")
    return float(x)


def _terms_from_doc(terms, d: int, where: str) -> LaurentPoly:
    if not isinstance(terms, list):
        raise SchemaError(f"{where}: expected a list of terms")
    pairs = []
    for m, term in enumerate(terms):
        loc = f"{where}[{m}]"
        if not isinstance(term, Mapping):
            raise SchemaError(f"{loc}: expected an object")
        shift = term.get("shift", term.get("site"))
        if not isinstance(shift, list) or len(shift) != d:
            raise SchemaError(f"{loc}: shift must be a list of {d} integers")
        if any(isinstance(s, bool) or not isinstance(s, Integral) for s in shift):
            raise SchemaError(f"{loc}: shift must contain integers, got {shift!r}")
        if "re" not in term:
            raise SchemaError(f"{loc}: missing 're'")
        coeff = complex(_number(term["re"], loc + ".re"), _number(term.get("im", 0.0), loc + ".im"))
        pairs.append((shift, coeff))
    return LaurentPoly.from_pairs(pairs)


def _read_document(doc) -> Mapping:
    if isinstance(doc, Path):
        doc = doc.read_text()
    if isinstance(doc, (str, bytes)):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"not valid JSON: {exc}") from exc
    if not isinstance(doc, Mapping):
        raise SchemaError("document must be a JSON object")
    return doc


def _header(doc: Mapping) -> tuple[int, int]:
    for key in ("d", "n", "entries"):
        if key not in doc:
            raise SchemaError(f"missing field {key!r}")
    d, n = doc["d"], doc["n"]
    if isinstance(d, bool) or not isinstance(d, Integral) or d < 1:
        raise SchemaError(f"d must be a positive integer, got {d!r}")
    if isinstance(n, bool) or not isinstance(n, Integral) or n < 1:
        raise SchemaError(f"n must be a positive integer, got {n!r}")
    return int(d), int(n)


def parse_walk(doc, check: bool = True) -> WalkDefinition:
    """Parse a walk document (JSON text, Path, or mapping) and validate it."""
    doc = _read_document(doc)
    d, n = _header(doc)
    name = doc.get("name", "walk")
    if not isinstance(name, str):
        raise SchemaError("name must be a string")
    entries = doc["entries"]
    if not isinstance(entries, list) or len(entries) != n or any(
        not isinstance(r, list) or len(r) != n for r in entries
    ):
        raise SchemaError(f"entries must be an {n} x {n} array of term lists")
    rows = tuple(
        tuple(_terms_from_doc(entries[i][j], d, f"entries[{i}][{j}]") for j in range(n))
        for i in range(n)
    )
    w = WalkDefinition(d=d, n=n, entries=rows, name=name)
    if check:
        validate(w)
    return w


def _poly_doc(p: LaurentPoly) -> list[dict]:
    return [
        {"shift": list(t.shift), "re": t.coeff.real, "im": t.coeff.imag} for t in p.terms
    ]


def walk_to_document(w: WalkDefinition) -> dict:
    return {
        "name": w.name,
        "d": w.d,
        "n": w.n,
        "entries": [[_poly_doc(p) for p in row] for row in w.entries],
    }


def dump_walk(w: WalkDefinition) -> str:
    return json.dumps(walk_to_document(w), indent=1)


def load_walk(path) -> WalkDefinition:
    return parse_walk(Path(path))

"""Brute-force reference evolution with an explicitly assembled truncated matrix.

This path never touches the convolution kernel in :mod:`qwcat.dynamics`: it
enumerates window sites, writes one matrix entry per (site, term), and
multiplies.  Amplitude reaching the outermost layer of the window aborts the
run, since the next step would silently lose it.
"""

from __future__ import annotations

import itertools

import numpy as np
import scipy.sparse as sp

from .dynamics import StateVector
from .errors import DimensionMismatch, WindowTooSmall
from .symbol import WalkDefinition


def truncated_matrix(w: WalkDefinition, half_width: int, dense: bool | None = None):
    """Matrix of ``w`` restricted to the sites [-half_width, half_width]^d.

    Basis index of (site x, component j) is ``j * sites + flat(x)``.
    """
    side = 2 * half_width + 1
    sites = side**w.d
    if dense is None:
        dense = w.d == 1
    rows, cols, vals = [], [], []
    for flat, x in enumerate(itertools.product(range(-half_width, half_width + 1), repeat=w.d)):
        for i, row in enumerate(w.entries):
            for j, poly in enumerate(row):
                for term in poly.terms:
                    y = tuple(a + s for a, s in zip(x, term.shift))
                    if all(-half_width <= c <= half_width for c in y):
                        yflat = int(np.ravel_multi_index(tuple(c + half_width for c in y), (side,) * w.d))
                        rows.append(i * sites + yflat)
                        cols.append(j * sites + flat)
                        vals.append(term.coeff)
    m = sp.coo_matrix((vals, (rows, cols)), shape=(w.n * sites, w.n * sites)).tocsr()
    return m.toarray() if dense else m


def _to_vector(xi: StateVector, half_width: int) -> np.ndarray:
    side = 2 * half_width + 1
    try:
        box = xi.embed((-half_width,) * xi.d, (side,) * xi.d)
    except ValueError as exc:
        raise WindowTooSmall("initial state does not fit in the oracle window") from exc
    return box.reshape(-1)


def _edge_mass(vec: np.ndarray, n: int, d: int, side: int) -> float:
    box = np.abs(vec.reshape((n,) + (side,) * d))
    edge = 0.0
    for ax in range(d):
        edge = max(edge, float(np.take(box, 0, axis=ax + 1).max()), float(np.take(box, side - 1, axis=ax + 1).max()))
    return edge


def oracle_evolve(w: WalkDefinition, xi: StateVector, t: int, half_width: int, matrix=None) -> StateVector:
    """Evolve ``xi`` for ``t`` steps by repeated truncated-matrix products."""
    if (w.d, w.n) != (xi.d, xi.n):
        raise DimensionMismatch("walk and state disagree on (d, n)")
    side = 2 * half_width + 1
    m = truncated_matrix(w, half_width) if matrix is None else matrix
    vec = _to_vector(xi, half_width)
    for s in range(t):
        if _edge_mass(vec, w.n, w.d, side) > 0.0:
            raise WindowTooSmall(f"amplitude touched the oracle window edge before step {s + 1}")
        vec = m @ vec
    amps = vec.reshape((w.n,) + (side,) * w.d)
    return StateVector(amps, (-half_width,) * w.d).trimmed()

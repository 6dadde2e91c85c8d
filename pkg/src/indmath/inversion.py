"""Recover source emission rates from receptor deposition data.

Deposition is linear in every emission rate, so a scenario reduces to a
design matrix ``G`` (receptors x sources, mg/m^2 per g/s) and the inverse
problem ``min ||G q - d||``. Two solvers are provided: plain linear least
squares and a Lawson-Hanson active-set solver for ``q >= 0``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import DimensionMismatch, EmptyScenario, IterationLimit
from .plume import Contaminant, DispersionSpec, Receptor, Source, WindInterval, deposition


class RankDeficientWarning(UserWarning):
    """The design matrix does not resolve every source."""


@dataclass(frozen=True)
class DesignMatrix:
    values: np.ndarray
    receptor_ids: tuple[str, ...] = ()
    source_ids: tuple[str, ...] = ()

    @property
    def shape(self):
        return self.values.shape

    def forward(self, q) -> np.ndarray:
        return self.values @ np.asarray(q, dtype=float)


@dataclass
class EmissionEstimate:
    q: np.ndarray
    residual_norm: float
    rank: int
    condition_number: float
    active: np.ndarray
    method: str
    source_ids: tuple[str, ...] = ()
    iterations: int = 0
    warnings: list[str] = field(default_factory=list)

    @property
    def rank_deficient(self) -> bool:
        return self.rank < len(self.q)


def build_design_matrix(
    sources: Sequence[Source],
    receptors: Sequence[Receptor],
    wind: Sequence[WindInterval],
    spec: DispersionSpec,
    contaminant: Contaminant,
) -> DesignMatrix:
    """Entry (i, j) is the deposition at receptor i from source j at unit rate."""
    if not sources or not receptors:
        raise EmptyScenario(f"need sources and receptors, got {len(sources)} and {len(receptors)}")
    G = np.empty((len(receptors), len(sources)))
    for j, src in enumerate(sources):
        unit = [src.with_rate(1.0)]
        for i, rec in enumerate(receptors):
            G[i, j] = deposition(unit, rec, wind, spec, contaminant)
    return DesignMatrix(
        G,
        tuple(r.id or f"R{i + 1}" for i, r in enumerate(receptors)),
        tuple(s.id or f"S{j + 1}" for j, s in enumerate(sources)),
    )


def _unpack(matrix, d):
    if isinstance(matrix, DesignMatrix):
        G, ids = matrix.values, matrix.source_ids
    else:
        G, ids = np.asarray(matrix, dtype=float), ()
    if G.ndim != 2:
        raise DimensionMismatch(f"design matrix must be 2-D, got shape {G.shape}")
    d = np.asarray(d, dtype=float).ravel()
    if d.shape[0] != G.shape[0]:
        raise DimensionMismatch(f"{G.shape[0]} receptors but {d.shape[0]} measurements")
    return G, d, ids


def _diagnostics(G):
    s = np.linalg.svd(G, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0, np.inf
    tol = max(G.shape) * np.finfo(float).eps * s[0]
    rank = int(np.sum(s > tol))
    cond = float(s[0] / s[-1]) if s[-1] > 0 else np.inf
    return rank, cond


def solve_least_squares(matrix, d) -> EmissionEstimate:
    """Unconstrained least squares through an SVD-based orthogonal solver.

    A rank-deficient matrix is reported with :class:`RankDeficientWarning`
    and the minimum-norm solution is returned.
    """
    G, d, ids = _unpack(matrix, d)
    q, _, _, _ = scipy.linalg.lstsq(G, d, lapack_driver="gelsd")
    rank, cond = _diagnostics(G)
    notes = []
    if rank < G.shape[1]:
        msg = f"design matrix rank {rank} < {G.shape[1]} sources; returning minimum-norm solution"
        warnings.warn(msg, RankDeficientWarning, stacklevel=2)
        notes.append(msg)
    r = G @ q - d
    return EmissionEstimate(
        q, float(np.linalg.norm(r)), rank, cond, np.zeros(G.shape[1], dtype=bool), "lsq", ids, 1, notes
    )


def nnls(A, b, maxiter=None, tol=None):
    """Lawson-Hanson active-set solution of ``min ||A x - b||`` s.t. ``x >= 0``.

    Returns ``(x, rnorm, iterations)``. Raises :class:`IterationLimit` when
    the outer loop exceeds ``maxiter`` (default ``3 * n``).
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = A.shape
    if maxiter is None:
        maxiter = 3 * max(n, 1)
    if tol is None:
        tol = 10 * np.finfo(float).eps * max(m, n) * max(np.abs(A).sum(axis=0).max(initial=0), 1.0) * max(
            np.linalg.norm(b), 1.0
        )

    x = np.zeros(n)
    passive = np.zeros(n, dtype=bool)
    w = A.T @ (b - A @ x)
    it = 0
    while not passive.all() and np.max(w[~passive], initial=-np.inf) > tol:
        if it >= maxiter:
            raise IterationLimit(f"NNLS did not converge in {maxiter} iterations")
        it += 1
        cand = np.where(passive, -np.inf, w)
        passive[int(np.argmax(cand))] = True

        while True:
            s = np.zeros(n)
            s[passive] = np.linalg.lstsq(A[:, passive], b, rcond=None)[0]
            if np.all(s[passive] > 0):
                break
            # step back toward x until the first passive variable hits zero
            idx = np.flatnonzero(passive & (s <= 0))
            denom = x[idx] - s[idx]
            ratio = np.divide(x[idx], denom, out=np.zeros(idx.size), where=denom > 0)
            k = int(np.argmin(ratio))
            x = x + ratio[k] * (s - x)
            x[idx[k]] = 0.0
            passive &= x > 0
            x[~passive] = 0.0
            if not passive.any():
                s = np.zeros(n)
                break
        x = s
        w = A.T @ (b - A @ x)
    return x, float(np.linalg.norm(A @ x - b)), it


def solve_nnls(matrix, d, maxiter=None) -> EmissionEstimate:
    """Least squares with ``q >= 0``; ``active`` marks components held at zero."""
    G, d, ids = _unpack(matrix, d)
    q, rnorm, it = nnls(G, d, maxiter=maxiter)
    rank, cond = _diagnostics(G)
    notes = []
    if rank < G.shape[1]:
        notes.append(f"design matrix rank {rank} < {G.shape[1]} sources")
    return EmissionEstimate(q, rnorm, rank, cond, q <= 0.0, "nnls", ids, it, notes)


def kkt_violation(G, d, q) -> float:
    """Largest breach of the NNLS optimality conditions, scaled by ``||G^T d||``.

    With gradient ``g = G^T (G q - d)``: free components need ``g = 0``,
    components at zero need ``g >= 0``, and ``q >= 0`` throughout.
    """
    G = np.asarray(G, dtype=float)
    q = np.asarray(q, dtype=float)
    g = G.T @ (G @ q - np.asarray(d, dtype=float))
    scale = max(np.linalg.norm(G.T @ np.asarray(d, dtype=float)), np.finfo(float).tiny)
    free = q > 0
    worst = max(
        np.max(np.abs(g[free]), initial=0.0),
        np.max(-g[~free], initial=0.0),
    ) / scale
    neg = np.max(-q, initial=0.0)
    return float(max(worst, neg))

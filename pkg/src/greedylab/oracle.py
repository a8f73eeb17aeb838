"""Exact best n-term approximation by exhaustive support enumeration.

Every size-n support is scanned in lexicographic order; each support's
coefficients come from a spectral (eigendecomposition) solve of its normal
equations with minimum-norm handling of rank-deficient atom sets, and the
reported error is always the explicitly evaluated ||f - Phi c||, so no
support's objective is ever underestimated. The winning support is then
re-solved with an SVD least squares to pin sigma_n to full precision.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .dictionary import Dictionary, SparseVector, check_vector
from .errors import EnumerationBudgetExceeded
from .rip import DEFAULT_ENUMERATION_BUDGET

_SCAN_ELEMS = 4_000_000
_RANK_RCOND = 1e-12


@dataclass(frozen=True, eq=False)
class OracleResult:
    """Best approximation with support size <= order, and the search size."""

    order: int
    best_support: tuple[int, ...]
    best_coefficients: SparseVector
    sigma: float
    supports_examined: int

    def to_json_dict(self) -> dict:
        return {
            "order": self.order,
            "sigma": self.sigma,
            "support": list(self.best_support),
            "coefficients": [
                [i, float(v)]
                for i, v in zip(
                    self.best_coefficients.support, self.best_coefficients.coefficients
                )
            ],
            "supports_examined": self.supports_examined,
        }


def _combo_chunks(num_atoms: int, order: int, chunk: int):
    it = itertools.combinations(range(num_atoms), order)
    while True:
        block = list(itertools.islice(it, chunk))
        if not block:
            return
        yield np.array(block, dtype=np.int64).reshape(len(block), order)


def _scan_chunk(atoms_t: np.ndarray, f: np.ndarray, supports: np.ndarray):
    """Residual norms of least-squares fits on each support of the chunk."""
    sub = atoms_t[supports]  # (B, n, m)
    gram = sub @ sub.swapaxes(1, 2)
    rhs = sub @ f
    w, vecs = np.linalg.eigh(gram)
    cut = np.maximum(w[:, -1:], 1e-300) * _RANK_RCOND
    inv_w = np.where(w > cut, 1.0 / np.where(w > cut, w, 1.0), 0.0)
    t = np.einsum("bij,bi->bj", vecs, rhs)
    coeffs = np.einsum("bij,bj->bi", vecs, inv_w * t)
    synth = np.einsum("bnm,bn->bm", sub, coeffs)
    res = f[None, :] - synth
    return np.linalg.norm(res, axis=1), coeffs


def best_n_term(
    d: Dictionary,
    target,
    order: int,
    budget: int = DEFAULT_ENUMERATION_BUDGET,
) -> OracleResult:
    """Minimize ||f - Phi c|| over coefficient vectors of sparsity <= order.

    Ties between supports keep the lexicographically smallest one. Order 0
    returns sigma_0 = ||f|| with an empty support.
    """
    f = check_vector(d, target)
    cap = min(d.ambient_dim, d.num_atoms)
    if not 0 <= order <= cap:
        raise ValueError(f"order must lie in [0, {cap}]")
    if order == 0:
        return OracleResult(
            0, (), SparseVector.from_pairs([], [], d.label), float(np.linalg.norm(f)), 1
        )
    total = math.comb(d.num_atoms, order)
    if total > budget:
        raise EnumerationBudgetExceeded(total, budget)

    atoms_t = np.ascontiguousarray(d.atoms.T)
    chunk = max(1, min(65536, _SCAN_ELEMS // max(1, order * d.ambient_dim)))
    best_norm = np.inf
    best_support: np.ndarray | None = None
    for supports in _combo_chunks(d.num_atoms, order, chunk):
        norms, _ = _scan_chunk(atoms_t, f, supports)
        k = int(np.argmin(norms))
        if norms[k] < best_norm:
            best_norm = float(norms[k])
            best_support = supports[k].copy()
    assert best_support is not None

    # polish the winner with an SVD least squares on the atoms themselves
    idx = [int(i) for i in best_support]
    sub = d.atoms[:, idx]
    coeffs, *_ = np.linalg.lstsq(sub, f, rcond=None)
    polished = float(np.linalg.norm(f - sub @ coeffs))
    if polished > best_norm:
        # extremely ill-conditioned corner; fall back to the scan's solution
        norms, scan_coeffs = _scan_chunk(atoms_t, f, best_support[None, :])
        polished, coeffs = float(norms[0]), scan_coeffs[0]
    return OracleResult(
        order,
        tuple(idx),
        SparseVector.from_pairs(idx, coeffs, d.label),
        polished,
        total,
    )


def sigma_profile(
    d: Dictionary,
    target,
    max_order: int,
    budget: int = DEFAULT_ENUMERATION_BUDGET,
) -> list[float]:
    """[sigma_0, ..., sigma_max_order] for one target."""
    return [best_n_term(d, target, n, budget=budget).sigma for n in range(max_order + 1)]

"""Restricted isometry constants of a dictionary.

delta_n is the spectral deviation of n-column Gram submatrices from the
identity: max over supports S, |S| = n, of max(lmax(G_S) - 1, 1 - lmin(G_S)).
Three routes are provided: exact lexicographic enumeration (budget-guarded),
a sampled lower bound, and the coherence upper bound (n-1)*mu.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dictionary import Dictionary, coherence, gram_submatrix
from .errors import EnumerationBudgetExceeded

DEFAULT_ENUMERATION_BUDGET = 2_000_000

KIND_EXACT = "exact"
KIND_SAMPLED = "sampled_lower_bound"
KIND_BOUND = "coherence_upper_bound"

_CHUNK = 16384


@dataclass(frozen=True)
class RipEstimate:
    """An estimate of delta_n together with how it was obtained."""

    order: int
    value: float
    kind: str
    subsets_examined: int
    witness_support: tuple[int, ...] | None

    def to_json_dict(self) -> dict:
        return {
            "order": self.order,
            "value": self.value,
            "kind": self.kind,
            "subsets_examined": self.subsets_examined,
            "witness_support": list(self.witness_support)
            if self.witness_support is not None
            else None,
        }


def support_distortion(d: Dictionary, support) -> float:
    """delta restricted to a single support, via a symmetric eigensolver."""
    gram = gram_submatrix(d, support)
    w = np.linalg.eigvalsh(gram)
    return float(max(w[-1] - 1.0, 1.0 - w[0]))


def _chunk_distortions(atoms_t: np.ndarray, supports: np.ndarray) -> np.ndarray:
    # supports: (B, n) row indices into atoms_t (which is N x m).
    sub = atoms_t[supports]
    gram = sub @ sub.swapaxes(1, 2)
    w = np.linalg.eigvalsh(gram)
    return np.maximum(w[:, -1] - 1.0, 1.0 - w[:, 0])


def _tail_chunks(num_atoms: int, order: int, first: int):
    """Fixed-size chunks of the supports starting at ``first``, in lex order."""
    width = order - 1
    it = itertools.combinations(range(first + 1, num_atoms), width)
    while True:
        block = list(itertools.islice(it, _CHUNK))
        if not block:
            return
        tails = np.array(block, dtype=np.int64).reshape(len(block), width)
        firsts = np.full((len(block), 1), first, dtype=np.int64)
        yield np.hstack([firsts, tails])


def _scan_first_range(atoms_t: np.ndarray, order: int, lo: int, hi: int):
    """Best (value, support) over supports whose smallest index lies in [lo, hi)."""
    best_val = -np.inf
    best_support: tuple[int, ...] | None = None
    examined = 0
    num_atoms = atoms_t.shape[0]
    for first in range(lo, hi):
        for supports in _tail_chunks(num_atoms, order, first):
            deltas = _chunk_distortions(atoms_t, supports)
            examined += supports.shape[0]
            k = int(np.argmax(deltas))
            if deltas[k] > best_val:
                best_val = float(deltas[k])
                best_support = tuple(int(i) for i in supports[k])
    return best_val, best_support, examined


def rip_exact(
    d: Dictionary,
    order: int,
    budget: int = DEFAULT_ENUMERATION_BUDGET,
    workers: int = 1,
) -> RipEstimate:
    """Exact delta_n by enumerating every size-n support.

    Enumeration is lexicographic and partitioned by smallest index; ties keep
    the lexicographically first witness, so the result is identical for any
    worker count.
    """
    n_atoms = d.num_atoms
    if not 1 <= order <= n_atoms:
        raise ValueError(f"order must lie in [1, {n_atoms}]")
    total = math.comb(n_atoms, order)
    if total > budget:
        raise EnumerationBudgetExceeded(total, budget)

    if order == 1:
        sq = np.sum(d.atoms * d.atoms, axis=0)
        deltas = np.abs(sq - 1.0)
        k = int(np.argmax(deltas))
        return RipEstimate(1, float(deltas[k]), KIND_EXACT, n_atoms, (k,))

    atoms_t = np.ascontiguousarray(d.atoms.T)
    first_count = n_atoms - order + 1
    if workers <= 1:
        parts = [_scan_first_range(atoms_t, order, 0, first_count)]
    else:
        workers = min(workers, first_count)
        bounds = np.linspace(0, first_count, workers + 1).astype(int)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_scan_first_range, atoms_t, order, int(lo), int(hi))
                for lo, hi in zip(bounds[:-1], bounds[1:])
            ]
            parts = [f.result() for f in futures]

    best_val = -np.inf
    best_support: tuple[int, ...] | None = None
    examined = 0
    for val, sup, cnt in parts:  # ranges merged in ascending first-index order
        examined += cnt
        if sup is not None and val > best_val:
            best_val = val
            best_support = sup
    assert examined == total and best_support is not None
    return RipEstimate(order, float(best_val), KIND_EXACT, total, best_support)


def rip_sampled(d: Dictionary, order: int, trials: int, seed: int) -> RipEstimate:
    """Lower bound on delta_n from seeded uniformly sampled supports."""
    n_atoms = d.num_atoms
    if not 1 <= order <= n_atoms:
        raise ValueError(f"order must lie in [1, {n_atoms}]")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    supports = np.stack(
        [np.sort(rng.choice(n_atoms, size=order, replace=False)) for _ in range(trials)]
    ).astype(np.int64)
    atoms_t = np.ascontiguousarray(d.atoms.T)
    best_val = -np.inf
    best_support: tuple[int, ...] | None = None
    for start in range(0, trials, _CHUNK):
        block = supports[start : start + _CHUNK]
        deltas = _chunk_distortions(atoms_t, block)
        k = int(np.argmax(deltas))
        if deltas[k] > best_val:
            best_val = float(deltas[k])
            best_support = tuple(int(i) for i in block[k])
    return RipEstimate(order, best_val, KIND_SAMPLED, trials, best_support)


def rip_coherence_bound(d: Dictionary, order: int) -> RipEstimate:
    """Upper bound delta_n <= (n-1)*mu; zero for order 1."""
    if order < 1:
        raise ValueError("order must be >= 1")
    value = 0.0 if order == 1 else (order - 1) * coherence(d)
    return RipEstimate(order, float(value), KIND_BOUND, 0, None)

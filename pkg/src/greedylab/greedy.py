"""Greedy pursuit over a dictionary: orthogonal (OMP / weak OMP) and pure greedy.

Orthogonal runs keep an incremental QR factorization of the selected atoms
(classical Gram-Schmidt with one reorthogonalization pass), falling back to a
full refactorization when the triangular factor's diagonal ratio passes 1e8
and refusing to continue past condition 1e12.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .dictionary import Dictionary, SparseVector, check_vector
from .errors import (
    InvalidKappa,
    NotEnoughSelected,
    RankDeficientProjection,
)

MODE_ARGMAX = "argmax"
MODE_ADVERSARIAL = "adversarial_weak"

_IP_FLOOR_REL = 1e-14
_COND_REFRESH = 1e8
_COND_LIMIT = 1e12


@dataclass(frozen=True)
class GreedyConfig:
    """Run parameters for weak orthogonal matching pursuit.

    kappa is the weakness parameter in (0, 1]; a step stops early once the
    residual norm falls below residual_tol * ||f|| or every available inner
    product is below 1e-14 * ||f||.
    """

    max_steps: int
    kappa: float = 1.0
    residual_tol: float = 1e-12
    selection_mode: str = MODE_ARGMAX

    def __post_init__(self):
        if not 0.0 < self.kappa <= 1.0:
            raise InvalidKappa(self.kappa)
        if self.max_steps < 0:
            raise ValueError("max_steps must be >= 0")
        if self.residual_tol < 0.0:
            raise ValueError("residual_tol must be >= 0")
        if self.selection_mode not in (MODE_ARGMAX, MODE_ADVERSARIAL):
            raise ValueError(f"unknown selection_mode {self.selection_mode!r}")


@dataclass(frozen=True, eq=False)
class GreedyTrace:
    """Complete per-step record of one greedy run.

    residual_norms[k] is ||r_k|| (index 0 holds ||f||); selection_values[k]
    and max_inner_products[k] describe the k-th selection, made against r_k.
    """

    algorithm: str
    kappa: float
    selected: tuple[int, ...]
    residual_norms: tuple[float, ...]
    selection_values: tuple[float, ...]
    max_inner_products: tuple[float, ...]
    final_coefficients: SparseVector
    final_residual: np.ndarray = field(repr=False)

    def __post_init__(self):
        residual = np.array(self.final_residual, dtype=np.float64, copy=True)
        residual.setflags(write=False)
        object.__setattr__(self, "final_residual", residual)

    @property
    def num_steps(self) -> int:
        return len(self.selected)

    def to_json_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "kappa": self.kappa,
            "selected": list(self.selected),
            "residual_norms": list(self.residual_norms),
            "selection_values": list(self.selection_values),
            "max_inner_products": list(self.max_inner_products),
            "coefficients": [
                [i, float(v)]
                for i, v in zip(
                    self.final_coefficients.support, self.final_coefficients.coefficients
                )
            ],
        }


class _IncrementalQR:
    """QR of a growing atom selection with refresh and rank guards."""

    def __init__(self, d: Dictionary, capacity: int):
        self._d = d
        self._q = np.zeros((d.ambient_dim, capacity))
        self._r = np.zeros((capacity, capacity))
        self._k = 0

    def append(self, selected: list[int], step_index: int) -> None:
        k = self._k
        a = self._d.atoms[:, selected[-1]]
        if k == 0:
            w = a.copy()
            self._r[0, 0] = np.linalg.norm(w)
        else:
            q = self._q[:, :k]
            h1 = q.T @ a
            w = a - q @ h1
            h2 = q.T @ w
            w -= q @ h2
            self._r[:k, k] = h1 + h2
            self._r[k, k] = np.linalg.norm(w)
        diag = np.abs(np.diagonal(self._r)[: k + 1])
        dmin = diag.min()
        if dmin <= 0.0 or diag.max() / dmin > _COND_REFRESH:
            self._refresh(selected, step_index)
        else:
            self._q[:, k] = w / self._r[k, k]
        self._k = k + 1

    def _refresh(self, selected: list[int], step_index: int) -> None:
        sub = self._d.atoms[:, selected]
        qf, rf = np.linalg.qr(sub)
        cond = np.linalg.cond(rf)
        if not np.isfinite(cond) or cond > _COND_LIMIT:
            raise RankDeficientProjection(step_index, float(cond))
        k = len(selected)
        self._q[:, :k] = qf
        self._r[:k, :k] = rf

    def solve(self, f: np.ndarray) -> np.ndarray:
        """Least-squares coefficients of f on the current selection order."""
        k = self._k
        return solve_triangular(self._r[:k, :k], self._q[:, :k].T @ f)


def _run_orthogonal(d: Dictionary, target, cfg: GreedyConfig, algorithm: str) -> GreedyTrace:
    f = check_vector(d, target)
    cap = min(d.ambient_dim, d.num_atoms)
    if cfg.max_steps > cap:
        raise ValueError(f"max_steps must be <= min(m, N) = {cap}")
    fnorm = float(np.linalg.norm(f))
    ip_floor = _IP_FLOOR_REL * fnorm

    selected: list[int] = []
    available = np.ones(d.num_atoms, dtype=bool)
    norms = [fnorm]
    selection_values: list[float] = []
    max_inner: list[float] = []
    qr = _IncrementalQR(d, cfg.max_steps)
    coeffs = np.zeros(0)
    r = f.copy()

    for step in range(cfg.max_steps):
        inner = d.atoms.T @ r
        abs_inner = np.abs(inner)
        overall_max = float(abs_inner.max())
        masked = np.where(available, abs_inner, -1.0)
        avail_max = float(masked.max())
        if avail_max <= ip_floor:
            break
        if cfg.selection_mode == MODE_ARGMAX:
            idx = int(np.argmax(masked))
        else:
            admissible = available & (abs_inner >= cfg.kappa * avail_max)
            idx = int(np.argmax(admissible))
        selected.append(idx)
        available[idx] = False
        selection_values.append(float(abs_inner[idx]))
        max_inner.append(overall_max)

        qr.append(selected, step + 1)
        coeffs = qr.solve(f)
        r = f - d.atoms[:, selected] @ coeffs
        norms.append(float(np.linalg.norm(r)))
        if norms[-1] <= cfg.residual_tol * fnorm:
            break

    return GreedyTrace(
        algorithm=algorithm,
        kappa=cfg.kappa,
        selected=tuple(selected),
        residual_norms=tuple(norms),
        selection_values=tuple(selection_values),
        max_inner_products=tuple(max_inner),
        final_coefficients=SparseVector.from_pairs(selected, coeffs, d.label),
        final_residual=r,
    )


def run_womp(d: Dictionary, target, cfg: GreedyConfig) -> GreedyTrace:
    """Weak orthogonal matching pursuit.

    In argmax mode each step selects the available atom with the largest
    |<r, phi>|; in adversarial_weak mode it selects the smallest-index
    available atom whose inner product reaches kappa times that maximum.
    Coefficients are the exact least squares on the selection and
    r_k = f - Phi c^k.
    """
    return _run_orthogonal(d, target, cfg, "womp")


def run_omp(d: Dictionary, target, max_steps: int, residual_tol: float = 1e-12) -> GreedyTrace:
    """Orthogonal matching pursuit: argmax selection with kappa = 1."""
    cfg = GreedyConfig(max_steps=max_steps, kappa=1.0, residual_tol=residual_tol)
    return _run_orthogonal(d, target, cfg, "omp")


def run_pga(d: Dictionary, target, steps: int) -> GreedyTrace:
    """Pure greedy algorithm: rank-one updates, atoms may repeat, no projection."""
    f = check_vector(d, target)
    if steps < 0:
        raise ValueError("steps must be >= 0")
    fnorm = float(np.linalg.norm(f))
    ip_floor = _IP_FLOOR_REL * fnorm

    r = f.copy()
    selected: list[int] = []
    norms = [fnorm]
    selection_values: list[float] = []
    max_inner: list[float] = []
    accumulated: dict[int, float] = {}

    for _ in range(steps):
        inner = d.atoms.T @ r
        abs_inner = np.abs(inner)
        top = float(abs_inner.max())
        if top <= ip_floor:
            break
        idx = int(np.argmax(abs_inner))
        value = float(inner[idx])
        selected.append(idx)
        selection_values.append(abs(value))
        max_inner.append(top)
        accumulated[idx] = accumulated.get(idx, 0.0) + value
        r = r - value * d.atoms[:, idx]
        norms.append(float(np.linalg.norm(r)))

    items = sorted(accumulated.items())
    return GreedyTrace(
        algorithm="pga",
        kappa=1.0,
        selected=tuple(selected),
        residual_norms=tuple(norms),
        selection_values=tuple(selection_values),
        max_inner_products=tuple(max_inner),
        final_coefficients=SparseVector.from_pairs(
            [i for i, _ in items], [v for _, v in items], d.label
        ),
        final_residual=r,
    )


def project_on_support(d: Dictionary, support, target):
    """Orthogonal projection of ``target`` onto the span of the listed atoms.

    Returns (coefficients, residual vector, residual norm). The coefficients
    minimize ||f - Phi c|| over vectors supported on ``support``.
    """
    f = check_vector(d, target)
    idx = sorted({int(i) for i in support})
    for i in idx:
        if not 0 <= i < d.num_atoms:
            from .errors import IndexOutOfRange

            raise IndexOutOfRange(i, d.num_atoms)
    if len(idx) > d.ambient_dim:
        raise ValueError("support size must not exceed the ambient dimension")
    if not idx:
        empty = SparseVector.from_pairs([], [], d.label)
        return empty, f.copy(), float(np.linalg.norm(f))
    sub = d.atoms[:, idx]
    cond = np.linalg.cond(sub)
    if not np.isfinite(cond) or cond > _COND_LIMIT:
        raise RankDeficientProjection(None, float(cond))
    q, r_fac = np.linalg.qr(sub)
    coeffs = solve_triangular(r_fac, q.T @ f)
    residual = f - sub @ coeffs
    return (
        SparseVector.from_pairs(idx, coeffs, d.label),
        residual,
        float(np.linalg.norm(residual)),
    )


def postprocess_top_n(trace: GreedyTrace, n: int) -> SparseVector:
    """Keep the n largest-magnitude final coefficients; ties keep smaller indices."""
    if n > trace.num_steps:
        raise NotEnoughSelected(n, trace.num_steps)
    sv = trace.final_coefficients
    ranked = sorted(
        zip(sv.support, sv.coefficients), key=lambda pair: (-abs(pair[1]), pair[0])
    )[:n]
    return SparseVector.from_pairs(
        [i for i, _ in ranked], [v for _, v in ranked], sv.dictionary_label
    )

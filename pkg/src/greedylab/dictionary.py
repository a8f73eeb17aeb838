"""Finite normalized dictionaries in R^m and sparse coefficient vectors.

Atoms are stored densely as the columns of an m x N matrix. Generators are
pure functions of their arguments, and every constructed object is immutable,
so instances are safe to share across workers.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    CoherenceTargetUnreachable,
    DimensionMismatch,
    IndexOutOfRange,
    SingleAtom,
    ZeroColumn,
)

NORM_RTOL = 1e-12
_ZERO_FLOOR = 1e-300
_MAGIC = b"GLABDICT"
_PERTURBED_ATTEMPTS = 100


@dataclass(frozen=True, eq=False)
class Dictionary:
    """A finite family of unit-norm atoms, column gamma being atom gamma.

    Columns must already be unit norm within 1e-12 relative; build through
    :func:`normalize_columns` or a generator when starting from raw data.
    """

    atoms: np.ndarray
    label: str = ""

    def __post_init__(self):
        atoms = np.array(self.atoms, dtype=np.float64, order="F", copy=True)
        if atoms.ndim != 2 or atoms.shape[0] < 1 or atoms.shape[1] < 1:
            raise ValueError("atoms must be a 2-d matrix with m >= 1 rows and N >= 1 columns")
        if not np.all(np.isfinite(atoms)):
            raise ValueError("atom entries must be finite")
        norms = np.linalg.norm(atoms, axis=0)
        if np.any(np.abs(norms - 1.0) > NORM_RTOL):
            worst = int(np.argmax(np.abs(norms - 1.0)))
            raise ValueError(
                f"column {worst} has norm {norms[worst]!r}; "
                "columns must be unit norm (see normalize_columns)"
            )
        atoms.setflags(write=False)
        object.__setattr__(self, "atoms", atoms)

    @property
    def ambient_dim(self) -> int:
        return self.atoms.shape[0]

    @property
    def num_atoms(self) -> int:
        return self.atoms.shape[1]


@dataclass(frozen=True, eq=False)
class SparseVector:
    """Sparse coefficients: a sorted support plus the aligned nonzero values."""

    support: tuple[int, ...]
    coefficients: np.ndarray
    dictionary_label: str = ""

    def __post_init__(self):
        coeffs = np.array(self.coefficients, dtype=np.float64, copy=True)
        support = tuple(int(i) for i in self.support)
        if coeffs.ndim != 1 or len(support) != coeffs.shape[0]:
            raise ValueError("support and coefficients must align one-to-one")
        if any(i < 0 for i in support):
            raise ValueError("support indices must be nonnegative")
        if len(set(support)) != len(support):
            raise ValueError("support indices must be distinct")
        if any(support[i] >= support[i + 1] for i in range(len(support) - 1)):
            raise ValueError("support must be sorted ascending")
        if np.any(coeffs == 0.0):
            raise ValueError("exact-zero coefficients must be dropped (use from_pairs)")
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("coefficients must be finite")
        coeffs.setflags(write=False)
        object.__setattr__(self, "support", support)
        object.__setattr__(self, "coefficients", coeffs)

    @classmethod
    def from_pairs(cls, indices, values, dictionary_label: str = "") -> "SparseVector":
        """Build from parallel index/value sequences, dropping exact zeros."""
        pairs = sorted(
            (int(i), float(v)) for i, v in zip(indices, values, strict=True) if float(v) != 0.0
        )
        support = tuple(i for i, _ in pairs)
        coeffs = np.array([v for _, v in pairs], dtype=np.float64)
        return cls(support, coeffs, dictionary_label)

    @property
    def sparsity(self) -> int:
        return len(self.support)

    def to_dense(self, num_atoms: int) -> np.ndarray:
        if self.support and self.support[-1] >= num_atoms:
            raise IndexOutOfRange(self.support[-1], num_atoms)
        dense = np.zeros(num_atoms)
        if self.support:
            dense[list(self.support)] = self.coefficients
        return dense


def normalize_columns(raw, label: str = "") -> Dictionary:
    """Scale every column of ``raw`` to unit norm, preserving directions."""
    mat = np.array(raw, dtype=np.float64, order="F", copy=True)
    if mat.ndim != 2:
        raise ValueError("expected a 2-d matrix")
    norms = np.linalg.norm(mat, axis=0)
    small = np.flatnonzero(norms < _ZERO_FLOOR)
    if small.size:
        raise ZeroColumn(int(small[0]))
    return Dictionary(mat / norms, label=label)


def gen_gaussian(m: int, num_atoms: int, seed: int) -> Dictionary:
    """Seeded standard-normal entries, columns normalized."""
    if m < 1 or num_atoms < 1:
        raise ValueError("m and num_atoms must be >= 1")
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal((m, num_atoms))
    return normalize_columns(raw, label=f"gaussian-m{m}-N{num_atoms}-s{seed}")


def gen_perturbed_identity(num_atoms: int, eps: float, seed: int) -> Dictionary:
    """Identity columns plus uniform perturbations of magnitude <= eps.

    The result is regenerated with a derived seed until its coherence is at
    most 4*eps; with eps < 1/(2N) this almost always succeeds on the first
    draw. Ambient dimension equals the atom count.
    """
    if num_atoms < 2:
        raise ValueError("num_atoms must be >= 2")
    if not 0.0 <= eps < 1.0 / (2 * num_atoms):
        raise ValueError(f"eps must satisfy 0 <= eps < 1/(2N) = {1.0 / (2 * num_atoms):g}")
    label = f"perturbed-identity-N{num_atoms}-eps{eps:g}-s{seed}"
    for attempt in range(_PERTURBED_ATTEMPTS):
        rng = np.random.default_rng([seed, attempt])
        raw = np.eye(num_atoms) + rng.uniform(-eps, eps, size=(num_atoms, num_atoms))
        d = normalize_columns(raw, label=label)
        if coherence(d) <= 4.0 * eps:
            return d
    raise CoherenceTargetUnreachable(num_atoms, eps, _PERTURBED_ATTEMPTS)


def gen_union_of_bases(m: int, seed: int) -> Dictionary:
    """Union of the standard basis and a seeded random orthonormal basis (N = 2m)."""
    if m < 2:
        raise ValueError("m must be >= 2")
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.standard_normal((m, m)))
    atoms = np.hstack([np.eye(m), q])
    return Dictionary(atoms, label=f"union-of-bases-m{m}-s{seed}")


def coherence(d: Dictionary) -> float:
    """Largest absolute inner product between two distinct atoms."""
    if d.num_atoms < 2:
        raise SingleAtom("coherence needs at least two atoms")
    gram = d.atoms.T @ d.atoms
    off = np.abs(gram)
    np.fill_diagonal(off, 0.0)
    return float(off.max())


def _check_support(support, num_atoms: int) -> list[int]:
    idx = [int(i) for i in support]
    for i in idx:
        if not 0 <= i < num_atoms:
            raise IndexOutOfRange(i, num_atoms)
    if len(set(idx)) != len(idx):
        raise ValueError("support indices must be distinct")
    return idx


def gram_submatrix(d: Dictionary, support) -> np.ndarray:
    """Gram matrix of the atoms listed in ``support`` (entries <phi_i, phi_j>)."""
    idx = _check_support(support, d.num_atoms)
    if not idx:
        raise ValueError("support must contain at least one index")
    sub = d.atoms[:, idx]
    return sub.T @ sub


def synthesize(d: Dictionary, sv: SparseVector) -> np.ndarray:
    """Dense vector sum_gamma c_gamma * phi_gamma for a sparse coefficient vector."""
    if sv.support and sv.support[-1] >= d.num_atoms:
        raise IndexOutOfRange(sv.support[-1], d.num_atoms)
    if not sv.support:
        return np.zeros(d.ambient_dim)
    return d.atoms[:, list(sv.support)] @ sv.coefficients


def check_vector(d: Dictionary, vec) -> np.ndarray:
    """Validate a dense target/residual vector against the ambient dimension."""
    arr = np.asarray(vec, dtype=np.float64)
    if arr.ndim != 1 or arr.shape[0] != d.ambient_dim:
        raise DimensionMismatch(
            f"expected a vector of length {d.ambient_dim}, got shape {arr.shape}"
        )
    if not np.all(np.isfinite(arr)):
        raise ValueError("vector entries must be finite")
    return arr


# ---------------------------------------------------------------------------
# file formats
# ---------------------------------------------------------------------------

def _renormalize_loaded(mat: np.ndarray) -> np.ndarray:
    # Columns already unit within 1e-12 pass through untouched so that a
    # save/load round trip of a normalized dictionary is bit-exact.
    norms = np.linalg.norm(mat, axis=0)
    small = np.flatnonzero(norms < _ZERO_FLOOR)
    if small.size:
        raise ZeroColumn(int(small[0]))
    off = np.abs(norms - 1.0) > NORM_RTOL
    if np.any(off):
        mat = mat.copy()
        mat[:, off] /= norms[off]
    return mat


def save_dictionary(d: Dictionary, path) -> None:
    """Binary format: magic, m and N as u64-LE, then column-major f64-LE atoms."""
    payload = np.asfortranarray(d.atoms, dtype="<f8").tobytes(order="F")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<QQ", d.ambient_dim, d.num_atoms))
        fh.write(payload)


def load_dictionary(path, label: str | None = None) -> Dictionary:
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != _MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}, expected {_MAGIC!r}")
        header = fh.read(16)
        if len(header) != 16:
            raise ValueError(f"{path}: truncated header")
        m, n = struct.unpack("<QQ", header)
        data = fh.read()
    expected = 8 * m * n
    if len(data) != expected:
        raise ValueError(f"{path}: expected {expected} payload bytes, found {len(data)}")
    mat = np.frombuffer(data, dtype="<f8").reshape((m, n), order="F").astype(
        np.float64, copy=True
    )
    mat = _renormalize_loaded(mat)
    return Dictionary(mat, label=label if label is not None else Path(path).stem)


def save_dictionary_csv(d: Dictionary, path) -> None:
    """Text format: one row per ambient dimension, 17 significant digits."""
    with open(path, "w") as fh:
        for row in d.atoms:
            fh.write(",".join(f"{v:.17g}" for v in row))
            fh.write("\n")


def load_dictionary_csv(path, label: str | None = None) -> Dictionary:
    mat = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    mat = _renormalize_loaded(np.asfortranarray(mat))
    return Dictionary(mat, label=label if label is not None else Path(path).stem)


def save_sparse_vector(sv: SparseVector, path) -> None:
    """Text format: one "index,coefficient" line per entry."""
    with open(path, "w") as fh:
        for i, v in zip(sv.support, sv.coefficients):
            fh.write(f"{i},{v:.17g}\n")


def load_sparse_vector(path, dictionary_label: str = "") -> SparseVector:
    indices: list[int] = []
    values: list[float] = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            idx, val = line.split(",")
            indices.append(int(idx))
            values.append(float(val))
    return SparseVector.from_pairs(indices, values, dictionary_label)


def save_vector_csv(vec, path) -> None:
    """Dense vector format: one decimal double per line."""
    arr = np.asarray(vec, dtype=np.float64)
    with open(path, "w") as fh:
        for v in arr:
            fh.write(f"{v:.17g}\n")


def load_vector_csv(path) -> np.ndarray:
    return np.loadtxt(path, dtype=np.float64, ndmin=1)

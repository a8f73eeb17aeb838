"""Shared test fixtures and independent reference implementations.

The reference routines here deliberately use different algorithms than the
package (plain lstsq loops, closed-form 3x3 eigenvalues, hand-rolled pair
scans) so they can serve as oracles for the production code paths.
"""

import itertools

import numpy as np

import greedylab as gl


def eye_dictionary(m: int, label: str = "eye") -> gl.Dictionary:
    return gl.Dictionary(np.eye(m), label=label)


def two_atom(rho: float) -> gl.Dictionary:
    atoms = np.array([[1.0, rho], [0.0, np.sqrt(1.0 - rho * rho)]])
    return gl.Dictionary(atoms, label=f"pair(rho={rho})")


def random_orthonormal(m: int, seed: int) -> gl.Dictionary:
    rng = np.random.default_rng(seed)
    q, _ = np.linalg.qr(rng.standard_normal((m, m)))
    return gl.Dictionary(q, label=f"ortho-m{m}-s{seed}")


def pairwise_coherence_scan(d: gl.Dictionary) -> float:
    """Brute-force max |<phi_i, phi_j>| over all distinct pairs."""
    best = 0.0
    for i in range(d.num_atoms):
        for j in range(i + 1, d.num_atoms):
            best = max(best, abs(float(d.atoms[:, i] @ d.atoms[:, j])))
    return best


def independent_best_n_term(d: gl.Dictionary, f: np.ndarray, order: int):
    """Reference oracle: plain SVD least squares on every size-n support."""
    if order == 0:
        return float(np.linalg.norm(f)), ()
    best = (np.inf, None)
    for support in itertools.combinations(range(d.num_atoms), order):
        sub = d.atoms[:, list(support)]
        coeffs, *_ = np.linalg.lstsq(sub, f, rcond=None)
        resid = float(np.linalg.norm(f - sub @ coeffs))
        if resid < best[0]:
            best = (resid, support)
    return best


def sym3_extreme_eigs(a: np.ndarray):
    """Closed-form extreme eigenvalues of a symmetric 3x3 matrix
    (trigonometric solution of the characteristic polynomial)."""
    p1 = a[0, 1] ** 2 + a[0, 2] ** 2 + a[1, 2] ** 2
    q = (a[0, 0] + a[1, 1] + a[2, 2]) / 3.0
    if p1 == 0.0:
        diag = np.diagonal(a)
        return float(diag.min()), float(diag.max())
    p2 = sum((a[i, i] - q) ** 2 for i in range(3)) + 2.0 * p1
    p = np.sqrt(p2 / 6.0)
    b = (a - q * np.eye(3)) / p
    det_b = (
        b[0, 0] * (b[1, 1] * b[2, 2] - b[1, 2] * b[2, 1])
        - b[0, 1] * (b[1, 0] * b[2, 2] - b[1, 2] * b[2, 0])
        + b[0, 2] * (b[1, 0] * b[2, 1] - b[1, 1] * b[2, 0])
    )
    r = min(1.0, max(-1.0, det_b / 2.0))
    phi = np.arccos(r) / 3.0
    lmax = q + 2.0 * p * np.cos(phi)
    lmin = q + 2.0 * p * np.cos(phi + 2.0 * np.pi / 3.0)
    return float(lmin), float(lmax)


def orthonormal_sigma(d: gl.Dictionary, f: np.ndarray, order: int) -> float:
    """sigma_n on an orthonormal dictionary via sorted coefficient tail sums."""
    coeffs = d.atoms.T @ f
    tail = np.sort(np.abs(coeffs))[::-1][order:]
    return float(np.sqrt(np.sum(tail**2)))

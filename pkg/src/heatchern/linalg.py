"""Dense complex linear-algebra kernels.

Everything downstream (simplex transforms, pairings, sweeps) reduces to the
four operations here: Hermitian eigendecomposition, a general matrix
exponential, Schatten norms, and divided differences of the exponential
evaluated through the exponential of an upper-bidiagonal matrix.  All
functions are pure; inputs are never mutated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadExponent, DimensionMismatch, NotHermitian, Overflow

__all__ = [
    "HermitianEigenSystem",
    "as_matrix",
    "eig_hermitian",
    "expm",
    "opnorm",
    "simplex_exp",
    "schatten_norm",
]

_TAYLOR_THETA = 0.5  # scale target for the Taylor core
_TAYLOR_TERMS = 18  # 0.5^18/18! ~ 6e-22, far below double rounding


def as_matrix(m, name: str = "matrix") -> np.ndarray:
    """Coerce to a square complex128 array and check finiteness."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"{name} must be square, got shape {a.shape}")
    if not np.all(np.isfinite(a.view(float))):
        raise ValueError(f"{name} contains non-finite entries")
    return a


def opnorm(m) -> float:
    """Operator (spectral) norm."""
    return float(np.linalg.norm(np.asarray(m, dtype=complex), 2))


@dataclass
class HermitianEigenSystem:
    """Ascending eigenvalues and a unitary matrix of column eigenvectors."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def eig_hermitian(m, tol: float = 1e-10) -> HermitianEigenSystem:
    """Eigendecomposition of a Hermitian matrix.

    Raises NotHermitian when the relative asymmetry exceeds ``tol``; the
    message reports the worst offending entry.
    """
    a = as_matrix(m)
    scale = max(opnorm(a), 1e-300)
    dev = np.abs(a - a.conj().T)
    i, j = np.unravel_index(int(np.argmax(dev)), dev.shape)
    if dev[i, j] > tol * scale:
        raise NotHermitian(
            f"entry ({i},{j}) deviates from Hermitian symmetry by "
            f"{dev[i, j]:.3e} (tolerance {tol * scale:.3e})"
        )
    w, v = np.linalg.eigh(a)
    return HermitianEigenSystem(eigenvalues=w, eigenvectors=v)


def expm(m, norm_cap: float = 1e3) -> np.ndarray:
    """Matrix exponential by scaling and squaring with a Taylor core.

    Accurate to ~1e-13 relative for inputs of 1-norm up to a few tens.
    Raises Overflow when the 1-norm exceeds ``norm_cap``.
    """
    a = as_matrix(m)
    nrm = float(np.linalg.norm(a, 1))
    if nrm > norm_cap:
        raise Overflow(f"matrix 1-norm {nrm:.3e} exceeds cap {norm_cap:.3e}")
    if nrm == 0.0:
        return np.eye(a.shape[0], dtype=complex)
    s = max(0, int(np.ceil(np.log2(nrm / _TAYLOR_THETA))))
    x = a / (2.0**s)
    n = a.shape[0]
    ident = np.eye(n, dtype=complex)
    out = ident + x / _TAYLOR_TERMS
    for k in range(_TAYLOR_TERMS - 1, 0, -1):
        out = ident + (x @ out) / k
    for _ in range(s):
        out = out @ out
    return out


def simplex_exp(points, beta: float = 1.0) -> float:
    """Integral of exp(-sum s_j lambda_j) over the scaled simplex.

    The integration region is the set of nonnegative s with
    s_0 + ... + s_n = beta, carrying the measure of total mass beta^n/n!.
    Evaluated exactly as beta^n times the (0, n) entry of the exponential
    of the upper-bidiagonal matrix with -beta*points on the diagonal and
    ones on the superdiagonal (confluent divided differences), which is
    stable under coincident points.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 1 or pts.size == 0:
        raise DimensionMismatch("points must be a nonempty 1-d real vector")
    if not np.all(np.isfinite(pts)):
        raise ValueError("points contain non-finite entries")
    if not (beta > 0):
        raise BadExponent(f"beta must be positive, got {beta}")
    n = pts.size - 1
    if n == 0:
        return float(np.exp(-beta * pts[0]))
    # Shift by the minimum to keep the exponential well-scaled; the shift
    # factors out of every divided difference.
    shift = float(pts.min())
    b = np.diag(-beta * (pts - shift)).astype(complex) + np.diag(
        np.ones(n), 1
    )
    val = expm(b, norm_cap=np.inf)[0, n].real
    return float(beta**n * np.exp(-beta * shift) * val)


def schatten_norm(m, p) -> float:
    """Schatten p-norm (sum of singular values to the p-th power)^(1/p).

    p = inf gives the operator norm; p = 1 the trace norm.
    """
    a = as_matrix(m)
    if p != np.inf and p < 1:
        raise BadExponent(f"Schatten exponent must be >= 1, got {p}")
    sv = np.linalg.svd(a, compute_uv=False)
    if p == np.inf:
        return float(sv[0]) if sv.size else 0.0
    return float(np.sum(sv**p) ** (1.0 / p))

"""Graded spectral data: validation, derivatives, and norm diagnostics.

A triple bundles a Hermitian generator Q, a grading gamma, and a finite
list of symmetry unitaries on a finite-dimensional space.  Fractional
smoothness enters through operator norms between the scales of (Q^2+I):
``sobolev_norm`` measures a transformation between two such scales, and
``interpolation_norm`` combines the plain norm of an element with the
smoothed norm of its derivative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate

from .errors import BadExponent, DimensionMismatch, NotHermitian, ValidationFailure
from .linalg import as_matrix, eig_hermitian, opnorm

__all__ = [
    "CheckResult",
    "ValidationReport",
    "SpectralTriple",
    "AlgebraElement",
    "VertexType",
    "RegularityReport",
    "KatoCurve",
    "validate_triple",
    "derivative",
    "sobolev_norm",
    "interpolation_norm",
    "numeric_c_mu",
    "algebraic_singular_integral",
    "regularity_exponents",
    "kato_constants",
]


@dataclass
class CheckResult:
    name: str
    residual: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.residual <= self.tol

    def __str__(self):
        mark = "ok" if self.passed else "FAIL"
        return f"[{mark}] {self.name}: residual {self.residual:.3e} (tol {self.tol:.3e})"


@dataclass
class ValidationReport:
    checks: list[CheckResult] = field(default_factory=list)

    def add(self, name: str, residual: float, tol: float):
        self.checks.append(CheckResult(name, float(residual), float(tol)))

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def __str__(self):
        return "\n".join(str(c) for c in self.checks)


@dataclass(eq=False)
class SpectralTriple:
    """Finite-dimensional bundle {H, Q, gamma, U(g), A}.

    ``group`` is an ordered list of unitaries whose first element must be
    the identity.  Matrices are treated as immutable once the triple is
    built; the eigendecomposition of Q^2 is computed once and cached.
    """

    dim: int
    Q: np.ndarray
    gamma: np.ndarray
    group: list[np.ndarray]
    tol: float = 1e-10

    def __post_init__(self):
        self.Q = as_matrix(self.Q, "Q")
        self.gamma = as_matrix(self.gamma, "gamma")
        self.group = [as_matrix(u, f"group[{k}]") for k, u in enumerate(self.group)]
        for name, m in [("Q", self.Q), ("gamma", self.gamma)] + [
            (f"group[{k}]", u) for k, u in enumerate(self.group)
        ]:
            if m.shape != (self.dim, self.dim):
                raise DimensionMismatch(
                    f"{name} has shape {m.shape}, expected ({self.dim}, {self.dim})"
                )
        self._heat = None
        self._engine = None

    def heat_data(self):
        """Cached eigendecomposition (eigenvalues, eigenvectors) of Q^2."""
        if self._heat is None:
            es = eig_hermitian(self.Q @ self.Q, tol=1e-8)
            self._heat = (es.eigenvalues, es.eigenvectors)
        return self._heat

    def unitary(self, g: int) -> np.ndarray:
        return self.group[g]

    def conj_group_inv(self, a: np.ndarray, g: int) -> np.ndarray:
        """a^{g^{-1}} = U(g)* a U(g)."""
        u = self.group[g]
        return u.conj().T @ a @ u

    def conj_gamma(self, a: np.ndarray) -> np.ndarray:
        return self.gamma @ a @ self.gamma

    def heat_trace(self, g: int = 0, s: float = 1.0) -> complex:
        """Tr(gamma U(g) e^{-s Q^2})."""
        lam, v = self.heat_data()
        w = self.gamma @ self.group[g]
        we = v.conj().T @ w @ v
        return complex(np.sum(np.diag(we) * np.exp(-s * lam)))


def validate_triple(t: SpectralTriple) -> ValidationReport:
    """Check every structural invariant; each failure is named with its residual."""
    rep = ValidationReport()
    tol = t.tol
    ident = np.eye(t.dim)
    sq = max(opnorm(t.Q), 1.0)
    rep.add("Q hermitian", opnorm(t.Q - t.Q.conj().T) / sq, tol)
    rep.add("gamma hermitian", opnorm(t.gamma - t.gamma.conj().T), tol)
    rep.add("gamma^2 = I", opnorm(t.gamma @ t.gamma - ident), tol)
    rep.add("Q gamma + gamma Q = 0", opnorm(t.Q @ t.gamma + t.gamma @ t.Q), tol)
    rep.add("group[0] = I", opnorm(t.group[0] - ident), tol)
    for k, u in enumerate(t.group):
        rep.add(f"group[{k}] unitary", opnorm(u.conj().T @ u - ident), tol)
        rep.add(f"group[{k}] commutes with gamma", opnorm(u @ t.gamma - t.gamma @ u), tol)
        rep.add(f"group[{k}] commutes with Q", opnorm(u @ t.Q - t.Q @ u), tol)
    return rep


def derivative(t: SpectralTriple, b) -> np.ndarray:
    """Graded derivative db = Q b - gamma b gamma Q.

    For gamma-even b this is the commutator [Q, b].
    """
    bm = as_matrix(b, "b")
    if bm.shape != t.Q.shape:
        raise DimensionMismatch(f"operand shape {bm.shape} != {t.Q.shape}")
    return t.Q @ bm - t.gamma @ bm @ t.gamma @ t.Q


@dataclass(frozen=True)
class VertexType:
    """Smoothing orders (beta, alpha) attached to a vertex."""

    beta: float = 0.0
    alpha: float = 0.0

    def __post_init__(self):
        if self.beta < 0 or self.alpha < 0:
            raise BadExponent(f"vertex type must be nonnegative, got {self}")


@dataclass
class AlgebraElement:
    """A gamma-even operator with a label, the basic observable."""

    matrix: np.ndarray
    label: str = ""

    def __post_init__(self):
        self.matrix = as_matrix(self.matrix, "algebra element")

    def validate(self, t: SpectralTriple) -> ValidationReport:
        rep = ValidationReport()
        rep.add(
            f"{self.label or 'element'} gamma-even",
            opnorm(t.conj_gamma(self.matrix) - self.matrix),
            t.tol,
        )
        return rep


def sobolev_norm(t: SpectralTriple, x, p2: float, p1: float) -> float:
    """Norm of x as a map between the (Q^2+I)-scales p1 -> p2.

    Returns ||(Q^2+I)^{p2/2} x (Q^2+I)^{-p1/2}|| computed in the eigenbasis
    of Q^2.
    """
    xm = as_matrix(x, "x")
    if xm.shape != t.Q.shape:
        raise DimensionMismatch(f"operand shape {xm.shape} != {t.Q.shape}")
    lam, v = t.heat_data()
    w = lam + 1.0
    xe = v.conj().T @ xm @ v
    scaled = (w ** (p2 / 2.0))[:, None] * xe * (w ** (-p1 / 2.0))[None, :]
    return opnorm(scaled)


def interpolation_norm(t: SpectralTriple, a: AlgebraElement, vt: VertexType) -> float:
    """||a|| + c_{alpha+beta} ||(Q^2+I)^{-beta/2} (da) (Q^2+I)^{-alpha/2}||."""
    mu = vt.alpha + vt.beta
    if mu >= 1:
        raise BadExponent(f"alpha + beta must be < 1, got {mu}")
    da = derivative(t, a.matrix)
    return opnorm(a.matrix) + numeric_c_mu(mu) * sobolev_norm(t, da, -vt.beta, vt.alpha)


def algebraic_singular_integral(f, a_pow: float, b_pow: float) -> float:
    """Adaptive quadrature of f(u) * u^a_pow * (1-u)^b_pow over (0, 1).

    This is the engine behind ``numeric_c_mu``: integrals over t in
    (0, inf) with algebraic behaviour at both ends are brought to this
    form by the substitution t = u/(1-u).  Requires a_pow, b_pow > -1.
    """
    if a_pow <= -1 or b_pow <= -1:
        raise BadExponent(f"powers must exceed -1, got ({a_pow}, {b_pow})")
    val, _ = integrate.quad(
        f, 0.0, 1.0, weight="alg", wvar=(a_pow, b_pow), epsabs=0.0, epsrel=1e-12,
        limit=200,
    )
    return float(val)


def _c_mu_inner(delta: float, mu: float) -> float:
    # 2*delta * int_0^inf (1+1/t)^{delta/2} (1+t)^{-1-(1-mu)/2} dt; under
    # t = u/(1-u) the integrand becomes u^{-delta/2} (1-u)^{(1-mu)/2 - 1}.
    if delta == 0.0:
        return 0.0
    return 2.0 * delta * algebraic_singular_integral(
        lambda u: 1.0, -delta / 2.0, (1.0 - mu) / 2.0 - 1.0
    )


@lru_cache(maxsize=256)
def numeric_c_mu(mu: float) -> float:
    """sup over delta in [0,1] of the smoothing constant integral at mu.

    Coarse grid plus golden-section refinement; relative accuracy ~1e-8.
    """
    if not (0.0 <= mu < 1.0):
        raise BadExponent(f"mu must lie in [0, 1), got {mu}")
    grid = np.linspace(0.0, 1.0, 33)
    vals = [_c_mu_inner(d, mu) for d in grid]
    k = int(np.argmax(vals))
    lo = grid[max(k - 1, 0)]
    hi = grid[min(k + 1, len(grid) - 1)]
    phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    x1 = b - phi * (b - a)
    x2 = a + phi * (b - a)
    f1, f2 = _c_mu_inner(x1, mu), _c_mu_inner(x2, mu)
    while b - a > 1e-10:
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + phi * (b - a)
            f2 = _c_mu_inner(x2, mu)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - phi * (b - a)
            f1 = _c_mu_inner(x1, mu)
    return max(max(vals), f1, f2)


@dataclass
class RegularityReport:
    etas: list[float]
    eta_local: float
    eta_global: float
    regular: bool


def regularity_exponents(types: list[VertexType]) -> RegularityReport:
    """Per-position exponents eta_j = 1 - (alpha_j + beta_{j+1})/2.

    The last beta wraps around to the first vertex.  The set is regular
    iff every eta_j is positive.
    """
    if not types:
        raise DimensionMismatch("need at least one vertex type")
    n1 = len(types)
    etas = [
        1.0 - 0.5 * (types[j].alpha + types[(j + 1) % n1].beta) for j in range(n1)
    ]
    eta_local = min(etas)
    eta_global = sum(etas) / n1
    return RegularityReport(etas, eta_local, eta_global, all(e > 0 for e in etas))


@dataclass
class KatoCurve:
    """Minimal relative bounds a(M) for q^2 <= a^2 Q^2 + M^2."""

    points: list[tuple[float, float]]

    @property
    def achievable_below_one(self) -> bool:
        return any(math.isfinite(a) and a < 1.0 for _, a in self.points)

    def a_at(self, m_value: float) -> float:
        for m, a in self.points:
            if abs(m - m_value) < 1e-12:
                return a
        raise KeyError(f"M = {m_value} not on the grid")


def kato_constants(
    t: SpectralTriple, q, m_grid=None, bisect_tol: float = 1e-8
) -> KatoCurve:
    """Minimal a(M) with q^2 - a^2 Q^2 - M^2 I negative semidefinite.

    The default grid is M in {0, 1/4, 1/2, ..., 4} times ||q||.  Points
    where no finite a works (q^2 has weight on ker Q^2 exceeding M^2)
    carry a = inf.
    """
    qm = as_matrix(q, "q")
    if qm.shape != t.Q.shape:
        raise DimensionMismatch(f"q shape {qm.shape} != {t.Q.shape}")
    dev = opnorm(qm - qm.conj().T)
    if dev > t.tol * max(opnorm(qm), 1.0):
        raise NotHermitian(f"q deviates from Hermitian by {dev:.3e}")
    qn = opnorm(qm)
    if m_grid is None:
        m_grid = [0.25 * k * qn for k in range(17)] if qn > 0 else [0.0]
    q2 = qm @ qm
    qsq = t.Q @ t.Q
    scale = max(opnorm(q2), 1.0)
    slack = 1e-12 * scale

    def psd_ok(a: float, m: float) -> bool:
        gap = a * a * qsq + (m * m) * np.eye(t.dim) - q2
        w = np.linalg.eigvalsh((gap + gap.conj().T) / 2.0)
        return w[0] >= -slack

    points = []
    for m in m_grid:
        if psd_ok(0.0, m):
            points.append((float(m), 0.0))
            continue
        hi = 1.0
        while not psd_ok(hi, m) and hi < 2.0**30:
            hi *= 2.0
        if not psd_ok(hi, m):
            points.append((float(m), math.inf))
            continue
        # tolerance is relative once the answer is large (near-kernel
        # couplings can push the minimal a to astronomical values)
        lo = 0.0
        for _ in range(120):
            if hi - lo <= bisect_tol * max(1.0, lo):
                break
            mid = 0.5 * (lo + hi)
            if psd_ok(mid, m):
                hi = mid
            else:
                lo = mid
        points.append((float(m), hi))
    return KatoCurve(points)


def require_valid(t: SpectralTriple) -> SpectralTriple:
    rep = validate_triple(t)
    if not rep.passed:
        raise ValidationFailure(
            "triple fails validation:\n" + "\n".join(str(c) for c in rep.failures),
            report=rep,
        )
    return t

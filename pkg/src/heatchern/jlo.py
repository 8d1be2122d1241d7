"""The heat-kernel character, its generating functional, and the pairing.

The character has components tau_n(a_0..a_n;g) = <a_0, da_1, ..., da_n;g>.
Pairing it with a square root of unity has two routes: the weighted level
series with coefficients (-1/4)^n (2n)!/n!, and the Gaussian transform of
the generating functional J(t;a) = Tr(gamma U(g) a exp(-Q^2 + i t da))
evaluated by Gauss-Hermite quadrature.  The quadrature is the reference;
the series is the cross-check.

A beta-plane variant rescales the simplex: components carry beta^{-n/2}
so that the beta-plane character coincides with the plane-1 character of
sqrt(beta) Q, which keeps it a cocycle and its pairing beta-independent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cochains import Cochain
from .errors import (
    DimensionMismatch,
    NoConvergence,
    PairingInputInvalid,
    ValidationFailure,
)
from .expectations import HeatEngine, expectation_value
from .linalg import as_matrix, expm, opnorm
from .triples import SpectralTriple, ValidationReport, derivative

__all__ = [
    "PairingInput",
    "PairingResult",
    "pairing_coefficient",
    "jlo_component",
    "jlo_cochain",
    "generating_functional",
    "pairing_series",
    "pairing_gaussian",
    "pairing",
    "equivariant_index",
    "coboundary_pairing_residual",
    "involution_from_idempotent",
    "gauss_hermite_transform",
]


def pairing_coefficient(n: int) -> float:
    """Series weight (-1/4)^n (2n)!/n! on the level-2n component."""
    return (-0.25) ** n * math.factorial(2 * n) / math.factorial(n)


def involution_from_idempotent(p) -> np.ndarray:
    """The square root of unity a = 2p - I attached to an idempotent p."""
    pm = as_matrix(p, "p")
    return 2.0 * pm - np.eye(pm.shape[0], dtype=complex)


@dataclass
class PairingInput:
    """A candidate a in Mat_m over the algebra with a^2 = I.

    ``a`` is an (m*dim) x (m*dim) matrix; m = 1 is the scalar case.  The
    invariants (square root of unity, gamma-even, group-invariant) are
    checked by ``validate`` against a triple.
    """

    a: np.ndarray
    m: int = 1
    g: int = 0

    def __post_init__(self):
        self.a = as_matrix(self.a, "a")

    def validate(self, t: SpectralTriple) -> ValidationReport:
        rep = ValidationReport()
        big = self.a.shape[0]
        if big != self.m * t.dim:
            raise DimensionMismatch(
                f"a is {big}x{big}, expected m*dim = {self.m * t.dim}"
            )
        ident = np.eye(big)
        gam = np.kron(np.eye(self.m), t.gamma)
        rep.add("a^2 = I", opnorm(self.a @ self.a - ident), t.tol)
        rep.add("gamma a gamma = a", opnorm(gam @ self.a @ gam - self.a), t.tol)
        for k, u in enumerate(t.group):
            ub = np.kron(np.eye(self.m), u)
            rep.add(
                f"a commutes with group[{k}]",
                opnorm(ub @ self.a - self.a @ ub),
                t.tol,
            )
        return rep


def _require_valid_input(t: SpectralTriple, inp: PairingInput):
    rep = inp.validate(t)
    if not rep.passed:
        raise PairingInputInvalid(
            "pairing input fails preconditions:\n"
            + "\n".join(str(c) for c in rep.failures),
            report=rep,
        )


def _blocked_triple(t: SpectralTriple, m: int) -> SpectralTriple:
    if m == 1:
        return t
    em = np.eye(m)
    return SpectralTriple(
        dim=m * t.dim,
        Q=np.kron(em, t.Q),
        gamma=np.kron(em, t.gamma),
        group=[np.kron(em, u) for u in t.group],
        tol=t.tol,
    )


@dataclass
class PairingResult:
    value: complex
    series_value: complex
    quadrature_value: complex
    truncation_level: int
    tail_bound: float
    connes_value: complex


def _check_even(t: SpectralTriple, mats):
    for k, a in enumerate(mats):
        if opnorm(t.conj_gamma(a) - a) > t.tol * max(opnorm(a), 1.0):
            raise ValidationFailure(f"argument {k} is not gamma-even")


def jlo_component(
    t: SpectralTriple,
    n: int,
    a_list,
    g: int = 0,
    beta_plane: float = 1.0,
    check_even: bool = True,
) -> complex:
    """tau_n(a_0..a_n;g) = beta^{-n/2} <a_0, da_1, ..., da_n; g> on the beta-plane."""
    mats = [m.matrix if hasattr(m, "matrix") else as_matrix(m) for m in a_list]
    if len(mats) != n + 1:
        raise DimensionMismatch(f"level {n} needs {n + 1} elements, got {len(mats)}")
    if check_even:
        _check_even(t, mats)
    verts = [mats[0]] + [derivative(t, a) for a in mats[1:]]
    val = expectation_value(t, verts, g, beta=beta_plane)
    return beta_plane ** (-n / 2.0) * val


def jlo_cochain(t: SpectralTriple, beta_plane: float = 1.0, max_level: int = 32) -> Cochain:
    """The character packaged as an even class-C cochain."""

    def ev(n, mats, g):
        return jlo_component(t, n, mats, g, beta_plane=beta_plane, check_even=False)

    return Cochain(ev, t.group, max_level, "even", "C")


def _blocked_data(t: SpectralTriple, inp: PairingInput, beta_plane: float):
    tb = _blocked_triple(t, inp.m)
    scale = math.sqrt(beta_plane)
    qb = scale * tb.Q
    da = qb @ inp.a - tb.gamma @ inp.a @ tb.gamma @ qb
    front = tb.gamma @ tb.group[inp.g] @ inp.a
    return tb, qb, da, front


def generating_functional(t: SpectralTriple, inp: PairingInput, z: complex) -> complex:
    """J(z;a) = Tr(gamma U(g) a exp(-Q^2 + i z da)), block-traced for m > 1."""
    _require_valid_input(t, inp)
    tb, qb, da, front = _blocked_data(t, inp, 1.0)
    return complex(np.trace(front @ expm(-(qb @ qb) + 1j * z * da)))


def gauss_hermite_transform(
    f, quad_nodes: int = 64, tol: float = 1e-10, node_cap: int = 1024
) -> complex:
    """(1/sqrt(pi)) integral of e^{-t^2} f(t), with node doubling to ``tol``.

    Raises NoConvergence if successive doublings never stabilize below
    ``tol`` before the cap.
    """
    if quad_nodes < 20:
        raise ValueError("quad_nodes must be at least 20")
    prev = None
    nodes = quad_nodes
    while nodes <= node_cap:
        ts, ws = np.polynomial.hermite.hermgauss(nodes)
        val = sum(w * f(tt) for tt, w in zip(ts, ws)) / math.sqrt(math.pi)
        if prev is not None and abs(val - prev) < tol:
            return val
        prev = val
        nodes *= 2
    raise NoConvergence(
        f"Gauss-Hermite transform did not stabilize below {tol} within {node_cap} nodes"
    )


def pairing_gaussian(
    t: SpectralTriple,
    inp: PairingInput,
    quad_nodes: int = 64,
    tol: float = 1e-10,
    beta_plane: float = 1.0,
    node_cap: int = 1024,
) -> complex:
    """Gaussian transform of the generating functional at the origin."""
    _require_valid_input(t, inp)
    tb, qb, da, front = _blocked_data(t, inp, beta_plane)
    h = qb @ qb

    def j_of_t(tt):
        return complex(np.trace(front @ expm(-h + 1j * tt * da)))

    return gauss_hermite_transform(j_of_t, quad_nodes, tol, node_cap)


def pairing_series(
    t: SpectralTriple,
    inp: PairingInput,
    max_level: int = 32,
    tol: float = 1e-12,
    beta_plane: float = 1.0,
) -> tuple[complex, int, float]:
    """Partial sums of the weighted level series.

    Stops when a term falls below ``tol``; raises NoConvergence if the
    terms are still growing at ``max_level``.  The tail bound extrapolates
    the sampled geometric decay and is reported, not guaranteed.
    """
    _require_valid_input(t, inp)
    tb = _blocked_triple(t, inp.m)
    da = tb.Q @ inp.a - tb.gamma @ inp.a @ tb.gamma @ tb.Q
    front = tb.gamma @ tb.group[inp.g] @ inp.a
    def term_gen():
        it = HeatEngine.for_triple(tb).repeated_series_iter(front, da, beta=beta_plane)
        for n, raw in enumerate(it):
            if n > max_level:
                return
            if n % 2 == 0:
                k = n // 2
                yield pairing_coefficient(k) * beta_plane ** (-k) * raw

    return _sum_series(term_gen(), max_level, tol)


def _sum_series(terms, max_level: int, tol: float) -> tuple[complex, int, float]:
    total = 0.0 + 0.0j
    prev_mag = None
    last_ratio = None
    trunc = 0
    converged = False
    for k, term in enumerate(terms):
        total += term
        mag = abs(term)
        if prev_mag is not None and prev_mag > 0:
            last_ratio = mag / prev_mag
        prev_mag = mag
        trunc = 2 * k
        if mag < tol:
            converged = True
            break
    if not converged and prev_mag is not None and prev_mag > tol and (
        last_ratio is None or last_ratio >= 1.0
    ):
        raise NoConvergence(f"series terms not decreasing by level {max_level}")
    if prev_mag is None or prev_mag < tol:
        tail = prev_mag if prev_mag is not None else 0.0
    elif last_ratio is not None and last_ratio < 1.0:
        tail = prev_mag * last_ratio / (1.0 - last_ratio)
    else:
        tail = math.inf
    return total, trunc, float(tail)


def equivariant_index(t: SpectralTriple, g: int = 0) -> complex:
    """Tr(gamma U(g) e^{-Q^2}), the a = I value of the pairing."""
    return t.heat_trace(g)


def pairing(
    t: SpectralTriple,
    inp: PairingInput,
    quad_nodes: int = 64,
    max_level: int = 32,
    tol: float = 1e-10,
    beta_plane: float = 1.0,
) -> PairingResult:
    """Both routes to the pairing, with the quadrature as the reference.

    ``connes_value`` is the idempotent-form average (pairing + index)/2
    under a = 2p - I.
    """
    quad = pairing_gaussian(t, inp, quad_nodes=quad_nodes, tol=tol, beta_plane=beta_plane)
    series, trunc, tail = pairing_series(
        t, inp, max_level=max_level, tol=min(tol, 1e-12), beta_plane=beta_plane
    )
    tb = _blocked_triple(t, inp.m)
    index = equivariant_index(tb, inp.g)
    return PairingResult(
        value=quad,
        series_value=series,
        quadrature_value=quad,
        truncation_level=trunc,
        tail_bound=tail,
        connes_value=(quad + index) / 2.0,
    )


def coboundary_pairing_residual(
    t: SpectralTriple,
    cochain: Cochain,
    inp: PairingInput,
    max_level: int = 10,
) -> float:
    """|series pairing of (b + B) applied to the cochain| with a scalar input.

    For m > 1 the block sum over matrix entries is carried out literally,
    which costs m^{2n+1} evaluations per level; keep m small.
    """
    from .cochains import op_partial

    _require_valid_input(t, inp)
    pf = op_partial(cochain)
    d = t.dim
    total = 0.0 + 0.0j
    for k in range(0, max_level // 2 + 1):
        n = 2 * k
        if n > pf.max_level:
            break
        coeff = pairing_coefficient(k)
        if inp.m == 1:
            total += coeff * pf(n, (inp.a,) * (n + 1), inp.g)
            continue
        blocks = [
            [inp.a[i * d : (i + 1) * d, j * d : (j + 1) * d] for j in range(inp.m)]
            for i in range(inp.m)
        ]
        for flat in range(inp.m ** (n + 1)):
            idx = []
            rem = flat
            for _ in range(n + 1):
                idx.append(rem % inp.m)
                rem //= inp.m
            mats = tuple(
                blocks[idx[j]][idx[(j + 1) % (n + 1)]] for j in range(n + 1)
            )
            total += coeff * pf(n, mats, inp.g)
    return abs(total)

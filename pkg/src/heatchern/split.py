"""Split generators Q = (Q1 + Q2)/sqrt(2) and their invariants.

Independence means Q1 and Q2 anticommute, so the Hamiltonian splits as
H = Q^2 = (Q1^2 + Q2^2)/2 and the momentum P = (Q1^2 - Q2^2)/2 commutes
with H, with joint spectrum in the cone |P| <= H.  The symmetry group is
only required to commute with Q1 and with Q2^2, so the character is built
from the partial derivative d1 = [Q1, .] on the zero-momentum algebra
(elements commuting with P).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatch,
    PNotFixed,
    ValidationFailure,
    ZeroMomentumViolation,
)
from .expectations import HeatEngine
from .homotopy import DeformationFamily, SweepTable, regularity_report
from .jlo import (
    PairingInput,
    PairingResult,
    gauss_hermite_transform,
    pairing_coefficient,
)
from .linalg import as_matrix, eig_hermitian, expm, opnorm
from .triples import SpectralTriple, ValidationReport

__all__ = [
    "SplitTriple",
    "SplitAlgebraElement",
    "validate_split",
    "d1",
    "split_jlo_component",
    "split_pairing",
    "coupling_sweep",
    "build_n2_susy_example",
]


@dataclass(eq=False)
class SplitTriple:
    """Two independent Hermitian generators with a common grading and group."""

    dim: int
    Q1: np.ndarray
    Q2: np.ndarray
    gamma: np.ndarray
    group: list[np.ndarray]
    tol: float = 1e-10

    def __post_init__(self):
        self.Q1 = as_matrix(self.Q1, "Q1")
        self.Q2 = as_matrix(self.Q2, "Q2")
        self.gamma = as_matrix(self.gamma, "gamma")
        self.group = [as_matrix(u, f"group[{k}]") for k, u in enumerate(self.group)]
        for name, m in [("Q1", self.Q1), ("Q2", self.Q2), ("gamma", self.gamma)] + [
            (f"group[{k}]", u) for k, u in enumerate(self.group)
        ]:
            if m.shape != (self.dim, self.dim):
                raise DimensionMismatch(
                    f"{name} has shape {m.shape}, expected ({self.dim}, {self.dim})"
                )
        self._engine = None

    @property
    def Q(self) -> np.ndarray:
        return (self.Q1 + self.Q2) / math.sqrt(2.0)

    @property
    def hamiltonian(self) -> np.ndarray:
        return (self.Q1 @ self.Q1 + self.Q2 @ self.Q2) / 2.0

    @property
    def momentum(self) -> np.ndarray:
        return (self.Q1 @ self.Q1 - self.Q2 @ self.Q2) / 2.0

    def conj_gamma(self, a: np.ndarray) -> np.ndarray:
        return self.gamma @ a @ self.gamma

    def engine(self) -> HeatEngine:
        if self._engine is None:
            es = eig_hermitian(self.hamiltonian, tol=1e-8)
            self._engine = HeatEngine(es.eigenvalues, es.eigenvectors)
        return self._engine

    def heat_trace(self, g: int = 0) -> complex:
        eng = self.engine()
        w = eng.to_eigenbasis(self.gamma @ self.group[g])
        return complex(np.sum(np.diag(w) * np.exp(-eng.lam)))


@dataclass
class SplitAlgebraElement:
    """A gamma-even zero-momentum observable."""

    matrix: np.ndarray
    label: str = ""

    def __post_init__(self):
        self.matrix = as_matrix(self.matrix, "split algebra element")

    def validate(self, s: SplitTriple) -> ValidationReport:
        rep = ValidationReport()
        m = self.matrix
        rep.add(
            f"{self.label or 'element'} gamma-even",
            opnorm(s.conj_gamma(m) - m),
            s.tol,
        )
        p = s.momentum
        rep.add(
            f"{self.label or 'element'} zero-momentum",
            opnorm(p @ m - m @ p),
            s.tol,
        )
        return rep


def validate_split(s: SplitTriple) -> ValidationReport:
    """All structural invariants of the splitting, with residuals."""
    rep = ValidationReport()
    tol = s.tol
    ident = np.eye(s.dim)
    rep.add("Q1 hermitian", opnorm(s.Q1 - s.Q1.conj().T), tol)
    rep.add("Q2 hermitian", opnorm(s.Q2 - s.Q2.conj().T), tol)
    rep.add("gamma hermitian", opnorm(s.gamma - s.gamma.conj().T), tol)
    rep.add("gamma^2 = I", opnorm(s.gamma @ s.gamma - ident), tol)
    rep.add(
        "independence Q1 Q2 + Q2 Q1 = 0",
        opnorm(s.Q1 @ s.Q2 + s.Q2 @ s.Q1),
        tol,
    )
    for name, qj in [("Q1", s.Q1), ("Q2", s.Q2)]:
        rep.add(
            f"{name} gamma + gamma {name} = 0",
            opnorm(qj @ s.gamma + s.gamma @ qj),
            tol,
        )
    rep.add("group[0] = I", opnorm(s.group[0] - ident), tol)
    q2sq = s.Q2 @ s.Q2
    for k, u in enumerate(s.group):
        rep.add(f"group[{k}] unitary", opnorm(u.conj().T @ u - ident), tol)
        rep.add(
            f"group[{k}] commutes with gamma",
            opnorm(u @ s.gamma - s.gamma @ u),
            tol,
        )
        rep.add(
            f"group[{k}] commutes with Q1",
            opnorm(u @ s.Q1 - s.Q1 @ u),
            tol,
        )
        rep.add(
            f"group[{k}] commutes with Q2^2",
            opnorm(u @ q2sq - q2sq @ u),
            tol,
        )
    q = s.Q
    rep.add(
        "Q^2 = (Q1^2 + Q2^2)/2",
        opnorm(q @ q - s.hamiltonian),
        tol * max(opnorm(s.hamiltonian), 1.0),
    )
    h, p = s.hamiltonian, s.momentum
    for sign, name in [(1.0, "H + P"), (-1.0, "H - P")]:
        m = h + sign * p
        w = np.linalg.eigvalsh((m + m.conj().T) / 2.0)
        rep.add(f"spectral cone {name} >= 0", max(0.0, -float(w[0])), tol)
    return rep


def require_valid_split(s: SplitTriple) -> SplitTriple:
    rep = validate_split(s)
    if not rep.passed:
        raise ValidationFailure(
            "split triple fails validation:\n"
            + "\n".join(str(c) for c in rep.failures),
            report=rep,
        )
    return s


def zero_momentum_project(s: SplitTriple, m) -> np.ndarray:
    """Project onto the commutant of P by killing cross-sector blocks."""
    mm = as_matrix(m, "m")
    es = eig_hermitian(s.momentum, tol=1e-8)
    w, v = es.eigenvalues, es.eigenvectors
    me = v.conj().T @ mm @ v
    same = np.abs(w[:, None] - w[None, :]) < 1e-10 * max(abs(w[0]), abs(w[-1]), 1.0)
    return v @ (me * same) @ v.conj().T


def d1(s: SplitTriple, a) -> np.ndarray:
    """The partial derivative [Q1, a]."""
    am = as_matrix(a, "a")
    if am.shape != s.Q1.shape:
        raise DimensionMismatch(f"operand shape {am.shape} != {s.Q1.shape}")
    return s.Q1 @ am - am @ s.Q1


def _check_zero_momentum(s: SplitTriple, mats):
    p = s.momentum
    for k, a in enumerate(mats):
        r = opnorm(p @ a - a @ p)
        if r > s.tol * max(opnorm(a), 1.0):
            raise ZeroMomentumViolation(
                f"argument {k} fails [P, a] = 0 with residual {r:.3e}"
            )


def split_jlo_component(s: SplitTriple, n: int, a_list, g: int = 0) -> complex:
    """tau_n = <a_0, d1 a_1, ..., d1 a_n; g> with heat kernels of H."""
    mats = [m.matrix if hasattr(m, "matrix") else as_matrix(m) for m in a_list]
    if len(mats) != n + 1:
        raise DimensionMismatch(f"level {n} needs {n + 1} elements, got {len(mats)}")
    _check_zero_momentum(s, mats)
    for k, a in enumerate(mats):
        if opnorm(s.conj_gamma(a) - a) > s.tol * max(opnorm(a), 1.0):
            raise ValidationFailure(f"argument {k} is not gamma-even")
    verts = [mats[0]] + [d1(s, a) for a in mats[1:]]
    front = s.gamma @ s.group[g] @ verts[0]
    val, _ = s.engine().exact(front, verts[1:])
    return val


def split_jlo_cochain(s: SplitTriple, max_level: int = 32):
    """The split character as an even class-C cochain."""
    from .cochains import Cochain

    def ev(n, mats, g):
        verts = [mats[0]] + [d1(s, a) for a in mats[1:]]
        front = s.gamma @ s.group[g] @ verts[0]
        val, _ = s.engine().exact(front, verts[1:])
        return val

    return Cochain(ev, s.group, max_level, "even", "C")


def _split_pairing_validate(s: SplitTriple, inp: PairingInput):
    if inp.m != 1:
        raise DimensionMismatch("split pairing supports scalar inputs (m = 1)")
    a = inp.a
    rep = ValidationReport()
    ident = np.eye(s.dim)
    rep.add("a^2 = I", opnorm(a @ a - ident), s.tol)
    rep.add("gamma a gamma = a", opnorm(s.conj_gamma(a) - a), s.tol)
    p = s.momentum
    rep.add("zero momentum [P, a] = 0", opnorm(p @ a - a @ p), s.tol)
    for k, u in enumerate(s.group):
        rep.add(f"a commutes with group[{k}]", opnorm(u @ a - a @ u), s.tol)
    if not rep.passed:
        raise ValidationFailure(
            "split pairing input fails preconditions:\n"
            + "\n".join(str(c) for c in rep.failures),
            report=rep,
        )


def split_pairing_gaussian(
    s: SplitTriple,
    inp: PairingInput,
    quad_nodes: int = 64,
    tol: float = 1e-10,
) -> complex:
    """Gaussian transform with exponent -H + i t d1(a)."""
    _split_pairing_validate(s, inp)
    h = s.hamiltonian
    da = d1(s, inp.a)
    front = s.gamma @ s.group[inp.g] @ inp.a
    return gauss_hermite_transform(
        lambda tt: complex(np.trace(front @ expm(-h + 1j * tt * da))),
        quad_nodes,
        tol,
    )


def split_pairing(
    s: SplitTriple,
    inp: PairingInput,
    quad_nodes: int = 64,
    max_level: int = 24,
    tol: float = 1e-10,
) -> PairingResult:
    """Gaussian transform with exponent -H + i t d1(a), plus the series route."""
    from .jlo import _sum_series

    quad = split_pairing_gaussian(s, inp, quad_nodes=quad_nodes, tol=tol)
    da = d1(s, inp.a)
    front = s.gamma @ s.group[inp.g] @ inp.a

    def term_gen():
        for n, raw in enumerate(s.engine().repeated_series_iter(front, da)):
            if n > max_level:
                return
            if n % 2 == 0:
                yield pairing_coefficient(n // 2) * raw

    total, trunc, tail = _sum_series(term_gen(), max_level, 1e-12)
    index = s.heat_trace(inp.g)
    return PairingResult(
        value=quad,
        series_value=total,
        quadrature_value=quad,
        truncation_level=trunc,
        tail_bound=float(tail),
        connes_value=(quad + index) / 2.0,
    )


def coupling_sweep(
    family,
    inp: PairingInput,
    lambda_grid,
    mode: str = "coupling",
    quad_nodes: int = 64,
    tol: float = 1e-10,
) -> SweepTable:
    """Pairing along a family of split triples.

    mode "coupling": the momentum P(lambda) must stay fixed (PNotFixed
    otherwise) and the induced Q(lambda) family is checked by the
    regularity report.  mode "q1_commuting": instead requires that
    Q1(lambda) commute with the input and that Q2 stay fixed.
    """
    if mode not in ("coupling", "q1_commuting"):
        raise ValueError(f"unknown mode {mode!r}")
    grid = sorted(float(x) for x in lambda_grid)
    base = require_valid_split(family(grid[0]))
    p0 = base.momentum
    q20 = base.Q2
    tab = SweepTable(
        columns=["lambda", "value", "p_residual", "precondition_residual", "kato_below_one"]
    )
    # regularity of the induced Q(lambda) family, reported against a
    # trivial-group copy of the derived triple (the split group need not
    # commute with the full Q)
    base_derived = SpectralTriple(
        dim=base.dim,
        Q=base.Q,
        gamma=base.gamma,
        group=[np.eye(base.dim, dtype=complex)],
        tol=base.tol,
    )

    def q_of(lam: float) -> np.ndarray:
        return family(lam).Q - base.Q

    fam = DeformationFamily(
        base=base_derived, q=q_of, lambda_interval=(grid[0], grid[-1])
    )
    reg = regularity_report(fam, grid)
    kato_flags = {row["lambda"]: row["kato_below_one"] for row in reg.rows}
    for lam in grid:
        s_lam = require_valid_split(family(lam))
        if mode == "coupling":
            pres = opnorm(s_lam.momentum - p0)
            if pres > s_lam.tol * max(opnorm(p0), 1.0):
                raise PNotFixed(
                    f"momentum moved at lambda={lam} with residual {pres:.3e}",
                    lam=lam,
                    residual=pres,
                )
            precond = 0.0
        else:
            pres = opnorm(s_lam.momentum - p0)
            precond = opnorm(s_lam.Q1 @ inp.a - inp.a @ s_lam.Q1) + opnorm(
                s_lam.Q2 - q20
            )
            if precond > s_lam.tol * 10:
                raise ValidationFailure(
                    f"q1_commuting preconditions fail at lambda={lam} "
                    f"(residual {precond:.3e})"
                )
        val = split_pairing_gaussian(s_lam, inp, quad_nodes=quad_nodes, tol=tol)
        tab.add_row(
            **{
                "lambda": lam,
                "value": val,
                "p_residual": pres,
                "precondition_residual": precond,
                "kato_below_one": bool(kato_flags.get(lam, False)),
            }
        )
    return tab


_SX = np.array([[0, 1], [1, 0]], dtype=complex)
_SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
_SZ = np.array([[1, 0], [0, -1]], dtype=complex)


def build_n2_susy_example(
    levels=((1.0, 0.5),),
    taus=(0.0,),
    thetas=(0.0,),
    tol: float = 1e-10,
) -> tuple[SplitTriple, dict]:
    """Minimal Clifford model of two independent supercharge pairs.

    Each (h, p) level (requiring h >= |p| >= 0) contributes a 4-dim block
    carrying four mutually anticommuting Hermitian generators scaled so
    that Q1^2 = Qt1^2 = (h+p) I and Q2^2 = Qt2^2 = (h-p) I; the rotation
    generator J mixes (Q2, Qt2) and commutes with gamma, H, P, and Q1.
    The returned group is the identity followed by exp(i(tau P + theta J))
    for every requested (tau, theta) pair.

    Returns the split triple and a dict of the named generators.
    """
    levels = list(levels)
    if not levels:
        raise DimensionMismatch("need at least one (h, p) level")
    for h, p in levels:
        if h < abs(p):
            raise ValidationFailure(f"level (h={h}, p={p}) violates h >= |p|")
    g1 = np.kron(_SX, np.eye(2))
    g2 = np.kron(_SY, np.eye(2))
    g3 = np.kron(_SZ, _SX)
    g4 = np.kron(_SZ, _SY)
    gam4 = np.kron(_SZ, _SZ)
    j4 = 0.5j * (g3 @ g4)
    blocks = len(levels)
    dim = 4 * blocks

    def blockdiag(mats):
        out = np.zeros((dim, dim), dtype=complex)
        for k, m in enumerate(mats):
            out[4 * k : 4 * k + 4, 4 * k : 4 * k + 4] = m
        return out

    q1 = blockdiag([math.sqrt(h + p) * g1 for h, p in levels])
    qt1 = blockdiag([math.sqrt(h + p) * g2 for h, p in levels])
    q2 = blockdiag([math.sqrt(h - p) * g3 for h, p in levels])
    qt2 = blockdiag([math.sqrt(h - p) * g4 for h, p in levels])
    gam = blockdiag([gam4] * blocks)
    jop = blockdiag([j4] * blocks)
    pop = blockdiag([p * np.eye(4) for _, p in levels])
    group = [np.eye(dim, dtype=complex)]
    for tau in taus:
        for theta in thetas:
            if tau == 0.0 and theta == 0.0:
                continue
            group.append(expm(1j * (tau * pop + theta * jop)))
    s = SplitTriple(dim=dim, Q1=q1, Q2=q2, gamma=gam, group=group, tol=tol)
    require_valid_split(s)
    gens = {"Q1": q1, "Q2": q2, "Qt1": qt1, "Qt2": qt2, "J": jop, "P": pop}
    return s, gens


def n2_index_table(s: SplitTriple, gens: dict, taus, thetas) -> SweepTable:
    """Tr(gamma U(tau, theta) e^{-H}) over a (tau, theta) grid.

    Purely diagnostic: reports the table and the spread along tau rows
    (2 pi periodicity in tau holds when P has integer spectrum).
    """
    eng = s.engine()
    tab = SweepTable(columns=["tau", "theta", "value"])
    for tau in sorted(float(x) for x in taus):
        for theta in sorted(float(x) for x in thetas):
            u = expm(1j * (tau * gens["P"] + theta * gens["J"]))
            w = eng.to_eigenbasis(s.gamma @ u)
            val = complex(np.sum(np.diag(w) * np.exp(-eng.lam)))
            tab.add_row(tau=tau, theta=theta, value=val)
    return tab

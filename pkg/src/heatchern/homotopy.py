"""Deformation families Q(lambda) = Q + q(lambda) and their invariants.

A regular family keeps the pairing constant in lambda.  The derivative of
the character along the family is a cochain L(lambda), itself the
coboundary of a cochain h(lambda); both are built from heat expectations
with one inserted velocity vertex.  Endpoint regularization replaces the
squared generator by H(eps, lambda) = Q(lambda)^2 + eps^2 Z*Z on a grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .cochains import Cochain, _random_even_tuple, op_partial
from .errors import ValidationFailure
from .expectations import expectation_value
from .jlo import PairingInput, _require_valid_input, gauss_hermite_transform, jlo_component
from .linalg import as_matrix, expm, opnorm
from .triples import (
    SpectralTriple,
    ValidationReport,
    kato_constants,
    sobolev_norm,
    validate_triple,
)

__all__ = [
    "DeformationFamily",
    "SweepTable",
    "linear_family",
    "deform_triple",
    "regularity_report",
    "sweep_invariant",
    "L_cochain",
    "h_cochain",
    "coboundary_relation_residual",
    "jlo_lambda_fd_residual",
    "beta_independence",
    "endpoint_grid",
]


@dataclass
class DeformationFamily:
    """Base triple plus a perturbation path q(lambda).

    ``q_dot`` may be omitted, in which case the velocity is the symmetric
    difference quotient with step ``fd_step``.  The optional regularizer
    is a positive-semidefinite gamma-even group-commuting matrix (a Z*Z
    form) used by the endpoint grid.
    """

    base: SpectralTriple
    q: Callable[[float], np.ndarray]
    q_dot: Optional[Callable[[float], np.ndarray]] = None
    lambda_interval: tuple[float, float] = (-1.0, 1.0)
    regularizer: Optional[np.ndarray] = None
    fd_step: float = 1e-4

    def __post_init__(self):
        if self.regularizer is not None:
            self.regularizer = as_matrix(self.regularizer, "regularizer")

    def q_at(self, lam: float) -> np.ndarray:
        return as_matrix(self.q(lam), "q(lambda)")

    def q_dot_at(self, lam: float) -> np.ndarray:
        if self.q_dot is not None:
            return as_matrix(self.q_dot(lam), "q_dot(lambda)")
        h = self.fd_step
        return (self.q_at(lam + h) - self.q_at(lam - h)) / (2.0 * h)

    def validate_at(self, lam: float) -> ValidationReport:
        t = self.base
        rep = ValidationReport()
        qm = self.q_at(lam)
        rep.add("q hermitian", opnorm(qm - qm.conj().T), t.tol)
        rep.add("q gamma-odd", opnorm(qm @ t.gamma + t.gamma @ qm), t.tol)
        for k, u in enumerate(t.group):
            rep.add(
                f"q commutes with group[{k}]", opnorm(u @ qm - qm @ u), t.tol
            )
        if self.regularizer is not None:
            z = self.regularizer
            rep.add("regularizer hermitian", opnorm(z - z.conj().T), t.tol)
            w = np.linalg.eigvalsh((z + z.conj().T) / 2.0)
            rep.add("regularizer PSD", max(0.0, -float(w[0])), t.tol)
            rep.add(
                "regularizer gamma-even", opnorm(t.conj_gamma(z) - z), t.tol
            )
            for k, u in enumerate(t.group):
                rep.add(
                    f"regularizer commutes with group[{k}]",
                    opnorm(u @ z - z @ u),
                    t.tol,
                )
        return rep


def linear_family(base: SpectralTriple, q, interval=(-1.0, 1.0), **kw) -> DeformationFamily:
    """The family q(lambda) = lambda q with exact velocity q."""
    qm = as_matrix(q, "q")
    return DeformationFamily(
        base=base,
        q=lambda lam: lam * qm,
        q_dot=lambda lam: qm,
        lambda_interval=interval,
        **kw,
    )


def deform_triple(f: DeformationFamily, lam: float) -> SpectralTriple:
    """The validated triple with Q replaced by Q + q(lambda)."""
    t = f.base
    deformed = SpectralTriple(
        dim=t.dim,
        Q=t.Q + f.q_at(lam),
        gamma=t.gamma,
        group=list(t.group),
        tol=t.tol,
    )
    rep = validate_triple(deformed)
    if not rep.passed:
        raise ValidationFailure(
            f"deformed triple at lambda={lam} fails validation:\n"
            + "\n".join(str(c) for c in rep.failures),
            report=rep,
        )
    return deformed


@dataclass
class SweepTable:
    """Rows of grid coordinates, complex values, and diagnostics."""

    columns: list[str]
    rows: list[dict] = field(default_factory=list)

    def add_row(self, **kw):
        self.rows.append(kw)

    def values(self) -> np.ndarray:
        return np.array([r["value"] for r in self.rows], dtype=complex)

    def spread(self) -> float:
        v = self.values()
        if v.size < 2:
            return 0.0
        return float(
            max(abs(a - b) for i, a in enumerate(v) for b in v[i + 1 :])
        )

    def to_jsonable(self) -> dict:
        out_rows = []
        for r in self.rows:
            row = {}
            for c in self.columns:
                val = r.get(c)
                if isinstance(val, complex):
                    row[c] = [val.real, val.imag]
                else:
                    row[c] = val
            out_rows.append(row)
        return {"columns": list(self.columns), "rows": out_rows, "spread": self.spread()}

    def to_csv_rows(self) -> list[list]:
        complex_cols = {
            c for c in self.columns if any(isinstance(r.get(c), complex) for r in self.rows)
        }
        header = []
        for c in self.columns:
            if c in complex_cols:
                header += [f"re({c})", f"im({c})"]
            else:
                header.append(c)
        out = [header]
        for r in self.rows:
            line = []
            for c in self.columns:
                val = r.get(c)
                if c in complex_cols:
                    if val is None:
                        line += ["", ""]
                    else:
                        val = complex(val)
                        line += [val.real, val.imag]
                else:
                    line.append(val)
            out.append(line)
        return out


def regularity_report(f: DeformationFamily, lambda_grid) -> SweepTable:
    """Per-lambda diagnostics: relative bounds, norms, velocity checks.

    Reports the minimal Kato constant a(M) curve summary against the base
    Q, whether a < 1 is achievable, the smoothing-scale norms of q at the
    window edges, and the deviation of the declared velocity from the
    symmetric difference quotient.  Report-only; nothing is enforced.
    """
    t = f.base
    grid = [float(x) for x in lambda_grid]
    tab = SweepTable(
        columns=[
            "lambda",
            "kato_a_at_0",
            "kato_min_a",
            "kato_below_one",
            "q_norm",
            "qdot_norm",
            "fd_vs_qdot",
            "q_norm_eps_0",
            "q_norm_eps_01",
            "q_norm_eps_09",
            "q_norm_eps_1",
            "qdot_continuity",
        ]
    )
    prev_qdot = None
    for lam in grid:
        qm = f.q_at(lam)
        qd = f.q_dot_at(lam)
        curve = kato_constants(t, qm)
        finite = [a for _, a in curve.points if math.isfinite(a)]
        h = f.fd_step
        fd = (f.q_at(lam + h) - f.q_at(lam - h)) / (2.0 * h)
        # (0,1)- and (-1,0)-scale gaps between velocity and quotient
        fd_gap = sobolev_norm(t, fd - qd, 0, 1) + sobolev_norm(t, fd - qd, -1, 0)
        cont = (
            sobolev_norm(t, qd - prev_qdot, 0, 1)
            + sobolev_norm(t, qd - prev_qdot, -1, 0)
            if prev_qdot is not None
            else 0.0
        )
        tab.add_row(
            **{
                "lambda": lam,
                "kato_a_at_0": curve.points[0][1],
                "kato_min_a": min(finite) if finite else math.inf,
                "kato_below_one": curve.achievable_below_one,
                "q_norm": opnorm(qm),
                "qdot_norm": opnorm(qd),
                "fd_vs_qdot": fd_gap,
                "q_norm_eps_0": sobolev_norm(t, qm, 0, 1),
                "q_norm_eps_01": sobolev_norm(t, qm, -0.1, 0.9),
                "q_norm_eps_09": sobolev_norm(t, qm, -0.9, 0.1),
                "q_norm_eps_1": sobolev_norm(t, qm, -1, 0),
                "qdot_continuity": cont,
            }
        )
        prev_qdot = qd
    return tab


def sweep_invariant(
    f: DeformationFamily,
    inp: PairingInput,
    lambda_grid,
    quad_nodes: int = 64,
    tol: float = 1e-10,
) -> SweepTable:
    """Pairing values along the family; constant for regular families.

    The input is re-validated against every deformed triple and the sweep
    aborts with PairingInputInvalid rather than reporting a meaningless
    spread.
    """
    from .jlo import pairing_gaussian

    grid = sorted(float(x) for x in lambda_grid)
    tab = SweepTable(columns=["lambda", "value", "validated"])
    for lam in grid:
        t_lam = deform_triple(f, lam)
        _require_valid_input(t_lam, inp)
        val = pairing_gaussian(t_lam, inp, quad_nodes=quad_nodes, tol=tol)
        tab.add_row(**{"lambda": lam, "value": val, "validated": True})
    return tab


def _deformed_derivative(t: SpectralTriple, a: np.ndarray) -> np.ndarray:
    return t.Q @ a - t.gamma @ a @ t.gamma @ t.Q


def L_cochain(f: DeformationFamily, lam: float) -> Cochain:
    """The lambda-derivative of the character as an even class-C cochain.

    L_n(a_0..a_n;g) is the sum over commutator insertions
    <a_0, .., [qdot, a_j], .., da_n> minus the sum over velocity-vertex
    insertions <a_0, .., da_j, d(qdot), da_{j+1}, ..>_{n+1}, everything
    built from the deformed triple at lambda.
    """
    t_lam = deform_triple(f, lam)
    qdot = f.q_dot_at(lam)
    dl_qdot = t_lam.Q @ qdot + qdot @ t_lam.Q

    def ev(n, mats, g):
        dmats = [_deformed_derivative(t_lam, a) for a in mats]
        tot = 0.0 + 0.0j
        for j in range(1, n + 1):
            verts = (
                [mats[0]]
                + dmats[1:j]
                + [qdot @ mats[j] - mats[j] @ qdot]
                + dmats[j + 1 :]
            )
            tot += expectation_value(t_lam, verts, g)
        for j in range(0, n + 1):
            verts = [mats[0]] + dmats[1 : j + 1] + [dl_qdot] + dmats[j + 1 :]
            tot -= expectation_value(t_lam, verts, g)
        return tot

    return Cochain(ev, t_lam.group, 32, "even", "C")


def h_cochain(f: DeformationFamily, lam: float) -> Cochain:
    """The odd class-C cochain whose coboundary is L(lambda).

    h_n(a_0..a_n;g) = - sum_k (-1)^k <a_0, da_1, .., da_k, qdot,
    da_{k+1}, .., da_n;g>_{n+1} over the deformed triple.
    """
    t_lam = deform_triple(f, lam)
    qdot = f.q_dot_at(lam)

    def ev(n, mats, g):
        dmats = [_deformed_derivative(t_lam, a) for a in mats]
        tot = 0.0 + 0.0j
        for k in range(0, n + 1):
            verts = [mats[0]] + dmats[1 : k + 1] + [qdot] + dmats[k + 1 :]
            tot += (-1) ** k * expectation_value(t_lam, verts, g)
        return -tot

    return Cochain(ev, t_lam.group, 32, "odd", "C")


def coboundary_relation_residual(
    f: DeformationFamily,
    lam: float,
    samples: int = 3,
    levels=(0, 1, 2),
    seed: int = 0,
) -> float:
    """max |L_n(tuple) - (bh + Bh)_n(tuple)| over seeded gamma-even tuples."""
    t = f.base
    L = L_cochain(f, lam)
    ph = op_partial(h_cochain(f, lam))
    rng = np.random.default_rng(seed)
    worst = 0.0
    for n in levels:
        for _ in range(samples):
            mats = _random_even_tuple(t, rng, n)
            for g in range(len(t.group)):
                worst = max(worst, abs(L(n, mats, g) - ph(n, mats, g)))
    return worst


def jlo_lambda_fd_residual(
    f: DeformationFamily,
    lam: float,
    n: int,
    mats,
    g: int = 0,
    step: float = 1e-4,
) -> float:
    """|central difference of tau_n across lambda - L_n(lambda)| pointwise."""
    t_plus = deform_triple(f, lam + step)
    t_minus = deform_triple(f, lam - step)
    fd = (
        jlo_component(t_plus, n, mats, g, check_even=False)
        - jlo_component(t_minus, n, mats, g, check_even=False)
    ) / (2.0 * step)
    return abs(fd - L_cochain(f, lam)(n, tuple(mats), g))


def beta_independence(
    t: SpectralTriple,
    inp: PairingInput,
    beta_list,
    quad_nodes: int = 64,
    tol: float = 1e-10,
) -> SweepTable:
    """Pairing per simplex plane; the values agree for a fixed triple."""
    from .jlo import pairing_gaussian

    tab = SweepTable(columns=["beta", "value"])
    for beta in beta_list:
        val = pairing_gaussian(
            t, inp, quad_nodes=quad_nodes, tol=tol, beta_plane=float(beta)
        )
        tab.add_row(beta=float(beta), value=val)
    return tab


def endpoint_grid(
    f: DeformationFamily,
    eps_grid,
    lambda_grid,
    inp: PairingInput,
    quad_nodes: int = 64,
    tol: float = 1e-10,
) -> SweepTable:
    """Regularized pairing over an (eps, lambda) grid.

    Each entry is the Gaussian transform with the exponent
    -H(eps, lambda) + i t d_lambda(a), H(eps, lambda) = Q(lambda)^2 +
    eps^2 Z*Z.  Central finite-difference estimates of the eps- and
    lambda-derivatives are attached to interior grid points.
    """
    if f.regularizer is None:
        raise ValidationFailure("endpoint grid needs a family with a regularizer")
    rep = f.validate_at(float(np.asarray(lambda_grid)[0]))
    if not rep.passed:
        raise ValidationFailure(
            "family fails validation:\n" + "\n".join(str(c) for c in rep.failures),
            report=rep,
        )
    eg = sorted(float(x) for x in eps_grid)
    lg = sorted(float(x) for x in lambda_grid)
    em = np.eye(inp.m)
    zz = f.regularizer

    def value_at(eps: float, lam: float) -> complex:
        t_lam = deform_triple(f, lam)
        _require_valid_input(t_lam, inp)
        qb = np.kron(em, t_lam.Q)
        gam = np.kron(em, t_lam.gamma)
        u = np.kron(em, t_lam.group[inp.g])
        h = qb @ qb + (eps**2) * np.kron(em, zz)
        da = qb @ inp.a - gam @ inp.a @ gam @ qb
        front = gam @ u @ inp.a
        return gauss_hermite_transform(
            lambda tt: complex(np.trace(front @ expm(-h + 1j * tt * da))),
            quad_nodes,
            tol,
        )

    vals = {(e, l): value_at(e, l) for e in eg for l in lg}
    tab = SweepTable(columns=["lambda", "eps", "value", "dZ_deps", "dZ_dlambda"])
    for l in lg:
        for e in eg:
            i, j = eg.index(e), lg.index(l)
            dz_de = (
                (vals[(eg[i + 1], l)] - vals[(eg[i - 1], l)]) / (eg[i + 1] - eg[i - 1])
                if 0 < i < len(eg) - 1
                else None
            )
            dz_dl = (
                (vals[(e, lg[j + 1])] - vals[(e, lg[j - 1])]) / (lg[j + 1] - lg[j - 1])
                if 0 < j < len(lg) - 1
                else None
            )
            tab.add_row(
                **{
                    "lambda": l,
                    "eps": e,
                    "value": vals[(e, l)],
                    "dZ_deps": dz_de,
                    "dZ_dlambda": dz_dl,
                }
            )
    return tab

"""The cyclic cochain complex: evaluable cochains and their operators.

Cochains are closures, not stored tensors: a cochain evaluates lazily at
(level n, tuple of n+1 matrices, group index).  The operators here wrap
evaluators; none of them precompute anything.  Class membership (D, C, N)
is declared and spot-checked, never proven.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ClassViolation, DimensionMismatch
from .expectations import expectation_value
from .linalg import opnorm
from .triples import SpectralTriple, ValidationReport

__all__ = [
    "Cochain",
    "CochainNormProfile",
    "op_T",
    "op_A",
    "op_U",
    "op_V",
    "op_b",
    "op_B",
    "op_partial",
    "op_partial_bar",
    "random_cochain",
    "cocycle_residual",
    "check_cochain_invariants",
    "norm_profile",
]

_CLASS_RANK = {"D": 0, "C": 1, "N": 2}
_PARITY_FLIP = {"even": "odd", "odd": "even", "mixed": "mixed"}


@dataclass
class Cochain:
    """A lazily evaluable family {f_n} over a fixed group of unitaries.

    evaluator(n, mats, g) returns the complex value of f_n on a tuple of
    n+1 matrices at group index g.  ``cclass`` declares membership: D for
    no vanishing constraint, C for vanishing when any argument past the
    zeroth is the identity, N when the zeroth argument counts as well.
    """

    evaluator: Callable[[int, tuple, int], complex]
    group: list[np.ndarray]
    max_level: int
    parity: str = "mixed"
    cclass: str = "C"

    def __post_init__(self):
        if self.cclass not in _CLASS_RANK:
            raise ValueError(f"unknown class {self.cclass!r}")
        if self.parity not in _PARITY_FLIP:
            raise ValueError(f"unknown parity {self.parity!r}")

    def __call__(self, n: int, mats, g: int = 0) -> complex:
        if n < 0 or n > self.max_level:
            raise DimensionMismatch(
                f"level {n} outside [0, {self.max_level}]"
            )
        mats = tuple(mats)
        if len(mats) != n + 1:
            raise DimensionMismatch(
                f"level {n} needs {n + 1} arguments, got {len(mats)}"
            )
        return self.evaluator(n, mats, g)

    def conj_group_inv(self, a, g: int):
        u = self.group[g]
        return u.conj().T @ a @ u


def _require_class(f: Cochain, needed: str, op: str):
    if _CLASS_RANK[f.cclass] < _CLASS_RANK[needed]:
        raise ClassViolation(
            f"{op} needs a class-{needed} cochain, got class {f.cclass}"
        )


def _lazy_annihilator_check(f: Cochain, op: str):
    """One-shot check, on first evaluation, that f kills the identity.

    Cochains declared class N are trusted; anything else is probed with
    the identity substituted into the zeroth slot of the first tuple seen
    and a ClassViolation names the witnessing level on failure.
    """
    done = [f.cclass == "N"]

    def ensure(n, mats, g):
        if done[0]:
            return
        done[0] = True
        dim = f.group[0].shape[0]
        probe = (np.eye(dim, dtype=complex),) + mats[1:]
        scale = abs(f(n, mats, g)) + 1.0
        val = abs(f(n, probe, g))
        if val > 1e-8 * scale:
            raise ClassViolation(
                f"{op} needs an identity-annihilating (class N) cochain; "
                f"witnessed |f_{n}(I, ...)| = {val:.3e} (declared class "
                f"{f.cclass})"
            )

    return ensure


def op_T(f: Cochain) -> Cochain:
    """Cyclic transposition (Tf)(a_0..a_n;g) = (-1)^n f(a_n^{g^-1}, a_0..a_{n-1};g)."""
    ensure = _lazy_annihilator_check(f, "T")

    def ev(n, mats, g):
        ensure(n, mats, g)
        rot = (f.conj_group_inv(mats[-1], g),) + mats[:-1]
        return (-1) ** n * f(n, rot, g)

    return Cochain(ev, f.group, f.max_level, f.parity, "N")


def op_A(f: Cochain) -> Cochain:
    """Cyclic antisymmetrization, the sum of all powers of T at each level."""
    ensure = _lazy_annihilator_check(f, "A")

    def ev(n, mats, g):
        ensure(n, mats, g)
        tot = 0.0 + 0.0j
        for j in range(n + 1):
            head = tuple(f.conj_group_inv(a, g) for a in mats[n + 1 - j :])
            tot += (-1) ** (n * j) * f(n, head + mats[: n + 1 - j], g)
        return tot

    return Cochain(ev, f.group, f.max_level, f.parity, "N")


def op_U(f: Cochain) -> Cochain:
    """Annihilation: (Uf)(a_0..a_{n-1}) = f(I, a_0..a_{n-1}); lowers the level."""
    dim = f.group[0].shape[0]
    out_class = "N" if f.cclass in ("C", "N") else "D"

    def ev(n, mats, g):
        return f(n + 1, (np.eye(dim, dtype=complex),) + mats, g)

    return Cochain(ev, f.group, f.max_level - 1, _PARITY_FLIP[f.parity], out_class)


def op_V(r: int, f: Cochain) -> Cochain:
    """Creation conjugated by r cyclic steps; raises the level by one.

    At output level m: multiplies arguments r and r+1 for r <= m-1 with
    sign (-1)^r, and for r = m wraps a_m^{g^-1} onto a_0 with sign (-1)^m.
    """
    if r < 0:
        raise ValueError(f"r must be nonnegative, got {r}")

    def ev(m, mats, g):
        if r <= m - 1:
            merged = mats[:r] + (mats[r] @ mats[r + 1],) + mats[r + 2 :]
            return (-1) ** r * f(m - 1, merged, g)
        if r == m:
            merged = (f.conj_group_inv(mats[m], g) @ mats[0],) + mats[1:m]
            return (-1) ** m * f(m - 1, merged, g)
        raise DimensionMismatch(f"V({r}) undefined at output level {m}")

    return Cochain(ev, f.group, f.max_level + 1, _PARITY_FLIP[f.parity], "D")


def op_b(f: Cochain) -> Cochain:
    """Hochschild coboundary; raises the level by one."""
    _require_class(f, "C", "b")

    def ev(m, mats, g):
        if m < 1:
            raise DimensionMismatch("b has no component at level 0")
        tot = 0.0 + 0.0j
        for j in range(m):
            merged = mats[:j] + (mats[j] @ mats[j + 1],) + mats[j + 2 :]
            tot += (-1) ** j * f(m - 1, merged, g)
        wrapped = (f.conj_group_inv(mats[m], g) @ mats[0],) + mats[1:m]
        tot += (-1) ** m * f(m - 1, wrapped, g)
        return tot

    return Cochain(ev, f.group, f.max_level + 1, _PARITY_FLIP[f.parity], "C")


def op_B(f: Cochain) -> Cochain:
    """Connes coboundary (antisymmetrized annihilation); lowers the level."""
    _require_class(f, "C", "B")
    dim = f.group[0].shape[0]
    ident = np.eye(dim, dtype=complex)

    def ev(m, mats, g):
        tot = 0.0 + 0.0j
        for j in range(m + 1):
            head = tuple(f.conj_group_inv(a, g) for a in mats[m + 1 - j :])
            tot += (-1) ** (m * j) * f(m + 1, (ident,) + head + mats[: m + 1 - j], g)
        return tot

    return Cochain(ev, f.group, f.max_level - 1, _PARITY_FLIP[f.parity], "N")


def op_partial(f: Cochain) -> Cochain:
    """The coboundary b + B of entire cyclic cohomology."""
    bf = op_b(f)
    Bf = op_B(f)

    def ev(m, mats, g):
        tot = Bf(m, mats, g) if m <= Bf.max_level else 0.0 + 0.0j
        if m >= 1:
            tot += bf(m, mats, g)
        return tot

    return Cochain(ev, f.group, f.max_level + 1, _PARITY_FLIP[f.parity], "C")


def op_partial_bar(f: Cochain) -> Cochain:
    """The companion coboundary b - B (also nilpotent); no pairing attached."""
    bf = op_b(f)
    Bf = op_B(f)

    def ev(m, mats, g):
        tot = -Bf(m, mats, g) if m <= Bf.max_level else 0.0 + 0.0j
        if m >= 1:
            tot += bf(m, mats, g)
        return tot

    return Cochain(ev, f.group, f.max_level + 1, _PARITY_FLIP[f.parity], "C")


def _group_gamma_average(t: SpectralTriple, m: np.ndarray) -> np.ndarray:
    out = (m + t.conj_gamma(m)) / 2.0
    acc = np.zeros_like(out)
    for u in t.group:
        acc += u @ out @ u.conj().T
    return acc / len(t.group)


def random_cochain(t: SpectralTriple, seed: int, max_level: int = 6) -> Cochain:
    """Seeded class-C cochain of heat-expectation form.

    G_n(a_0..a_n;g) = <c_0 a_0, c_1 pi(a_1), ..., c_n pi(a_n); g>_n with
    fixed random interleavers c_j (gamma-even, commuting with the group,
    normalized to unit norm) and the trace-free projection
    pi(a) = a - (Tr a / dim) I.  The projection makes the class-C
    vanishing hold identically, and group-invariant interleavers make the
    diagonal invariance exact.
    """
    rng = np.random.default_rng(seed)
    dim = t.dim
    cs = []
    for _ in range(max_level + 1):
        raw = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        c = _group_gamma_average(t, raw)
        nrm = opnorm(c)
        cs.append(c / nrm if nrm > 0 else c)
    ident = np.eye(dim, dtype=complex)

    def pi(a):
        return a - (np.trace(a) / dim) * ident

    def ev(n, mats, g):
        verts = [cs[0] @ mats[0]] + [cs[j] @ pi(mats[j]) for j in range(1, n + 1)]
        return expectation_value(t, verts, g)

    return Cochain(ev, t.group, max_level, "mixed", "C")


def _random_even_tuple(t: SpectralTriple, rng, n: int):
    out = []
    for _ in range(n + 1):
        raw = rng.normal(size=(t.dim, t.dim)) + 1j * rng.normal(size=(t.dim, t.dim))
        even = (raw + t.conj_gamma(raw)) / 2.0
        out.append(even / max(opnorm(even), 1e-12))
    return tuple(out)


def cocycle_residual(
    f: Cochain,
    t: SpectralTriple,
    samples: int = 5,
    levels=(0, 1, 2, 3),
    seed: int = 0,
) -> float:
    """max |(bf + Bf)_n| over seeded gamma-even tuples, levels, and group."""
    pf = op_partial(f)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for n in levels:
        if n > pf.max_level:
            continue
        for _ in range(samples):
            mats = _random_even_tuple(t, rng, n)
            for g in range(len(t.group)):
                worst = max(worst, abs(pf(n, mats, g)))
    return worst


def check_cochain_invariants(
    f: Cochain,
    t: SpectralTriple,
    seed: int = 0,
    levels=(1, 2),
    samples: int = 3,
) -> ValidationReport:
    """Spot-check declared class vanishing and the diagonal invariance.

    Violations are reported with the witnessing level and slot; this is a
    diagnostic, not a proof of membership.
    """
    rng = np.random.default_rng(seed)
    rep = ValidationReport()
    ident = np.eye(t.dim, dtype=complex)
    for n in levels:
        if n > f.max_level:
            continue
        for k in range(samples):
            mats = _random_even_tuple(t, rng, n)
            if f.cclass in ("C", "N"):
                for slot in range(1, n + 1):
                    probe = mats[:slot] + (ident,) + mats[slot + 1 :]
                    rep.add(
                        f"class-{f.cclass} vanishing, level {n}, slot {slot}, sample {k}",
                        abs(f(n, probe, 0)),
                        1e-10,
                    )
            if f.cclass == "N":
                probe = (ident,) + mats[1:]
                rep.add(
                    f"class-N vanishing, level {n}, slot 0, sample {k}",
                    abs(f(n, probe, 0)),
                    1e-10,
                )
            for g in range(len(t.group)):
                conj = tuple(t.conj_group_inv(a, g) for a in mats)
                rep.add(
                    f"diagonal invariance, level {n}, g {g}, sample {k}",
                    abs(f(n, conj, g) - f(n, mats, g)),
                    1e-10,
                )
    return rep


@dataclass
class CochainNormProfile:
    """Sampled lower bounds to the level norms, for entire-decay monitoring."""

    levels: list[tuple[int, float]] = field(default_factory=list)

    def decay_sequence(self):
        """n^(1/2) ||f_n||^(1/n) over the sampled levels with n >= 1."""
        return [
            (n, float(np.sqrt(n) * v ** (1.0 / n)))
            for n, v in self.levels
            if n >= 1 and v > 0
        ]


def norm_profile(
    f: Cochain,
    t: SpectralTriple,
    levels,
    seed: int = 0,
    samples: int = 8,
) -> CochainNormProfile:
    """Sampled sup of |f_n| over unit-norm gamma-even tuples, per level."""
    rng = np.random.default_rng(seed)
    prof = CochainNormProfile()
    for n in levels:
        if n > f.max_level:
            continue
        best = 0.0
        for _ in range(samples):
            mats = _random_even_tuple(t, rng, n)
            for g in range(len(t.group)):
                best = max(best, abs(f(n, mats, g)))
        prof.levels.append((n, best))
    return prof

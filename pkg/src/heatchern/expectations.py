"""Heat-kernel expectations: traced simplex transforms of vertex products.

The central object is

    <x_0, ..., x_n; g>_n = integral over the simplex s_0+...+s_n = beta of
        Tr(gamma U(g) x_0 e^{-s_0 Q^2} x_1 e^{-s_1 Q^2} ... x_n e^{-s_n Q^2})

evaluated exactly by diagonalizing Q^2: the simplex integral of each
eigenvalue tuple is a confluent divided difference of the exponential
(``simplex_exp``), and the trace becomes a sum over index tuples.  A
seeded Monte-Carlo quadrature over the simplex provides an independent
route at every instance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BadExponent, ComplexityCap, DimensionMismatch
from .linalg import as_matrix, opnorm, simplex_exp
from .triples import (
    SpectralTriple,
    VertexType,
    regularity_exponents,
    sobolev_norm,
)

__all__ = [
    "VertexSet",
    "ExpectationValue",
    "HeatEngine",
    "beta_fn",
    "heat_expectation",
    "expectation_value",
    "check_insert_identity",
    "check_cyclic",
    "check_d_invariance",
    "duhamel_commutator",
    "bound_expectation",
    "bounded_vertex_bound",
]

_CHUNK = 1 << 18


def beta_fn(etas) -> float:
    """prod Gamma(eta_j) / Gamma(sum eta_j), via log-Gamma."""
    es = [float(e) for e in np.atleast_1d(etas)]
    if not es:
        raise DimensionMismatch("need at least one exponent")
    if any(e <= 0 for e in es):
        raise BadExponent(f"exponents must be positive, got {es}")
    return math.exp(sum(math.lgamma(e) for e in es) - math.lgamma(sum(es)))


@dataclass
class VertexSet:
    """Ordered vertices with declared smoothing types and a simplex scale."""

    vertices: list[np.ndarray]
    types: list[VertexType] | None = None
    beta_plane: float = 1.0

    def __post_init__(self):
        self.vertices = [as_matrix(v, f"vertex[{k}]") for k, v in enumerate(self.vertices)]
        declared = self.types is not None
        if not declared:
            self.types = [VertexType() for _ in self.vertices]
        if len(self.types) != len(self.vertices):
            raise DimensionMismatch("types list must match vertices")
        if not (self.beta_plane > 0):
            raise BadExponent(f"beta_plane must be positive, got {self.beta_plane}")
        if declared:
            reg = regularity_exponents(self.types)
            if not reg.regular:
                raise BadExponent(
                    f"declared vertex types are not regular: etas {reg.etas}"
                )

    @property
    def level(self) -> int:
        return len(self.vertices) - 1

    def regularity(self):
        return regularity_exponents(self.types)


@dataclass
class ExpectationValue:
    value: complex
    method: str
    estimated_error: float

    def __post_init__(self):
        if self.estimated_error < 0:
            raise ValueError("estimated_error must be nonnegative")


class HeatEngine:
    """Exact and Monte-Carlo evaluation bound to one eigendecomposition.

    ``lam``/``basis`` diagonalize the positive generator of the heat
    semigroup (Q^2, or the split Hamiltonian).  Divided-difference values
    are cached per sorted eigenvalue-index tuple, so repeated evaluations
    against the same generator (cochain sweeps, coboundary sums) stay
    cheap.
    """

    def __init__(self, lam: np.ndarray, basis: np.ndarray):
        self.lam = np.asarray(lam, dtype=float)
        self.basis = as_matrix(basis, "basis")
        self.dim = self.lam.size
        self._dd_cache: dict = {}

    @classmethod
    def for_triple(cls, t: SpectralTriple) -> "HeatEngine":
        if getattr(t, "_engine", None) is None:
            lam, v = t.heat_data()
            t._engine = cls(lam, v)
        return t._engine

    def to_eigenbasis(self, m: np.ndarray) -> np.ndarray:
        return self.basis.conj().T @ m @ self.basis

    def _weights(self, keys: np.ndarray, n: int, beta: float) -> np.ndarray:
        uk, inv = np.unique(keys, return_inverse=True)
        vals = np.empty(uk.size)
        cache = self._dd_cache
        lam = self.lam
        dim = self.dim
        for i, key in enumerate(uk):
            ck = (beta, n, int(key))
            v = cache.get(ck)
            if v is None:
                kk = int(key)
                idx = np.empty(n + 1, dtype=int)
                for pos in range(n, -1, -1):
                    idx[pos] = kk % dim
                    kk //= dim
                v = simplex_exp(lam[idx], beta)
                cache[ck] = v
            vals[i] = v
        return vals[inv]

    def exact(
        self,
        front: np.ndarray,
        rest: list[np.ndarray],
        beta: float = 1.0,
        term_budget: int = 10**8,
    ) -> tuple[complex, float]:
        """Tuple sum for Tr(front e^{-s_0 H} rest_1 e^{-s_1 H} ...).

        ``front`` and ``rest`` are given in the original basis; ``front``
        already includes the grading and group factors.  Returns the value
        and a kernel-accuracy error estimate.
        """
        n = len(rest)
        dim = self.dim
        total = dim ** (n + 1)
        if total > term_budget:
            raise ComplexityCap(
                f"dim^(n+1) = {dim}^{n + 1} = {total} exceeds budget {term_budget}"
            )
        mats = [self.to_eigenbasis(front)] + [self.to_eigenbasis(m) for m in rest]
        acc = 0.0 + 0.0j
        acc_abs = 0.0
        for start in range(0, total, _CHUNK):
            flat = np.arange(start, min(start + _CHUNK, total), dtype=np.int64)
            idx = np.empty((n + 1, flat.size), dtype=np.int64)
            rem = flat
            for pos in range(n, -1, -1):
                idx[pos] = rem % dim
                rem = rem // dim
            prod = mats[0][idx[0], idx[1 % (n + 1)]].copy()
            for j in range(1, n + 1):
                prod *= mats[j][idx[j], idx[(j + 1) % (n + 1)]]
            # the weight is symmetric in all n+1 indices
            srt = np.sort(idx, axis=0)
            keys = np.zeros(flat.size, dtype=np.int64)
            for row in srt:
                keys = keys * dim + row
            w = self._weights(keys, n, beta)
            acc += complex((prod * w).sum())
            acc_abs += float(np.abs(prod * w).sum())
        return acc, 1e-13 * acc_abs

    def _dd_counts(self, counts: np.ndarray, beta: float) -> np.ndarray:
        """Simplex weights for a batch of eigenindex count vectors.

        Small eigenvalue spreads take a vectorized route through complete
        homogeneous symmetric functions: with nodes shifted to z >= 0,

            weight = beta^n e^{-beta lam_min} sum_j (-1)^j h_j(z) / (n+j)!

        which the prefix recurrence for h_j evaluates stably (all inputs
        nonnegative).  Large spreads fall back to the bidiagonal matrix
        exponential per row.
        """
        m, _ = counts.shape
        k = int(counts[0].sum())  # common multiset size
        n = k - 1
        lam = self.lam
        out = np.empty(m)
        nodes = np.empty((m, k))
        for i in range(m):
            nodes[i] = np.repeat(lam, counts[i])
        mn = nodes.min(axis=1)
        z = beta * (nodes - mn[:, None])
        zmax = float(z.max()) if z.size else 0.0
        if zmax <= 8.0:
            terms = 14 + int(math.ceil(3.0 * zmax))
            # h_j over growing prefixes; ascending j uses the already
            # updated h_{j-1} at the current prefix
            hmat = np.zeros((terms + 1, m))
            hmat[0] = 1.0
            for pos in range(k):
                zp = z[:, pos]
                for j in range(1, terms + 1):
                    hmat[j] += zp * hmat[j - 1]
            total = np.zeros(m)
            for j in range(terms + 1):
                coeff = ((-1.0) ** j) * math.exp(
                    n * math.log(beta) - math.lgamma(n + j + 1.0)
                )
                total += coeff * hmat[j]
            out[:] = total * np.exp(-beta * mn)
            return out
        cache = self._dd_cache
        for i in range(m):
            key = tuple(int(c) for c in counts[i])
            ck = (beta, key)
            v = cache.get(ck)
            if v is None:
                v = simplex_exp(nodes[i], beta)
                cache[ck] = v
            out[i] = v
        return out

    def repeated_series_iter(
        self,
        front: np.ndarray,
        x: np.ndarray,
        beta: float = 1.0,
        state_budget: int = 2 * 10**6,
    ):
        """Yield <front-vertex, x, x, ..., x>_n for n = 0, 1, 2, ...

        Exploits the identical trailing vertices: ordered closed index
        walks are grouped by the multiset of eigenindices they visit,
        which fixes the simplex weight, and the walk sums grow by a
        vectorized dynamic program over multisets.  Cost is governed by
        the number of multisets, not dim^(n+1).
        """
        a = self.to_eigenbasis(front)
        xe = self.to_eigenbasis(x)
        dim = self.dim
        eye = np.eye(dim, dtype=np.int64)
        yield complex(
            np.sum(np.diag(a) * self._dd_counts(eye, beta))
        )
        # size-2 states: counts vector -> (start, current) amplitude matrix
        cand = (eye[:, None, :] + eye[None, :, :]).reshape(dim * dim, dim)
        counts, inv = np.unique(cand, axis=0, return_inverse=True)
        states = np.zeros((counts.shape[0], dim, dim), dtype=complex)
        flat = np.arange(dim * dim)
        np.add.at(states, (inv, flat // dim, flat % dim), a.reshape(-1))
        total_states = counts.shape[0]
        size = 2
        while True:
            p = states @ xe
            dd = self._dd_counts(counts, beta)
            yield complex(np.einsum("mii,m->", p, dd))
            # grow every multiset by one index l, moving amplitude into
            # the (start, l) slots
            m = counts.shape[0]
            cand = (counts[:, None, :] + eye[None, :, :]).reshape(m * dim, dim)
            new_counts, inv = np.unique(cand, axis=0, return_inverse=True)
            new_states = np.zeros((new_counts.shape[0], dim, dim), dtype=complex)
            cols = np.tile(np.arange(dim), m)
            vals = np.swapaxes(p, 1, 2).reshape(m * dim, dim)
            np.add.at(
                new_states,
                (inv[:, None], np.arange(dim)[None, :], cols[:, None]),
                vals,
            )
            counts, states = new_counts, new_states
            total_states += counts.shape[0]
            size += 1
            if total_states > state_budget:
                raise ComplexityCap(
                    f"multiset states {total_states} exceed budget "
                    f"{state_budget} at level {size - 1}"
                )

    def repeated_series(
        self,
        front: np.ndarray,
        x: np.ndarray,
        max_n: int,
        beta: float = 1.0,
        state_budget: int = 2 * 10**6,
    ) -> list[complex]:
        """<front-vertex, x, x, ..., x>_n for every n = 0..max_n."""
        out = []
        it = self.repeated_series_iter(front, x, beta, state_budget)
        for _ in range(max_n + 1):
            out.append(next(it))
        return out

    def quadrature(
        self,
        front: np.ndarray,
        rest: list[np.ndarray],
        beta: float = 1.0,
        samples: int = 200_000,
        seed: int = 0,
    ) -> tuple[complex, float]:
        """Monte-Carlo over the simplex; error is three standard errors.

        Simplex points are normalized i.i.d. exponentials (uniform on the
        unit simplex), scaled to the beta-plane.
        """
        n = len(rest)
        rng = np.random.default_rng(seed)
        mats = [self.to_eigenbasis(front)] + [self.to_eigenbasis(m) for m in rest]
        measure = beta**n / math.factorial(n)
        tot = 0.0 + 0.0j
        tot_sq = 0.0
        done = 0
        block = max(1, min(4096, samples))
        while done < samples:
            m = min(block, samples - done)
            e = rng.exponential(size=(m, n + 1))
            s = beta * e / e.sum(axis=1, keepdims=True)
            ker = np.exp(-s[:, :, None] * self.lam[None, None, :])
            cur = mats[0][None, :, :] * ker[:, 0, :][:, None, :]
            for j in range(1, n + 1):
                cur = cur @ mats[j]
                cur = cur * ker[:, j, :][:, None, :]
            vals = np.trace(cur, axis1=1, axis2=2)
            tot += complex(vals.sum())
            tot_sq += float((np.abs(vals) ** 2).sum())
            done += m
        mean = tot / samples
        var = max(tot_sq / samples - abs(mean) ** 2, 0.0)
        se = math.sqrt(var / samples)
        return measure * mean, 3.0 * measure * se


def _front_and_rest(t: SpectralTriple, mats: list[np.ndarray], g: int):
    if not mats:
        raise DimensionMismatch("need at least one vertex")
    for m in mats:
        if m.shape != (t.dim, t.dim):
            raise DimensionMismatch(
                f"vertex shape {m.shape} != ({t.dim}, {t.dim})"
            )
    front = t.gamma @ t.group[g] @ mats[0]
    return front, list(mats[1:])


def expectation_value(
    t: SpectralTriple,
    mats,
    g: int = 0,
    beta: float = 1.0,
    term_budget: int = 10**8,
) -> complex:
    """Exact <x_0,...,x_n;g>_n as a bare complex number (fast path)."""
    mats = [as_matrix(m) for m in mats]
    front, rest = _front_and_rest(t, mats, g)
    engine = HeatEngine.for_triple(t)
    val, _ = engine.exact(front, rest, beta=beta, term_budget=term_budget)
    return val


def repeated_expectation_series(
    t: SpectralTriple,
    x0,
    x,
    max_n: int,
    g: int = 0,
    beta: float = 1.0,
) -> list[complex]:
    """<x0, x, ..., x>_n for n = 0..max_n via the multiset walk engine."""
    front = t.gamma @ t.group[g] @ as_matrix(x0)
    return HeatEngine.for_triple(t).repeated_series(front, as_matrix(x), max_n, beta)


def heat_expectation(
    t: SpectralTriple,
    x,
    g: int = 0,
    method: str = "exact",
    samples: int = 200_000,
    seed: int = 0,
    term_budget: int = 10**8,
) -> ExpectationValue:
    """Expectation of a vertex set against the heat semigroup of Q^2.

    ``x`` may be a VertexSet (carrying types and a beta-plane) or a plain
    list of matrices (untyped, beta-plane 1).  ``method`` selects the
    exact tuple sum or seeded Monte-Carlo simplex quadrature.
    """
    vs = x if isinstance(x, VertexSet) else VertexSet(list(x))
    front, rest = _front_and_rest(t, vs.vertices, g)
    engine = HeatEngine.for_triple(t)
    if method == "exact":
        val, err = engine.exact(front, rest, beta=vs.beta_plane, term_budget=term_budget)
    elif method == "quadrature":
        val, err = engine.quadrature(
            front, rest, beta=vs.beta_plane, samples=samples, seed=seed
        )
    else:
        raise ValueError(f"unknown method {method!r}")
    return ExpectationValue(value=val, method=method, estimated_error=err)


def check_insert_identity(t: SpectralTriple, x, g: int = 0, **kw) -> float:
    """|<x_0..x_n> - sum_j <x_0..x_{j-1}, I, x_j..x_n>| over inserts j=1..n+1."""
    vs = x if isinstance(x, VertexSet) else VertexSet(list(x))
    lhs = heat_expectation(t, vs, g, **kw).value
    ident = np.eye(t.dim, dtype=complex)
    rhs = 0.0 + 0.0j
    verts = vs.vertices
    for j in range(1, len(verts) + 1):
        inserted = verts[:j] + [ident] + verts[j:]
        rhs += heat_expectation(
            t, VertexSet(inserted, beta_plane=vs.beta_plane), g, **kw
        ).value
    return abs(lhs - rhs)


def check_cyclic(t: SpectralTriple, x, g: int = 0, **kw) -> float:
    """|<x_0..x_n> - <gamma U(g)* x_n U(g) gamma, x_0..x_{n-1}>|."""
    vs = x if isinstance(x, VertexSet) else VertexSet(list(x))
    verts = vs.vertices
    lhs = heat_expectation(t, vs, g, **kw).value
    rotated = t.conj_gamma(t.conj_group_inv(verts[-1], g))
    rhs = heat_expectation(
        t, VertexSet([rotated] + verts[:-1], beta_plane=vs.beta_plane), g, **kw
    ).value
    return abs(lhs - rhs)


def check_d_invariance(t: SpectralTriple, x, g: int = 0, **kw) -> float:
    """|sum_j <x_0^gamma,..,x_{j-1}^gamma, dx_j, x_{j+1},..,x_n>|."""
    from .triples import derivative

    vs = x if isinstance(x, VertexSet) else VertexSet(list(x))
    verts = vs.vertices
    tot = 0.0 + 0.0j
    for j in range(len(verts)):
        mats = [t.conj_gamma(v) for v in verts[:j]] + [derivative(t, verts[j])] + list(
            verts[j + 1 :]
        )
        tot += heat_expectation(
            t, VertexSet(mats, beta_plane=vs.beta_plane), g, **kw
        ).value
    return abs(tot)


def duhamel_commutator(t: SpectralTriple, b, s: float = 1.0) -> float:
    """Deviation between [b, e^{-sQ^2}] and its divided-difference form.

    The right side is assembled entrywise in the eigenbasis of Q^2 from
    the kernel (e^{-s l_i} - e^{-s l_j})/(l_j - l_i) applied to [Q^2, b],
    with the confluent limit s e^{-s l} on coincident eigenvalues.
    """
    bm = as_matrix(b, "b")
    if not (0 < s <= 1):
        raise BadExponent(f"s must lie in (0, 1], got {s}")
    lam, v = t.heat_data()
    vh = v.conj().T
    heat = (v * np.exp(-s * lam)) @ vh
    lhs = bm @ heat - heat @ bm
    qsq = t.Q @ t.Q
    d2b = qsq @ bm - bm @ qsq
    d2e = vh @ d2b @ v
    n = t.dim
    kern = np.empty((n, n))
    pair_cache: dict = {}
    for i in range(n):
        for j in range(n):
            key = (min(lam[i], lam[j]), max(lam[i], lam[j]))
            val = pair_cache.get(key)
            if val is None:
                val = simplex_exp(np.array(key), s)
                pair_cache[key] = val
            kern[i, j] = val
    rhs = v @ (d2e * kern) @ vh
    return opnorm(lhs - rhs)


def bound_expectation(
    t: SpectralTriple, x: VertexSet, g: int = 0, mu: float = 0.5
) -> tuple[float, bool]:
    """Regularity bound on |<X;g>| from the declared vertex types.

    Returns (bound, satisfied) with
    bound = m1 m2^{n+1} / Gamma((n+1) eta_global) * prod ||x_j||_{(-beta_j, alpha_j)},
    m1 = Tr(e^{-(1-mu) Q^2}), m2 = 2 Gamma(eta_local) mu^{-(1-eta_global)}.
    """
    if not (0 < mu < 1):
        raise BadExponent(f"mu must lie in (0, 1), got {mu}")
    reg = x.regularity()
    lam, _ = t.heat_data()
    n = x.level
    m1 = float(np.sum(np.exp(-(1.0 - mu) * lam)))
    m2 = 2.0 * math.gamma(reg.eta_local) * mu ** (-(1.0 - reg.eta_global))
    prod = 1.0
    for v, vt in zip(x.vertices, x.types):
        prod *= sobolev_norm(t, v, -vt.beta, vt.alpha)
    bound = m1 * m2 ** (n + 1) / math.gamma((n + 1) * reg.eta_global) * prod
    value = expectation_value(t, x.vertices, g, beta=1.0)
    return bound, bool(abs(value) <= bound * (1.0 + 1e-12))


def bounded_vertex_bound(t: SpectralTriple, x: VertexSet, g: int = 0) -> tuple[float, bool]:
    """Sharper bound Tr(e^{-Q^2}) prod ||x_j|| / n! for bounded vertices."""
    lam, _ = t.heat_data()
    n = x.level
    prod = 1.0
    for v in x.vertices:
        prod *= opnorm(v)
    bound = float(np.sum(np.exp(-lam))) * prod / math.factorial(n)
    value = expectation_value(t, x.vertices, g, beta=1.0)
    return bound, bool(abs(value) <= bound * (1.0 + 1e-12))

"""Truncated chaos expansions and the Wick calculus on lattice fields.

A ChaosVector stores Phi = sum_n <Phi_n, :W^{(x)n}:> with every kernel a
weighted sum of symmetrized elementary tensors.  Factors live in one
deduplicated table and each order maps a sorted tuple of factor ids to its
weight, so terms with the same factor multiset merge automatically.
"""

from __future__ import annotations

import hashlib
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .green import GreenFunction, green_apply
from .lattice import LatticeField, LatticeGeometry, dft, lattice_delta, sobolev_norm
from .noise import FieldSample, InteractionH

_DROP = 1e-15


def _digest(arr: np.ndarray) -> bytes:
    return hashlib.blake2b(np.ascontiguousarray(arr).tobytes(), digest_size=16).digest()


def _ryser_masks(n: int) -> tuple:
    masks = np.array([[mask >> j & 1 for j in range(n)] for mask in range(1, 1 << n)], dtype=float)
    signs = (-1.0) ** (n - masks.sum(axis=1))
    return masks, signs


def permanents(mats: np.ndarray) -> np.ndarray:
    """Permanents of a stack (..., n, n) by Ryser's formula, vectorized over subsets."""
    mats = np.asarray(mats, dtype=complex)
    n = mats.shape[-1]
    if n == 0:
        return np.ones(mats.shape[:-2], dtype=complex)
    masks, signs = _ryser_masks(n)
    # row sums restricted to each column subset: (..., subsets, n)
    rows = np.einsum("...ij,sj->...si", mats, masks)
    return rows.prod(axis=-1) @ signs


def permanent(mat: np.ndarray) -> complex:
    """Permanent by Ryser's formula (exact sum, 2**n terms)."""
    return complex(permanents(np.asarray(mat)[None])[0])


@dataclass
class ChaosVector:
    geometry: LatticeGeometry
    nmax: int
    factors: list = field(default_factory=list)
    orders: list = field(default_factory=list)
    exact_through: int | None = None
    _index: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.nmax < 0:
            raise ValueError("nmax must be >= 0")
        if not self.orders:
            self.orders = [dict() for _ in range(self.nmax + 1)]
        if len(self.orders) != self.nmax + 1:
            raise ValueError("need one term table per order")
        if not self._index:
            self._index = {_digest(f): i for i, f in enumerate(self.factors)}

    # -- construction ------------------------------------------------------

    @classmethod
    def zero(cls, geometry: LatticeGeometry, nmax: int) -> "ChaosVector":
        return cls(geometry, nmax)

    @classmethod
    def vacuum(cls, geometry: LatticeGeometry, nmax: int = 0, value: complex = 1.0) -> "ChaosVector":
        out = cls(geometry, nmax)
        out.add_term(value, [])
        return out

    @classmethod
    def first_order(cls, g: LatticeField, nmax: int = 1, weight: complex = 1.0) -> "ChaosVector":
        """<g, :W:>."""
        out = cls(g.geometry, max(nmax, 1))
        out.add_term(weight, [g])
        return out

    @classmethod
    def wick_exponential(cls, g: LatticeField, nmax: int) -> "ChaosVector":
        """Kernels g^{(x)n}/n! for n <= nmax."""
        out = cls(g.geometry, nmax, exact_through=nmax)
        for n in range(nmax + 1):
            out.add_term(1 / math.factorial(n), [g] * n)
        return out

    def factor_id(self, f) -> int:
        arr = f.values if isinstance(f, LatticeField) else np.asarray(f)
        if isinstance(f, LatticeField) and f.geometry != self.geometry:
            raise ValueError("factor geometry mismatch")
        arr = np.ascontiguousarray(arr.reshape(self.geometry.shape))
        if np.iscomplexobj(arr) and not np.any(arr.imag):
            arr = arr.real.copy()
        key = _digest(arr)
        fid = self._index.get(key)
        if fid is None:
            fid = len(self.factors)
            self.factors.append(arr)
            self._index[key] = fid
        return fid

    def add_term(self, weight: complex, factors) -> None:
        n = len(factors)
        if n > self.nmax:
            raise ValueError(f"term of order {n} exceeds nmax={self.nmax}")
        ids = tuple(sorted(self.factor_id(f) for f in factors))
        table = self.orders[n]
        table[ids] = table.get(ids, 0j) + complex(weight)

    def copy(self) -> "ChaosVector":
        return ChaosVector(
            self.geometry,
            self.nmax,
            list(self.factors),
            [dict(t) for t in self.orders],
            self.exact_through,
            dict(self._index),
        )

    # -- inspection ----------------------------------------------------------

    @property
    def truncated(self) -> bool:
        return self.exact_through is not None

    @property
    def expectation(self) -> complex:
        """E_mu(Phi): the order-0 kernel."""
        return self.orders[0].get((), 0j)

    def terms(self, n: int):
        """(weight, [factor arrays]) for every term of order n."""
        for ids, w in self.orders[n].items():
            yield w, [self.factors[i] for i in ids]

    def term_count(self) -> int:
        return sum(len(t) for t in self.orders)

    def degree(self) -> int:
        for n in range(self.nmax, -1, -1):
            if self.orders[n]:
                return n
        return -1

    def compact(self, rel: float = _DROP) -> "ChaosVector":
        """Drop weights below ``rel`` times the largest weight."""
        big = max((abs(w) for t in self.orders for w in t.values()), default=0.0)
        out = self.copy()
        out.orders = [{k: w for k, w in t.items() if abs(w) > rel * big} for t in self.orders]
        return out

    def _merge_factors(self, other: "ChaosVector") -> dict:
        if other.geometry != self.geometry:
            raise ValueError("geometry mismatch")
        return {i: self.factor_id(f) for i, f in enumerate(other.factors)}

    # -- linear structure ------------------------------------------------------

    def __add__(self, other: "ChaosVector") -> "ChaosVector":
        nmax = max(self.nmax, other.nmax)
        out = self.with_nmax(nmax)
        remap = out._merge_factors(other)
        for n, table in enumerate(other.orders):
            dest = out.orders[n]
            for ids, w in table.items():
                key = tuple(sorted(remap[i] for i in ids))
                dest[key] = dest.get(key, 0j) + w
        out.exact_through = _min_exact(self.exact_through, other.exact_through)
        return out

    def scale(self, c: complex) -> "ChaosVector":
        out = self.copy()
        out.orders = [{k: c * w for k, w in t.items()} for t in self.orders]
        return out

    def __neg__(self):
        return self.scale(-1)

    def __sub__(self, other):
        return self + (-other)

    def with_nmax(self, nmax: int) -> "ChaosVector":
        out = self.copy()
        if nmax >= self.nmax:
            out.orders += [dict() for _ in range(nmax - self.nmax)]
        else:
            dropped = any(t for t in out.orders[nmax + 1 :])
            out.orders = out.orders[: nmax + 1]
            if dropped:
                out.exact_through = _min_exact(out.exact_through, nmax)
        out.nmax = nmax
        return out

    def without_constant(self) -> "ChaosVector":
        out = self.copy()
        out.orders[0] = {}
        return out

    # -- pairings ------------------------------------------------------------

    def factor_pairings(self, f: LatticeField) -> np.ndarray:
        """Bilinear <factor_i, f> for every factor."""
        if f.geometry != self.geometry:
            raise ValueError("geometry mismatch")
        if not self.factors:
            return np.zeros(0, dtype=complex)
        stack = np.stack([a.reshape(-1) for a in self.factors])
        return self.geometry.cell_volume * (stack @ f.values.reshape(-1))


def _min_exact(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


# ---------------------------------------------------------------------------
# Hermite polynomials and Wick monomials


def hermite_he(n: int, x):
    """Probabilists' Hermite polynomial He_n by the three-term recursion."""
    x = np.asarray(x, dtype=float)
    h0, h1 = np.ones_like(x), x
    if n == 0:
        return h0
    for k in range(1, n):
        h0, h1 = h1, x * h1 - k * h0
    return h1


def wick_monomial_eval(f: LatticeField, n: int, W: FieldSample) -> np.ndarray:
    """:<W, f>^n: = ||f||^n He_n(<W, f>/||f||) for every replica of W."""
    norm = f.l2_norm()
    x = np.real(W.pair(f))
    if n == 0:
        return np.ones_like(x)
    if norm == 0:
        return np.zeros_like(x)
    return norm**n * hermite_he(n, x / norm)


def chaos_eval(phi: ChaosVector, W: FieldSample) -> np.ndarray:
    """Evaluate Phi on samples: each term sum over n of <g_1...g_n, :W^n:>.

    The Wick-ordered product of pairings is expanded with the Hermite-type
    recursion :X_1...X_n: = X_n :X_1...X_{n-1}: - sum_i <g_i, g_n> :...^i...:.
    """
    vol = phi.geometry.cell_volume
    out = np.zeros(len(W), dtype=complex)
    fields = [LatticeField(phi.geometry, a) for a in phi.factors]
    X = [W.pair(f) for f in fields]
    for n in range(phi.nmax + 1):
        for ids, w in phi.orders[n].items():
            out += w * _wick_product_samples([X[i] for i in ids], [phi.factors[i] for i in ids], vol)
    return out


def _wick_product_samples(xs, arrays, vol):
    memo = {}

    def rec(idx):
        if not idx:
            return 1.0
        if idx in memo:
            return memo[idx]
        last = idx[-1]
        rest = idx[:-1]
        val = xs[last] * rec(rest)
        for pos, i in enumerate(rest):
            cov = vol * np.sum(arrays[i] * arrays[last])
            val = val - cov * rec(rest[:pos] + rest[pos + 1 :])
        memo[idx] = val
        return val

    return rec(tuple(range(len(xs))))


# ---------------------------------------------------------------------------
# S- and T-transforms


def s_transform(phi: ChaosVector, f: LatticeField) -> complex:
    """S Phi(f) = sum_n sum_j c_j prod_i <g_{j,i}, f>."""
    a = phi.factor_pairings(f)
    total = 0j
    for table in phi.orders:
        for ids, w in table.items():
            prod = 1.0 + 0j
            for i in ids:
                prod *= a[i]
            total += w * prod
    return complex(total)


def s_transform_series(phi: ChaosVector, f: LatticeField) -> np.ndarray:
    """Coefficients a_n with S Phi(lambda f) = sum_n a_n lambda^n."""
    a = phi.factor_pairings(f)
    out = np.zeros(phi.nmax + 1, dtype=complex)
    for n, table in enumerate(phi.orders):
        for ids, w in table.items():
            out[n] += w * np.prod([a[i] for i in ids])
    return out


def chaos_pairing(phi: ChaosVector, psi: ChaosVector) -> complex:
    """<<Phi, Psi>> = sum_n n! <Phi_n, Psi_n> with symmetrized kernels (permanent formula)."""
    if phi.geometry != psi.geometry:
        raise ValueError("geometry mismatch")
    vol = phi.geometry.cell_volume
    total = 0j
    for n in range(min(phi.nmax, psi.nmax) + 1):
        for ids_a, wa in phi.orders[n].items():
            A = [phi.factors[i].reshape(-1) for i in ids_a]
            for ids_b, wb in psi.orders[n].items():
                B = [psi.factors[i].reshape(-1) for i in ids_b]
                if n == 0:
                    total += wa * wb
                    continue
                gram = vol * (np.stack(A) @ np.stack(B).T)
                total += wa * wb * permanent(gram)
    return complex(total)


def t_transform(phi: ChaosVector, g: LatticeField) -> complex:
    """T Phi(g) = <<Phi, exp(i<W, g>)>> via the chaos expansion of the exponential.

    exp(i<W,g>) has kernels exp(-||g||^2/2) (ig)^{(x)n}/n!; the pairing is
    evaluated with permanents, independently of :func:`s_transform`.
    """
    ig = LatticeField(g.geometry, 1j * g.values)
    psi = ChaosVector.wick_exponential(ig, phi.nmax)
    return complex(np.exp(-0.5 * g.l2_norm() ** 2) * chaos_pairing(phi, psi))


def t_transform_via_s(phi: ChaosVector, g: LatticeField) -> complex:
    """exp(-||g||^2/2) S Phi(ig); the definition, used as the cross-check route."""
    ig = LatticeField(g.geometry, 1j * g.values)
    return complex(np.exp(-0.5 * g.l2_norm() ** 2) * s_transform(phi, ig))


# ---------------------------------------------------------------------------
# Wick products and Wick-analytic functions


def wick_product(phi: ChaosVector, psi: ChaosVector, nmax: int | None = None) -> ChaosVector:
    """Cauchy product of the kernel series, cut at ``nmax`` (default: full degree)."""
    if phi.geometry != psi.geometry:
        raise ValueError("geometry mismatch")
    full = phi.nmax + psi.nmax
    cap = full if nmax is None else min(nmax, full)
    out = ChaosVector(phi.geometry, cap, list(phi.factors), exact_through=None)
    out._index = dict(phi._index)
    remap = out._merge_factors(psi)
    dropped = False
    for a, ta in enumerate(phi.orders):
        if not ta:
            continue
        for b, tb in enumerate(psi.orders):
            if not tb:
                continue
            if a + b > cap:
                dropped = True
                continue
            dest = out.orders[a + b]
            for ids_a, wa in ta.items():
                for ids_b, wb in tb.items():
                    key = tuple(sorted(ids_a + tuple(remap[i] for i in ids_b)))
                    dest[key] = dest.get(key, 0j) + wa * wb
    exact = _min_exact(phi.exact_through, psi.exact_through)
    if dropped:
        exact = _min_exact(exact, cap)
    out.exact_through = exact
    return out


def wick_power(phi: ChaosVector, n: int, nmax: int) -> ChaosVector:
    out = ChaosVector.vacuum(phi.geometry, nmax)
    for _ in range(n):
        out = wick_product(out, phi, nmax)
    return out


def wick_analytic(coeffs, z0: complex, phi: ChaosVector, nmax: int, tol: float = 1e-12) -> ChaosVector:
    """F^<>(Phi) = sum_n c_n (Phi - z0)^<>n with z0 = E_mu(Phi).

    ``coeffs`` is a sequence c_0, c_1, ... or a callable n -> c_n.
    """
    if abs(z0 - phi.expectation) > tol * max(1.0, abs(z0)):
        raise ValueError(f"z0={z0} differs from E(Phi)={phi.expectation}")
    coef = coeffs if callable(coeffs) else (lambda n: coeffs[n] if n < len(coeffs) else 0.0)
    centred = phi.without_constant().with_nmax(min(phi.nmax, nmax))
    out = ChaosVector.vacuum(phi.geometry, nmax, coef(0))
    power = ChaosVector.vacuum(phi.geometry, nmax)
    for n in range(1, nmax + 1):
        power = wick_product(power, centred, nmax)
        out = out + power.scale(coef(n))
    # the unused powers only reach orders above nmax
    more = callable(coeffs) or any(c != 0 for c in coeffs[nmax + 1 :])
    if centred.degree() > 0 and more:
        out.exact_through = _min_exact(out.exact_through, nmax)
    out.exact_through = _min_exact(out.exact_through, phi.exact_through)
    return out.compact(0.0)


def wick_exp(phi: ChaosVector, nmax: int) -> ChaosVector:
    z0 = phi.expectation
    ez = complex(np.exp(z0))
    return wick_analytic(lambda n: ez / math.factorial(n), z0, phi, nmax)


# ---------------------------------------------------------------------------
# Kondratiev norms


@dataclass(frozen=True)
class KondratievNormParams:
    l: int
    k: int
    beta: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.beta <= 1.0:
            raise ValueError("beta must lie in [0, 1]")


def _sobolev_gram(phi: ChaosVector, l: float) -> np.ndarray:
    """Hermitian Gram matrix <factor_a, factor_b>_l of the factor table."""
    geo = phi.geometry
    if not phi.factors:
        return np.zeros((0, 0), dtype=complex)
    w = geo.bracket_grid().reshape(-1) ** l
    hats = np.stack([dft(LatticeField(geo, a)).values.reshape(-1) for a in phi.factors])
    return geo.cell_volume * (hats.conj() * w) @ hats.T


def kernel_norms_sq(phi: ChaosVector, l: float) -> np.ndarray:
    """||Phi_n||_l^2 of the symmetrized kernels, order by order."""
    gram = _sobolev_gram(phi, l)
    out = np.zeros(phi.nmax + 1)
    for n, table in enumerate(phi.orders):
        if not table:
            continue
        ids = np.array(list(table.keys()), dtype=int).reshape(len(table), n)
        w = np.array(list(table.values()), dtype=complex)
        acc = 0j
        for a in range(len(w)):
            blocks = gram[ids[a][None, :, None], ids[:, None, :]]
            acc += np.conj(w[a]) * (permanents(blocks) @ w)
        out[n] = float(acc.real) / math.factorial(n)
    return out


def kondratiev_norm_terms(phi: ChaosVector, params: KondratievNormParams, sign: str = "test") -> np.ndarray:
    """Per-order contributions to the squared Kondratiev norm."""
    if sign not in ("test", "distribution"):
        raise ValueError("sign must be 'test' or 'distribution'")
    s = 1 if sign == "test" else -1
    kn = kernel_norms_sq(phi, s * params.l)
    n = np.arange(phi.nmax + 1)
    fact = np.array([float(math.factorial(i)) for i in n])
    return fact ** (1 + s * params.beta) * 2.0 ** (s * n * params.k) * kn


def kondratiev_norm(phi: ChaosVector, params: KondratievNormParams, sign: str = "test") -> float:
    """||Phi||_{l,k,beta} (test side) or ||Phi||_{-l,-k,-beta} (distribution side)."""
    return float(np.sqrt(kondratiev_norm_terms(phi, params, sign).sum()))


def wick_exponential_norm_ratio(g: LatticeField, params: KondratievNormParams, nmax: int = 4) -> tuple:
    """(ratio, diverges) for the test-side norm series of the Wick exponential of g.

    With beta = 1 the n-th contribution is (2^k ||g||_l^2)^n; the ratio is
    read off consecutive contributions and the series diverges iff it is >= 1.
    """
    terms = kondratiev_norm_terms(ChaosVector.wick_exponential(g, nmax), params, "test")
    ratio = float(terms[2] / terms[1]) if terms[1] > 0 else 0.0
    return ratio, bool(ratio >= 1.0 - 1e-12)


# ---------------------------------------------------------------------------
# interaction densities


def interaction_potential(h: InteractionH, factor_fields: list, nmax: int) -> ChaosVector:
    """sum_c vol sum_k (H_k/k!) e_c^{(x)k} for the per-cell fields e_c."""
    geo = factor_fields[0].geometry
    vol = geo.cell_volume
    out = ChaosVector(geo, nmax)
    for e in factor_fields:
        for k in range(1, min(h.nmax, nmax) + 1):
            hk = h.coefficient(k)
            if hk != 0:
                out.add_term(vol * hk / math.factorial(k), [e] * k)
    if h.degree > nmax or h.truncated:
        out.exact_through = nmax
    return out


def _cell_deltas(geometry: LatticeGeometry) -> list:
    return [lattice_delta(geometry, idx) for idx in np.ndindex(geometry.shape)]


def phi_h(h: InteractionH, geometry: LatticeGeometry, nmax: int) -> ChaosVector:
    """Phi_H = exp^<>(-V) with V built from the cell deltas."""
    V = interaction_potential(h, _cell_deltas(geometry), nmax)
    return wick_exp(-V, nmax)


def trace_correction(green: GreenFunction) -> ChaosVector:
    """Order-2 kernel sum_c vol [(G*d_c)^{(x)2} - d_c^{(x)2}]."""
    geo = green.geometry
    vol = geo.cell_volume
    out = ChaosVector(geo, 2)
    for d in _cell_deltas(geo):
        gd = green_apply(green, d)
        out.add_term(vol, [gd, gd])
        out.add_term(-vol, [d, d])
    return out


def phi_h_convolved(h: InteractionH, green: GreenFunction, geometry: LatticeGeometry, nmax: int) -> ChaosVector:
    """exp^<>(-V_G + Tr/2) with V_G built from G * d_c."""
    if green.geometry != geometry:
        raise ValueError("green function geometry differs")
    gd = [green_apply(green, d) for d in _cell_deltas(geometry)]
    V = interaction_potential(h, gd, nmax)
    arg = -V
    if nmax >= 2:
        arg = arg + trace_correction(green).scale(0.5).with_nmax(nmax)
    return wick_exp(arg, nmax)


def series_exp(coeffs, order: int) -> np.ndarray:
    """Taylor coefficients of exp(sum_n e_n x^n) through ``order`` (e_0 allowed)."""
    e = np.zeros(order + 1, dtype=complex)
    e[: min(len(coeffs), order + 1)] = np.asarray(coeffs, dtype=complex)[: order + 1]
    out = np.zeros(order + 1, dtype=complex)
    out[0] = np.exp(e[0])
    # b' = e' b  =>  n b_n = sum_{k=1}^n k e_k b_{n-k}
    for n in range(1, order + 1):
        out[n] = sum(k * e[k] * out[n - k] for k in range(1, n + 1)) / n
    return out


def t_series_chaos(phi: ChaosVector, g: LatticeField, order: int) -> np.ndarray:
    """Taylor coefficients of lambda -> T Phi(lambda g) from the chaos kernels."""
    if order > phi.nmax:
        raise ValueError(f"order {order} exceeds nmax={phi.nmax}")
    if phi.exact_through is not None and order > phi.exact_through:
        raise ValueError(f"kernels are exact only through order {phi.exact_through}")
    ig = LatticeField(g.geometry, 1j * g.values)
    s = s_transform_series(phi, ig)[: order + 1]
    gauss = series_exp([0, 0, -0.5 * g.l2_norm() ** 2], order)
    return np.convolve(s, gauss)[: order + 1]


def t_series_closed_form(h: InteractionH, g: LatticeField, order: int, green: GreenFunction | None = None) -> np.ndarray:
    """Taylor coefficients of lambda -> exp(-int H(i lambda u) - lambda^2 ||u||^2/2), u = G*g or g."""
    u = green_apply(green, g) if green is not None else g
    vol = g.geometry.cell_volume
    e = np.zeros(order + 1, dtype=complex)
    for k in range(1, order + 1):
        e[k] -= vol * h.coefficient(k) * np.sum((1j * u.values) ** k) / math.factorial(k)
    if order >= 2:
        e[2] -= 0.5 * u.l2_norm() ** 2
    return series_exp(e, order)


# ---------------------------------------------------------------------------
# OS1 growth bound


def bessel_i0(x: float, terms: int = 60) -> float:
    """I_0(x) = sum_j (x/2)^{2j} / (j!)^2."""
    total, term = 0.0, 1.0
    for j in range(terms):
        if j:
            term *= (x / 2) ** 2 / (j * j)
        total += term
        if term < 1e-18 * total:
            break
    return total


@dataclass
class OS1Report:
    K: float
    C: float
    i0: float
    rows: list  # (n, |S_n|, bound, slack)

    @property
    def holds(self) -> bool:
        return all(row[3] > 0 for row in self.rows)


def schwinger_from_chaos(phi: ChaosVector, fs: list) -> complex:
    """S_n(f_1..f_n) = (-i)^n d^n/dt_1..dt_n T Phi(sum t_i f_i) at 0, by exact polarization.

    The derivative of S Phi(i sum t f) over an index set A picks the order |A|
    kernel and gives i^{|A|} times a permanent; the Gaussian factor
    exp(-||sum t f||^2/2) contributes a sum over perfect matchings of the
    complement.
    """
    n = len(fs)
    if phi.exact_through is not None and n > phi.exact_through:
        raise ValueError(f"order {n} exceeds the certified chaos order {phi.exact_through}")
    vol = phi.geometry.cell_volume
    F = np.stack([f.values.reshape(-1) for f in fs]) if fs else np.zeros((0, phi.geometry.size))
    cov = vol * (F @ F.T)
    if phi.factors:
        P = vol * (np.stack([a.reshape(-1) for a in phi.factors]) @ F.T)
    total = 0j
    for r in range(n + 1):
        if r > phi.nmax:
            break
        for A in itertools.combinations(range(n), r):
            rest = [i for i in range(n) if i not in A]
            if len(rest) % 2:
                continue
            chaos = 0j
            for ids, w in phi.orders[r].items():
                chaos += w * (permanent(P[np.ix_(ids, A)]) if r else 1.0)
            if chaos == 0:
                continue
            total += (1j) ** r * chaos * _matching_sum(rest, cov)
    return complex((-1j) ** n * total)


def _matching_sum(idx: list, cov: np.ndarray) -> float:
    """sum over perfect matchings of idx of prod (-cov[a, b])."""
    if not idx:
        return 1.0
    first, rest = idx[0], idx[1:]
    total = 0.0
    for pos, j in enumerate(rest):
        total += -cov[first, j] * _matching_sum(rest[:pos] + rest[pos + 1 :], cov)
    return total


def os1_bound_check(phi: ChaosVector, params: KondratievNormParams, tuples: list) -> OS1Report:
    """|S_n(f_1..f_n)| <= K C^n n! prod ||f_i||_l with K = sqrt(I0(2^-k)) ||Phi||_{-l,-k,-1}, C = e 2^{k/2}."""
    i0 = bessel_i0(2.0 ** (-params.k))
    if not i0 < 1.3:
        raise ValueError(f"I0(2^-k) = {i0} is not below 1.3")
    dist = KondratievNormParams(params.l, params.k, 1.0)
    K = math.sqrt(i0) * kondratiev_norm(phi, dist, "distribution")
    C = math.e * 2.0 ** (params.k / 2)

    rows = []
    for fs in tuples:
        n = len(fs)
        val = abs(schwinger_from_chaos(phi, list(fs)))
        bound = K * C**n * math.factorial(n) * float(np.prod([sobolev_norm(f, params.l) for f in fs]))
        rows.append((n, val, bound, bound - val))
    return OS1Report(K, C, i0, rows)

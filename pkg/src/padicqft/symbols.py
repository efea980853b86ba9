"""Elliptic polynomials and the symbols of the operators built on them."""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .lattice import LatticeField, LatticeGeometry, apply_multiplier
from .padic import PadicVector, is_prime, valuation

VARIANTS = ("l-power", "shifted-power", "bessel")


@dataclass(frozen=True)
class EllipticPolynomial:
    """Homogeneous integer polynomial ``sum coeff * xi**exponents``.

    ``terms`` is a tuple of ``(coeff, exponents)`` pairs. Ellipticity is not
    assumed; see :func:`ellipticity_check`.
    """

    p: int
    terms: tuple

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"p must be prime, got {self.p}")
        terms = tuple((int(c), tuple(int(e) for e in exps)) for c, exps in self.terms if c != 0)
        if not terms:
            raise ValueError("polynomial has no nonzero terms")
        dims = {len(e) for _, e in terms}
        if len(dims) != 1:
            raise ValueError("exponent vectors have different lengths")
        degrees = {sum(e) for _, e in terms}
        if len(degrees) != 1:
            raise ValueError(f"polynomial is not homogeneous (degrees {sorted(degrees)})")
        if degrees.pop() == 0:
            raise ValueError("constant polynomial")
        object.__setattr__(self, "terms", terms)

    @property
    def N(self) -> int:
        return len(self.terms[0][1])

    @property
    def degree(self) -> int:
        return sum(self.terms[0][1])

    @classmethod
    def from_json(cls, p: int, data) -> "EllipticPolynomial":
        if isinstance(data, str):
            data = json.loads(data)
        return cls(p, tuple((t["coeff"], tuple(t["exponents"])) for t in data))

    def to_json(self) -> list:
        return [{"coeff": c, "exponents": list(e)} for c, e in self.terms]

    def __call__(self, vec) -> int:
        """Exact value at an integer vector."""
        total = 0
        for c, exps in self.terms:
            term = c
            for x, e in zip(vec, exps):
                term *= int(x) ** e
            total += term
        return total

    def gradient(self, vec) -> list:
        grad = []
        for i in range(self.N):
            total = 0
            for c, exps in self.terms:
                if exps[i] == 0:
                    continue
                term = c * exps[i]
                for j, (x, e) in enumerate(zip(vec, exps)):
                    term *= int(x) ** (e - 1 if j == i else e)
                total += term
            grad.append(total)
        return grad

    def on_grid(self, geometry: LatticeGeometry) -> np.ndarray:
        """Integer values l(n) at every grid index n (int64 when safe, else Python ints)."""
        m1 = geometry.axis_size
        bound = sum(abs(c) for c, _ in self.terms) * (m1 - 1) ** self.degree
        dtype = np.int64 if bound < 2**62 else object
        axes = [np.arange(m1, dtype=np.int64).astype(dtype) for _ in range(self.N)]
        grids = np.meshgrid(*axes, indexing="ij")
        total = np.zeros(geometry.shape, dtype=dtype)
        for c, exps in self.terms:
            term = np.full(geometry.shape, c, dtype=dtype)
            for g, e in zip(grids, exps):
                if e:
                    term = term * g**e
            total = total + term
        return total

    def abs_on_grid(self, geometry: LatticeGeometry) -> np.ndarray:
        """|l(xi)|_p on the frequency grid, via l(n p**-K) = l(n) p**(-dK)."""
        if geometry.N != self.N or geometry.p != self.p:
            raise ValueError("geometry does not match the polynomial")
        vals = self.on_grid(geometry)
        v = array_valuation(vals, self.p)
        out = np.zeros(geometry.shape)
        nz = v >= 0
        out[nz] = np.power(float(self.p), (self.degree * geometry.K - v[nz]).astype(float))
        return out


def array_valuation(values: np.ndarray, p: int) -> np.ndarray:
    """Elementwise v_p of an integer array; -1 marks zero entries."""
    vals = np.array(values, copy=True)
    out = np.zeros(vals.shape, dtype=np.int64)
    zero = vals == 0
    vals[zero] = 1
    active = np.ones(vals.shape, dtype=bool)
    while True:
        div = active & (vals % p == 0)
        if not div.any():
            break
        out[div] += 1
        vals[div] = vals[div] // p
        active = div
    out[zero] = -1
    return out


def padic_abs_poly(l: EllipticPolynomial, xi: PadicVector) -> float:
    """|l(xi)|_p exactly, for lattice-representable xi."""
    if xi.p != l.p or xi.N != l.N:
        raise ValueError("point does not match the polynomial")
    K = max(c.K for c in xi.coords)
    ints = [c.n * l.p ** (K - c.K) for c in xi.coords]
    value = l(ints)
    if value == 0:
        return 0.0
    return float(Fraction(l.p) ** (l.degree * K - valuation(value, l.p)))


# ---------------------------------------------------------------------------
# ellipticity


@dataclass
class EllipticityVerdict:
    """Outcome of the unit-sphere scan.

    ``elliptic`` is True (no zero on S_0^N), False (Hensel witness found) or
    None (inconclusive at this depth).  ``histogram`` maps a valuation v to
    the Haar measure of {u in S_0^N : v_p(l(u)) = v} over the retired classes.
    """

    p: int
    elliptic: bool | None
    depth: int
    witness: tuple | None = None
    witness_precision: int = 0
    histogram: dict = field(default_factory=dict)
    remaining_measure: Fraction = Fraction(0)

    @property
    def inconclusive(self) -> bool:
        return self.elliptic is None

    @property
    def C0(self) -> float:
        """min |l| over the unit sphere; 0 unless certified elliptic."""
        if not self.elliptic:
            return 0.0
        return float(Fraction(1, self.p ** max(self.histogram)))

    @property
    def C1(self) -> float:
        """max |l| over the retired part of the unit sphere."""
        if not self.histogram:
            return 0.0
        return float(Fraction(1, self.p ** min(self.histogram)))


def _primitive_residues(p: int, N: int):
    for u in itertools.product(range(p), repeat=N):
        if any(u):
            yield u


def _hensel_lift(l: EllipticPolynomial, u: tuple, precision: int) -> tuple | None:
    """Newton lift of a root mod p**k to a root mod p**precision, or None."""
    p = l.p
    u = list(u)
    for _ in range(4 * precision + 8):
        value = l(u)
        vl = valuation(value, p)
        if vl >= precision:
            mod = p**precision
            return tuple(x % mod for x in u)
        grad = l.gradient(u)
        vg = [valuation(g, p) for g in grad]
        e = min(vg)
        if e == math.inf or vl <= 2 * e:
            return None
        i = vg.index(e)
        mod = p ** (precision + e + 1)
        unit = (grad[i] // p**e) % mod
        step = (value // p**e) * pow(unit, -1, mod)
        u[i] = (u[i] - step) % mod
    return None


def ellipticity_check(l: EllipticPolynomial, depth: int, max_classes: int = 2_000_000) -> EllipticityVerdict:
    """Scan the unit sphere S_0^N modulo p**depth by residue-class refinement.

    Classes with l(u) not divisible by p**k at level k have an exact
    valuation and are retired into the histogram.  A surviving class whose
    representative passes the Hensel criterion v(l(u)) > 2 min_i v(d_i l(u))
    is lifted to a genuine zero and returned as a witness.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    p, N = l.p, l.N
    hist: dict[int, Fraction] = {}
    survivors = []
    for u in _primitive_residues(p, N):
        if l(u) % p == 0:
            survivors.append(u)
        else:
            hist[0] = hist.get(0, Fraction(0)) + Fraction(1, p**N)
    level = 1
    while True:
        for u in survivors:
            lifted = _hensel_lift(l, u, max(2 * depth, level + 1))
            if lifted is not None:
                return EllipticityVerdict(
                    p, False, depth, witness=lifted, witness_precision=max(2 * depth, level + 1),
                    histogram=hist, remaining_measure=Fraction(len(survivors), p ** (level * N)),
                )
        if not survivors or level >= depth:
            break
        if len(survivors) * p**N > max_classes:
            break
        nxt = []
        mod = p ** (level + 1)
        step = p**level
        for u in survivors:
            for t in itertools.product(range(p), repeat=N):
                w = tuple(a + step * b for a, b in zip(u, t))
                if l(w) % mod == 0:
                    nxt.append(w)
                else:
                    hist[level] = hist.get(level, Fraction(0)) + Fraction(1, p ** ((level + 1) * N))
        survivors = nxt
        level += 1
    remaining = Fraction(len(survivors), p ** (level * N))
    if not survivors:
        return EllipticityVerdict(p, True, depth, histogram=hist)
    return EllipticityVerdict(p, None, depth, histogram=hist, remaining_measure=remaining)


def sphere_valuation_histogram(l: EllipticPolynomial, depth: int = 16) -> dict:
    """Haar measure of {u in S_0^N : v_p(l(u)) = v} for each v (elliptic l only)."""
    verdict = ellipticity_check(l, depth)
    if not verdict.elliptic:
        raise ValueError(f"polynomial is not certified elliptic at depth {depth}")
    return dict(verdict.histogram)


# ---------------------------------------------------------------------------
# symbols


@dataclass(frozen=True)
class SymbolSpec:
    polynomial: EllipticPolynomial
    alpha: float
    m: float
    beta: float = 1.0
    variant: str = "l-power"

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}")
        if self.alpha <= 0 or self.m <= 0 or self.beta <= 0:
            raise ValueError("alpha, m and beta must be positive")
        if self.beta != 1.0 and self.variant != "bessel":
            raise ValueError(f"beta only applies to the bessel variant, got beta={self.beta} with {self.variant!r}")

    @property
    def p(self) -> int:
        return self.polynomial.p

    @property
    def N(self) -> int:
        return self.polynomial.N

    @property
    def degree(self) -> int:
        return self.polynomial.degree

    @property
    def growth(self) -> float:
        """Exponent g with symbol ~ ||xi||**g at infinity."""
        d = self.degree
        if self.variant == "l-power":
            return self.alpha * d
        if self.variant == "shifted-power":
            return self.alpha * d
        return self.alpha * d * self.beta

    def of_abs(self, a):
        """Symbol as a function of |l(xi)|_p (works on arrays)."""
        a = np.asarray(a, dtype=float)
        m2 = self.m**2
        if self.variant == "l-power":
            return a**self.alpha + m2
        if self.variant == "shifted-power":
            return (a + m2) ** self.alpha
        return (a**self.alpha + m2) ** self.beta

    @property
    def floor(self) -> float:
        return float(self.of_abs(0.0))

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "poly": self.polynomial.to_json(),
            "alpha": self.alpha,
            "m": self.m,
            "beta": self.beta,
            "variant": self.variant,
        }


def symbol_eval(s: SymbolSpec, xi: PadicVector) -> float:
    return float(s.of_abs(padic_abs_poly(s.polynomial, xi)))


def symbol_grid(s: SymbolSpec, geometry: LatticeGeometry) -> np.ndarray:
    """Symbol at every frequency-cell representative (zero cell -> xi = 0)."""
    return s.of_abs(s.polynomial.abs_on_grid(geometry))


def bound_constants(s: SymbolSpec, K: int) -> tuple:
    """(C0, C1) with C0 ||xi||**(alpha d) <= |l(xi)|**alpha <= C1 ||xi||**(alpha d).

    By homogeneity the extreme values of |l| on the unit sphere determine
    every sphere; they come from the exact refinement scan to depth 2K.
    """
    verdict = ellipticity_check(s.polynomial, max(1, 2 * K))
    if not verdict.elliptic:
        return 0.0, verdict.C1**s.alpha
    return verdict.C0**s.alpha, verdict.C1**s.alpha


def apply_operator(s: SymbolSpec, f: LatticeField) -> LatticeField:
    """idft(symbol * dft(f)): the operator with the given symbol (L_alpha + m**2 for l-power)."""
    if f.geometry.p != s.p or f.geometry.N != s.N:
        raise ValueError("field geometry does not match the symbol")
    return apply_multiplier(symbol_grid(s, f.geometry), f)


def preserves_abs(l: EllipticPolynomial, matrix, geometry: LatticeGeometry) -> bool:
    """Exhaustive check of |l(Lambda xi)|_p = |l(xi)|_p on the grid for an integer matrix."""
    lam = np.asarray(matrix, dtype=np.int64)
    a = l.abs_on_grid(geometry)
    idx = np.indices(geometry.shape).reshape(geometry.N, -1)
    mapped = (lam @ idx) % geometry.axis_size
    return bool(np.array_equal(a.reshape(-1), a[tuple(mapped)]))


# ---------------------------------------------------------------------------
# catalog


def non_residue(p: int) -> int:
    """Smallest positive quadratic non-residue mod an odd prime."""
    if p == 2:
        raise ValueError("no quadratic non-residue classes mod 2")
    for s in range(2, p):
        if pow(s, (p - 1) // 2, p) == p - 1:
            return s
    raise ValueError("unreachable")


def power_polynomial(p: int, d: int) -> EllipticPolynomial:
    """xi**d on Q_p (N = 1)."""
    return EllipticPolynomial(p, ((1, (d,)),))


def binary_norm_form(p: int) -> EllipticPolynomial:
    """Anisotropic binary quadratic form with |l(xi)|_p = ||xi||_p**2."""
    if p == 2:
        return EllipticPolynomial(2, ((1, (2, 0)), (1, (1, 1)), (1, (0, 2))))
    s = non_residue(p)
    return EllipticPolynomial(p, ((1, (2, 0)), (-s, (0, 2))))


def ternary_form(p: int) -> EllipticPolynomial:
    """xi1**2 - s xi2**2 - p xi3**2 (p odd)."""
    s = non_residue(p)
    return EllipticPolynomial(p, ((1, (2, 0, 0)), (-s, (0, 2, 0)), (-p, (0, 0, 2))))


def quaternary_form_as_printed(p: int) -> EllipticPolynomial:
    """xi1**2 - s xi2**2 - p xi3**2 + s xi4**2, with the coefficients exactly as quoted.

    This form has the zero (0, 1, 0, 1), so it is not elliptic;
    :func:`quaternary_form` is the anisotropic one.
    """
    s = non_residue(p)
    return EllipticPolynomial(
        p, ((1, (2, 0, 0, 0)), (-s, (0, 2, 0, 0)), (-p, (0, 0, 2, 0)), (s, (0, 0, 0, 2)))
    )


def quaternary_form(p: int) -> EllipticPolynomial:
    """The anisotropic quaternary form xi1**2 - s xi2**2 - p xi3**2 + p s xi4**2."""
    s = non_residue(p)
    return EllipticPolynomial(
        p, ((1, (2, 0, 0, 0)), (-s, (0, 2, 0, 0)), (-p, (0, 0, 2, 0)), (p * s, (0, 0, 0, 2)))
    )


def squared_norm_form(p: int) -> EllipticPolynomial:
    """(binary norm form)**2, a degree-4 elliptic polynomial in N = 2."""
    base = binary_norm_form(p)
    terms: dict = {}
    for (c1, e1), (c2, e2) in itertools.product(base.terms, repeat=2):
        e = tuple(a + b for a, b in zip(e1, e2))
        terms[e] = terms.get(e, 0) + c1 * c2
    return EllipticPolynomial(p, tuple((c, e) for e, c in terms.items()))


CATALOG = {
    "power": power_polynomial,
    "binary": binary_norm_form,
    "ternary": ternary_form,
    "quaternary": quaternary_form,
    "squared-binary": squared_norm_form,
}

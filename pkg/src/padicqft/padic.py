"""Exact arithmetic on p-adic rationals of the form n * p**-K.

Every value the lattice ever touches is of this form, so valuations,
norms and fractional parts are computed exactly with Python integers.
Only the final complex exponential in :func:`character` is inexact.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering
from typing import Iterable, Sequence, Union

Number = Union[int, Fraction, "PadicRational"]


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p < 4:
        return True
    if p % 2 == 0:
        return False
    return all(p % q for q in range(3, math.isqrt(p) + 1, 2))


def valuation(n: int, p: int) -> float:
    """p-adic valuation of an integer; ``math.inf`` for zero."""
    if n == 0:
        return math.inf
    n = abs(n)
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def _check_prime(p: int) -> None:
    if not is_prime(p):
        raise ValueError(f"p must be prime, got {p}")


@total_ordering
@dataclass(frozen=True)
class PadicRational:
    """The p-adic number ``n * p**-K`` with ``K >= 0``.

    Construction reduces to the canonical form: while ``K > 0`` and
    ``p | n`` the common power of p is cancelled; zero is stored as
    ``n = 0, K = 0``.
    """

    p: int
    K: int
    n: int

    def __post_init__(self):
        _check_prime(self.p)
        if self.K < 0:
            raise ValueError("scale K must be >= 0")
        n, K = int(self.n), int(self.K)
        if n == 0:
            K = 0
        while K > 0 and n % self.p == 0:
            n //= self.p
            K -= 1
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "K", K)

    @classmethod
    def from_value(cls, p: int, x) -> "PadicRational":
        """Build from an int or a Fraction whose denominator is a power of p."""
        if isinstance(x, PadicRational):
            if x.p != p:
                raise ValueError("prime mismatch")
            return x
        x = Fraction(x)
        den = x.denominator
        K = 0
        while den % p == 0:
            den //= p
            K += 1
        if den != 1:
            raise ValueError(f"{x} is not of the form n * {p}**-K")
        return cls(p, K, x.numerator)

    def to_fraction(self) -> Fraction:
        return Fraction(self.n, self.p**self.K)

    @property
    def ord(self) -> float:
        if self.n == 0:
            return math.inf
        return valuation(self.n, self.p) - self.K

    def norm(self) -> float:
        return norm(self)

    def fractional_part(self) -> Fraction:
        return fractional_part(self)

    def _coerce(self, other) -> "PadicRational":
        if isinstance(other, PadicRational):
            if other.p != self.p:
                raise ValueError("prime mismatch")
            return other
        return PadicRational.from_value(self.p, other)

    def __add__(self, other):
        o = self._coerce(other)
        K = max(self.K, o.K)
        n = self.n * self.p ** (K - self.K) + o.n * self.p ** (K - o.K)
        return PadicRational(self.p, K, n)

    __radd__ = __add__

    def __neg__(self):
        return PadicRational(self.p, self.K, -self.n)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        return PadicRational(self.p, self.K + o.K, self.n * o.n)

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, PadicRational):
            return self.p == other.p and self.K == other.K and self.n == other.n
        if isinstance(other, (int, Fraction)):
            return self.to_fraction() == other
        return NotImplemented

    def __lt__(self, other):
        # archimedean order on the underlying rational, for sorting only
        if isinstance(other, PadicRational):
            return self.to_fraction() < other.to_fraction()
        return self.to_fraction() < Fraction(other)

    def __hash__(self):
        return hash((self.p, self.K, self.n))

    def __repr__(self):
        return f"PadicRational(p={self.p}, {self.to_fraction()})"


def _as_fraction(x, p: int) -> Fraction:
    if isinstance(x, PadicRational):
        if x.p != p:
            raise ValueError("prime mismatch")
        return x.to_fraction()
    return Fraction(x)


def ord_p(x, p: int | None = None) -> float:
    """Valuation of any rational (``math.inf`` at zero)."""
    if p is None:
        if not isinstance(x, PadicRational):
            raise TypeError("p is required for non-PadicRational input")
        p = x.p
    q = _as_fraction(x, p)
    if q == 0:
        return math.inf
    return valuation(q.numerator, p) - valuation(q.denominator, p)


def norm(x, p: int | None = None) -> float:
    """|x|_p = p**-ord(x), and 0 at x = 0."""
    if p is None:
        p = x.p
    v = ord_p(x, p)
    if v == math.inf:
        return 0.0
    return float(Fraction(p) ** int(-v))


def fractional_part(x, p: int | None = None) -> Fraction:
    """The p-adic fractional part {x}_p as an exact rational in [0, 1).

    Accepts any rational; for x = u / (p**k * v) with p not dividing v the
    result is ``(u * v**-1 mod p**k) / p**k``.
    """
    if p is None:
        p = x.p
    q = _as_fraction(x, p)
    v = ord_p(q, p)
    if v >= 0:
        return Fraction(0)
    k = int(-v)
    pk = p**k
    num, den = q.numerator, q.denominator
    v_den = den // pk  # den = p**k * v_den with p not dividing v_den
    r = (num * pow(v_den, -1, pk)) % pk
    return Fraction(r, pk)


def character(x, p: int | None = None) -> complex:
    """Additive character chi_p(x) = exp(2 pi i {x}_p)."""
    frac = fractional_part(x, p)
    if frac == 0:
        return 1.0 + 0.0j
    return cmath.exp(2j * math.pi * float(frac))


@dataclass(frozen=True)
class PadicVector:
    """A point of Q_p^N with PadicRational coordinates."""

    p: int
    coords: tuple

    def __post_init__(self):
        _check_prime(self.p)
        coords = tuple(PadicRational.from_value(self.p, c) for c in self.coords)
        object.__setattr__(self, "coords", coords)

    @classmethod
    def from_indices(cls, p: int, K: int, indices: Iterable[int]) -> "PadicVector":
        """The point ``n * p**-K`` for an integer index vector n."""
        return cls(p, tuple(PadicRational(p, K, int(n)) for n in indices))

    @property
    def N(self) -> int:
        return len(self.coords)

    @property
    def ord(self) -> float:
        return min((c.ord for c in self.coords), default=math.inf)

    def norm(self) -> float:
        return vector_norm(self)

    def dot(self, other: "PadicVector") -> PadicRational:
        total = PadicRational(self.p, 0, 0)
        for a, b in zip(self.coords, other.coords):
            total = total + a * b
        return total

    def __add__(self, other):
        return PadicVector(self.p, tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other):
        return PadicVector(self.p, tuple(a - b for a, b in zip(self.coords, other.coords)))

    def __neg__(self):
        return PadicVector(self.p, tuple(-a for a in self.coords))

    def scale(self, lam) -> "PadicVector":
        return PadicVector(self.p, tuple(c * lam for c in self.coords))


def vector_norm(x: PadicVector) -> float:
    """||x||_p = max_i |x_i|_p."""
    return max((c.norm() for c in x.coords), default=0.0)


@dataclass(frozen=True)
class BallSpec:
    """The ball B_r^N(center) (or sphere S_r^N(center) when ``sphere``)."""

    center: PadicVector
    r: int
    sphere: bool = False

    @property
    def volume(self) -> float:
        if self.sphere:
            return sphere_volume(self.center.p, self.center.N, self.r)
        return ball_volume(self.center.p, self.center.N, self.r)

    def __contains__(self, x: PadicVector) -> bool:
        d = vector_norm(x - self.center)
        bound = float(Fraction(self.center.p) ** self.r)
        if self.sphere:
            return d == bound
        return d <= bound


def ball_volume(p: int, N: int, r: int) -> float:
    """Haar volume of B_r^N with vol(Z_p^N) = 1."""
    return float(Fraction(p) ** (r * N))


def sphere_volume(p: int, N: int, r: int) -> float:
    return float(Fraction(p) ** (r * N) * (1 - Fraction(1, p**N)))


def sphere_character_integral(j: int, x: PadicVector | float, p: int | None = None, N: int | None = None) -> float:
    """Closed form of the integral of chi_p(xi . x) over the sphere S_j^N.

    ``x`` may be a PadicVector or, with ``p`` and ``N`` given, its norm.
    """
    if isinstance(x, PadicVector):
        p, N = x.p, x.N
        xnorm = vector_norm(x)
    else:
        if p is None or N is None:
            raise TypeError("p and N are required when x is a norm")
        xnorm = float(x)
    vol = Fraction(p) ** (j * N)
    if xnorm == 0 or xnorm <= float(Fraction(p) ** (-j)):
        return float(vol * (1 - Fraction(1, p**N)))
    if xnorm == float(Fraction(p) ** (1 - j)):
        return -float(Fraction(p) ** ((j - 1) * N))
    return 0.0


def index_norm(n: int, p: int, K: int) -> float:
    """Norm of the lattice point ``n * p**-K``."""
    if n == 0:
        return 0.0
    return float(Fraction(p) ** (K - valuation(n, p)))


def coset_representatives(p: int, N: int, r: int, s: int) -> Sequence[PadicVector]:
    """Representatives p**-r * m of B_r^N / B_s^N for s < r, m in {0..p**(r-s)-1}^N."""
    import itertools

    if s >= r:
        raise ValueError("need s < r")
    count = p ** (r - s)
    reps = []
    for idx in itertools.product(range(count), repeat=N):
        coords = tuple(PadicRational.from_value(p, Fraction(p) ** -r * m) for m in idx)
        reps.append(PadicVector(p, coords))
    return reps

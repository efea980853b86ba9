"""Schwinger functions: cumulant formula, partition expansion, Monte Carlo moments and OS checks."""

from __future__ import annotations

import itertools
import math
import warnings
from fractions import Fraction
from dataclasses import dataclass, field

import numpy as np

from .green import GreenFunction, green_apply
from .lattice import LatticeField, LatticeGeometry
from .noise import InteractionH, LevySpec, h_to_levy, sample_convolved
from .symbols import EllipticPolynomial, preserves_abs
from .wick import ChaosVector, schwinger_from_chaos

MAX_PARTITION_ORDER = 12


# ---------------------------------------------------------------------------
# set partitions


def set_partitions(n: int):
    """All set partitions of {0..n-1}, from restricted-growth strings."""
    if n > MAX_PARTITION_ORDER:
        raise ValueError(f"n={n} exceeds the partition guard {MAX_PARTITION_ORDER}")
    if n == 0:
        yield []
        return
    a = [0] * n
    while True:
        blocks = [[] for _ in range(max(a) + 1)]
        for i, b in enumerate(a):
            blocks[b].append(i)
        yield [tuple(b) for b in blocks]
        # next restricted-growth string
        i = n - 1
        while i > 0 and a[i] > max(a[:i]):
            i -= 1
        if i == 0:
            return
        a[i] += 1
        for j in range(i + 1, n):
            a[j] = 0


@dataclass
class PartitionTable:
    n: int
    partitions: list = field(default_factory=list)

    @classmethod
    def build(cls, n: int) -> "PartitionTable":
        return cls(n, list(set_partitions(n)))

    def __len__(self):
        return len(self.partitions)


def bell_number(n: int) -> int:
    """Bell numbers through the Bell triangle."""
    row = [1]
    for _ in range(n):
        nxt = [row[-1]]
        for v in row:
            nxt.append(nxt[-1] + v)
        row = nxt
    return row[0]


def partition_expand(truncated, n: int) -> complex:
    """S_n = sum over partitions of prod_blocks S_{|B|,T}(B).

    ``truncated`` maps a block (tuple of argument indices) to its truncated
    value, or is a mapping keyed by blocks.
    """
    get = truncated if callable(truncated) else truncated.__getitem__
    cache = {}
    total = 0j
    for part in set_partitions(n):
        prod = 1.0 + 0j
        for block in part:
            if block not in cache:
                cache[block] = get(block)
            prod *= cache[block]
        total += prod
    return total


# ---------------------------------------------------------------------------
# analytic route


def _cumulant(h: InteractionH, n: int) -> complex:
    c = h_to_levy(h).cumulants
    if n < len(c):
        return c[n]
    if h.truncated:
        raise ValueError(f"coefficient H_{n} was not retained (nmax={h.nmax})")
    return 0j


def truncated_schwinger(h: InteractionH, green: GreenFunction, fs: list) -> complex:
    """S_{n,T}(f_1..f_n) = c_n int prod_i (G*f_i)(x) d^N x."""
    n = len(fs)
    if n < 1:
        raise ValueError("n must be >= 1")
    prod = np.ones(green.geometry.shape, dtype=complex)
    for f in fs:
        prod = prod * green_apply(green, f).values
    c = _cumulant(h, n)
    val = c * green.geometry.cell_volume * prod.sum()
    return complex(val)


def analytic_schwinger(h: InteractionH, green: GreenFunction, fs: list) -> complex:
    """Full S_n from truncated functions through the partition expansion."""
    if not fs:
        return 1.0 + 0j
    return partition_expand(lambda block: truncated_schwinger(h, green, [fs[i] for i in block]), len(fs))


def t_transform_derivative_schwinger(phi: ChaosVector, fs: list) -> complex:
    """S_n from the chaos expansion by exact polarization of T Phi."""
    return schwinger_from_chaos(phi, list(fs))


# ---------------------------------------------------------------------------
# Monte Carlo route


@dataclass
class MCEstimate:
    value: float
    stderr: float
    n_samples: int

    def agrees(self, target: float, k: float = 3.0) -> bool:
        return abs(self.value - target) <= k * self.stderr


def jackknife(values: np.ndarray, blocks: int = 50) -> tuple:
    """Mean and blocked-jackknife standard error."""
    values = np.asarray(values, dtype=float)
    n = len(values)
    blocks = min(blocks, n)
    usable = n - n % blocks
    sums = values[:usable].reshape(blocks, -1).sum(axis=1)
    total = sums.sum()
    size = usable // blocks
    loo = (total - sums) / (usable - size)
    mean = float(values.mean())
    se = math.sqrt((blocks - 1) / blocks * np.sum((loo - loo.mean()) ** 2))
    return mean, se


def mc_pairings(spec: LevySpec, green: GreenFunction, fs: list, n_samples: int, seed: int, chunk: int = 4000) -> np.ndarray:
    """<G*W, f_i> for every sample, shape (n_samples, len(fs))."""
    geo = green.geometry
    out = np.empty((n_samples, len(fs)))
    done = 0
    while done < n_samples:
        size = min(chunk, n_samples - done)
        sample = sample_convolved(spec, green, geo, seed, size, first_replica=done)
        for i, f in enumerate(fs):
            out[done : done + size, i] = np.real(sample.pair(f))
        done += size
    return out


def mc_schwinger(spec: LevySpec, green: GreenFunction, fs: list, n_samples: int, seed: int, pairings: np.ndarray | None = None) -> MCEstimate:
    """Sample mean of prod_i <W, f_i> over convolved samples."""
    x = mc_pairings(spec, green, fs, n_samples, seed) if pairings is None else pairings
    mean, se = jackknife(np.prod(x, axis=1))
    return MCEstimate(mean, se, len(x))


# ---------------------------------------------------------------------------
# sources


class AnalyticSource:
    """S_n from the cumulant formula and the partition expansion."""

    exact = True

    def __init__(self, h: InteractionH, green: GreenFunction):
        self.h, self.green = h, green

    def __call__(self, fs):
        return analytic_schwinger(self.h, self.green, list(fs))


class ChaosSource:
    exact = True

    def __init__(self, phi: ChaosVector):
        self.phi = phi

    def __call__(self, fs):
        return t_transform_derivative_schwinger(self.phi, list(fs))


class MCSource:
    exact = False

    def __init__(self, spec: LevySpec, green: GreenFunction, n_samples: int, seed: int):
        self.spec, self.green, self.n_samples, self.seed = spec, green, n_samples, seed

    def __call__(self, fs):
        return mc_schwinger(self.spec, self.green, list(fs), self.n_samples, self.seed)


def _compare(source, a, b, tol):
    if getattr(source, "exact", True):
        diff = abs(a - b)
        return diff, diff <= tol * max(1.0, abs(a))
    diff = abs(a.value - b.value)
    return diff, diff <= 3 * math.hypot(a.stderr, b.stderr)


# ---------------------------------------------------------------------------
# Euclidean transforms (OS2)


def _int_matrix_inverse_mod(mat: np.ndarray, modulus: int) -> np.ndarray:
    """Inverse of an integer matrix modulo ``modulus`` (exact elimination over Q)."""
    n = mat.shape[0]
    m = [[Fraction(int(v)) for v in row] for row in mat]
    inv = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for col in range(n):
        piv = next(r for r in range(col, n) if m[r][col] != 0)
        m[col], m[piv] = m[piv], m[col]
        inv[col], inv[piv] = inv[piv], inv[col]
        d = m[col][col]
        m[col] = [v / d for v in m[col]]
        inv[col] = [v / d for v in inv[col]]
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col]
                m[r] = [a - f * b for a, b in zip(m[r], m[col])]
                inv[r] = [a - f * b for a, b in zip(inv[r], inv[col])]
    out = np.zeros((n, n), dtype=object)
    for i in range(n):
        for j in range(n):
            v = inv[i][j]
            out[i, j] = (v.numerator * pow(v.denominator, -1, modulus)) % modulus
    return out


def _poly_preserved(l: EllipticPolynomial, mat: np.ndarray) -> bool:
    """l(M xi) == l(xi) identically; checked on a (d+1)^N integer grid, which decides it."""
    for pt in itertools.product(range(l.degree + 1), repeat=l.N):
        img = tuple(int(sum(int(mat[i, j]) * pt[j] for j in range(l.N))) for i in range(l.N))
        if l(img) != l(pt):
            return False
    return True


def sum_of_squares(p: int, N: int) -> EllipticPolynomial:
    terms = tuple((1, tuple(2 * (i == j) for j in range(N))) for i in range(N))
    return EllipticPolynomial(p, terms)


@dataclass
class EuclideanTransform:
    """x -> a + Lambda x with an integer translation index and an integer matrix."""

    geometry: LatticeGeometry
    shift: tuple
    matrix: np.ndarray
    name: str = ""
    preserves_q: bool = False
    preserves_l: bool = False
    preserves_abs_l: bool = False
    measure_preserving: bool = False

    @classmethod
    def certify(cls, geometry: LatticeGeometry, shift, matrix, l: EllipticPolynomial | None = None, name: str = "") -> "EuclideanTransform":
        mat = np.asarray(matrix, dtype=np.int64).reshape(geometry.N, geometry.N)
        det = int(round(np.linalg.det(mat)))
        mp = det % geometry.p != 0
        if not mp:
            raise ValueError("matrix is not invertible over Z_p: |det|_p != 1 would move supports out of the window")
        q = sum_of_squares(geometry.p, geometry.N)
        t = cls(geometry, tuple(int(s) % geometry.axis_size for s in shift), mat, name, measure_preserving=mp)
        t.preserves_q = _poly_preserved(q, mat)
        if l is not None:
            t.preserves_l = _poly_preserved(l, mat)
            t.preserves_abs_l = preserves_abs(l, mat, geometry)
        return t

    def index_map(self) -> tuple:
        """Indices of Lambda^{-1}(x - a) for every grid point x."""
        geo = self.geometry
        m1 = geo.axis_size
        inv = _int_matrix_inverse_mod(self.matrix, m1)
        idx = np.indices(geo.shape).reshape(geo.N, -1).astype(object)
        shifted = (idx - np.array(self.shift, dtype=object)[:, None]) % m1
        src = np.zeros_like(shifted)
        for i in range(geo.N):
            acc = 0
            for j in range(geo.N):
                acc = acc + inv[i, j] * shifted[j]
            src[i] = acc % m1
        return tuple(np.asarray(src[i], dtype=np.int64).reshape(geo.shape) for i in range(geo.N))

    def apply(self, f: LatticeField) -> LatticeField:
        """((a, Lambda) f)(x) = f(Lambda^{-1}(x - a))."""
        if f.geometry != self.geometry:
            raise ValueError("geometry mismatch")
        return LatticeField(f.geometry, f.values[self.index_map()], f.real)


def translation(geometry: LatticeGeometry, shift, l: EllipticPolynomial | None = None) -> EuclideanTransform:
    return EuclideanTransform.certify(geometry, shift, np.eye(geometry.N, dtype=np.int64), l, name=f"translate{tuple(shift)}")


def reflection(geometry: LatticeGeometry, l: EllipticPolynomial | None = None) -> EuclideanTransform:
    return EuclideanTransform.certify(geometry, (0,) * geometry.N, -np.eye(geometry.N, dtype=np.int64), l, name="-I")


def signed_permutations(geometry: LatticeGeometry, l: EllipticPolynomial) -> list:
    """All signed permutation matrices, each certified against q and l."""
    N = geometry.N
    out = []
    for perm in itertools.permutations(range(N)):
        for signs in itertools.product((1, -1), repeat=N):
            mat = np.zeros((N, N), dtype=np.int64)
            for i, j in enumerate(perm):
                mat[i, j] = signs[i]
            out.append(EuclideanTransform.certify(geometry, (0,) * N, mat, l, name=f"perm{perm}{signs}"))
    return out


@dataclass
class CheckReport:
    rows: list  # (label, n, before, after, diff, ok)

    @property
    def passed(self) -> bool:
        return all(r[-1] for r in self.rows)

    @property
    def max_diff(self) -> float:
        return max((r[4] for r in self.rows), default=0.0)


def invariance_check(source, transforms: list, tuples: list, tol: float = 1e-10) -> CheckReport:
    """S_n(f_1..f_n) against S_n((a,L)f_1..(a,L)f_n) for every transform and tuple."""
    rows = []
    for t in transforms:
        for fs in tuples:
            before = source(list(fs))
            after = source([t.apply(f) for f in fs])
            diff, ok = _compare(source, before, after, tol)
            rows.append((t.name, len(fs), before, after, diff, ok))
    return CheckReport(rows)


def os4_symmetry_check(source, fs: list, permutations=None, tol: float = 1e-10) -> CheckReport:
    """S_n invariance under permuting its arguments (all permutations by default)."""
    n = len(fs)
    perms = list(itertools.permutations(range(n))) if permutations is None else permutations
    base = source(list(fs))
    rows = []
    for perm in perms:
        val = source([fs[i] for i in perm])
        diff, ok = _compare(source, base, val, tol)
        rows.append((tuple(perm), n, base, val, diff, ok))
    return CheckReport(rows)


# ---------------------------------------------------------------------------
# cluster property (OS5)


@dataclass
class ClusterResult:
    rows: list  # (lambda_norm, deviation, truncated_deviation)
    slope: float | None
    monotone: bool
    complete: bool
    expected_slope: float | None

    @property
    def passed(self) -> bool:
        return self.monotone and self.complete and len(self.rows) >= 3

    def slope_within(self, rel: float) -> bool:
        if self.slope is None or self.expected_slope is None:
            return False
        return abs(self.slope - self.expected_slope) <= rel * abs(self.expected_slope)


def cluster_check(h: InteractionH, green: GreenFunction, f_block: list, g_block: list, direction, steps: int, start: int = 1) -> ClusterResult:
    """|S_{m+n}(f (x) T_{lambda a} g) - S_m(f) S_n(g)| along lambda = p^-1, p^-2, ...

    ``direction`` is a primitive index vector u; step s translates by the
    point u p^-r with r = start + s, so the translation has norm p^r.  The
    ladder stops with a warning when r would exceed K.
    """
    geo = green.geometry
    p, K = geo.p, geo.K
    u = np.asarray(direction, dtype=np.int64)
    if np.all(u % p == 0):
        raise ValueError("direction must be a primitive index vector")
    S_f = analytic_schwinger(h, green, f_block)
    S_g = analytic_schwinger(h, green, g_block)
    rows = []
    complete = True
    for s in range(steps):
        r = start + s  # target norm exponent
        if r > K:
            warnings.warn(f"window exhausted after {s} of {steps} ladder steps", RuntimeWarning)
            complete = False
            break
        shift = tuple(int(v) for v in (u * p ** (K - r)) % geo.axis_size)
        t = translation(geo, shift)
        moved = [t.apply(g) for g in g_block]
        joint = analytic_schwinger(h, green, list(f_block) + moved)
        dev = abs(joint - S_f * S_g)
        trunc = abs(truncated_schwinger(h, green, list(f_block) + moved))
        rows.append((float(p) ** r, dev, trunc))
    slope = None
    if len(rows) >= 2 and all(r[1] > 0 for r in rows):
        x = np.log([r[0] for r in rows])
        y = np.log([r[1] for r in rows])
        slope = float(np.polyfit(x, y, 1)[0])
    devs = [r[1] for r in rows]
    monotone = all(b < a for a, b in zip(devs, devs[1:]))
    spec = green.spec
    return ClusterResult(rows, slope, monotone, complete, -(spec.growth + spec.N))

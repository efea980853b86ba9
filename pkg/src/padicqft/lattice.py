"""Finite-resolution test functions on Q_p^N.

A :class:`LatticeGeometry` ``(p, N, K)`` models functions supported in the
ball B_K^N and constant on cosets of B_{-K}^N.  Grid point ``n`` (an integer
vector with entries in ``[0, p**(2K))``) stands for ``x = n * p**-K``.  The
frequency grid is the same set, and

    chi_p(xi . x) = exp(2 pi i (n_xi . n_x mod p**(2K)) / p**(2K)),

so the Fourier transform is a DFT over the group (Z / p**(2K))^N.  Values are
stored as numpy arrays of shape ``(M1,) * N`` with ``M1 = p**(2K)``.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .padic import is_prime


@dataclass(frozen=True)
class LatticeGeometry:
    p: int
    N: int
    K: int

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"p must be prime, got {self.p}")
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if self.K < 1:
            raise ValueError("K must be >= 1")

    @property
    def axis_size(self) -> int:
        return self.p ** (2 * self.K)

    @property
    def shape(self) -> tuple:
        return (self.axis_size,) * self.N

    @property
    def size(self) -> int:
        return self.axis_size**self.N

    @property
    def cell_volume(self) -> float:
        return float(self.p) ** (-self.K * self.N)

    @property
    def window_volume(self) -> float:
        return float(self.p) ** (self.K * self.N)

    def axis_valuations(self) -> np.ndarray:
        """v_p(n) for n in [0, M1); entry 0 holds 2K (the zero cell)."""
        return _axis_valuations(self.p, self.K)

    def norm_grid(self) -> np.ndarray:
        """||x||_p at every grid point (0 at the origin)."""
        return _norm_grid(self.p, self.N, self.K)

    def norm_exponent_grid(self) -> np.ndarray:
        """r with ||x||_p = p**r; the origin cell gets -K (its true radius bound)."""
        return _norm_exponent_grid(self.p, self.N, self.K)

    def bracket_grid(self) -> np.ndarray:
        """[xi]_p = max(1, ||xi||_p) on the frequency grid."""
        return np.maximum(1.0, self.norm_grid())

    def negate_index(self) -> tuple:
        """Fancy index mapping every grid point to its negative."""
        m1 = self.axis_size
        neg = (-np.arange(m1)) % m1
        return np.ix_(*([neg] * self.N))

    def index_of(self, point) -> tuple:
        """Grid index of a lattice-representable PadicVector."""
        from fractions import Fraction

        if not self.in_window(point):
            raise ValueError(f"{point} lies outside the window B_{self.K}")
        idx = []
        for c in point.coords:
            v = c.to_fraction() * Fraction(self.p) ** self.K
            if v.denominator != 1:
                raise ValueError(f"{point} is finer than the grid resolution")
            idx.append(v.numerator % self.axis_size)
        return tuple(idx)

    def in_window(self, point) -> bool:
        return all(c.ord >= -self.K for c in point.coords)

    def to_dict(self) -> dict:
        return {"p": self.p, "N": self.N, "K": self.K}


@lru_cache(maxsize=None)
def _axis_valuations(p: int, K: int) -> np.ndarray:
    m1 = p ** (2 * K)
    v = np.zeros(m1, dtype=np.int64)
    step = p
    while step < m1:
        v[::step] += 1
        step *= p
    v[0] = 2 * K
    v.setflags(write=False)
    return v


@lru_cache(maxsize=None)
def _norm_exponent_grid(p: int, N: int, K: int) -> np.ndarray:
    v = _axis_valuations(p, K)
    grids = np.meshgrid(*([v] * N), indexing="ij")
    vmin = np.minimum.reduce(grids) if N > 1 else grids[0]
    r = K - vmin
    r.setflags(write=False)
    return r


@lru_cache(maxsize=None)
def _norm_grid(p: int, N: int, K: int) -> np.ndarray:
    r = _norm_exponent_grid(p, N, K)
    out = np.power(float(p), r.astype(float))
    out[(0,) * N] = 0.0
    out.setflags(write=False)
    return out


@dataclass(eq=False)
class LatticeField:
    geometry: LatticeGeometry
    values: np.ndarray
    real: bool = field(default=False)

    def __post_init__(self):
        vals = np.asarray(self.values)
        if vals.size != self.geometry.size:
            raise ValueError(
                f"field has {vals.size} values, geometry needs {self.geometry.size}"
            )
        vals = vals.reshape(self.geometry.shape)
        if self.real:
            if np.iscomplexobj(vals):
                if np.any(vals.imag != 0):
                    raise ValueError("field tagged real has nonzero imaginary part")
                vals = vals.real
            vals = vals.astype(float)
        else:
            vals = vals.astype(complex)
        self.values = vals

    def __add__(self, other):
        _same_geometry(self, other)
        return LatticeField(self.geometry, self.values + other.values, self.real and other.real)

    def __sub__(self, other):
        _same_geometry(self, other)
        return LatticeField(self.geometry, self.values - other.values, self.real and other.real)

    def __mul__(self, c):
        real = self.real and np.isrealobj(c)
        return LatticeField(self.geometry, self.values * c, real)

    __rmul__ = __mul__

    def __neg__(self):
        return LatticeField(self.geometry, -self.values, self.real)

    def as_real(self, tol: float = 1e-10) -> "LatticeField":
        """Drop a negligible imaginary part (relative to the max modulus)."""
        scale = max(1.0, float(np.abs(self.values).max()))
        if np.iscomplexobj(self.values) and np.abs(self.values.imag).max() > tol * scale:
            raise ValueError("field has a non-negligible imaginary part")
        return LatticeField(self.geometry, self.values.real.copy(), real=True)

    def reflect(self) -> "LatticeField":
        """x -> f(-x) in the quotient group."""
        return LatticeField(self.geometry, self.values[self.geometry.negate_index()], self.real)

    def integral(self) -> complex:
        return self.geometry.cell_volume * self.values.sum()

    def l2_norm(self) -> float:
        return float(np.sqrt(self.geometry.cell_volume * np.sum(np.abs(self.values) ** 2)))

    def pairing(self, other: "LatticeField") -> complex:
        """Bilinear <f, g> = int f g d^N x."""
        _same_geometry(self, other)
        return self.geometry.cell_volume * np.sum(self.values * other.values)

    def inner(self, other: "LatticeField") -> complex:
        """Hermitian <f, g>_0 = int conj(f) g d^N x."""
        _same_geometry(self, other)
        return self.geometry.cell_volume * np.vdot(self.values, other.values)

    def support_radius(self, tol: float = 0.0) -> float:
        """Smallest r with supp f inside B_r (``-inf`` for the zero field)."""
        mask = np.abs(self.values) > tol
        if not mask.any():
            return -np.inf
        return int(self.geometry.norm_exponent_grid()[mask].max())


def _same_geometry(f, g):
    if f.geometry != g.geometry:
        raise ValueError(f"geometry mismatch: {f.geometry} vs {g.geometry}")


# ---------------------------------------------------------------------------
# fast transform


class FFTPlan:
    """Radix-p Cooley-Tukey transform of length p**(2K), applied per axis.

    ``forward`` computes sum_n exp(+2 pi i k n / M1) x[n] along every axis,
    ``backward`` the same with the opposite sign; no normalization.
    """

    def __init__(self, geometry: LatticeGeometry):
        self.geometry = geometry
        p, length = geometry.p, geometry.axis_size
        self._levels = {}
        for sign in (1, -1):
            levels = []
            n = length
            while n > 1:
                m = n // p
                r = np.arange(p)
                twiddle = np.exp(sign * 2j * np.pi * np.outer(r, np.arange(m)) / n)
                butterfly = np.exp(sign * 2j * np.pi * np.outer(r, r) / p)
                levels.append((n, twiddle, butterfly))
                n = m
            self._levels[sign] = levels

    def _transform_last(self, x: np.ndarray, sign: int) -> np.ndarray:
        p = self.geometry.p
        batch = x.shape[0]
        # decimation in time: x[:, r::p] -> recursive transforms, combined by radix-p butterflies
        def rec(a, level):
            if level == len(self._levels[sign]):
                return a
            n, twiddle, butterfly = self._levels[sign][level]
            b = a.shape[0]
            m = n // p
            sub = a.reshape(b, m, p).transpose(0, 2, 1).reshape(b * p, m)
            e = rec(sub, level + 1).reshape(b, p, m)
            y = e * twiddle
            out = np.einsum("tr,brq->btq", butterfly, y, optimize=False)
            return out.reshape(b, n)

        return rec(x.reshape(batch, -1).astype(complex), 0)

    def apply(self, values: np.ndarray, sign: int = 1) -> np.ndarray:
        g = self.geometry
        lead = values.shape[: values.ndim - g.N]
        out = np.asarray(values, dtype=complex).reshape(lead + g.shape)
        nlead = len(lead)
        for axis in range(g.N):
            ax = nlead + axis
            moved = np.moveaxis(out, ax, -1)
            shp = moved.shape
            res = self._transform_last(moved.reshape(-1, shp[-1]), sign)
            out = np.moveaxis(res.reshape(shp), -1, ax)
        return np.ascontiguousarray(out)

    def forward(self, values):
        return self.apply(values, 1)

    def backward(self, values):
        return self.apply(values, -1)


@lru_cache(maxsize=32)
def fft_plan(geometry: LatticeGeometry) -> FFTPlan:
    return FFTPlan(geometry)


def naive_dft_values(geometry: LatticeGeometry, values: np.ndarray, sign: int = 1) -> np.ndarray:
    """O(M^2) character sum, used only as a reference."""
    g = geometry
    m1 = g.axis_size
    n = np.arange(m1)
    # the phase matrix is built in row blocks so large axes stay within memory
    block = max(1, min(m1, 2**22 // m1))
    out = np.asarray(values, dtype=complex).reshape(g.shape)
    for axis in range(g.N):
        src = np.moveaxis(out, axis, 0).reshape(m1, -1)
        dst = np.empty_like(src)
        for lo in range(0, m1, block):
            rows = n[lo : lo + block]
            mat = np.exp(sign * 2j * np.pi * ((np.outer(rows, n) % m1) / m1))
            dst[lo : lo + block] = mat @ src
        out = np.moveaxis(dst.reshape((m1,) + tuple(np.delete(g.shape, axis))), 0, axis)
    return out


def naive_dft_full(f: LatticeField) -> LatticeField:
    """Direct double sum over the flattened grid with the character formula."""
    g = f.geometry
    m1 = g.axis_size
    idx = np.indices(g.shape).reshape(g.N, -1)
    dots = (idx.T @ idx) % m1
    mat = np.exp(2j * np.pi * dots / m1)
    vals = g.cell_volume * (mat @ f.values.reshape(-1))
    return LatticeField(g, vals)


def dft(f: LatticeField, plan: FFTPlan | None = None) -> LatticeField:
    """F[f](xi) = p**-KN sum_x chi_p(xi . x) f(x)."""
    g = f.geometry
    plan = plan or fft_plan(g)
    return LatticeField(g, g.cell_volume * plan.forward(f.values))


def idft(f: LatticeField, plan: FFTPlan | None = None) -> LatticeField:
    """Inverse transform, with chi_p(-xi . x)."""
    g = f.geometry
    plan = plan or fft_plan(g)
    return LatticeField(g, g.cell_volume * plan.backward(f.values))


def apply_multiplier(multiplier: np.ndarray, f: LatticeField) -> LatticeField:
    """idft(multiplier * dft(f)); keeps the real tag when the multiplier is even and real."""
    out = idft(LatticeField(f.geometry, np.asarray(multiplier) * dft(f).values))
    if f.real and np.isrealobj(multiplier):
        return out.as_real(tol=1e-8)
    return out


def convolve(f: LatticeField, g: LatticeField) -> LatticeField:
    """Group convolution on B_K / B_{-K}: (f*g)(x) = int f(y) g(x - y) dy."""
    _same_geometry(f, g)
    out = idft(LatticeField(f.geometry, dft(f).values * dft(g).values))
    if f.real and g.real:
        return out.as_real(tol=1e-8)
    return out


def alias_free_radius(geometry: LatticeGeometry, *fields: LatticeField) -> int:
    """Largest r such that convolutions and translations by B_r are exact for ``fields``.

    B_K is a subgroup of Q_p^N, so a field supported in the window stays in
    it under any translation by B_K and convolution never wraps around: the
    quotient-group arithmetic is the continuum arithmetic.  The radius is
    therefore K; fields with support beyond the window are rejected.
    """
    for f in fields:
        if f.geometry != geometry:
            raise ValueError("geometry mismatch")
        if f.support_radius() > geometry.K:
            raise ValueError("field support exceeds the window")
    return geometry.K


def sobolev_norm(f: LatticeField, l: float) -> float:
    """||f||_l**2 = int [xi]_p**l |F f(xi)|**2 d^N xi (l may be negative)."""
    fh = dft(f).values
    w = f.geometry.bracket_grid() ** l
    return float(np.sqrt(f.geometry.cell_volume * np.sum(w * np.abs(fh) ** 2)))


def sobolev_inner(f: LatticeField, g: LatticeField, l: float) -> complex:
    """<f, g>_l = int [xi]_p**l conj(F f) F g d^N xi."""
    _same_geometry(f, g)
    w = f.geometry.bracket_grid() ** l
    return f.geometry.cell_volume * np.sum(w * np.conj(dft(f).values) * dft(g).values)


# ---------------------------------------------------------------------------
# standard fields


def zeros(geometry: LatticeGeometry, real: bool = True) -> LatticeField:
    return LatticeField(geometry, np.zeros(geometry.shape), real=real)


def ball_indicator(geometry: LatticeGeometry, r: int = 0, center: tuple | None = None) -> LatticeField:
    """Indicator of B_r^N(center); r = 0 gives the indicator of Z_p^N."""
    if not -geometry.K <= r <= geometry.K:
        raise ValueError("ball radius outside the lattice range")
    mask = geometry.norm_exponent_grid() <= r
    vals = mask.astype(float)
    if center is not None:
        vals = translate_values(geometry, vals, center)
    return LatticeField(geometry, vals, real=True)


def cell_indicator(geometry: LatticeGeometry, index: tuple) -> LatticeField:
    vals = np.zeros(geometry.shape)
    vals[tuple(index)] = 1.0
    return LatticeField(geometry, vals, real=True)


def lattice_delta(geometry: LatticeGeometry, index: tuple | None = None) -> LatticeField:
    """Cell indicator scaled to unit mass (the lattice stand-in for a Dirac delta)."""
    index = index if index is not None else (0,) * geometry.N
    return cell_indicator(geometry, index) * geometry.window_volume


def translate_values(geometry: LatticeGeometry, values: np.ndarray, shift: tuple) -> np.ndarray:
    """(T_a f)(x) = f(x - a) for a grid shift a (index vector)."""
    return np.roll(values, shift=tuple(int(s) for s in shift), axis=tuple(range(geometry.N)))


def random_field(geometry: LatticeGeometry, rng: np.random.Generator, real: bool = True, radius: int | None = None) -> LatticeField:
    vals = rng.standard_normal(geometry.shape)
    if not real:
        vals = vals + 1j * rng.standard_normal(geometry.shape)
    if radius is not None:
        vals = vals * (geometry.norm_exponent_grid() <= radius)
    return LatticeField(geometry, vals, real=real)


# ---------------------------------------------------------------------------
# serialization


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def sidecar_path(csv_path: str) -> str:
    root, _ = os.path.splitext(csv_path)
    return root + ".json"


def save_field(f: LatticeField, path: str) -> None:
    """CSV ``index,re,im`` (flat C-order index) plus a JSON sidecar {p, N, K}."""
    flat = np.asarray(f.values, dtype=complex).reshape(-1)
    lines = ["index,re,im"]
    lines.extend(f"{i},{float(z.real)!r},{float(z.imag)!r}" for i, z in enumerate(flat))
    _atomic_write(path, "\n".join(lines) + "\n")
    meta = dict(f.geometry.to_dict(), real=bool(f.real))
    _atomic_write(sidecar_path(path), json.dumps(meta, sort_keys=True) + "\n")


def load_field(path: str) -> LatticeField:
    with open(sidecar_path(path)) as fh:
        meta = json.load(fh)
    geometry = LatticeGeometry(meta["p"], meta["N"], meta["K"])
    data = np.zeros(geometry.size, dtype=complex)
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "index,re,im":
            raise ValueError(f"unexpected header {header!r}")
        for line in fh:
            if not line.strip():
                continue
            i, re, im = line.split(",")
            data[int(i)] = complex(float(re), float(im))
    return LatticeField(geometry, data, real=bool(meta.get("real", False)))

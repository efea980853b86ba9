"""Green functions of (L_alpha + m^2)-type operators on the lattice.

The lattice Green function is defined spectrally: the reciprocal symbol on
the frequency grid, transformed back.  For x outside the origin cell the
only difference from the continuum kernel comes from the zero-frequency
cell, where the lattice uses 1/symbol(0) in place of the average of
1/symbol over B_{-K}.  Since chi_p(-xi . x) = 1 for xi in B_{-K} and x in
B_K, that difference is one constant, ``zero_cell_offset``, computed here
exactly from the sphere-valuation histogram of the polynomial.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .lattice import LatticeField, LatticeGeometry, apply_multiplier, idft
from .padic import sphere_volume
from .symbols import SymbolSpec, sphere_valuation_histogram, symbol_grid

_EPS = np.finfo(float).eps


@dataclass(eq=False)
class GreenFunction:
    spec: SymbolSpec
    geometry: LatticeGeometry
    spectral: np.ndarray
    values: LatticeField
    zero_cell_offset: float
    error_bound: np.ndarray
    high_frequency_tail: float
    locally_constant: bool
    histogram: dict = field(default_factory=dict)

    def continuum_values(self) -> np.ndarray:
        """Lattice values shifted by the zero-cell correction."""
        return self.values.values + self.zero_cell_offset

    def relative_error_bound(self) -> np.ndarray:
        vals = np.abs(self.continuum_values())
        with np.errstate(divide="ignore"):
            return np.where(vals > 0, self.error_bound / vals, np.inf)

    def sphere_table(self, corrected: bool = True) -> dict:
        """r -> (mean of G over the lattice sphere ||x|| = p**r, point count)."""
        vals = self.continuum_values() if corrected else self.values.values
        r = self.geometry.norm_exponent_grid()
        origin = (0,) * self.geometry.N
        out = {}
        for k in range(-self.geometry.K + 1, self.geometry.K + 1):
            mask = r == k
            mask[origin] = False
            if mask.any():
                out[k] = (float(vals[mask].mean()), int(mask.sum()))
        return out


def _sphere_reciprocal_integral(spec: SymbolSpec, hist: dict, j: int) -> float:
    """Integral of 1/symbol over S_j^N, from the unit-sphere histogram."""
    p, N, d = spec.p, spec.N, spec.degree
    total = 0.0
    for v, mass in hist.items():
        total += float(mass) / float(spec.of_abs(float(p) ** (j * d - v)))
    return float(p) ** (j * N) * total


def zero_cell_offset(spec: SymbolSpec, K: int, hist: dict) -> float:
    """sum_{j <= -K} int_{S_j} (1/symbol - 1/symbol(0)) d^N xi."""
    inv0 = 1.0 / spec.floor
    total = 0.0
    j = -K
    while True:
        term = _sphere_reciprocal_integral(spec, hist, j) - sphere_volume(spec.p, spec.N, j) * inv0
        total += term
        if abs(term) <= 1e-18 * abs(total) or j < -K - 400:
            break
        j -= 1
    return total


def high_frequency_tail(spec: SymbolSpec, K: int, C0: float) -> float:
    """Upper bound for sum_{j > K} int_{S_j} 1/symbol, using |l| >= C0 ||xi||**d."""
    p, N, d = spec.p, spec.N, spec.degree
    if spec.growth <= N:
        return math.inf
    total = 0.0
    j = K + 1
    while True:
        term = sphere_volume(p, N, j) / float(spec.of_abs(C0 * float(p) ** (j * d)))
        total += term
        if term <= 1e-17 * total:
            # remaining terms decay at least geometrically with ratio p**(N - growth)
            ratio = float(p) ** (N - spec.growth)
            total += term * ratio / (1 - ratio)
            break
        j += 1
    return total


def green_build(spec: SymbolSpec, geometry: LatticeGeometry, scan_depth: int = 12) -> GreenFunction:
    """Spectral lattice Green function with its error accounting."""
    if spec.p != geometry.p or spec.N != geometry.N:
        raise ValueError("symbol and geometry disagree on p or N")
    spectral = 1.0 / symbol_grid(spec, geometry)
    spatial = idft(LatticeField(geometry, spectral)).as_real(tol=1e-9)
    hist = sphere_valuation_histogram(spec.polynomial, scan_depth)
    vmax = max(hist)
    C0 = float(spec.p) ** (-vmax)
    offset = zero_cell_offset(spec, geometry.K, hist)

    # symbol may vary inside cells of the innermost spheres when |l| < ||xi||**d somewhere
    p, N, d, K = spec.p, spec.N, spec.degree, geometry.K
    cell_error = 0.0
    for j in range(-K + 1, -K + 1 + vmax):
        lo = float(spec.of_abs(C0 * float(p) ** (j * d)))
        hi = float(spec.of_abs(float(p) ** (j * d)))
        cell_error += sphere_volume(p, N, j) * (1.0 / lo - 1.0 / hi)
    roundoff = 8 * _EPS * (2 * K * N * p) * geometry.cell_volume * float(np.abs(spectral).sum())
    tail = high_frequency_tail(spec, K, C0)
    bound = np.full(geometry.shape, cell_error + roundoff + abs(offset) * 1e-12)
    bound[(0,) * N] += tail
    return GreenFunction(
        spec=spec,
        geometry=geometry,
        spectral=spectral,
        values=spatial,
        zero_cell_offset=offset,
        error_bound=bound,
        high_frequency_tail=tail,
        locally_constant=vmax == 0,
        histogram=hist,
    )


def green_apply(g: GreenFunction, f: LatticeField) -> LatticeField:
    """G * f by spectral multiplication (exact inverse of apply_operator)."""
    if f.geometry != g.geometry:
        raise ValueError(f"geometry mismatch: {f.geometry} vs {g.geometry}")
    return apply_multiplier(g.spectral, f)


# ---------------------------------------------------------------------------
# radial oracle


def radial_profile(spec: SymbolSpec, scan_depth: int = 12):
    """j -> symbol on S_j for symbols with |l(xi)|_p = ||xi||_p**d."""
    hist = sphere_valuation_histogram(spec.polynomial, scan_depth)
    if set(hist) != {0}:
        raise ValueError("symbol is not radial: |l| is not constant on the unit sphere")
    d, p = spec.degree, spec.p
    return lambda j: float(spec.of_abs(float(p) ** (j * d)))


def radial_oracle(p: int, N: int, profile, r: int, floor: float, tol: float | None = None, rtol: float = 1e-14) -> float:
    """Continuum G at ||x||_p = p**r for a radial symbol profile j -> sigma_j >= floor.

    G = (1 - p**-N) sum_{j <= -r} p**(jN) / sigma_j - p**(-rN) / sigma_{-r+1};
    the sum runs down until the remaining part, at most p**((J-1)N) / floor,
    is below ``tol``.  Without ``tol`` the target is ``rtol`` times the
    running value.
    """
    if floor <= 0:
        raise ValueError("profile floor must be positive")
    lead = -(float(p) ** (-r * N)) / profile(-r + 1)
    acc = 0.0
    j = -r
    while True:
        acc += float(p) ** (j * N) / profile(j)
        remaining = float(p) ** ((j - 1) * N) / floor
        target = tol if tol is not None else rtol * abs((1 - float(p) ** (-N)) * acc + lead)
        if remaining <= target:
            break
        j -= 1
        if j < -r - 2000:
            raise ValueError("radial series did not reach the tolerance")
    value = (1 - float(p) ** (-N)) * acc + lead
    if tol is not None and tol < _EPS * abs(value) / 16:
        raise ValueError(f"tolerance {tol:g} is below floating-point resolution of {value:g}")
    return value


# ---------------------------------------------------------------------------
# decay laws


@dataclass
class DecayScan:
    rows: list  # (r, lognorm, logG, sphere_count)
    p: int
    N: int
    growth: float | None
    far_slope: float | None = None
    near_slope: float | None = None
    log_fit_residual: float | None = None
    power_fit_residual: float | None = None

    def as_csv_rows(self):
        return [("r", "lognorm", "logG", "sphere_count")] + [
            (r, repr(ln), repr(lg), c) for r, ln, lg, c in self.rows
        ]


def _fit_slope(x, y) -> float:
    return float(np.polyfit(np.asarray(x, float), np.asarray(y, float), 1)[0])


def decay_scan(source, p: int | None = None, N: int | None = None, growth: float | None = None, n_fit: int = 3) -> DecayScan:
    """Sphere-averaged decay table with regressions for the three regimes.

    ``source`` is a GreenFunction or a mapping r -> (G value[, count]).
    The far-field fit uses the ``n_fit`` largest spheres, the near-field
    and logarithmic fits the ``n_fit`` smallest.
    """
    if isinstance(source, GreenFunction):
        table = source.sphere_table()
        p, N = source.spec.p, source.spec.N
        growth = source.spec.growth
    else:
        if p is None or N is None:
            raise ValueError("p and N are required for tabulated input")
        table = {r: (v if isinstance(v, tuple) else (v, 1)) for r, v in source.items()}
    rs = sorted(table)
    if len(rs) < n_fit + 1:
        raise ValueError(f"need at least {n_fit + 1} spheres, window has {len(rs)}")
    rows = []
    for r in rs:
        val, count = table[r]
        rows.append((r, r * math.log(p), math.log(val) if val > 0 else float("nan"), count))
    scan = DecayScan(rows, p, N, growth)
    far = rows[-n_fit:]
    near = rows[:n_fit]
    if all(np.isfinite(row[2]) for row in far):
        scan.far_slope = _fit_slope([r[1] for r in far], [r[2] for r in far])
    if all(np.isfinite(row[2]) for row in near):
        scan.near_slope = _fit_slope([r[1] for r in near], [r[2] for r in near])
        x = np.array([r[1] for r in near])
        gv = np.exp([r[2] for r in near])
        # G ~ C0 - C1 ln||x|| versus G ~ A ||x||**b, residuals compared in G-space
        lin = np.polyfit(x, gv, 1)
        scan.log_fit_residual = float(np.sqrt(np.mean((np.polyval(lin, x) - gv) ** 2)))
        pw = np.polyfit(x, np.log(gv), 1)
        scan.power_fit_residual = float(np.sqrt(np.mean((np.exp(np.polyval(pw, x)) - gv) ** 2)))
    return scan


def positivity_report(g: GreenFunction) -> dict:
    """Minimum of G off the origin cell, and every violation with its size."""
    vals = g.continuum_values().copy()
    origin = (0,) * g.geometry.N
    mask = np.ones(vals.shape, dtype=bool)
    mask[origin] = False
    off = vals[mask]
    bad = off <= 0
    return {
        "min": float(off.min()),
        "violations": int(bad.sum()),
        "worst": float(off[bad].min()) if bad.any() else 0.0,
        "within_error_bound": bool(np.all(np.abs(off[bad]) <= g.error_bound[mask][bad])),
    }

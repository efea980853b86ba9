"""Lévy characteristics, the positive-definiteness validator and white-noise samplers."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .green import GreenFunction, green_apply
from .lattice import LatticeField, LatticeGeometry


@dataclass(frozen=True)
class LevySpec:
    """Drift a, Gaussian part sigma and a finite atomic jump measure [(s_k, m_k)]."""

    a: float = 0.0
    sigma: float = 1.0
    atoms: tuple = ()

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")
        atoms = tuple((float(s), float(m)) for s, m in self.atoms)
        for s, m in atoms:
            if s == 0 or m <= 0:
                raise ValueError("atoms need location s != 0 and mass > 0")
        object.__setattr__(self, "atoms", atoms)

    @property
    def is_gaussian(self) -> bool:
        return not self.atoms

    def to_json(self) -> dict:
        return {"a": self.a, "sigma": self.sigma, "atoms": [{"s": s, "mass": m} for s, m in self.atoms]}

    @classmethod
    def from_json(cls, data) -> "LevySpec":
        if isinstance(data, str):
            data = json.loads(data)
        unknown = set(data) - {"a", "sigma", "atoms"}
        if unknown:
            raise ValueError(f"unknown LevySpec keys {sorted(unknown)}")
        atoms = tuple((float(x["s"]), float(x["mass"])) for x in data.get("atoms", []))
        return cls(float(data.get("a", 0.0)), float(data.get("sigma", 1.0)), atoms)


def levy_eval(spec: LevySpec, t):
    """F(t) = iat - sigma^2 t^2/2 + sum_k m_k (e^{i s_k t} - 1 - i s_k t/(1+s_k^2))."""
    t = np.asarray(t, dtype=float)
    out = 1j * spec.a * t - 0.5 * spec.sigma**2 * t**2
    for s, m in spec.atoms:
        out = out + m * (np.exp(1j * s * t) - 1 - 1j * s * t / (1 + s * s))
    return out if out.ndim else complex(out)


def levy_cumulants(spec: LevySpec, nmax: int) -> list:
    """c_n = F^{(n)}(0)/i^n for n = 1..nmax (index 0 unused, set to 0)."""
    c = [0.0] * (nmax + 1)
    for n in range(1, nmax + 1):
        c[n] = sum(m * s**n for s, m in spec.atoms)
    if nmax >= 1:
        c[1] = spec.a + sum(m * s**3 / (1 + s * s) for s, m in spec.atoms)
    if nmax >= 2:
        c[2] += spec.sigma**2
    return c


@dataclass(frozen=True)
class InteractionH:
    """H(z) = sum_{k>=1} H_k z^k / k! (factorial convention).

    ``coeffs[k-1]`` is H_k.  ``truncated`` marks a coefficient list cut
    from an infinite series (e.g. the inversion of a compound-Poisson
    exponent); an untruncated list is an exact polynomial.
    """

    coeffs: tuple
    radius: float = math.inf
    truncated: bool = False

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(complex(c) for c in self.coeffs))
        if self.radius <= 0:
            raise ValueError("radius must be positive")

    @property
    def nmax(self) -> int:
        return len(self.coeffs)

    def coefficient(self, k: int) -> complex:
        return self.coeffs[k - 1] if 1 <= k <= len(self.coeffs) else 0j

    @property
    def degree(self) -> int:
        for k in range(len(self.coeffs), 0, -1):
            if self.coeffs[k - 1] != 0:
                return k
        return 0

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        out = np.zeros_like(z)
        for k, h in enumerate(self.coeffs, start=1):
            out = out + h * z**k / math.factorial(k)
        return out if out.ndim else complex(out)

    def to_json(self) -> dict:
        enc = [c.real if c.imag == 0 else [c.real, c.imag] for c in self.coeffs]
        return {"coeffs": enc, "convention": "factorial", "radius": None if math.isinf(self.radius) else self.radius, "truncated": self.truncated}

    @classmethod
    def from_json(cls, data) -> "InteractionH":
        if isinstance(data, str):
            data = json.loads(data)
        conv = data.get("convention", "factorial")
        if conv != "factorial":
            raise ValueError(f"unsupported coefficient convention {conv!r}")
        coeffs = []
        for c in data["coeffs"]:
            coeffs.append(complex(c[0], c[1]) if isinstance(c, (list, tuple)) else complex(c))
        radius = data.get("radius")
        return cls(tuple(coeffs), math.inf if radius is None else float(radius), bool(data.get("truncated", False)))


@dataclass(frozen=True)
class CandidateExponent:
    """t -> -H(it) - t^2/2 together with its cumulants."""

    h: InteractionH
    cumulants: tuple

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = -np.asarray(self.h(1j * t)) - 0.5 * t**2
        return out if out.ndim else complex(out)

    @property
    def polynomial_degree(self) -> int | None:
        if self.h.truncated:
            return None
        return max(self.h.degree, 2)


def h_to_levy(h: InteractionH) -> CandidateExponent:
    """Cumulants c_n = -H_n (n != 2) and c_2 = 1 - H_2."""
    c = [0j] * (h.nmax + 1 if h.nmax >= 2 else 3)
    for n in range(1, len(c)):
        c[n] = -h.coefficient(n)
    c[2] += 1
    return CandidateExponent(h, tuple(c))


def levy_to_h(spec: LevySpec, nmax: int) -> InteractionH:
    """Factorial-convention coefficients with -H(it) - t^2/2 = F(t) up to order nmax."""
    c = levy_cumulants(spec, nmax)
    coeffs = [-c[n] for n in range(1, nmax + 1)]
    if nmax >= 2:
        coeffs[1] += 1
    return InteractionH(tuple(coeffs), truncated=not spec.is_gaussian)


def candidate_cumulants(exponent, nmax: int) -> list:
    """Cumulants of any supported exponent object (index 0 unused)."""
    if isinstance(exponent, LevySpec):
        return levy_cumulants(exponent, nmax)
    if isinstance(exponent, InteractionH):
        exponent = h_to_levy(exponent)
    if isinstance(exponent, CandidateExponent):
        c = list(exponent.cumulants) + [0j] * (nmax + 1)
        return c[: nmax + 1]
    raise TypeError("cumulants need a LevySpec, InteractionH or CandidateExponent")


@dataclass
class BochnerVerdict:
    plausible: bool
    min_eigenvalue: float
    reason: str
    grid: np.ndarray = field(repr=False, default=None)


def default_bochner_grid() -> np.ndarray:
    return np.linspace(-3.0, 3.0, 21)


def bochner_validate(exponent, grid=None, tol: float = 1e-10) -> BochnerVerdict:
    """Necessary condition for a Lévy characteristic: exp F positive definite.

    ``exponent`` is a LevySpec, an InteractionH, a CandidateExponent or any
    callable t -> F(t).  Exact polynomial exponents of degree above 2 are
    rejected before the eigenvalue test.
    """
    if isinstance(exponent, InteractionH):
        exponent = h_to_levy(exponent)
    if isinstance(exponent, LevySpec):
        spec = exponent

        def exponent(t):
            return levy_eval(spec, t)

    grid = default_bochner_grid() if grid is None else np.asarray(grid, dtype=float)
    if isinstance(exponent, CandidateExponent):
        deg = exponent.polynomial_degree
        if deg is not None and deg > 2:
            return BochnerVerdict(False, float("nan"), f"polynomial exponent of degree {deg} > 2", grid)
    diff = grid[:, None] - grid[None, :]
    mat = np.exp(np.asarray(exponent(diff.ravel()), dtype=complex)).reshape(diff.shape)
    mat = 0.5 * (mat + mat.conj().T)
    lam = float(np.linalg.eigvalsh(mat).min())
    if lam < -tol:
        return BochnerVerdict(False, lam, f"minimum eigenvalue {lam:.3e} below -{tol:g}", grid)
    return BochnerVerdict(True, lam, "positive semidefinite on the grid", grid)


# ---------------------------------------------------------------------------
# samplers


@dataclass
class FieldSample:
    """A batch of realizations of W on the window; ``values`` has shape (n, *grid)."""

    geometry: LatticeGeometry
    values: np.ndarray
    provenance: dict

    def __len__(self):
        return self.values.shape[0]

    def field(self, i: int) -> LatticeField:
        return LatticeField(self.geometry, self.values[i], real=True)

    def pair(self, f: LatticeField) -> np.ndarray:
        """<W, f> for every replica (bilinear, cell-measure weighted)."""
        if f.geometry != self.geometry:
            raise ValueError("geometry mismatch")
        axes = tuple(range(1, self.values.ndim))
        return self.geometry.cell_volume * np.tensordot(self.values, f.values, axes=(axes, tuple(range(f.values.ndim))))


def _replica_rng(seed: int, replica: int) -> np.random.Generator:
    # counter-based stream: the replica index is the Philox key extension, so
    # any subset of replicas can be regenerated independently
    return np.random.Generator(np.random.Philox(key=[seed & 0xFFFFFFFFFFFFFFFF, replica]))


def _cell_draws(spec: LevySpec, vol: float, shape: tuple, rng: np.random.Generator) -> np.ndarray:
    """X_c with characteristic function exp(vol F(t)), one per cell."""
    x = rng.normal(spec.a * vol, spec.sigma * math.sqrt(vol), size=shape)
    for s, m in spec.atoms:
        x += s * rng.poisson(vol * m, size=shape) - vol * m * s / (1 + s * s)
    return x


def sample_levy_white(spec: LevySpec, geometry: LatticeGeometry, seed: int, n_samples: int = 1, first_replica: int = 0) -> FieldSample:
    """Generalized white noise: W = X_c / vol on each cell."""
    vol = geometry.cell_volume
    out = np.empty((n_samples,) + geometry.shape)
    for i in range(n_samples):
        rng = _replica_rng(seed, first_replica + i)
        out[i] = _cell_draws(spec, vol, geometry.shape, rng) / vol
    return FieldSample(geometry, out, {"kind": "levy-white", "spec": spec.to_json(), "seed": seed})


def sample_gaussian_white(geometry: LatticeGeometry, seed: int, n_samples: int = 1, first_replica: int = 0) -> FieldSample:
    """Gaussian white noise: independent N(0, 1/vol) per cell."""
    sample = sample_levy_white(LevySpec(0.0, 1.0, ()), geometry, seed, n_samples, first_replica)
    sample.provenance = {"kind": "gaussian-white", "seed": seed}
    return sample


def sample_convolved(spec: LevySpec, green: GreenFunction, geometry: LatticeGeometry, seed: int, n_samples: int = 1, first_replica: int = 0) -> FieldSample:
    """G * W for W drawn from the generalized white noise of ``spec``."""
    if green.geometry != geometry:
        raise ValueError("green function and sampling geometry differ")
    white = sample_levy_white(spec, geometry, seed, n_samples, first_replica)
    out = np.empty_like(white.values)
    for i in range(n_samples):
        out[i] = green_apply(green, white.field(i)).values.real
    prov = {"kind": "convolved", "spec": spec.to_json(), "symbol": green.spec.to_dict(), "seed": seed}
    return FieldSample(geometry, out, prov)


def empirical_cf(x: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Sample mean of exp(i t x) for every t."""
    return np.exp(1j * np.outer(t, x)).mean(axis=1)

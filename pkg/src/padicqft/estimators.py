"""scikit-learn style wrappers: each row of X is one lattice field, flattened in C order."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .green import green_apply, green_build
from .lattice import LatticeField, LatticeGeometry, dft, idft
from .symbols import CATALOG, SymbolSpec, apply_operator


def check_lattice_array(X, geometry: LatticeGeometry, allow_complex: bool = True) -> np.ndarray:
    """Validate an (n_fields, M) array for ``geometry``; 1-D input is one field."""
    X = np.asarray(X)
    if X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2:
        raise ValueError(f"expected a 2-D array of flattened fields, got shape {X.shape}")
    if X.shape[1] != geometry.size:
        raise ValueError(f"each row needs {geometry.size} values for {geometry}, got {X.shape[1]}")
    if np.iscomplexobj(X) and not allow_complex:
        raise ValueError("complex input is not accepted here")
    if not np.all(np.isfinite(X)):
        raise ValueError("input contains NaN or infinity")
    return X.astype(complex if np.iscomplexobj(X) else float)


def _rows(X, geo, fn, real: bool):
    out = np.empty(X.shape, dtype=complex)
    for i, row in enumerate(X):
        out[i] = fn(LatticeField(geo, row)).values.reshape(-1)
    if real and np.isrealobj(X):
        return out.real
    return out


class PadicFourierTransformer(TransformerMixin, BaseEstimator):
    """Rows of X mapped to their lattice Fourier transforms."""

    def __init__(self, p: int = 3, N: int = 1, K: int = 1):
        self.p = p
        self.N = N
        self.K = K

    def fit(self, X, y=None):
        self.geometry_ = LatticeGeometry(self.p, self.N, self.K)
        check_lattice_array(X, self.geometry_)
        self.n_features_in_ = self.geometry_.size
        return self

    def transform(self, X):
        check_is_fitted(self, "geometry_")
        X = check_lattice_array(X, self.geometry_)
        return _rows(X, self.geometry_, dft, real=False)

    def inverse_transform(self, X):
        check_is_fitted(self, "geometry_")
        X = check_lattice_array(X, self.geometry_)
        return _rows(X, self.geometry_, idft, real=False)


class GreenTransformer(TransformerMixin, BaseEstimator):
    """Rows of X mapped to G * f; ``inverse_transform`` applies the operator."""

    def __init__(self, p: int = 3, N: int = 1, K: int = 3, alpha: float = 1.0, m: float = 1.0, beta: float = 1.0, variant: str = "l-power", poly: str = "power", degree: int = 2):
        self.p = p
        self.N = N
        self.K = K
        self.alpha = alpha
        self.m = m
        self.beta = beta
        self.variant = variant
        self.poly = poly
        self.degree = degree

    def fit(self, X, y=None):
        geo = LatticeGeometry(self.p, self.N, self.K)
        check_lattice_array(X, geo)
        if self.poly not in CATALOG:
            raise ValueError(f"poly must be one of {sorted(CATALOG)}")
        l = CATALOG[self.poly](self.p, self.degree) if self.poly == "power" else CATALOG[self.poly](self.p)
        if l.N != self.N:
            raise ValueError(f"catalog polynomial {self.poly!r} has N={l.N}")
        self.symbol_ = SymbolSpec(l, self.alpha, self.m, self.beta, self.variant)
        self.green_ = green_build(self.symbol_, geo)
        self.geometry_ = geo
        self.n_features_in_ = geo.size
        return self

    def transform(self, X):
        check_is_fitted(self, "green_")
        X = check_lattice_array(X, self.geometry_)
        return _rows(X, self.geometry_, lambda f: green_apply(self.green_, f), real=True)

    def inverse_transform(self, X):
        check_is_fitted(self, "green_")
        X = check_lattice_array(X, self.geometry_)
        return _rows(X, self.geometry_, lambda f: apply_operator(self.symbol_, f), real=True)

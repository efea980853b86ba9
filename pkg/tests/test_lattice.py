import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from padicqft.lattice import (
    LatticeField,
    LatticeGeometry,
    alias_free_radius,
    ball_indicator,
    convolve,
    dft,
    fft_plan,
    idft,
    lattice_delta,
    load_field,
    naive_dft_full,
    random_field,
    sobolev_inner,
    sobolev_norm,
    translate_values,
    save_field,
)

geometries = st.sampled_from(
    [LatticeGeometry(2, 1, 1), LatticeGeometry(2, 1, 3), LatticeGeometry(3, 1, 2), LatticeGeometry(5, 1, 1), LatticeGeometry(3, 2, 1), LatticeGeometry(2, 2, 2)]
)


def _field(geo, seed, real=False):
    return random_field(geo, np.random.default_rng(seed), real=real)


def test_geometry_sizes():
    geo = LatticeGeometry(3, 2, 2)
    assert geo.axis_size == 81
    assert geo.shape == (81, 81)
    assert geo.cell_volume == pytest.approx(3.0**-4)
    assert geo.window_volume == pytest.approx(3.0**4)


def test_norm_grid_values():
    geo = LatticeGeometry(3, 1, 1)
    # index n stands for n/3; |0| = 0, |1/3| = 3, |1| = 1, |3/3 * 2| = 1
    assert geo.norm_grid()[:4].tolist() == [0.0, 3.0, 3.0, 1.0]


def test_rejects_bad_geometry():
    with pytest.raises(ValueError):
        LatticeGeometry(4, 1, 1)
    with pytest.raises(ValueError):
        LatticeField(LatticeGeometry(3, 1, 1), np.zeros(4))


@settings(max_examples=30, deadline=None)
@given(geometries, st.integers(0, 10**6))
def test_fft_matches_naive(geo, seed):
    f = _field(geo, seed)
    assert np.abs(dft(f).values - naive_dft_full(f).values).max() < 1e-10


@settings(max_examples=30, deadline=None)
@given(geometries, st.integers(0, 10**6))
def test_parseval(geo, seed):
    f = _field(geo, seed)
    assert dft(f).l2_norm() == pytest.approx(f.l2_norm(), rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(geometries, st.integers(0, 10**6))
def test_double_transform_reflects(geo, seed):
    f = _field(geo, seed)
    assert np.allclose(dft(dft(f)).values, f.reflect().values, rtol=0, atol=1e-12 * np.abs(f.values).max())
    assert np.allclose(idft(dft(f)).values, f.values, atol=1e-12 * np.abs(f.values).max())


@pytest.mark.parametrize("p,N,K", [(2, 1, 3), (3, 2, 1), (5, 1, 2)])
def test_unit_ball_indicator_is_fixed(p, N, K):
    f = ball_indicator(LatticeGeometry(p, N, K))
    assert np.abs(dft(f).values - f.values).max() < 1e-12


@pytest.mark.parametrize("r", [-2, -1, 1, 2])
def test_ball_transform_is_dual_ball(r):
    geo = LatticeGeometry(3, 1, 3)
    f = ball_indicator(geo, r)
    expected = 3.0**r * ball_indicator(geo, -r).values
    assert np.abs(dft(f).values - expected).max() < 1e-12


def test_convolution_theorem(rng):
    geo = LatticeGeometry(3, 1, 2)
    f, g = random_field(geo, rng), random_field(geo, rng)
    direct = np.zeros(geo.shape)
    vol = geo.cell_volume
    for a in range(geo.axis_size):
        direct += vol * f.values[a] * translate_values(geo, g.values, (a,))
    assert np.abs(convolve(f, g).values - direct).max() < 1e-12


def test_delta_is_convolution_identity(rng):
    geo = LatticeGeometry(2, 2, 1)
    f = random_field(geo, rng)
    assert np.abs(convolve(lattice_delta(geo), f).values - f.values).max() < 1e-12


def test_translation_is_a_character_phase(rng):
    geo = LatticeGeometry(3, 1, 2)
    f = random_field(geo, rng)
    shifted = LatticeField(geo, translate_values(geo, f.values, (5,)))
    n = np.arange(geo.axis_size)
    phase = np.exp(2j * np.pi * 5 * n / geo.axis_size)
    assert np.abs(dft(shifted).values - phase * dft(f).values).max() < 1e-12


def test_plan_batches_leading_axes(rng):
    geo = LatticeGeometry(3, 2, 1)
    stack = rng.standard_normal((4,) + geo.shape)
    plan = fft_plan(geo)
    batched = plan.forward(stack)
    single = np.stack([plan.forward(a) for a in stack])
    assert np.allclose(batched, single)


def test_sobolev_zero_is_l2(rng):
    geo = LatticeGeometry(3, 1, 2)
    f = random_field(geo, rng)
    assert sobolev_norm(f, 0) == pytest.approx(f.l2_norm())
    assert sobolev_inner(f, f, 2).real == pytest.approx(sobolev_norm(f, 2) ** 2)
    assert sobolev_norm(f, 2) >= sobolev_norm(f, 0) >= sobolev_norm(f, -2)


def test_alias_radius_is_window():
    geo = LatticeGeometry(3, 1, 2)
    assert alias_free_radius(geo, ball_indicator(geo, 1)) == 2


def test_field_roundtrip(tmp_path, rng):
    geo = LatticeGeometry(2, 2, 1)
    f = random_field(geo, rng, real=False)
    path = str(tmp_path / "f.csv")
    save_field(f, path)
    g = load_field(path)
    assert g.geometry == geo
    assert np.array_equal(g.values, f.values)

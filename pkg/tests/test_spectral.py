"""Fourier infrastructure: grid, transforms, multipliers, norms, projections."""

import numpy as np
import pytest

from khsheet.spectral import (Field, apply_multiplier, cosine_field, dealias,
                              derivative, make_grid, project_mean_zero,
                              shifted_values, sobolev_norm, transform)


def test_make_grid_basic():
    g = make_grid(16)
    assert g.x[0] == -np.pi
    assert np.isclose(g.x[1] - g.x[0], np.pi / 8)
    assert np.allclose(np.diff(g.x), 2 * np.pi / 16)


def test_make_grid_wavenumber_span():
    g = make_grid(256)
    assert g.k.min() == -127
    assert g.k.max() == 128


@pytest.mark.parametrize("bad", [15, 33, 14, 8, 0])
def test_make_grid_rejects_bad_sizes(bad):
    with pytest.raises(ValueError):
        make_grid(bad)


def test_transform_constant():
    g = make_grid(32)
    f = Field.from_phys(g, np.ones(32))
    assert abs(f.coeff(0) - 1.0) < 1e-15
    assert np.max(np.abs(f.spec[1:])) < 1e-15


def test_transform_cosine_coefficients():
    g = make_grid(64)
    f = Field.from_phys(g, np.cos(3 * g.x))
    assert abs(f.coeff(3) - 0.5) < 1e-14
    assert abs(f.coeff(-3) - 0.5) < 1e-14
    others = [abs(f.coeff(k)) for k in range(-31, 32) if abs(k) != 3]
    assert max(others) < 1e-14


def test_round_trip_random():
    g = make_grid(128)
    rng = np.random.default_rng(0)
    vals = np.real(np.fft.ifft(np.fft.fft(rng.normal(size=128))))
    vals -= vals.mean()
    f = Field.from_phys(g, vals)
    back = transform(transform(f, "forward"), "inverse")
    # Nyquist is projected out on construction; compare against f itself
    assert np.max(np.abs(back.phys - f.phys)) < 1e-12
    assert np.max(np.abs(back.spec - f.spec)) < 1e-12


def test_conjugate_symmetry_enforced():
    g = make_grid(16)
    bad = np.zeros(16, dtype=complex)
    bad[3] = 1.0  # no matching conjugate at -3
    with pytest.raises(ValueError, match="conjugate"):
        Field.from_spec(g, bad)


def test_multiplier_derivative():
    g = make_grid(64)
    f = Field.from_phys(g, np.sin(g.x))
    df = apply_multiplier(f, lambda k: 1j * k)
    assert np.max(np.abs(df.phys - np.cos(g.x))) < 1e-13


def test_multiplier_abs_k_eigenfunction():
    g = make_grid(64)
    f = Field.from_phys(g, np.cos(2 * g.x))
    out = apply_multiplier(f, lambda k: np.abs(k))
    assert np.max(np.abs(out.phys - 2 * np.cos(2 * g.x))) < 1e-13


def test_multiplier_hilbert():
    g = make_grid(64)
    f = Field.from_phys(g, np.cos(g.x))
    out = apply_multiplier(f, lambda k: -1j * np.sign(k))
    assert np.max(np.abs(out.phys - np.sin(g.x))) < 1e-13


def test_multiplier_undefined_at_zero():
    g = make_grid(32)
    singular = lambda k: np.where(k == 0, np.nan, 1.0 / np.maximum(np.abs(k), 1e-30))
    with pytest.raises(ValueError, match="mean"):
        apply_multiplier(Field.from_phys(g, 1.0 + np.cos(g.x)), singular)
    out = apply_multiplier(Field.from_phys(g, np.cos(g.x)), singular)
    assert np.max(np.abs(out.phys - np.cos(g.x))) < 1e-14


def test_multiplier_composition_is_product():
    g = make_grid(64)
    rng = np.random.default_rng(1)
    f = Field.from_phys(g, rng.normal(size=64))
    m1 = lambda k: 1j * k
    m2 = lambda k: np.abs(k) + 1.0
    once = apply_multiplier(f, lambda k: m1(k) * m2(k))
    twice = apply_multiplier(apply_multiplier(f, m1), m2)
    assert np.max(np.abs(once.spec - twice.spec)) < 1e-14


def test_sobolev_norm_values():
    g = make_grid(64)
    # single real mode: cos(3x) has |c_{+-3}| = 1/2, so H^2 norm is 9/sqrt(2)
    f = Field.from_phys(g, np.cos(3 * g.x))
    assert np.isclose(sobolev_norm(f, 2.0), 9.0 / np.sqrt(2.0), rtol=1e-13)
    const = Field.from_phys(g, np.ones(64))
    assert np.isclose(sobolev_norm(const, 3.5), 1.0, rtol=1e-14)
    both = Field.from_phys(g, np.cos(g.x) + np.cos(2 * g.x))
    assert np.isclose(sobolev_norm(both, 0.0), 1.0, rtol=1e-13)


def test_project_mean_zero():
    g = make_grid(32)
    f = Field.from_phys(g, 1.0 + np.cos(g.x))
    p = project_mean_zero(f)
    assert np.max(np.abs(p.phys - np.cos(g.x))) < 1e-14
    assert np.max(np.abs(project_mean_zero(p).phys - p.phys)) == 0.0
    five = Field.from_phys(g, 5.0 * np.ones(32))
    assert np.max(np.abs(project_mean_zero(five).phys)) < 1e-14


def test_dealias_cut():
    g = make_grid(96)
    kept = cosine_field(g, 30, 1.0)
    cut = cosine_field(g, 40, 1.0)
    assert abs(dealias(kept).coeff(30) - kept.coeff(30)) == 0.0
    assert np.max(np.abs(dealias(kept).spec - kept.spec)) < 1e-14
    assert np.max(np.abs(dealias(cut).spec)) < 1e-14
    assert abs(dealias(cut).coeff(40)) == 0.0
    zero = Field.zero(g)
    assert np.max(np.abs(dealias(zero).phys)) == 0.0


def test_parseval():
    g = make_grid(128)
    rng = np.random.default_rng(2)
    f = Field.from_phys(g, np.real(np.fft.ifft(
        np.fft.fft(rng.normal(size=128)) * (np.abs(g.k) < 40))))
    lhs = np.sum(np.abs(f.spec) ** 2)
    rhs = np.mean(f.phys**2)
    assert abs(lhs - rhs) < 1e-12 * max(rhs, 1.0)


def test_shifted_values_exact_interpolation():
    g = make_grid(64)
    f = Field.from_phys(g, np.cos(5 * g.x) + 0.3 * np.sin(2 * g.x))
    target = np.cos(5 * (g.x + np.pi / 64)) + 0.3 * np.sin(2 * (g.x + np.pi / 64))
    assert np.max(np.abs(shifted_values(f) - target)) < 1e-13


def test_field_immutable():
    g = make_grid(32)
    f = Field.from_phys(g, np.cos(g.x))
    with pytest.raises(ValueError):
        f.phys[0] = 1.0


def test_derivative_order_two():
    g = make_grid(64)
    f = Field.from_phys(g, np.cos(4 * g.x))
    assert np.max(np.abs(derivative(f, 2).phys + 16 * np.cos(4 * g.x))) < 1e-11

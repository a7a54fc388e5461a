"""Coefficient bundle values and exact rational-function identities."""

import numpy as np
import pytest

from khsheet.coeffs import (bundle_from_fields, evaluate_coefficients,
                            verify_coefficient_identities)
from khsheet.errors import DomainError
from khsheet.spectral import Field, make_grid
from khsheet.state import PhysParams, SheetState


def _state(grid, eta_vals, psi_vals):
    return SheetState(eta=Field.from_phys(grid, eta_vals),
                      psi=Field.from_phys(grid, psi_vals))


def test_equilibrium_values():
    g = make_grid(64)
    params = PhysParams(gamma=1.0, upsilon=2.5)
    b = evaluate_coefficients(SheetState.zero(g), params)
    assert np.max(np.abs(b.f.phys)) < 1e-14
    assert np.max(np.abs(b.W.phys - 2.5)) < 1e-14
    assert np.max(np.abs(b.w.phys)) < 1e-14
    assert np.max(np.abs(b.J0.phys)) < 1e-14
    assert np.max(np.abs(b.B.phys)) < 1e-14
    assert np.max(np.abs(b.J0p.phys - 2.0)) < 1e-14
    assert np.max(np.abs(b.K0.phys)) < 1e-14
    assert np.max(np.abs(b.K0p.phys)) < 1e-14


def test_constant_eta_limits():
    g = make_grid(64)
    c = 0.07
    params = PhysParams(gamma=1.0, upsilon=1.5)
    b = bundle_from_fields(Field.from_phys(g, np.full(64, c)), Field.zero(g), params)
    e = 1.0 + 2.0 * c
    assert np.max(np.abs(b.f.phys - (e**-1.5 - 1.0))) < 1e-14
    assert np.max(np.abs(b.J0.phys)) < 1e-14
    assert np.max(np.abs(b.W.phys - params.upsilon / e)) < 1e-14


def test_domain_error_on_self_touching():
    g = make_grid(64)
    params = PhysParams(gamma=1.0, upsilon=0.0)
    deep = 0.6 * np.cos(g.x)  # min(1+2*eta) = -0.2
    state = SheetState(eta=Field.from_phys(g, deep - np.mean(deep)),
                       psi=Field.zero(g))
    with pytest.raises(DomainError):
        evaluate_coefficients(state, params)


def test_identities_zero_state():
    g = make_grid(64)
    params = PhysParams(gamma=1.0, upsilon=1.0)
    state = SheetState.zero(g)
    rep = verify_coefficient_identities(evaluate_coefficients(state, params), state.eta)
    assert rep.max_residual < 1e-15


def test_identities_single_mode():
    g = make_grid(256)
    params = PhysParams(gamma=1.0, upsilon=1.0)
    state = _state(g, 0.1 * np.cos(3 * g.x), np.zeros(256))
    rep = verify_coefficient_identities(evaluate_coefficients(state, params), state.eta)
    assert rep.max_residual < 1e-12


@pytest.mark.parametrize("seed", range(5))
def test_identities_random_band_limited(seed):
    g = make_grid(256)
    params = PhysParams(gamma=0.7, upsilon=1.3)
    rng = np.random.default_rng(seed)
    vals = np.zeros(256)
    for k in range(1, 11):
        vals += rng.normal() * np.cos(k * g.x + rng.uniform(0, 2 * np.pi))
    vals *= 0.2 / np.max(np.abs(vals))
    state = _state(g, vals, np.zeros(256))
    rep = verify_coefficient_identities(evaluate_coefficients(state, params), state.eta)
    assert rep.max_residual < 1e-11


def test_translation_equivariance():
    g = make_grid(128)
    params = PhysParams(gamma=1.0, upsilon=2.0)
    eta = 0.1 * np.cos(2 * g.x) + 0.05 * np.sin(5 * g.x)
    psi = 0.08 * np.sin(3 * g.x)
    b = evaluate_coefficients(_state(g, eta, psi), params)
    shift = 7  # whole grid steps
    b_shift = evaluate_coefficients(
        _state(g, np.roll(eta, shift), np.roll(psi, shift)), params)
    for name in ("f", "W", "w", "B", "J0", "J0p", "K0", "K0p"):
        assert np.max(np.abs(np.roll(getattr(b, name).phys, shift)
                             - getattr(b_shift, name).phys)) < 1e-12, name


def test_reversibility_parity():
    """Under x -> -x with psi -> -psi: f, w even; B, J0 odd."""
    g = make_grid(128)
    params = PhysParams(gamma=1.0, upsilon=2.0)
    eta = 0.1 * np.cos(2 * g.x) + 0.05 * np.cos(5 * g.x)  # generic, not even
    psi = 0.08 * np.sin(3 * g.x) + 0.02 * np.sin(g.x)
    b = evaluate_coefficients(_state(g, eta, psi), params)

    def reflect(vals):
        # x_i -> -x_i maps index i to (n - i) mod n
        return np.concatenate(([vals[0]], vals[1:][::-1]))

    b_ref = evaluate_coefficients(
        _state(g, reflect(eta), -reflect(psi)), params)
    for name in ("f", "w", "W"):
        assert np.max(np.abs(reflect(getattr(b_ref, name).phys)
                             - getattr(b, name).phys)) < 1e-12, name
    for name in ("B", "J0", "K0p"):
        assert np.max(np.abs(reflect(getattr(b_ref, name).phys)
                             + getattr(b, name).phys)) < 1e-12, name

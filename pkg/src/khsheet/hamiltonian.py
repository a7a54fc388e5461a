"""Conserved energy H = E + gamma*L + Omega*M, analytic gradients, and
finite-difference verification.

The pseudo-kinetic energy is the double integral

    E = -(1/4) avg_x avg_y (psi_x(x)+ups)(psi_x(y)+ups) log|z(x)-z(y)|^2 .

It is computed by splitting log|z(x)-z(y)|^2 into the flat singular part
log(4 sin^2((x-y)/2)), handled spectrally through the log-kernel multiplier
(the constant-in-ups parts drop since that kernel has zero mean), and a
smooth remainder handled by the plain double trapezoid rule with the
diagonal limit log|z_x|^2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .singular_ops import apply_D0, apply_H, curvature, log_kernel_convolution
from .spectral import Field, derivative, project_mean_zero
from .state import EPS_FLOOR, PhysParams, SheetState, check_embedding


def _inner(u: Field, v: Field) -> float:
    """Averaged L2 pairing avg(u*v), evaluated exactly in coefficients."""
    return float(np.real(np.sum(u.spec * np.conj(v.spec))))


def energy_kinetic(state: SheetState, params: PhysParams,
                   eps_floor: float = EPS_FLOOR) -> float:
    grid = state.grid
    eta = state.eta.phys
    check_embedding(eta, eps_floor)
    psix = derivative(state.psi)
    g_total = Field.from_phys(grid, psix.phys + params.upsilon)

    # flat log part: spectral, only the mean-zero component survives
    conv = log_kernel_convolution(project_mean_zero(psix))
    e_singular = -0.25 * _inner(g_total, conv)

    # smooth remainder log(|z(x)-z(y)|^2 / (4 sin^2((x-y)/2)))
    x = grid.x
    cosd = np.cos(x[:, None] - x[None, :])
    r = np.sqrt(1.0 + 2.0 * eta)
    half_sq_dist = 1.0 + eta[:, None] + eta[None, :] - r[:, None] * r[None, :] * cosd
    ratio = half_sq_dist / (1.0 - cosd + np.eye(grid.n))  # diagonal patched below
    etax = derivative(state.eta).phys
    np.fill_diagonal(ratio, etax**2 / (1.0 + 2.0 * eta) + (1.0 + 2.0 * eta))
    smooth = np.log(ratio)
    gp = g_total.phys
    e_smooth = -0.25 * float(gp @ smooth @ gp) / grid.n**2

    return e_singular + e_smooth


def length(state: SheetState, eps_floor: float = EPS_FLOOR) -> float:
    """Averaged arclength avg(|z_x|); equals 1 on the unit circle."""
    eta = state.eta.phys
    check_embedding(eta, eps_floor)
    etax = derivative(state.eta).phys
    e = 1.0 + 2.0 * eta
    return float(np.mean(np.sqrt(etax**2 / e + e)))


def momentum(state: SheetState) -> float:
    """Angular momentum avg(psi_x * eta)."""
    return _inner(derivative(state.psi), state.eta)


def hamiltonian_total(state: SheetState, params: PhysParams,
                      eps_floor: float = EPS_FLOOR) -> float:
    return (energy_kinetic(state, params, eps_floor)
            + params.gamma * length(state, eps_floor)
            + params.omega_frame * momentum(state))


def grad_H(state: SheetState, params: PhysParams,
           eps_floor: float = EPS_FLOOR) -> tuple[Field, Field]:
    """L2 gradients (grad_eta H, grad_psi H):

        grad_eta H = Omega psi_x - (psi_x+ups)/2 * D0(eta)[psi_x+ups] - gamma K(eta)
        grad_psi H = -Omega eta_x + (1/2) H(eta)[psi_x+ups]

    Means are retained; the gauge projection happens in the dynamics.
    """
    grid = state.grid
    ups = params.upsilon
    etax = derivative(state.eta).phys
    psix = derivative(state.psi).phys
    g_total = Field.from_phys(grid, psix + ups)

    d0 = apply_D0(state.eta, g_total, eps_floor=eps_floor)
    kappa = curvature(state.eta, eps_floor=eps_floor)
    grad_eta = (params.omega_frame * psix
                - 0.5 * (psix + ups) * d0.phys
                - params.gamma * kappa.phys)

    h_op = apply_H(state.eta, g_total, eps_floor=eps_floor)
    grad_psi = -params.omega_frame * etax + 0.5 * h_op.phys

    return Field.from_phys(grid, grad_eta), Field.from_phys(grid, grad_psi)


@dataclass(frozen=True)
class GradcheckReport:
    mismatches: tuple
    h: float

    @property
    def max_mismatch(self) -> float:
        return max(self.mismatches)


def _perturbed(state: SheetState, d_eta: Field, d_psi: Field, h: float) -> SheetState:
    return SheetState(
        eta=Field.from_phys(state.grid, state.eta.phys + h * d_eta.phys),
        psi=Field.from_phys(state.grid, state.psi.phys + h * d_psi.phys),
    )


def random_band_limited(grid, rng, max_mode: int, scale: float = 1.0) -> Field:
    """Mean-zero random field supported on modes 1..max_mode, sup-norm `scale`."""
    vals = np.zeros(grid.n)
    for k in range(1, max_mode + 1):
        amp, phase = rng.normal(), rng.uniform(0.0, 2.0 * np.pi)
        vals += amp * np.cos(k * grid.x + phase)
    peak = np.max(np.abs(vals))
    if peak > 0:
        vals *= scale / peak
    return Field.from_phys(grid, vals)


def gradcheck(state: SheetState, params: PhysParams, n_dirs: int = 5,
              h: float = 1e-5, rng=None, max_mode: int | None = None) -> GradcheckReport:
    """Max relative mismatch between <grad H, d> and the centered difference
    of hamiltonian_total over random band-limited directions.

    Directions default to modes <= n/16 so the non-polynomial integrands stay
    resolved; aliasing otherwise dominates the FD comparison on coarse grids.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    grid = state.grid
    if max_mode is None:
        max_mode = max(2, grid.n // 16)
    g_eta, g_psi = grad_H(state, params)

    mismatches = []
    for _ in range(n_dirs):
        d_eta = random_band_limited(grid, rng, max_mode)
        d_psi = random_band_limited(grid, rng, max_mode)
        analytic = _inner(g_eta, d_eta) + _inner(g_psi, d_psi)
        plus = hamiltonian_total(_perturbed(state, d_eta, d_psi, +h), params)
        minus = hamiltonian_total(_perturbed(state, d_eta, d_psi, -h), params)
        fd = (plus - minus) / (2.0 * h)
        denom = max(abs(fd), abs(analytic), 1e-14)
        mismatches.append(abs(fd - analytic) / denom)
    return GradcheckReport(mismatches=tuple(mismatches), h=h)

"""Principal-value singular integral operators on the near-circular sheet.

The sheet is z(x) = sqrt(1 + 2*eta(x)) (cos x, sin x).  With the averaged
measure, the three kernels share the denominator

    d(x, y) = 1 + eta(x) + eta(y) - r(x) r(y) cos(x - y)  =  |z(x)-z(y)|^2 / 2

and read

    H(eta)[g]  : [eta_x(x) (1 - (r(y)/r(x)) cos(x-y)) + r(x) r(y) sin(x-y)] / d
    D0(eta)[g] : [1 - (r(y)/r(x)) cos(x-y)] / d
    H0(eta)[g] : [r(x) r(y) sin(x-y)] / d

so that H = eta_x * D0 + H0 holds exactly at the kernel level.

Quadrature: alternate-point trapezoid rule.  Targets sit on the primal grid,
sources on the half-step-shifted grid (spectral interpolation), each with
weight 1/n.  For cot-type odd singularities this rule is spectrally accurate
and needs no kernel desingularization; the eta = 0 multiplier oracles and
grid-refinement self-convergence validate the choice.  Dense O(n^2) kernel
evaluation is accepted at desk scale; the trig difference matrices are
circulant and cached per grid size, and summation order is fixed (plain row
dot products), so results are deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .spectral import Field, apply_multiplier, derivative, shifted_values
from .state import EPS_FLOOR, PhysParams, check_embedding


@lru_cache(maxsize=16)
def _trig_diff_matrices(n: int, half_shift: bool):
    """cos/sin of (x_i - y_j) where y is the (optionally) shifted source grid."""
    h = 2.0 * np.pi / n
    diff = (np.arange(n)[:, None] - np.arange(n)[None, :]) * h
    if half_shift:
        diff = diff - h / 2.0
    cosd = np.cos(diff)
    sind = np.sin(diff)
    cosd.setflags(write=False)
    sind.setflags(write=False)
    return cosd, sind


@dataclass(frozen=True)
class PVQuadrature:
    """Discretization of the principal-value integrals.

    mode 'alternate-point': n sources at x + pi/n, weights 1/n (the default,
    spectrally accurate).  mode 'diagonal-skip': sources on the primal grid
    with the singular diagonal dropped; kept only as a low-order cross-check.
    """

    n: int
    mode: str = "alternate-point"

    def __post_init__(self):
        if self.mode not in ("alternate-point", "diagonal-skip"):
            raise ValueError(f"unknown quadrature mode {self.mode!r}")

    @property
    def weights(self) -> np.ndarray:
        return np.full(self.n, 1.0 / self.n)

    def source_values(self, field: Field) -> np.ndarray:
        if self.mode == "alternate-point":
            return shifted_values(field)
        return field.phys

    def trig(self):
        return _trig_diff_matrices(self.n, self.mode == "alternate-point")

    def apply(self, kernel: np.ndarray, g_src: np.ndarray) -> np.ndarray:
        if self.mode == "diagonal-skip":
            kernel = kernel.copy()
            np.fill_diagonal(kernel, 0.0)
        return kernel @ g_src / self.n


def _kernel_parts(eta: Field, quad: PVQuadrature, eps_floor: float):
    """Shared factors of the three kernels; validates the embedding."""
    eta_p = eta.phys
    eta_s = quad.source_values(eta)
    check_embedding(eta_p, eps_floor)
    check_embedding(eta_s, eps_floor)
    etax_p = derivative(eta).phys
    rp = np.sqrt(1.0 + 2.0 * eta_p)
    rs = np.sqrt(1.0 + 2.0 * eta_s)
    cosd, sind = quad.trig()
    denom = 1.0 + eta_p[:, None] + eta_s[None, :] - rp[:, None] * rs[None, :] * cosd
    num_d0 = 1.0 - (rs[None, :] / rp[:, None]) * cosd
    num_h0 = rp[:, None] * rs[None, :] * sind
    return etax_p, denom, num_d0, num_h0


def _pv_operator(eta: Field, g: Field, which: str, eps_floor: float,
                 quad: PVQuadrature | None) -> Field:
    grid = eta.grid
    if quad is None:
        quad = PVQuadrature(n=grid.n)
    etax_p, denom, num_d0, num_h0 = _kernel_parts(eta, quad, eps_floor)
    if which == "D0":
        kernel = num_d0 / denom
    elif which == "H0":
        kernel = num_h0 / denom
    else:
        kernel = (etax_p[:, None] * num_d0 + num_h0) / denom
    out = quad.apply(kernel, quad.source_values(g))
    return Field.from_phys(grid, out)


def apply_H(eta: Field, g: Field, eps_floor: float = EPS_FLOOR,
            quad: PVQuadrature | None = None) -> Field:
    """Full Birkhoff-Rott tangential operator H(eta)[g]; output mean-zero up
    to quadrature error."""
    return _pv_operator(eta, g, "H", eps_floor, quad)


def apply_D0(eta: Field, g: Field, eps_floor: float = EPS_FLOOR,
             quad: PVQuadrature | None = None) -> Field:
    """D0(eta)[g]; reduces to the mean projection at eta = 0."""
    return _pv_operator(eta, g, "D0", eps_floor, quad)


def apply_H0(eta: Field, g: Field, eps_floor: float = EPS_FLOOR,
             quad: PVQuadrature | None = None) -> Field:
    """H0(eta)[g]; reduces to the periodic Hilbert transform at eta = 0."""
    return _pv_operator(eta, g, "H0", eps_floor, quad)


def curvature(eta: Field, eps_floor: float = EPS_FLOOR) -> Field:
    """Signed curvature of the sheet; equals -1 on the unit circle.

    K(eta) = (eta_xx - (1+2*eta) - 3*eta_x^2/(1+2*eta))
             / (1 + 2*eta + eta_x^2/(1+2*eta))^{3/2},  derivatives spectral.
    """
    check_embedding(eta.phys, eps_floor)
    e = 1.0 + 2.0 * eta.phys
    etax = derivative(eta).phys
    etaxx = derivative(eta, order=2).phys
    num = etaxx - e - 3.0 * etax**2 / e
    den = (e + etax**2 / e) ** 1.5
    return Field.from_phys(eta.grid, num / den)


def transport_V(eta: Field, psi: Field, params: PhysParams,
                eps_floor: float = EPS_FLOOR) -> Field:
    """Transport coefficient (1/2) D0(eta)[upsilon + psi_x] - upsilon/2;
    vanishes at the equilibrium."""
    grid = eta.grid
    g = Field.from_phys(grid, derivative(psi).phys + params.upsilon)
    d0 = apply_D0(eta, g, eps_floor=eps_floor)
    return Field.from_phys(grid, 0.5 * d0.phys - 0.5 * params.upsilon)


def log_kernel_convolution(g: Field) -> Field:
    """Averaged convolution with log(4 sin^2((x-y)/2)): the multiplier is
    -1/|k| on mean-zero input (k = 0 slot is 0 since the kernel has zero
    mean).  Rejects input with nonzero mean."""
    if abs(g.mean) > 1e-12:
        raise ValueError(f"log kernel convolution needs mean-zero input, mean = {g.mean:.3e}")
    k = g.grid.k
    mult = np.zeros(g.grid.n)
    mult[1:] = -1.0 / np.abs(k[1:])
    return apply_multiplier(g, mult)

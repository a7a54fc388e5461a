"""Closed-form linear theory around the circular equilibrium: dispersion
relation, stability thresholds, and the complex coordinate change.

The squared frequency of mode xi is

    omega^2 = (|xi|/2) * ( gamma (|xi|^2 - 1) - ups^2 (|xi|/2 - 1) )
            = (gamma |xi| / 2) * ( |xi|^2 - (beta/2) |xi| + beta - 1 ),

real for every |xi| >= 1 iff the Weber number beta = ups^2/gamma stays below
4(2+sqrt(3)) (below 15 when restricted to integer modes).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DegenerateFrequencyError
from .spectral import Field, FourierGrid
from .state import PhysParams, SheetState

DEGENERACY_TOL = 1e-10


def omega_sq(k, params: PhysParams):
    """omega^2 at wavenumber(s) k (k nonzero; sign irrelevant)."""
    k = np.abs(np.asarray(k, dtype=float))
    if np.any(k == 0):
        raise ValueError("omega is undefined at k = 0")
    out = 0.5 * k * (params.gamma * (k**2 - 1.0) - params.upsilon**2 * (0.5 * k - 1.0))
    return float(out) if out.ndim == 0 else out


def omega(k, params: PhysParams) -> float:
    """Real frequency of a stable mode; raises if omega^2 < 0."""
    w2 = omega_sq(k, params)
    if np.any(np.asarray(w2) < 0):
        raise ValueError(f"mode {k} is unstable (omega^2 = {w2})")
    return np.sqrt(w2) if np.ndim(w2) else float(np.sqrt(w2))


def growth_rate(k, params: PhysParams) -> float:
    """sqrt(-omega^2) of an unstable mode; raises if the mode is stable."""
    w2 = omega_sq(k, params)
    if np.any(np.asarray(w2) >= 0):
        raise ValueError(f"mode {k} is not unstable (omega^2 = {w2})")
    return np.sqrt(-w2) if np.ndim(w2) else float(np.sqrt(-w2))


def continuous_threshold() -> tuple[float, float]:
    """Numerically minimize h(xi) = (xi^2 - 1)/(xi/2 - 1) over xi > 2.

    Returns (beta_plus, xi_star); the closed forms are 4(2+sqrt(3)) and
    2+sqrt(3).
    """
    h = lambda xi: (xi**2 - 1.0) / (0.5 * xi - 1.0)
    res = minimize_scalar(h, bounds=(2.0 + 1e-9, 100.0), method="bounded",
                          options={"xatol": 1e-12})
    return float(res.fun), float(res.x)


@dataclass(frozen=True)
class ModeStability:
    k: int
    omega_sq: float
    stable: bool
    omega: float | None = None
    growth_rate: float | None = None


@dataclass(frozen=True)
class SpectrumReport:
    modes: tuple

    @property
    def all_stable(self) -> bool:
        return all(m.stable for m in self.modes)

    @property
    def unstable_modes(self) -> tuple:
        return tuple(m.k for m in self.modes if not m.stable)


def stability_report(params: PhysParams, j_max: int) -> SpectrumReport:
    """Per-mode classification for 1 <= k <= j_max; a mode is stable iff
    omega^2 > 0 (marginal modes count as unstable)."""
    if j_max < 2:
        raise ValueError(f"j_max must be >= 2, got {j_max}")
    modes = []
    for k in range(1, j_max + 1):
        w2 = omega_sq(k, params)
        if w2 > 0:
            modes.append(ModeStability(k=k, omega_sq=w2, stable=True, omega=float(np.sqrt(w2))))
        else:
            modes.append(ModeStability(k=k, omega_sq=w2, stable=False,
                                       growth_rate=float(np.sqrt(-w2))))
    return SpectrumReport(modes=tuple(modes))


def m_symbol(k, params: PhysParams):
    """Symplectic scaling symbol m(k) = sqrt(|k| / (2 omega(k)))."""
    k = np.abs(np.asarray(k, dtype=float))
    w2 = omega_sq(k, params)
    w2 = np.asarray(w2)
    if np.any(w2 <= DEGENERACY_TOL**2):
        raise DegenerateFrequencyError(
            f"omega too small for the complex change (min omega^2 = {float(np.min(w2)):.3e})")
    out = np.sqrt(k / (2.0 * np.sqrt(w2)))
    return float(out) if out.ndim == 0 else out


def _m_on_grid(grid: FourierGrid, params: PhysParams) -> np.ndarray:
    """m(k) over the FFT wavenumber layout; slot k=0 is unused and set to 1."""
    m = np.ones(grid.n)
    nz = grid.k != 0
    m[nz] = m_symbol(grid.k[nz], params)
    return m


def to_complex(state: SheetState, params: PhysParams) -> np.ndarray:
    """Complex coordinates u_k = (m(k)^{-1} eta_k + i m(k) psi_k)/sqrt(2)
    (FFT layout, u_0 = 0)."""
    m = _m_on_grid(state.grid, params)
    u = (state.eta.spec / m + 1j * m * state.psi.spec) / np.sqrt(2.0)
    u[0] = 0.0
    return u


def from_complex(u: np.ndarray, params: PhysParams, grid: FourierGrid) -> SheetState:
    """Invert to_complex exactly."""
    u = np.asarray(u, dtype=complex)
    if u.shape != (grid.n,):
        raise ValueError("complex vector does not match the grid")
    m = _m_on_grid(grid, params)
    v = np.conj(np.roll(u[::-1], 1))  # coefficients of the conjugate field
    eta_spec = m * (u + v) / np.sqrt(2.0)
    psi_spec = (v - u) * 1j / (m * np.sqrt(2.0))
    eta_spec[0] = 0.0
    psi_spec[0] = 0.0
    return SheetState(eta=Field.from_spec(grid, eta_spec),
                      psi=Field.from_spec(grid, psi_spec))

"""Physical parameters and the dynamical state (eta, psi)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .spectral import Field, FourierGrid, cosine_field, project_mean_zero

MEAN_TOL = 1e-10
EPS_FLOOR = 1e-6


@dataclass(frozen=True)
class PhysParams:
    """Surface tension gamma, background velocity jump upsilon, rotation rate.

    omega_frame defaults to upsilon/2, which cancels the 0-homogeneous
    transport in the evolution equations.
    """

    gamma: float
    upsilon: float
    omega_frame: float = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.gamma < 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if self.omega_frame is None:
            object.__setattr__(self, "omega_frame", self.upsilon / 2.0)

    @property
    def beta(self) -> float:
        """Weber number upsilon^2 / gamma (requires gamma > 0)."""
        if self.gamma == 0:
            raise ValueError("beta is undefined at gamma = 0")
        return self.upsilon**2 / self.gamma

    @classmethod
    def from_beta(cls, gamma: float, beta: float, sign: int = 1) -> "PhysParams":
        if gamma <= 0:
            raise ValueError("gamma must be positive to fix the Weber number")
        if beta < 0:
            raise ValueError("beta must be >= 0")
        return cls(gamma=gamma, upsilon=sign * math.sqrt(beta * gamma))


@dataclass(frozen=True)
class SheetState:
    """The pair (eta, psi); eta mean-zero, psi mean-zero by gauge."""

    eta: Field
    psi: Field

    def __post_init__(self):
        if self.eta.grid.n != self.psi.grid.n:
            raise ValueError("eta and psi must share a grid")
        if abs(self.eta.mean) > MEAN_TOL:
            raise ValueError(f"eta must be mean-zero, got mean {self.eta.mean:.3e}")
        # exact gauge normalization: zero both DC slots
        object.__setattr__(self, "eta", project_mean_zero(self.eta))
        object.__setattr__(self, "psi", project_mean_zero(self.psi))

    @property
    def grid(self) -> FourierGrid:
        return self.eta.grid

    @classmethod
    def zero(cls, grid: FourierGrid) -> "SheetState":
        return cls(eta=Field.zero(grid), psi=Field.zero(grid))

    @classmethod
    def from_modes(cls, grid: FourierGrid, modes) -> "SheetState":
        """Build from a list of (variable, wavenumber, amplitude, phase)."""
        eta = np.zeros(grid.n)
        psi = np.zeros(grid.n)
        for var, k, amp, phase in modes:
            bump = cosine_field(grid, int(k), float(amp), float(phase)).phys
            if var == "eta":
                eta = eta + bump
            elif var == "psi":
                psi = psi + bump
            else:
                raise ValueError(f"unknown variable {var!r} (expected 'eta' or 'psi')")
        return cls(eta=Field.from_phys(grid, eta), psi=Field.from_phys(grid, psi))


def check_embedding(values: np.ndarray, eps_floor: float = EPS_FLOOR) -> None:
    """Reject samples where 1 + 2*eta drops to the self-touching regime."""
    worst = float(np.min(1.0 + 2.0 * values))
    if worst <= eps_floor:
        raise DomainError(f"1 + 2*eta reached {worst:.3e} (floor {eps_floor:.1e})")

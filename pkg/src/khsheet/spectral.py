"""Periodic Fourier infrastructure: grid, fields, multipliers, norms, projections.

Conventions. The circle is sampled at x_i = -pi + 2*pi*i/n and every integral
is averaged over the period, so the coefficient of e^{ikx} is

    fhat(k) = (1/n) * sum_i f(x_i) e^{-ik x_i}.

Coefficients are stored in FFT layout; the reported wavenumber set is
{-n/2+1, ..., n/2} and the Nyquist coefficient is zeroed on construction so
that sgn(k) conventions stay symmetric.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

CONSISTENCY_TOL = 1e-12


@dataclass(frozen=True)
class FourierGrid:
    """Uniform periodic grid of even size n on [-pi, pi)."""

    n: int
    x: np.ndarray
    k: np.ndarray
    _sign: np.ndarray  # e^{ik*pi} = (-1)^k, relating FFT output to x_0 = -pi

    def __post_init__(self):
        self.x.setflags(write=False)
        self.k.setflags(write=False)
        self._sign.setflags(write=False)

    @property
    def spacing(self) -> float:
        return 2.0 * np.pi / self.n

    @property
    def nyquist_index(self) -> int:
        return self.n // 2


def make_grid(n: int) -> FourierGrid:
    """Build the grid; n must be even and at least 16."""
    if n % 2 != 0:
        raise ValueError(f"grid size must be even, got {n}")
    if n < 16:
        raise ValueError(f"grid size must be >= 16, got {n}")
    x = -np.pi + 2.0 * np.pi * np.arange(n) / n
    k = np.fft.fftfreq(n, d=1.0 / n)
    k[n // 2] = n // 2  # report the Nyquist slot as +n/2
    sign = np.where(np.mod(k, 2.0) == 0.0, 1.0, -1.0)
    return FourierGrid(n=n, x=x, k=k, _sign=sign)


@dataclass(frozen=True)
class Field:
    """One real periodic function held as samples and spectral coefficients.

    Both representations are kept consistent; instances are immutable.
    """

    grid: FourierGrid
    phys: np.ndarray
    spec: np.ndarray

    def __post_init__(self):
        self.phys.setflags(write=False)
        self.spec.setflags(write=False)

    @classmethod
    def from_phys(cls, grid: FourierGrid, values) -> "Field":
        values = np.asarray(values, dtype=float)
        if values.shape != (grid.n,):
            raise ValueError(f"expected {grid.n} samples, got shape {values.shape}")
        spec = grid._sign * np.fft.fft(values) / grid.n
        spec[grid.nyquist_index] = 0.0
        phys = np.real(np.fft.ifft(grid._sign * spec) * grid.n)
        return cls(grid=grid, phys=phys, spec=spec)

    @classmethod
    def from_spec(cls, grid: FourierGrid, coeffs) -> "Field":
        coeffs = np.asarray(coeffs, dtype=complex).copy()
        if coeffs.shape != (grid.n,):
            raise ValueError(f"expected {grid.n} coefficients, got shape {coeffs.shape}")
        coeffs[grid.nyquist_index] = 0.0
        mirrored = np.conj(np.roll(coeffs[::-1], 1))
        scale = max(np.max(np.abs(coeffs)), 1.0)
        if np.max(np.abs(coeffs - mirrored)) > CONSISTENCY_TOL * scale:
            raise ValueError("spectral coefficients violate conjugate symmetry")
        spec = 0.5 * (coeffs + mirrored)  # symmetrize exactly
        phys = np.real(np.fft.ifft(grid._sign * spec) * grid.n)
        return cls(grid=grid, phys=phys, spec=spec)

    @classmethod
    def zero(cls, grid: FourierGrid) -> "Field":
        return cls(grid=grid, phys=np.zeros(grid.n), spec=np.zeros(grid.n, dtype=complex))

    def coeff(self, k: int) -> complex:
        """Coefficient of e^{ikx}; k may be negative."""
        return complex(self.spec[k % self.grid.n])

    @property
    def mean(self) -> float:
        return float(self.spec[0].real)


def cosine_field(grid: FourierGrid, k: int, amplitude: float, phase: float = 0.0) -> Field:
    """amplitude * cos(k x + phase)."""
    return Field.from_phys(grid, amplitude * np.cos(k * grid.x + phase))


def transform(field: Field, direction: str) -> Field:
    """Recompute one representation from the other ('forward' = phys -> spec)."""
    if direction == "forward":
        return Field.from_phys(field.grid, field.phys)
    if direction == "inverse":
        return Field.from_spec(field.grid, field.spec)
    raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")


def apply_multiplier(field: Field, m) -> Field:
    """Apply a Fourier multiplier m(k); m is a callable on the wavenumber array
    or a precomputed array in FFT layout.

    A non-finite m(0) is allowed only when the field is mean-zero (the DC slot
    is then declared 0).
    """
    grid = field.grid
    values = np.asarray(m(grid.k) if callable(m) else m, dtype=complex)
    if values.shape != (grid.n,):
        raise ValueError("multiplier does not match the grid")
    if not np.isfinite(values[0]):
        if abs(field.spec[0]) > CONSISTENCY_TOL:
            raise ValueError("multiplier undefined at k=0 but the field has nonzero mean")
        values = values.copy()
        values[0] = 0.0
    return Field.from_spec(grid, values * field.spec)


def derivative(field: Field, order: int = 1) -> Field:
    return apply_multiplier(field, lambda k: (1j * k) ** order)


def sobolev_norm(field: Field, s: float) -> float:
    """H^s norm with the Japanese bracket <k> = max(1, |k|)."""
    bracket = np.maximum(1.0, np.abs(field.grid.k))
    return float(np.sqrt(np.sum(bracket ** (2.0 * s) * np.abs(field.spec) ** 2)))


def project_mean_zero(field: Field) -> Field:
    spec = field.spec.copy()
    spec[0] = 0.0
    return Field.from_spec(field.grid, spec)


def dealias(field: Field) -> Field:
    """Zero all coefficients with |k| > n/3 (2/3 rule)."""
    grid = field.grid
    spec = np.where(np.abs(grid.k) > grid.n / 3.0, 0.0, field.spec)
    return Field.from_spec(grid, spec)


def shifted_values(field: Field) -> np.ndarray:
    """Samples at the half-step-shifted nodes x_i + pi/n, by exact spectral
    interpolation (phase shift of the coefficients)."""
    grid = field.grid
    phase = np.exp(1j * grid.k * (np.pi / grid.n))
    return np.real(np.fft.ifft(grid._sign * field.spec * phase) * grid.n)

"""Run-time observables: super-actions, spectral localization, conserved
quantities, and amplitude-scaling fits."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateFrequencyError
from .hamiltonian import energy_kinetic, hamiltonian_total, length, momentum
from .linear import to_complex
from .spectral import sobolev_norm
from .state import PhysParams, SheetState


def split_norm(state: SheetState, s: float = 4.0) -> float:
    """The natural size ||eta||_{H^{s+1/4}} + ||psi||_{H^{s-1/4}}."""
    return sobolev_norm(state.eta, s + 0.25) + sobolev_norm(state.psi, s - 0.25)


def super_actions(state: SheetState, params: PhysParams, n_max: int) -> np.ndarray:
    """J_n = |u_n|^2 + |u_{-n}|^2 in complex coordinates, n = 1..n_max."""
    if n_max < 1 or n_max > state.grid.n // 2:
        raise ValueError(f"n_max must be in 1..n/2, got {n_max}")
    u = to_complex(state, params)
    n = state.grid.n
    return np.array([abs(u[k]) ** 2 + abs(u[n - k]) ** 2 for k in range(1, n_max + 1)])


def spectral_width(state: SheetState, params: PhysParams,
                   fraction: float = 0.999, s: float = 4.0) -> int:
    """Smallest K with the given fraction of the weighted spectral mass
    sum <k>^{2s} |u_k|^2 inside |k| <= K; 0 for the zero state."""
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"fraction must be in (0, 1), got {fraction}")
    u = to_complex(state, params)
    n = state.grid.n
    shells = np.array([abs(u[k]) ** 2 + abs(u[n - k]) ** 2 for k in range(1, n // 2 + 1)])
    weights = np.arange(1, n // 2 + 1, dtype=float) ** (2.0 * s)
    mass = weights * shells
    total = float(np.sum(mass))
    if total == 0.0:
        return 0
    cumulative = np.cumsum(mass)
    return int(np.searchsorted(cumulative, fraction * total) + 1)


def drift_fit(pairs) -> float:
    """Least-squares slope of log(drift) against log(epsilon)."""
    pairs = list(pairs)
    if len(pairs) < 3:
        raise ValueError("need at least 3 (epsilon, drift) pairs")
    eps = np.array([p[0] for p in pairs], dtype=float)
    drift = np.array([p[1] for p in pairs], dtype=float)
    if np.any(eps <= 0) or np.any(drift <= 0):
        raise ValueError("epsilon and drift values must be positive")
    slope, _ = np.polyfit(np.log(eps), np.log(drift), 1)
    return float(slope)


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    H: float
    E: float
    L: float
    M: float
    sup_eta: float
    norm_s: float
    width: float
    super_actions: tuple

    @property
    def total_action(self) -> float:
        return float(sum(self.super_actions))


def build_record(t: float, state: SheetState, params: PhysParams,
                 s_exp: float = 4.0, n_max: int = 8,
                 fraction: float = 0.999) -> DiagnosticsRecord:
    """Sample every observable; super-actions and width degrade to NaN when
    the complex change is degenerate (e.g. gamma = 0 runs)."""
    if n_max < 1 or n_max > state.grid.n // 2:
        raise ValueError(f"n_max must be in 1..n/2, got {n_max}")
    e = energy_kinetic(state, params)
    ell = length(state)
    m = momentum(state)
    h = e + params.gamma * ell + params.omega_frame * m
    try:
        actions = tuple(super_actions(state, params, n_max))
        width = float(spectral_width(state, params, fraction, s_exp))
    except DegenerateFrequencyError:
        actions = tuple(math.nan for _ in range(n_max))
        width = math.nan
    return DiagnosticsRecord(
        t=t, H=h, E=e, L=ell, M=m,
        sup_eta=float(np.max(np.abs(state.eta.phys))),
        norm_s=split_norm(state, s_exp),
        width=width,
        super_actions=actions,
    )


def csv_header(n_max: int) -> str:
    return ",".join(["t", "H", "E", "L", "M", "sup_eta", "norm_s", "width"]
                    + [f"J{n}" for n in range(1, n_max + 1)])


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def csv_row(rec: DiagnosticsRecord) -> str:
    cells = [_fmt(rec.t), _fmt(rec.H), _fmt(rec.E), _fmt(rec.L), _fmt(rec.M),
             _fmt(rec.sup_eta), _fmt(rec.norm_s), _fmt(rec.width)]
    cells += [_fmt(j) for j in rec.super_actions]
    return ",".join(cells)

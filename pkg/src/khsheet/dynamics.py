"""Evolution equations, time integrators, CFL control, simulation driver,
and checkpoint (de)serialization.

The right-hand side of the contour dynamics system is

    eta_t = Omega eta_x - (1/2) H(eta)[psi_x + ups]
    psi_t = Omega psi_x - (psi_x + ups)/2 * D0(eta)[psi_x + ups] - gamma K(eta)

with both components projected mean-zero after every evaluation (the psi
projection removes the irrelevant spatial constant of the gauge; the eta
projection removes the tiny quadrature residue of an average the continuous
flow preserves exactly).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import BlowUpError, ConfigError, DomainError
from .linear import omega_sq
from .singular_ops import apply_D0, apply_H, curvature
from .spectral import Field, FourierGrid, dealias as dealias_field, derivative, make_grid
from .state import PhysParams, SheetState

BLOWUP_SUP_ETA = 0.45
RK4_IMAG_STABILITY = 2.8


@dataclass(frozen=True)
class Tangent:
    deta: Field
    dpsi: Field


def _clean(field: Field, do_dealias: bool) -> Field:
    spec = field.spec.copy()
    spec[0] = 0.0
    if do_dealias:
        spec = np.where(np.abs(field.grid.k) > field.grid.n / 3.0, 0.0, spec)
    return Field.from_spec(field.grid, spec)


def rhs(state: SheetState, params: PhysParams, do_dealias: bool = True) -> Tangent:
    """Nonlinear tangent at `state`; (0, 0) is an exact equilibrium."""
    grid = state.grid
    ups = params.upsilon
    etax = derivative(state.eta).phys
    psix = derivative(state.psi).phys
    g_total = Field.from_phys(grid, psix + ups)

    h_op = apply_H(state.eta, g_total)
    deta = params.omega_frame * etax - 0.5 * h_op.phys

    d0 = apply_D0(state.eta, g_total)
    kappa = curvature(state.eta)
    dpsi = (params.omega_frame * psix
            - 0.5 * (psix + ups) * d0.phys
            - params.gamma * kappa.phys)

    return Tangent(deta=_clean(Field.from_phys(grid, deta), do_dealias),
                   dpsi=_clean(Field.from_phys(grid, dpsi), do_dealias))


def _linear_blocks(grid: FourierGrid, params: PhysParams):
    """Per-mode entries a(k), b(k) of the linearized system (default frame)."""
    kabs = np.abs(grid.k)
    a = -0.5 * kabs
    b = (params.gamma * kabs**2 - 0.5 * params.upsilon**2 * kabs
         - (params.gamma - params.upsilon**2))
    a[0] = 0.0
    b[0] = 0.0
    return a, b


def _require_default_frame(params: PhysParams, what: str) -> None:
    if abs(params.omega_frame - params.upsilon / 2.0) > 1e-14:
        raise ValueError(f"{what} requires the default frame omega_frame = upsilon/2")


def linearized_rhs(state: SheetState, params: PhysParams) -> Tangent:
    """Tangent of the linearization at the equilibrium (default frame)."""
    _require_default_frame(params, "linearized_rhs")
    grid = state.grid
    a, b = _linear_blocks(grid, params)
    return Tangent(deta=Field.from_spec(grid, a * state.psi.spec),
                   dpsi=Field.from_spec(grid, b * state.eta.spec))


def _propagator_entries(grid: FourierGrid, t: float, params: PhysParams):
    """exp(t L(k)) entrywise over the FFT wavenumber layout (identity at k=0)."""
    a, b = _linear_blocks(grid, params)
    w2 = -a * b
    p11 = np.ones(grid.n)
    s = np.zeros(grid.n)  # sin(w t)/w or sinh(mu t)/mu or t
    osc = w2 > 1e-12
    hyp = w2 < -1e-12
    deg = ~(osc | hyp)
    w = np.sqrt(np.where(osc, w2, 1.0))
    mu = np.sqrt(np.where(hyp, -w2, 1.0))
    p11[osc] = np.cos(w[osc] * t)
    s[osc] = np.sin(w[osc] * t) / w[osc]
    p11[hyp] = np.cosh(mu[hyp] * t)
    s[hyp] = np.sinh(mu[hyp] * t) / mu[hyp]
    p11[deg] = 1.0
    s[deg] = t
    p11[0] = 1.0
    s[0] = 0.0
    return p11, a * s, b * s  # (diagonal, upper, lower)


def linear_propagator(k: int, t: float, params: PhysParams) -> np.ndarray:
    """Closed-form 2x2 matrix exp(t L(k)) acting on (eta_k, psi_k).

    With a = -|k|/2, b = gamma k^2 - (ups^2/2)|k| - (gamma - ups^2) and
    omega^2 = -a b, the block is rotation-like when omega^2 > 0 and
    cosh/sinh-like when omega^2 < 0.  Only the default frame is supported.
    """
    if k == 0:
        raise ValueError("linear_propagator is undefined at k = 0")
    _require_default_frame(params, "linear_propagator")
    kabs = abs(int(k))
    a = -0.5 * kabs
    b = (params.gamma * kabs**2 - 0.5 * params.upsilon**2 * kabs
         - (params.gamma - params.upsilon**2))
    w2 = -a * b
    if w2 > 1e-12:
        w = np.sqrt(w2)
        c, s = np.cos(w * t), np.sin(w * t) / w
    elif w2 < -1e-12:
        mu = np.sqrt(-w2)
        c, s = np.cosh(mu * t), np.sinh(mu * t) / mu
    else:
        c, s = 1.0, t
    return np.array([[c, a * s], [b * s, c]])


def _apply_propagator(entries, eta_spec, psi_spec):
    p11, p12, p21 = entries
    return p11 * eta_spec + p12 * psi_spec, p21 * eta_spec + p11 * psi_spec


def _state_from_specs(grid, eta_spec, psi_spec) -> SheetState:
    return SheetState(eta=Field.from_spec(grid, eta_spec),
                      psi=Field.from_spec(grid, psi_spec))


def advance(state: SheetState, dt: float, method: str, params: PhysParams,
            do_dealias: bool = True, linear_only: bool = False,
            guard: float = BLOWUP_SUP_ETA) -> SheetState:
    """One time step of size dt; 'rk4' or 'ifrk4'.

    ifrk4 integrates the nonlinear residual rhs - L(D) with classical RK4 and
    composes with the exact per-mode linear propagator, removing the
    |k|^{3/2} stiffness.  Raises BlowUpError when sup|eta| exceeds the guard.
    """
    grid = state.grid
    if method == "rk4":
        f: Callable[[SheetState], Tangent]
        if linear_only:
            f = lambda s: linearized_rhs(s, params)
        else:
            f = lambda s: rhs(s, params, do_dealias)

        def shifted(base: SheetState, tan: Tangent, c: float) -> SheetState:
            return _state_from_specs(grid,
                                     base.eta.spec + c * tan.deta.spec,
                                     base.psi.spec + c * tan.dpsi.spec)

        k1 = f(state)
        k2 = f(shifted(state, k1, dt / 2.0))
        k3 = f(shifted(state, k2, dt / 2.0))
        k4 = f(shifted(state, k3, dt))
        eta_spec = state.eta.spec + dt / 6.0 * (k1.deta.spec + 2.0 * k2.deta.spec
                                                + 2.0 * k3.deta.spec + k4.deta.spec)
        psi_spec = state.psi.spec + dt / 6.0 * (k1.dpsi.spec + 2.0 * k2.dpsi.spec
                                                + 2.0 * k3.dpsi.spec + k4.dpsi.spec)
        new_state = _state_from_specs(grid, eta_spec, psi_spec)
    elif method == "ifrk4":
        _require_default_frame(params, "ifrk4")
        e_half = _propagator_entries(grid, dt / 2.0, params)
        e_full = _propagator_entries(grid, dt, params)

        def resid(s: SheetState) -> tuple[np.ndarray, np.ndarray]:
            if linear_only:
                return np.zeros(grid.n, dtype=complex), np.zeros(grid.n, dtype=complex)
            full = rhs(s, params, do_dealias)
            lin = linearized_rhs(s, params)
            return full.deta.spec - lin.deta.spec, full.dpsi.spec - lin.dpsi.spec

        u0 = (state.eta.spec, state.psi.spec)
        k1 = resid(state)
        k2 = resid(_state_from_specs(grid, *_apply_propagator(
            e_half, u0[0] + dt / 2.0 * k1[0], u0[1] + dt / 2.0 * k1[1])))
        eu_half = _apply_propagator(e_half, *u0)
        k3 = resid(_state_from_specs(grid,
                                     eu_half[0] + dt / 2.0 * k2[0],
                                     eu_half[1] + dt / 2.0 * k2[1]))
        e_k3 = _apply_propagator(e_half, *k3)
        eu_full = _apply_propagator(e_full, *u0)
        k4 = resid(_state_from_specs(grid,
                                     eu_full[0] + dt * e_k3[0],
                                     eu_full[1] + dt * e_k3[1]))
        e_k1 = _apply_propagator(e_full, *k1)
        e_k23 = _apply_propagator(e_half, k2[0] + k3[0], k2[1] + k3[1])
        eta_spec = eu_full[0] + dt / 6.0 * (e_k1[0] + 2.0 * e_k23[0] + k4[0])
        psi_spec = eu_full[1] + dt / 6.0 * (e_k1[1] + 2.0 * e_k23[1] + k4[1])
        new_state = _state_from_specs(grid, eta_spec, psi_spec)
    else:
        raise ValueError(f"unknown integrator {method!r}")

    sup_eta = float(np.max(np.abs(new_state.eta.phys)))
    if not sup_eta <= guard:  # catches NaN as well
        raise BlowUpError(f"sup|eta| = {sup_eta:.3f} exceeded the guard {guard}")
    return new_state


def cfl_dt(params: PhysParams, n: int, safety: float) -> float:
    """dt = safety * 2.8 / max_k |omega(k)| over the grid wavenumbers (the
    stiffness scale is omega ~ sqrt(gamma/2) |k|^{3/2})."""
    if not 0.0 < safety <= 1.0:
        raise ValueError(f"safety factor must be in (0, 1], got {safety}")
    ks = np.arange(1, n // 2 + 1)
    w_max = float(np.max(np.sqrt(np.abs(omega_sq(ks, params)))))
    return safety * RK4_IMAG_STABILITY / w_max


@dataclass(frozen=True)
class SimConfig:
    params: PhysParams
    n: int
    t_end: float
    dt: float | None = None
    cfl: float | None = None
    integrator: str = "rk4"
    initial: tuple = ()
    dealias: bool = True
    sample_every: int = 10
    checkpoint_every: int = 0
    diag_s: float = 4.0
    diag_n_max: int = 8
    diag_fraction: float = 0.999

    def __post_init__(self):
        if (self.dt is None) == (self.cfl is None):
            raise ConfigError("exactly one of 'dt' and 'cfl' must be set", field="dt")
        if self.integrator not in ("rk4", "ifrk4"):
            raise ConfigError(f"unknown integrator {self.integrator!r}", field="integrator")

    def resolved_dt(self) -> float:
        if self.dt is not None:
            return self.dt
        return cfl_dt(self.params, self.n, self.cfl)


_CONFIG_KEYS = {"gamma", "upsilon", "omega_frame", "n", "dt", "cfl", "t_end",
                "integrator", "initial", "dealias", "sample_every",
                "checkpoint_every", "diag_s", "diag_n_max", "diag_fraction"}


def _want(raw, key, kind, check=None, required=True, default=None):
    if key not in raw:
        if required:
            raise ConfigError(f"missing required field '{key}'", field=key)
        return default
    value = raw[key]
    if kind is float and isinstance(value, (int, float)) and not isinstance(value, bool):
        value = float(value)
    if not isinstance(value, kind) or isinstance(value, bool) and kind is not bool:
        raise ConfigError(f"field '{key}' must be {kind.__name__}, got {value!r}", field=key)
    if check is not None and not check(value):
        raise ConfigError(f"field '{key}' has invalid value {value!r}", field=key)
    return value


def config_from_dict(raw: dict) -> SimConfig:
    """Validate a JSON-style dict; errors name the offending field."""
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(raw) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config field(s): {sorted(unknown)}",
                          field=sorted(unknown)[0])
    gamma = _want(raw, "gamma", float, check=lambda v: v >= 0)
    upsilon = _want(raw, "upsilon", float)
    omega_frame = _want(raw, "omega_frame", float, required=False)
    n = _want(raw, "n", int, check=lambda v: v >= 16 and v % 2 == 0)
    t_end = _want(raw, "t_end", float, check=lambda v: v > 0)
    dt = _want(raw, "dt", float, check=lambda v: v > 0, required=False)
    cfl = _want(raw, "cfl", float, check=lambda v: 0 < v <= 1, required=False)
    integrator = _want(raw, "integrator", str, required=False, default="rk4")
    dealias_flag = _want(raw, "dealias", bool, required=False, default=True)
    sample_every = _want(raw, "sample_every", int, check=lambda v: v >= 1,
                         required=False, default=10)
    checkpoint_every = _want(raw, "checkpoint_every", int, check=lambda v: v >= 0,
                             required=False, default=0)
    diag_s = _want(raw, "diag_s", float, required=False, default=4.0)
    diag_n_max = _want(raw, "diag_n_max", int, check=lambda v: v >= 1,
                       required=False, default=8)
    diag_fraction = _want(raw, "diag_fraction", float,
                          check=lambda v: 0 < v < 1, required=False, default=0.999)

    initial_raw = raw.get("initial", [])
    if not isinstance(initial_raw, list):
        raise ConfigError("field 'initial' must be a list of [variable, k, amplitude, phase]",
                          field="initial")
    initial = []
    for i, entry in enumerate(initial_raw):
        if (not isinstance(entry, (list, tuple)) or len(entry) not in (3, 4)
                or not isinstance(entry[0], str)):
            raise ConfigError(f"field 'initial[{i}]' must be [variable, k, amplitude, phase]",
                              field="initial")
        var, k, amp = entry[0], entry[1], entry[2]
        phase = entry[3] if len(entry) == 4 else 0.0
        if var not in ("eta", "psi"):
            raise ConfigError(f"field 'initial[{i}]' variable must be 'eta' or 'psi'",
                              field="initial")
        if not isinstance(k, int) or isinstance(k, bool):
            raise ConfigError(f"field 'initial[{i}]' wavenumber must be an integer",
                              field="initial")
        initial.append((var, k, float(amp), float(phase)))

    params = PhysParams(gamma=gamma, upsilon=upsilon, omega_frame=omega_frame)
    return SimConfig(params=params, n=n, t_end=t_end, dt=dt, cfl=cfl,
                     integrator=integrator, initial=tuple(initial),
                     dealias=dealias_flag, sample_every=sample_every,
                     checkpoint_every=checkpoint_every, diag_s=diag_s,
                     diag_n_max=diag_n_max, diag_fraction=diag_fraction)


CHECKPOINT_SCHEMA_VERSION = 1


def _half_spectrum(field: Field) -> list:
    half = field.spec[: field.grid.n // 2 + 1]
    return [[float(c.real), float(c.imag)] for c in half]


def _full_spectrum(half: list, n: int) -> np.ndarray:
    spec = np.zeros(n, dtype=complex)
    for k, (re, im) in enumerate(half):
        spec[k] = re + 1j * im
        if 0 < k < n // 2:
            spec[n - k] = re - 1j * im
    return spec


def to_checkpoint(state: SheetState, params: PhysParams, t: float) -> dict:
    """JSON-ready snapshot; coefficients listed for k = 0..n/2, conjugate
    symmetry implied.  json round-trips doubles exactly (repr serialization)."""
    return {
        "schema_version": CHECKPOINT_SCHEMA_VERSION,
        "t": float(t),
        "params": {"gamma": params.gamma, "upsilon": params.upsilon,
                   "omega_frame": params.omega_frame},
        "n": state.grid.n,
        "eta_hat": _half_spectrum(state.eta),
        "psi_hat": _half_spectrum(state.psi),
    }


def from_checkpoint(doc: dict) -> tuple[SheetState, PhysParams, float]:
    if doc.get("schema_version") != CHECKPOINT_SCHEMA_VERSION:
        raise ConfigError(f"unsupported checkpoint schema {doc.get('schema_version')!r}",
                          field="schema_version")
    n = int(doc["n"])
    grid = make_grid(n)
    p = doc["params"]
    params = PhysParams(gamma=float(p["gamma"]), upsilon=float(p["upsilon"]),
                        omega_frame=float(p["omega_frame"]))
    state = SheetState(eta=Field.from_spec(grid, _full_spectrum(doc["eta_hat"], n)),
                       psi=Field.from_spec(grid, _full_spectrum(doc["psi_hat"], n)))
    return state, params, float(doc["t"])


def save_checkpoint(path, state: SheetState, params: PhysParams, t: float) -> None:
    with open(path, "w") as fh:
        json.dump(to_checkpoint(state, params, t), fh, sort_keys=True)
        fh.write("\n")


def load_checkpoint(path) -> tuple[SheetState, PhysParams, float]:
    with open(path) as fh:
        return from_checkpoint(json.load(fh))


@dataclass
class SimResult:
    status: str  # completed | blow_up | domain_error
    t_final: float
    final_state: SheetState
    records: list = field(default_factory=list)
    checkpoints: list = field(default_factory=list)
    message: str = ""


def simulate(config: SimConfig, initial_state: SheetState | None = None,
             t0: float = 0.0, on_sample=None, on_checkpoint=None) -> SimResult:
    """Run to t_end (rounded to whole steps), sampling diagnostics and
    collecting checkpoints; returns a completed/blow_up/domain_error status.

    `on_sample(record)` and `on_checkpoint(step, doc)` stream the artifacts
    as they are produced.
    """
    from .diagnostics import build_record  # deferred: diagnostics imports linear

    grid = make_grid(config.n)
    if initial_state is None:
        state = SheetState.from_modes(grid, config.initial)
    else:
        if initial_state.grid.n != config.n:
            raise ConfigError("resume state does not match the configured grid size",
                              field="n")
        state = initial_state

    dt = config.resolved_dt()
    n_steps = max(1, int(round((config.t_end - t0) / dt)))
    params = config.params

    def sample(step: int, s: SheetState):
        rec = build_record(t0 + step * dt, s, params, s_exp=config.diag_s,
                           n_max=config.diag_n_max, fraction=config.diag_fraction)
        result.records.append(rec)
        if on_sample is not None:
            on_sample(rec)

    def checkpoint(step: int, s: SheetState):
        doc = to_checkpoint(s, params, t0 + step * dt)
        result.checkpoints.append(doc)
        if on_checkpoint is not None:
            on_checkpoint(step, doc)

    result = SimResult(status="completed", t_final=t0, final_state=state)
    sample(0, state)
    step = 0
    try:
        for step in range(1, n_steps + 1):
            state = advance(state, dt, config.integrator, params,
                            do_dealias=config.dealias)
            if step % config.sample_every == 0 or step == n_steps:
                sample(step, state)
            if config.checkpoint_every and step % config.checkpoint_every == 0:
                checkpoint(step, state)
    except BlowUpError as exc:
        result.status = "blow_up"
        result.message = str(exc)
        step -= 1  # the failed step was not applied
    except DomainError as exc:
        result.status = "domain_error"
        result.message = str(exc)
        step -= 1
    result.final_state = state
    result.t_final = t0 + step * dt
    if not result.checkpoints or result.checkpoints[-1]["t"] != result.t_final:
        checkpoint(step, state)
    return result

"""Command-line surface: simulate, spectrum, scan-beta, resonances,
gradcheck, optest.

Exit codes: 0 ok, 1 usage/config error, 2 numerical failure, 3 blow-up
detected.  The KH_SHEET_OUT environment variable overrides --out.  All
commands are deterministic given identical inputs and seeds; the run
manifest carries wall-clock timestamps and is the only non-reproducible
artifact.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .errors import BlowUpError, ConfigError, DomainError
from .dynamics import (SimConfig, config_from_dict, from_checkpoint, simulate,
                       to_checkpoint)
from .diagnostics import csv_header, csv_row
from .hamiltonian import gradcheck, random_band_limited
from .linear import continuous_threshold, omega_sq, stability_report
from .resonance import scan_beta, scan_divisors
from .singular_ops import apply_D0, apply_H, apply_H0, log_kernel_convolution
from .spectral import Field, make_grid
from .state import PhysParams, SheetState

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2
EXIT_BLOWUP = 3

INTEGER_BETA_PLUS = 15.0


class _Parser(argparse.ArgumentParser):
    """argparse with usage failures mapped to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _out_dir(args) -> str:
    out = os.environ.get("KH_SHEET_OUT") or args.out
    os.makedirs(out, exist_ok=True)
    return out


def _say(args, message: str) -> None:
    if not args.quiet:
        print(message)


def _utcnow() -> str:
    return datetime.now(timezone.utc).isoformat()


def _write_manifest(path: str, command: str, config_echo, status: str,
                    outputs, started: str, exit_code: int) -> dict:
    manifest = {
        "schema_version": 1,
        "tool_version": __version__,
        "command": command,
        "config": config_echo,
        "started_at": started,
        "finished_at": _utcnow(),
        "status": status,
        "outputs": outputs,
        "exit_code": exit_code,
    }
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest


def _load_config(path: str) -> tuple[dict, SimConfig]:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path}: line {exc.lineno}: {exc.msg}")
    return raw, config_from_dict(raw)


def cmd_simulate(args) -> int:
    started = _utcnow()
    out = _out_dir(args)
    try:
        raw, config = _load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    initial_state, t0 = None, 0.0
    if args.resume:
        initial_state, ckpt_params, t0 = from_checkpoint(json.load(open(args.resume)))
        if (ckpt_params.gamma, ckpt_params.upsilon) != (config.params.gamma,
                                                        config.params.upsilon):
            print("config error: checkpoint parameters disagree with the config",
                  file=sys.stderr)
            return EXIT_USAGE

    outputs = []
    diag_path = os.path.join(out, "diagnostics.csv")
    diag_fh = open(diag_path, "w")
    diag_fh.write(csv_header(config.diag_n_max) + "\n")
    outputs.append(diag_path)

    def on_sample(rec):
        diag_fh.write(csv_row(rec) + "\n")

    def on_checkpoint(step, doc):
        path = os.path.join(out, f"checkpoint_{step:08d}.json")
        with open(path, "w") as fh:
            json.dump(doc, fh, sort_keys=True)
            fh.write("\n")
        outputs.append(path)

    result = simulate(config, initial_state=initial_state, t0=t0,
                      on_sample=on_sample, on_checkpoint=on_checkpoint)
    diag_fh.close()

    exit_code = {"completed": EXIT_OK, "blow_up": EXIT_BLOWUP,
                 "domain_error": EXIT_NUMERICAL}[result.status]
    manifest_path = os.path.join(out, "manifest.json")
    _write_manifest(manifest_path, "simulate", raw, result.status, outputs,
                    started, exit_code)
    _say(args, f"status: {result.status}  t_final: {_fmt(result.t_final)}  "
               f"outputs: {len(outputs)} file(s) in {out}")
    return exit_code


def cmd_spectrum(args) -> int:
    params = PhysParams(gamma=args.gamma, upsilon=args.upsilon)
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["k", "omega_sq", "omega_or_rate", "stable"])
    ks = range(1, args.j_max + 1)
    for k in ks:
        w2 = omega_sq(k, params)
        rate = np.sqrt(abs(w2))
        writer.writerow([k, _fmt(w2), _fmt(rate), str(w2 > 0).lower()])
    beta = params.beta if params.gamma > 0 else float("inf")
    beta_plus, _ = continuous_threshold()
    writer.writerow(["beta", _fmt(beta)])
    writer.writerow(["beta_plus_continuous", _fmt(beta_plus)])
    writer.writerow(["beta_plus_integer", _fmt(INTEGER_BETA_PLUS)])
    return EXIT_OK


def cmd_scan_beta(args) -> int:
    out = _out_dir(args)
    try:
        scan = scan_beta(args.beta_lo, args.beta_hi, args.samples, args.gamma,
                         args.p_max, args.j_max, args.eps, workers=args.workers)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    path = os.path.join(out, "beta_scan.csv")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["beta", "min_abs_divisor", "argmin_index", "flagged"])
        for row in scan.rows:
            writer.writerow([_fmt(row.beta), _fmt(row.min_abs_divisor),
                             row.argmin_index.serialize() if row.argmin_index else "",
                             str(row.flagged).lower()])
    _say(args, f"wrote {path}: {len(scan.rows)} samples, flagged fraction "
               f"{_fmt(scan.flagged_fraction)}, identity deviation "
               f"{_fmt(scan.identity_max_dev)}")
    if scan.identity_max_dev > 1e-12 * max(args.gamma, 1.0):
        print("error: exact spectral identities violated during scan", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def cmd_resonances(args) -> int:
    out = _out_dir(args)
    params = PhysParams.from_beta(args.gamma, args.beta)
    try:
        scan = scan_divisors(params, args.p_max, args.j_max)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    path = os.path.join(out, "resonances.csv")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["index", "max_j", "divisor"])
        for rec in scan.records:
            writer.writerow([rec.index.serialize(), rec.max_j, _fmt(rec.divisor)])
        writer.writerow(["tau_hat", "",
                         _fmt(scan.tau_hat) if scan.tau_hat is not None else ""])
    _say(args, f"wrote {path}: {len(scan.records)} non-SAP classes, "
               f"min |divisor| {_fmt(scan.min_abs_divisor)}")
    return EXIT_OK


def _report_checks(args, checks) -> int:
    """checks: list of (name, error, tolerance); prints one line each."""
    failed = False
    for name, err, tol in checks:
        ok = err < tol
        failed |= not ok
        _say(args, f"{'PASS' if ok else 'FAIL'}  {name}: {err:.3e} (tol {tol:.1e})")
    if failed and args.quiet:
        for name, err, tol in checks:
            if err >= tol:
                print(f"FAIL  {name}: {err:.3e} (tol {tol:.1e})", file=sys.stderr)
    return EXIT_NUMERICAL if failed else EXIT_OK


def cmd_gradcheck(args) -> int:
    try:
        with open(args.config) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    gamma = float(raw.get("gamma", 1.0))
    upsilon = float(raw.get("upsilon", 1.0))
    n = int(raw.get("n", 128))
    n_states = int(raw.get("n_states", 10))
    n_dirs = int(raw.get("n_dirs", 3))
    h = float(raw.get("h", 1e-5))
    amp = float(raw.get("amplitude", 0.1))
    tol = float(raw.get("tolerance", 1e-6))
    seed = args.seed if args.seed is not None else int(raw.get("seed", 0))

    params = PhysParams(gamma=gamma, upsilon=upsilon)
    grid = make_grid(n)
    rng = np.random.default_rng(seed)
    checks = []
    for i in range(n_states):
        state = SheetState(eta=random_band_limited(grid, rng, n // 16, scale=amp),
                           psi=random_band_limited(grid, rng, n // 16, scale=amp))
        report = gradcheck(state, params, n_dirs=n_dirs, h=h, rng=rng)
        checks.append((f"gradient state {i}", report.max_mismatch, tol))
    return _report_checks(args, checks)


def cmd_optest(args) -> int:
    n = args.n
    grid = make_grid(n)
    zero = Field.zero(grid)
    x = grid.x
    checks = []

    modes = [1, 2, 3, 5, max(4, n // 8), max(6, n // 4)]
    err_h = err_h0 = err_d0 = 0.0
    for j in modes:
        g_cos = Field.from_phys(grid, np.cos(j * x))
        g_sin = Field.from_phys(grid, np.sin(j * x))
        # H(0) and H0(0) act as the periodic Hilbert transform -i sgn(D)
        err_h = max(err_h, float(np.max(np.abs(apply_H(zero, g_cos).phys - np.sin(j * x)))))
        err_h = max(err_h, float(np.max(np.abs(apply_H(zero, g_sin).phys + np.cos(j * x)))))
        err_h0 = max(err_h0, float(np.max(np.abs(apply_H0(zero, g_cos).phys - np.sin(j * x)))))
        err_d0 = max(err_d0, float(np.max(np.abs(apply_D0(zero, g_cos).phys))))
    checks.append(("H(0) Hilbert multiplier", err_h, 1e-9))
    checks.append(("H0(0) Hilbert multiplier", err_h0, 1e-9))
    checks.append(("D0(0) mean projection", err_d0, 1e-9))

    one = Field.from_phys(grid, np.ones(n))
    checks.append(("D0(0)[1] = 1",
                   float(np.max(np.abs(apply_D0(zero, one).phys - 1.0))), 1e-12))
    checks.append(("H(0)[1] = 0",
                   float(np.max(np.abs(apply_H(zero, one).phys))), 1e-12))

    err_log = 0.0
    for j in (1, 4):
        g = Field.from_phys(grid, np.cos(j * x))
        err_log = max(err_log, float(np.max(np.abs(
            log_kernel_convolution(g).phys + np.cos(j * x) / j))))
    checks.append(("log kernel multiplier -1/|k|", err_log, 1e-12))

    # fixed rough reference state: self-consistency under grid refinement
    eta_fun = lambda xs: 0.15 * np.cos(8 * xs) + 0.05 * np.sin(13 * xs)
    g_fun = lambda xs: np.cos(5 * xs) + 0.3 * np.sin(2 * xs)
    grid2 = make_grid(2 * n)
    coarse = apply_H(Field.from_phys(grid, eta_fun(x)), Field.from_phys(grid, g_fun(x)))
    fine = apply_H(Field.from_phys(grid2, eta_fun(grid2.x)),
                   Field.from_phys(grid2, g_fun(grid2.x)))
    err_conv = float(np.max(np.abs(coarse.phys - fine.phys[::2])))
    checks.append(("H self-convergence vs refined grid", err_conv, 1e-1))

    return _report_checks(args, checks)


def build_parser() -> _Parser:
    parser = _Parser(prog="khsheet",
                     description="Vortex-sheet contour dynamics laboratory")
    parser.add_argument("--version", action="version", version=f"khsheet {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", default=".", help="output directory "
                       "(env KH_SHEET_OUT overrides)")
        p.add_argument("--workers", type=int, default=os.cpu_count() or 1)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--quiet", action="store_true")

    p = sub.add_parser("simulate", help="run a time evolution from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--resume", default=None, help="checkpoint JSON to resume from")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("spectrum", help="linear spectrum CSV to stdout")
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--upsilon", type=float, required=True)
    p.add_argument("--j-max", type=int, default=16)
    common(p)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("scan-beta", help="Weber-number small-divisor scan")
    p.add_argument("--beta-lo", type=float, required=True)
    p.add_argument("--beta-hi", type=float, required=True)
    p.add_argument("--samples", type=int, default=50)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--p-max", type=int, default=4)
    p.add_argument("--j-max", type=int, default=20)
    p.add_argument("--eps", type=float, default=1e-3)
    common(p)
    p.set_defaults(func=cmd_scan_beta)

    p = sub.add_parser("resonances", help="divisor scan at fixed parameters")
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--p-max", type=int, default=4)
    p.add_argument("--j-max", type=int, default=20)
    common(p)
    p.set_defaults(func=cmd_resonances)

    p = sub.add_parser("gradcheck", help="finite-difference gradient suite")
    p.add_argument("--config", required=True)
    common(p)
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("optest", help="eta = 0 operator oracle suite")
    p.add_argument("--n", type=int, default=256)
    common(p)
    p.set_defaults(func=cmd_optest)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BlowUpError as exc:
        print(f"blow-up detected: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    except DomainError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()

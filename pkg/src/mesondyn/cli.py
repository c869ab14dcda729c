"""Batch experiment runner.

Subcommands: evolve, sweep-field, sweep-theta, theory, spin-sample,
spectrum. Every output file embeds the run configuration and the package
version; nothing time- or host-dependent is written, so reruns with an
identical configuration are bit-identical.

Exit codes: 0 success, 2 usage problem, 3 over capacity, 4 I/O failure.
"""
import argparse
import concurrent.futures
import io
import json
import math
import os
import sys
from dataclasses import dataclass, fields, replace

import numpy as np

from . import __version__
from .analysis import (
    fit_inverse_field,
    fit_line,
    size_filtering_profile,
    summarize,
    window_for,
)
from .basis import build_basis
from .dynamics import (
    evolve_spectral,
    initial_theta_state,
    occupation_grid,
    state_at,
)
from .errors import CapacityError, InvalidArgumentError, MesondynError
from .hamiltonian import (
    build_momentum_block,
    build_sector_hamiltonian,
    default_r_max,
)
from .linalg import airy_zero, eig_symmetric, eig_tridiagonal
from . import spinmap, theory

__all__ = ["RunConfig", "main"]

USAGE_EXIT = 2
CAPACITY_EXIT = 3
IO_EXIT = 4


@dataclass(frozen=True)
class RunConfig:
    """One run's physical and bookkeeping parameters."""

    L: int = 100
    J: float = 1.0
    h: float = 1.1
    theta: float = 0.0
    t_max: float = 60.0
    dt: float = 0.25
    window_start: float = 10.0
    window_end: float = 60.0
    seed: int = 1
    r_max: int = 0  # 0 means derive from (J, h)
    out_dir: str = "."
    format: str = "csv"

    def __post_init__(self):
        for name in ("J", "h", "theta", "t_max", "dt",
                     "window_start", "window_end"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidArgumentError(f"{name} must be finite")
        if self.dt <= 0:
            raise InvalidArgumentError("dt must be positive")
        if self.t_max <= 0:
            raise InvalidArgumentError("t_max must be positive")
        # same bound initial_theta_state enforces, but checked before
        # any expensive work starts
        if not 0.0 <= self.theta <= math.pi:
            raise InvalidArgumentError(
                f"theta must lie in [0, pi], got {self.theta}"
            )
        if self.format not in ("csv", "json"):
            raise InvalidArgumentError("format must be csv or json")

    def as_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @property
    def effective_r_max(self):
        return self.r_max if self.r_max > 0 else default_r_max(self.J, self.h)

    def times(self):
        n = int(round(self.t_max / self.dt))
        return np.arange(n + 1) * self.dt


def _parse_config_file(path):
    values = {}
    with open(path) as f:
        for lineno, raw in enumerate(f, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InvalidArgumentError(
                    f"{path}:{lineno}: expected 'key = value'"
                )
            key, val = (part.strip() for part in line.split("=", 1))
            values[key] = val
    return values


_INT_KEYS = {"L", "seed", "r_max"}
_FLOAT_KEYS = {"J", "h", "theta", "t_max", "dt", "window_start", "window_end"}
_STR_KEYS = {"out_dir", "format"}


def _coerce(key, val):
    if key in _INT_KEYS:
        return int(val)
    if key in _FLOAT_KEYS:
        return float(val)
    if key in _STR_KEYS:
        return str(val)
    raise InvalidArgumentError(f"unknown config key {key!r}")


def _config_from_args(args):
    cfg = RunConfig()
    if args.config:
        file_values = _parse_config_file(args.config)
        cfg = replace(cfg, **{k: _coerce(k, v) for k, v in file_values.items()})
    overrides = {}
    for key, attr in (("L", "L"), ("J", "J"), ("h", "h"), ("theta", "theta"),
                      ("t_max", "tmax"), ("dt", "dt"), ("seed", "seed"),
                      ("r_max", "r_max"), ("out_dir", "out_dir"),
                      ("format", "format")):
        val = getattr(args, attr, None)
        if val is not None:
            overrides[key] = val
    if getattr(args, "window", None) is not None:
        lo, hi = args.window
        overrides["window_start"] = lo
        overrides["window_end"] = hi
    return replace(cfg, **overrides)


def _parse_window(text):
    for sep in (":", ","):
        if sep in text:
            lo, hi = text.split(sep, 1)
            return float(lo), float(hi)
    raise argparse.ArgumentTypeError("window must look like 10:60")


def _parse_range(text):
    """'3' -> [3]; '1..12' -> [1, ..., 12]."""
    if ".." in text:
        lo, hi = text.split("..", 1)
        lo, hi = int(lo), int(hi)
        if hi < lo:
            raise argparse.ArgumentTypeError("empty range")
        return list(range(lo, hi + 1))
    return [int(text)]


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


class _Out:
    """Atomic, deterministic output writing under one directory."""

    def __init__(self, cfg):
        self.cfg = cfg
        os.makedirs(cfg.out_dir, exist_ok=True)
        self.written = []

    def _meta_lines(self, extra=None):
        meta = dict(self.cfg.as_dict())
        meta["version"] = __version__
        if extra:
            meta.update(extra)
        return [f"# {k} = {_fmt(v)}" for k, v in meta.items()]

    def _commit(self, name, text):
        path = os.path.join(self.cfg.out_dir, name)
        tmp = path + ".tmp"
        with open(tmp, "w") as f:
            f.write(text)
        os.replace(tmp, path)
        self.written.append(path)
        return path

    def table(self, name, columns, extra_meta=None, trailer=None):
        """columns: list of (header, sequence). Writes csv or json."""
        if self.cfg.format == "json":
            payload = {
                "version": __version__,
                "config": self.cfg.as_dict(),
                "columns": {h: [_json_cell(v) for v in col]
                            for h, col in columns},
            }
            if extra_meta:
                payload["meta"] = {k: _json_cell(v)
                                   for k, v in extra_meta.items()}
            if trailer:
                payload["fits"] = {k: _json_cell(v)
                                   for k, v in trailer.items()}
            return self._commit(name + ".json",
                                json.dumps(payload, sort_keys=True, indent=1)
                                + "\n")
        lines = self._meta_lines(extra_meta)
        lines.append(",".join(h for h, _ in columns))
        n = len(columns[0][1]) if columns else 0
        for i in range(n):
            lines.append(",".join(_fmt(col[i]) for _, col in columns))
        if trailer:
            for k, v in trailer.items():
                lines.append(f"# {k} = {_fmt(v)}")
        return self._commit(name + ".csv", "\n".join(lines) + "\n")

    def pgm(self, name, values):
        """16-bit plain graymap; rows are time steps, columns sites."""
        clipped = np.clip(values, 0.0, 1.0)
        gray = np.rint(clipped * 65535).astype(np.int64)
        nt, width = gray.shape
        lines = ["P2"]
        lines += self._meta_lines()
        lines.append(f"{width} {nt}")
        lines.append("65535")
        for row in gray:
            lines.append(" ".join(str(v) for v in row))
        return self._commit(name + ".pgm", "\n".join(lines) + "\n")

    def text(self, name, body):
        return self._commit(name, body)


def _json_cell(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def _evolve_series(cfg, with_occupation=False):
    basis = build_basis(cfg.L)
    op = build_sector_hamiltonian(basis, cfg.J, cfg.h)
    spectrum = eig_symmetric(op)
    psi0 = initial_theta_state(basis, cfg.theta)
    series = evolve_spectral(spectrum, psi0, cfg.times(), hamiltonian=op,
                             with_occupation=with_occupation)
    return basis, op, spectrum, psi0, series


def _summary_columns(cfg, summary):
    d = summary.diagnostics
    return [
        ("h", [cfg.h]),
        ("theta", [cfg.theta]),
        ("r_prime_avg", [summary.r_prime_avg]),
        ("omega", [summary.omega]),
        ("v", [summary.v]),
        ("speed_r_squared", [d["speed_r_squared"]]),
        ("speed_low_confidence", [d["speed_low_confidence"]]),
        ("peak_prominence", [d["peak_prominence"]]),
        ("window_start", [d["window"][0]]),
        ("window_end", [d["window"][1]]),
    ]


def cmd_evolve(args):
    cfg = _config_from_args(args)
    out = _Out(cfg)
    _, _, spectrum, psi0, series = _evolve_series(cfg)
    out.table("evolve_timeseries", [
        ("Jt", series.times),
        ("r_avg", series.r_avg),
        ("c_s", series.c_s),
        ("energy", series.energy),
        ("norm_error", series.norm_error),
    ])
    out.pgm("evolve_density", series.density / 1.0)
    window = window_for(series, cfg.window_start, cfg.window_end)
    summary = summarize(series, window)
    out.table("evolve_summary", _summary_columns(cfg, summary),
              extra_meta={"guard_time": series.guard_time})
    for t in args.snapshots or []:
        psi = state_at(spectrum, psi0, t)
        grid = occupation_grid(psi)
        mask = grid.probabilities > 0
        rr, cc = np.nonzero(mask)
        out.table(f"evolve_occupation_t{_fmt(float(t))}", [
            ("r", grid.r_values[rr]),
            ("c", grid.c_values[cc]),
            ("probability", grid.probabilities[mask]),
        ], extra_meta={"Jt": float(t)})
    return 0


def _summarized_run(cfg):
    """Worker for sweep points: evolve one config, return its summary."""
    _, _, _, _, series = _evolve_series(cfg)
    window = window_for(series, cfg.window_start, cfg.window_end)
    return summarize(series, window), float(series.energy[0])


def _map_runs(configs):
    """One independent run per sweep point, in parallel when cores allow."""
    workers = min(len(configs), os.cpu_count() or 1)
    if workers <= 1:
        return [_summarized_run(c) for c in configs]
    with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_summarized_run, configs))


def cmd_sweep_field(args):
    base = _config_from_args(args)
    configs = [replace(base, h=float(h)) for h in args.h_list]
    results = _map_runs(configs)
    rows = [(cfg.h, summary) for cfg, (summary, _) in zip(configs, results)]
    out = _Out(base)
    columns = [
        ("h", [h for h, _ in rows]),
        ("r_prime_avg", [s.r_prime_avg for _, s in rows]),
        ("omega", [s.omega for _, s in rows]),
        ("v", [s.v for _, s in rows]),
        ("speed_r_squared", [s.diagnostics["speed_r_squared"]
                             for _, s in rows]),
    ]
    trailer = None
    if len(rows) >= 3:
        hs = [h for h, _ in rows]
        a, r2_inv = fit_inverse_field(hs, [s.r_prime_avg for _, s in rows])
        slope, intercept, r2_line = fit_line(hs, [s.omega for _, s in rows])
        trailer = {
            "fit_inverse_field_a": a,
            "fit_inverse_field_r_squared": r2_inv,
            "fit_omega_slope": slope,
            "fit_omega_intercept": intercept,
            "fit_omega_r_squared": r2_line,
        }
    out.table("sweep_field", columns, trailer=trailer)
    return 0


def cmd_sweep_theta(args):
    base = _config_from_args(args)
    configs = [replace(base, theta=float(th)) for th in args.theta_list]
    results = _map_runs(configs)
    rows = [
        (cfg.theta, theory.theta_energy(cfg.theta, cfg.h, cfg.J),
         e_measured, summary)
        for cfg, (summary, e_measured) in zip(configs, results)
    ]
    out = _Out(base)
    columns = [
        ("theta", [r[0] for r in rows]),
        ("E_theory", [r[1] for r in rows]),
        ("E_measured", [r[2] for r in rows]),
        ("r_prime_avg", [r[3].r_prime_avg for r in rows]),
        ("v", [r[3].v for r in rows]),
    ]
    trailer = None
    if len(rows) >= 3:
        energies = [r[1] for r in rows]
        sizes = [r[3].r_prime_avg for r in rows]
        order = np.argsort(energies)
        diffs = np.diff(np.asarray(sizes)[order])
        trailer = {"r_prime_monotone_in_E": bool(np.all(diffs >= 0))}
    out.table("sweep_theta", columns, trailer=trailer)
    return 0


def cmd_theory(args):
    cfg = _config_from_args(args)
    out = _Out(cfg)
    q = args.quantity
    ns = args.n or [1]
    if q == "hopping-element":
        mags = [theory.hopping_matrix_element(n, cfg.h, cfg.J) for n in ns]
        logs = [theory.hopping_matrix_element_log(n, cfg.h, cfg.J) for n in ns]
        out.table("theory_hopping_element", [
            ("n", ns), ("magnitude", mags), ("log_magnitude", logs)])
    elif q == "airy-zeros":
        out.table("theory_airy_zeros", [
            ("n", ns), ("z_n", [airy_zero(n) for n in ns])])
    elif q == "airy-energy":
        vals = [theory.airy_energy(n, args.k, cfg.h, cfg.J) for n in ns]
        out.table("theory_airy_energy", [("n", ns), ("E", vals)],
                  extra_meta={"k": args.k})
    elif q == "quantized-energy":
        vals = [theory.quantized_energy_large_h(n, cfg.h) for n in ns]
        out.table("theory_quantized_energy", [("n", ns), ("E", vals)])
    elif q == "theta-energy":
        thetas = args.theta_list or [cfg.theta]
        vals = [theory.theta_energy(t, cfg.h, cfg.J) for t in thetas]
        out.table("theory_theta_energy", [("theta", thetas), ("E", vals)])
    elif q == "breathing-amplitude":
        ts = cfg.times()
        vals = [theory.breathing_amplitude(t, cfg.h, cfg.J) for t in ts]
        out.table("theory_breathing", [("Jt", ts), ("r_s", vals)])
    elif q == "ravg-large-h":
        ts = cfg.times()
        vals = [theory.ravg_large_h(t, cfg.h, cfg.J) for t in ts]
        out.table("theory_ravg_large_h", [("Jt", ts), ("r_avg", vals)])
    elif q == "peak-length":
        peak = theory.peak_meson_length(cfg.h, cfg.J)
        out.table("theory_peak_length", [
            ("n_real", [peak.real]), ("n_argmax", [peak.argmax])])
    elif q == "bessel-profile":
        n = ns[0]
        r_max = cfg.effective_r_max
        prof = theory.bessel_limit_eigenvector(n, args.k, cfg.h, cfg.J, r_max)
        out.table("theory_bessel_profile", [
            ("r", list(range(1, r_max + 1))), ("gamma", prof)],
            extra_meta={"n": n, "k": args.k})
    else:  # argparse choices should prevent this
        raise InvalidArgumentError(f"unknown quantity {q!r}")
    return 0


def cmd_spin_sample(args):
    cfg = _config_from_args(args)
    out = _Out(cfg)
    basis = build_basis(cfg.L)
    op = build_sector_hamiltonian(basis, cfg.J, cfg.h)
    spectrum = eig_symmetric(op)
    psi0 = initial_theta_state(basis, cfg.theta)
    psi = state_at(spectrum, psi0, args.at_time)
    dist = spinmap.sector_to_snapshot_distribution(psi)
    result = spinmap.sample_snapshots(dist, args.count, cfg.seed)

    exact_r = float(dist.probabilities @ basis.r)
    c = basis.cc.astype(np.float64) / 2.0
    exact_cs = float(np.sqrt(max(
        dist.probabilities @ (c * c) - (dist.probabilities @ c) ** 2, 0.0)))

    buf = io.StringIO()
    spinmap.write_snapshots(buf, result, meta={
        "version": __version__,
        "h_over_J": cfg.h / cfg.J,
        "theta": cfg.theta,
        "Jt": float(args.at_time),
    })
    out.text("spin_snapshots.txt", buf.getvalue())
    out.table("spin_sample_summary", [
        ("count", [result.count]),
        ("r_avg_hat", [result.r_avg_hat]),
        ("c_s_hat", [result.c_s_hat]),
        ("r_stderr", [result.r_stderr]),
        ("r_avg_exact", [exact_r]),
        ("c_s_exact", [exact_cs]),
    ], extra_meta={"Jt": float(args.at_time)})

    if args.trotter_check:
        L = min(cfg.L, 10)
        dt = args.trotter_dt
        t_final = args.trotter_time
        spin_basis = build_basis(L)
        block = spinmap.sector_spin_hamiltonian(spin_basis, cfg.J, cfg.h)
        exact_spectrum = eig_symmetric(block)
        psi0_small = initial_theta_state(spin_basis, cfg.theta)
        psi_exact = state_at(exact_spectrum, psi0_small, t_final)
        target = spinmap.embed_sector_state(psi_exact).amplitudes
        errs = []
        for d in (dt, dt / 2):
            steps = int(round(t_final / d))
            traj = spinmap.trotter_evolve_spin(L, cfg.J, cfg.h, cfg.theta,
                                               d, steps)
            errs.append(float(np.linalg.norm(
                traj.final.amplitudes - target)))
        out.table("trotter_check", [
            ("dt", [dt, dt / 2]),
            ("l2_error", errs),
        ], extra_meta={"L": L, "Jt": t_final,
                       "error_ratio": errs[0] / errs[1] if errs[1] else
                       math.inf})
    return 0


def cmd_spectrum(args):
    cfg = _config_from_args(args)
    out = _Out(cfg)
    r_max = cfg.effective_r_max
    if args.k_list:
        ks = [float(k) for k in args.k_list]
    else:
        ks = list(np.linspace(-math.pi, math.pi, args.k_points))
    levels = args.levels
    col_k, col_n, col_e = [], [], []
    for k in ks:
        block = build_momentum_block(k, cfg.J, cfg.h, r_max)
        block_spectrum = eig_tridiagonal(block)
        for n in range(1, levels + 1):
            col_k.append(k)
            col_n.append(n)
            col_e.append(float(block_spectrum.eigenvalues[n - 1]))
    out.table("spectrum", [("k", col_k), ("n", col_n), ("E", col_e)],
              extra_meta={"r_max": r_max})
    if args.dump_operator:
        basis = build_basis(cfg.L)
        op = build_sector_hamiltonian(basis, cfg.J, cfg.h)
        buf = io.StringIO()
        for line in out._meta_lines():
            buf.write("%" + line[1:] + "\n")
        op.write_triplets(buf)
        out.text(args.dump_operator, buf.getvalue())
    return 0


def _add_common(parser):
    parser.add_argument("--config", help="flat key = value config file")
    parser.add_argument("--L", type=int, dest="L")
    parser.add_argument("--h", type=float, dest="h")
    parser.add_argument("--J", type=float, dest="J")
    parser.add_argument("--theta", type=float, dest="theta")
    parser.add_argument("--tmax", type=float, dest="tmax")
    parser.add_argument("--dt", type=float, dest="dt")
    parser.add_argument("--window", type=_parse_window,
                        help="analysis window, e.g. 10:60")
    parser.add_argument("--seed", type=int, dest="seed")
    parser.add_argument("--r-max", type=int, dest="r_max")
    parser.add_argument("--out-dir", dest="out_dir")
    parser.add_argument("--format", choices=("csv", "json"), dest="format")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="mesondyn",
        description="confined pair dynamics on a Z2 gauge chain",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("evolve", help="one trajectory plus summary")
    _add_common(p)
    p.add_argument("--snapshots", type=float, nargs="*",
                   help="times at which to dump occupation grids")
    p.set_defaults(fn=cmd_evolve)

    p = sub.add_parser("sweep-field", help="sweep the confining field h")
    _add_common(p)
    p.add_argument("--h-list", type=float, nargs="+", required=True)
    p.set_defaults(fn=cmd_sweep_field)

    p = sub.add_parser("sweep-theta", help="sweep the initial tilt angle")
    _add_common(p)
    p.add_argument("--theta-list", type=float, nargs="+", required=True)
    p.set_defaults(fn=cmd_sweep_theta)

    p = sub.add_parser("theory", help="closed-form reference tables")
    _add_common(p)
    p.add_argument("--quantity", required=True, choices=(
        "hopping-element", "airy-zeros", "airy-energy", "quantized-energy",
        "theta-energy", "breathing-amplitude", "ravg-large-h",
        "peak-length", "bessel-profile"))
    p.add_argument("--n", type=_parse_range,
                   help="level index or range, e.g. 1..12")
    p.add_argument("--k", type=float, default=0.0)
    p.add_argument("--theta-list", type=float, nargs="+")
    p.set_defaults(fn=cmd_theory)

    p = sub.add_parser("spin-sample", help="Born-rule snapshot sampling")
    _add_common(p)
    p.add_argument("--count", type=int, default=10000)
    p.add_argument("--at-time", type=float, default=30.0)
    p.add_argument("--trotter-check", action="store_true",
                   help="also run the small-L Trotter convergence check")
    p.add_argument("--trotter-dt", type=float, default=0.05)
    p.add_argument("--trotter-time", type=float, default=3.0)
    p.set_defaults(fn=cmd_spin_sample)

    p = sub.add_parser("spectrum", help="momentum-block bound-state energies")
    _add_common(p)
    p.add_argument("--k-points", type=int, default=41)
    p.add_argument("--k-list", type=float, nargs="+")
    p.add_argument("--levels", type=int, default=3)
    p.add_argument("--dump-operator",
                   help="also dump the sector Hamiltonian triplets here")
    p.set_defaults(fn=cmd_spectrum)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except CapacityError as exc:
        print(f"mesondyn: over capacity: {exc}", file=sys.stderr)
        return CAPACITY_EXIT
    except InvalidArgumentError as exc:
        print(f"mesondyn: {exc}", file=sys.stderr)
        return USAGE_EXIT
    except MesondynError as exc:
        print(f"mesondyn: {exc}", file=sys.stderr)
        return USAGE_EXIT
    except OSError as exc:
        print(f"mesondyn: i/o failure: {exc}", file=sys.stderr)
        return IO_EXIT


if __name__ == "__main__":
    sys.exit(main())

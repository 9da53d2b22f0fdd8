"""Command-line entry point: ``qca <command> [--config FILE] [--key value ...]``.

Every command writes a CSV with a '#'-prefixed JSON header into the output
directory (``--output-dir``, else ``$QCA_OUTPUT_DIR``, else the working
directory). Exit codes: 0 success, 1 configuration error, 2 runtime error,
3 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from contextlib import nullcontext
from pathlib import Path

import numpy as np

from qca import __version__
from qca import acceptance
from qca.automata import FUNDAMENTAL_PERIOD, AutomatonSpec
from qca.boosts import default_deformation, deformed_boost, rapidity_sample
from qca.dispersive import compare_evolutions
from qca.io import (
    SCHEMAS,
    ConfigError,
    ExperimentConfig,
    emit_plot_script,
    output_dir,
    parse_config,
    parse_pairs,
    read_csv,
    write_csv,
    write_json,
)
from qca.maxwell import light_speed, photon_dispersion, polarization_tilt
from qca.packets import MomentumGrid, PacketSpec, evolve_exact, make_packet, position_mean, position_variance
from qca.pheno import PlanckQuantity, grb_time_lag, travel_time_report
from qca.scattering import Geometry, klein_scan, plateau_width, run_scattering
from qca.spectral import DegeneracyError, diffusion_tensor, group_velocity
from qca.zitter import decompose_trajectory, fit_oscillation

log = logging.getLogger("qca")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_IO = 0, 1, 2, 3


class Outputs:
    """Collects written files; removes them all if the run fails."""

    def __init__(self, directory: Path, stem: str):
        self.directory = directory
        self.stem = stem
        self.paths: list[Path] = []

    def path(self, suffix: str) -> Path:
        p = self.directory / f"{self.stem}{suffix}"
        self.paths.append(p)
        return p

    def discard(self):
        for p in self.paths:
            p.unlink(missing_ok=True)


def _automaton(cfg):
    return AutomatonSpec(cfg["model"], cfg["mass"], cfg.params.get("chirality", -1))


def _direction(cfg, dim):
    d = cfg["direction"]
    if d is None:
        d = (1.0,) * dim
    d = np.asarray(d, dtype=float)
    if d.shape != (dim,) or not np.any(d):
        raise ConfigError("direction", f"needs {dim} components, not all zero")
    return d / np.linalg.norm(d)


def run_dispersion(cfg, out, executor):
    spec = _automaton(cfg)
    dim = spec.dimension
    period = FUNDAMENTAL_PERIOD[dim]
    s = -period / 2 + period * np.arange(cfg["samples"]) / cfg["samples"]
    if dim == 1:
        ks = s[:, None]
        columns = ["k", "omega", "v", "D"]
    else:
        ks = s[:, None] * _direction(cfg, dim)[None]
        columns = ["k"] + [f"k{i + 1}" for i in range(dim)] + ["omega"] + [f"v{i + 1}" for i in range(dim)] + ["D"]
    rows = []
    for si, kv in zip(s, ks):
        k_arg = kv[0] if dim == 1 else kv
        omega = float(spec.omega(k_arg))
        try:
            v = group_velocity(spec, kv)
            hess = diffusion_tensor(spec, kv)
            if dim == 1:
                d_dir = hess[0, 0]
            else:
                u = _direction(cfg, dim)
                d_dir = float(u @ hess @ u)
        except DegeneracyError:
            v, d_dir = np.full(dim, np.nan), np.nan
        rows.append([si] + ([] if dim == 1 else list(kv)) + [omega] + list(v) + [d_dir])
    return columns, rows, {}


def run_evolve(cfg, out, executor):
    spec = _automaton(cfg)
    dim = spec.dimension
    if dim == 3:
        raise ConfigError("model", "position-space evolution is available in 1D and 2D only")
    grid = MomentumGrid(dim, cfg["grid"] or MomentumGrid.default(dim).points_per_axis)
    x0 = cfg["x0"] if cfg["x0"] is not None else (0.0,) * dim
    packet = PacketSpec(_vec(cfg["k0"], dim, "k0"), cfg["sigma"], cfg["c_plus"], cfg["c_minus"], _vec(x0, dim, "x0"))
    state = make_packet(packet, grid, spec)
    times = np.unique(np.linspace(0, cfg["t_max"], cfg["samples"]).round().astype(int))
    columns = ["t"] + [f"mean_x{i + 1}" for i in range(dim)] + ["variance", "norm"]
    rows = []
    for t in times:
        s = evolve_exact(state, int(t), spec)
        rows.append([int(t)] + list(position_mean(s)) + [position_variance(s), s.norm()])
    return columns, rows, {}


def _vec(value, dim, key):
    arr = tuple(value)
    if len(arr) != dim:
        raise ConfigError(key, f"needs {dim} components, got {len(arr)}")
    return arr[0] if dim == 1 else arr


def run_dispersive(cfg, out, executor):
    spec = _automaton(cfg)
    if spec.dimension != 1:
        raise ConfigError("model", "the dispersive comparison runs on 1D models")
    hermite = cfg["hermite"]
    packet = PacketSpec(cfg["k0"], cfg["sigma"], hermite=hermite)
    times = np.unique(np.linspace(0, cfg["t_max"], cfg["samples"]).round().astype(int))
    comps = compare_evolutions(spec, packet, [int(t) for t in times], MomentumGrid(1, cfg["grid"]))
    return ["t", "l2_error", "overlap"], [[c.t, c.l2_error, c.overlap] for c in comps], {}


def run_zitter(cfg, out, executor):
    spec = AutomatonSpec("dirac1d", cfg["mass"])
    packet = PacketSpec(cfg["k0"], cfg["sigma"], cfg["c_plus"], cfg["c_minus"], cfg["x0"])
    decomp = decompose_trajectory(packet, spec, cfg["t_max"], MomentumGrid(1, cfg["grid"]))
    rows = [
        [int(t), a, b, c, d]
        for t, a, b, c, d in zip(decomp.times, decomp.x_total, decomp.x_plus, decomp.x_minus, decomp.x_int)
    ]
    extra = {"pure_branch": decomp.pure_branch}
    if not decomp.pure_branch:
        fit = fit_oscillation(decomp)
        payload = {"fit": _clean(fit.__dict__), "predicted_frequency": float(spec.omega(cfg["k0"])) / math.pi}
        write_json(out.path(".fit.json"), payload)
        extra["fit"] = payload["fit"]
    return ["t", "x_total", "x_plus", "x_minus", "x_int"], rows, extra


def _clean(d):
    return {k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in d.items()}


SCATTER_COLUMNS = ["phi", "R", "T", "k_prime", "v_transmitted", "regime", "v_measured", "steps", "cleared"]


def _scatter_row(r):
    return [r.phi, r.R, r.T, r.k_prime, r.v_transmitted, r.regime, r.v_measured, r.steps, r.cleared]


def run_scatter(cfg, out, executor):
    r = run_scattering(cfg["mass"], cfg["k0"], cfg["sigma"], cfg["phi"], Geometry(max_steps=cfg["max_steps"]))
    return SCATTER_COLUMNS, [_scatter_row(r)], {}


def run_klein_scan(cfg, out, executor):
    phis = np.linspace(cfg["phi_min"], cfg["phi_max"], cfg["points"])
    geometry = Geometry(max_steps=cfg["max_steps"])
    results = klein_scan(cfg["mass"], cfg["k0"], cfg["sigma"], phis, geometry, executor=executor)
    width = plateau_width([r.phi for r in results], [r.R for r in results])
    summary = {"plateau_width": width, "gap_width": 2 * math.acos(math.sqrt(1 - cfg["mass"] ** 2))}
    write_json(out.path(".summary.json"), summary)
    return SCATTER_COLUMNS, [_scatter_row(r) for r in results], summary


def run_maxwell(cfg, out, executor):
    direction = _direction(cfg, 3)
    norms = np.geomspace(cfg["k_min"], cfg["k_max"], cfg["samples"])
    rows = []
    for s in norms:
        k = s * direction
        mode = photon_dispersion(k, cfg["chirality"])
        rows.append([s, *k, mode.omega, light_speed(k, cfg["chirality"]), polarization_tilt(k, cfg["chirality"])])
    return ["k", "kx", "ky", "kz", "omega", "c", "tilt"], rows, {}


def run_boost(cfg, out, executor):
    mass = cfg["mass"]
    rng = np.random.default_rng(cfg["seed"])
    mapping = default_deformation(mass)
    points = rapidity_sample(rng, mass, cfg["points"], cfg["betas"])
    rows = []
    for i, p in enumerate(points):
        for beta in cfg["betas"]:
            q = deformed_boost(beta, p, mapping)
            big = mapping.forward(q.omega, q.k)
            rows.append([i, beta, p.omega, p.k, q.omega, q.k, big[0], big[1], q.shell_residual()])
    columns = ["point", "beta", "omega0", "k0", "omega", "k", "Omega", "K", "onshell_residual"]
    return columns, rows, {}


def run_pheno(cfg, out, executor):
    report = travel_time_report(cfg["mass"], cfg["width_fm"])
    distance = PlanckQuantity(cfg["distance_m"], "length", "SI")
    lag = grb_time_lag(distance, cfg["k1"], cfg["k2"], cfg["chirality"])
    rows = [
        ["travel_time_separation", report.planck, report.si, "s"],
        ["grb_time_lag", lag.value, lag.si, "s"],
    ]
    write_json(out.path(".json"), {"travel_time": report.__dict__, "grb_time_lag": {"planck": lag.value, "si": lag.si}})
    return ["quantity", "planck", "si", "si_unit"], rows, {}


def run_check(cfg, out, executor):
    number = cfg["criterion"]
    checks = acceptance.run_criterion(number, executor=executor)
    ok = acceptance.verdict(checks)
    for c in checks:
        tag = "info" if c.informational else ("ok" if c.passed else "FAIL")
        log.info("  [%s] %s: %.6g (%s)", tag, c.name, c.value, c.target)
    print(f"criterion {number} ({acceptance.TITLES[number]}): {'PASS' if ok else 'FAIL'}")
    return acceptance.COLUMNS, [c.row() for c in checks], {"passed": ok}


RUNNERS = {
    "dispersion": run_dispersion,
    "evolve": run_evolve,
    "dispersive": run_dispersive,
    "zitter": run_zitter,
    "scatter": run_scatter,
    "klein-scan": run_klein_scan,
    "maxwell": run_maxwell,
    "boost": run_boost,
    "pheno": run_pheno,
    "check": run_check,
}


def run_experiment(config: ExperimentConfig, directory=None, threads: int = 1) -> Path:
    """Run one experiment and write its artifacts; returns the main CSV path."""
    stem = config.params.get("output") or (
        f"check{config['criterion']}" if config.command == "check" else config.command
    )
    out = Outputs(output_dir(directory), stem)
    csv_path = out.path(".csv")
    started = time.perf_counter()
    pool = ProcessPoolExecutor(max_workers=threads) if threads > 1 else nullcontext()
    try:
        with pool as executor:
            columns, rows, extra = RUNNERS[config.command](config, out, executor)
        write_csv(csv_path, config, columns, rows, time.perf_counter() - started, extra or None)
    except BaseException:
        out.discard()
        raise
    return csv_path


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qca", description="Weyl, Dirac and Maxwell quantum cellular automata")
    parser.add_argument("--version", action="version", version=f"qca {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fields in SCHEMAS.items():
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", help="INI file with an [experiment] section")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a config key")
        p.add_argument("--output-dir", help="directory for artifacts (default: $QCA_OUTPUT_DIR or .)")
        p.add_argument("--threads", type=int, default=1, help="worker processes for independent simulations")
        p.add_argument("-v", "--verbose", action="store_true")
        for key in ["output", "seed", *fields]:
            p.add_argument(f"--{key.replace('_', '-')}", dest=f"opt_{key}", metavar=key.upper())
    plot = sub.add_parser("plot-script", help="write a matplotlib script for a CSV (not executed)")
    plot.add_argument("csv")
    plot.add_argument("--kind", help="schema name (default: taken from the CSV header)")
    plot.add_argument("--out", help="script path (default: <csv>.plot.py)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
        format="%(levelname)s %(message)s",
    )
    if args.command == "plot-script":
        try:
            print(emit_plot_script(args.csv, args.kind, args.out))
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        except OSError as exc:
            print(f"I/O error: {exc}", file=sys.stderr)
            return EXIT_IO
        return EXIT_OK
    try:
        text = Path(args.config).read_text() if args.config else None
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        overrides = {k[4:]: v for k, v in vars(args).items() if k.startswith("opt_") and v is not None}
        overrides.update(parse_pairs(args.set))
        if args.threads < 1:
            raise ConfigError("threads", "must be at least 1")
        config = parse_config(text, args.command, overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        path = run_experiment(config, args.output_dir, args.threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, ArithmeticError, RuntimeError) as exc:
        print(f"{args.command} failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    log.info("wrote %s", path)
    if config.command == "check":
        meta, _, _ = read_csv(path)
        return EXIT_OK if meta.get("passed") else EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

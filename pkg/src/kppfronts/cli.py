"""Batch command-line front end.

Subcommands: check, equilibria, bifurcate, simulate, wave, continuum.
Each run reads one JSON config file, writes its artifacts into the output
directory, and emits a flat key/value run manifest.  Reruns of the same
config and seed produce byte-identical primary outputs; only the manifest's
wall_time line varies.

Exit codes: 0 success, 2 usage or malformed input, 3 assumption failure,
4 solver failure (divergence, blow-up, domain too short).

The output directory comes from --out, else the KPPFRONTS_OUT environment
variable, else the config's "out" entry, else the working directory.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, continuum, frontlab
from .equilibria import bifurcation_scan_n2, find_all_equilibria
from .errors import (AssumptionError, DomainTooShortError, IntegrationError,
                     KppfrontsError, NoProfileError)
from .exchange import system_from_dict
from .frontlab import FieldState, SpatialGrid, energy_estimate
from .spectral_core import check_assumptions

USAGE_ERROR = 2
ASSUMPTION_ERROR = 3
SOLVER_ERROR = 4


def _fmt(value) -> str:
    """Round-trip text for a config/report value."""
    if isinstance(value, (np.floating, float)):
        return repr(float(value))
    if isinstance(value, (np.integer, int)) and not isinstance(value, bool):
        return repr(int(value))
    return str(value)


def _write_lines(path: Path, lines) -> None:
    path.write_text("\n".join(lines) + "\n")


def _write_csv(path: Path, header, rows) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    _write_lines(path, lines)


class _Run:
    """Collects manifest entries and writes them exactly once."""

    def __init__(self, command, config_bytes, out_dir):
        self.command = command
        self.out = Path(out_dir)
        self.out.mkdir(parents=True, exist_ok=True)
        self.entries = [
            ("command", command),
            ("config_sha256", hashlib.sha256(config_bytes).hexdigest()),
            ("version", __version__),
        ]
        self._t0 = time.perf_counter()
        self._written = False

    def record(self, key, value):
        self.entries.append((key, _fmt(value)))

    def finish(self) -> None:
        if self._written:
            return
        self._written = True
        lines = [f"{k} = {v}" for k, v in self.entries]
        lines.append(f"wall_time_s = {time.perf_counter() - self._t0:.3f}")
        _write_lines(self.out / "manifest.txt", lines)


def _require(config, key, command):
    if key not in config:
        raise ValueError(f"{command}: config is missing required key {key!r}")
    return config[key]


def _get_seed(config, args, command) -> int:
    seed = args.seed if args.seed is not None else config.get("seed")
    if seed is None:
        raise ValueError(f"{command} is a seeded command; pass --seed or put "
                         "\"seed\" in the config")
    return int(seed)


def _get_tol(config, args, default=1e-10) -> float:
    if args.tol is not None:
        return float(args.tol)
    return float(config.get("tol", default))


def _system(config, command):
    return system_from_dict(_require(config, "system", command))


# ---------------------------------------------------------------------------
# subcommands


def cmd_check(config, args, run: _Run) -> int:
    spec = _system(config, "check")
    tol = _get_tol(config, args)
    report = check_assumptions(spec, tol=tol)
    requested = [str(g).upper() for g in config.get("assumptions", ["A1", "A2", "A3"])]
    for g in requested:
        if g not in ("A1", "A2", "A3"):
            raise ValueError(f"unknown assumption group {g!r}")

    lines = [f"n = {spec.n}", f"tol = {_fmt(tol)}"]
    for name, verdict in report.items():
        lines.append(f"{name} = {verdict.status}")
        if verdict.note:
            lines.append(f"{name}.note = {verdict.note}")
    ok = all(report.group_ok(g) for g in requested)
    for g in ("A1", "A2", "A3"):
        lines.append(f"{g} = {'ok' if report.group_ok(g) else 'failed'}")
    lines.append(f"requested = {','.join(requested)}")
    lines.append(f"result = {'ok' if ok else 'failed'}")
    _write_lines(run.out / "report.txt", lines)

    run.record("tol", tol)
    run.record("requested", ",".join(requested))
    run.record("result", "ok" if ok else "failed")
    return 0 if ok else ASSUMPTION_ERROR


def cmd_equilibria(config, args, run: _Run) -> int:
    spec = _system(config, "equilibria")
    tol = _get_tol(config, args)
    seed = _get_seed(config, args, "equilibria")
    n_starts = int(config.get("n_starts", 64))
    roots = find_all_equilibria(spec, n_starts=n_starts, seed=seed, tol=tol)

    header = [f"u_{i + 1}" for i in range(spec.n)] + ["residual", "stable"]
    rows = [list(eq.u) + [eq.residual, eq.stable] for eq in roots]
    _write_csv(run.out / "equilibria.csv", header, rows)

    run.record("seed", seed)
    run.record("tol", tol)
    run.record("n_starts", n_starts)
    run.record("n_equilibria", len(roots))
    return 0


def cmd_bifurcate(config, args, run: _Run) -> int:
    gamma = float(_require(config, "gamma", "bifurcate"))
    sigma_range = _require(config, "sigma_range", "bifurcate")
    n_samples = int(config.get("n_samples", 21))
    seed = _get_seed(config, args, "bifurcate")
    tol = _get_tol(config, args)
    diagram = bifurcation_scan_n2(gamma, sigma_range, n_samples, seed=seed, tol=tol)

    header = ["sigma", "n_positive_equilibria", "growth_eigenvalue", "one_is_stable"]
    rows = [[s, int(c), g, bool(st)]
            for s, c, g, st in zip(diagram.samples, diagram.counts,
                                   diagram.growth_eigenvalues,
                                   diagram.one_is_stable)]
    _write_csv(run.out / "bifurcation.csv", header, rows)

    lines = [f"gamma = {_fmt(gamma)}", f"n_thresholds = {len(diagram.thresholds)}"]
    lines.extend(f"threshold_{k + 1} = {_fmt(t)}"
                 for k, t in enumerate(diagram.thresholds))
    _write_lines(run.out / "thresholds.txt", lines)

    run.record("seed", seed)
    run.record("gamma", gamma)
    run.record("n_samples", n_samples)
    run.record("n_thresholds", len(diagram.thresholds))
    return 0


def _initial_state(config, args, spec, grid) -> FieldState:
    node = dict(config.get("initial", {"kind": "front"}))
    kind = node.pop("kind", "front")
    x = grid.x
    if kind == "front":
        x0 = float(node.pop("x0", grid.x_min + 0.1 * (grid.x_max - grid.x_min)))
        asym = float(node.pop("asymmetry", 0.0))
        base = np.minimum(1.0, np.exp(-(x - x0)))
        tilt = 1.0 + asym * np.cos(2.0 * np.pi * np.arange(spec.n) / spec.n + 0.7)
        values = base[None, :] * tilt[:, None]
    elif kind == "constant":
        value = np.atleast_1d(np.asarray(node.pop("value", 1.0), dtype=float))
        if value.size == 1:
            value = np.full(spec.n, float(value[0]))
        if value.shape != (spec.n,):
            raise ValueError("initial.value must be a scalar or one value per component")
        values = np.tile(value[:, None], (1, grid.n_points))
    elif kind == "perturbed_ones":
        eps = float(node.pop("epsilon", 0.3))
        seed = _get_seed(config, args, "simulate (perturbed_ones initial)")
        rng = np.random.default_rng(seed)
        values = 1.0 + eps * rng.uniform(-1.0, 1.0, size=(spec.n, grid.n_points))
    else:
        raise ValueError(f"unknown initial kind {kind!r}")
    if node:
        raise ValueError(f"unknown initial options: {sorted(node)}")
    return FieldState(grid, 0.0, values)


def _grid_from_config(config) -> SpatialGrid:
    node = _require(config, "grid", "simulate")
    x_min = float(node.get("x_min", 0.0))
    x_max = float(_require(node, "x_max", "grid"))
    if "dx" in node:
        return SpatialGrid.from_spacing(x_min, x_max, float(node["dx"]))
    return SpatialGrid(x_min, x_max, int(_require(node, "n_points", "grid")))


def cmd_simulate(config, args, run: _Run) -> int:
    spec = _system(config, "simulate")
    grid = _grid_from_config(config)
    t_end = float(_require(config, "t_end", "simulate"))
    scheme = str(config.get("scheme", "imex"))
    dt = config.get("dt")
    snapshot_times = config.get("snapshot_times")
    state0 = _initial_state(config, args, spec, grid)

    run.record("scheme", scheme)
    run.record("dx", grid.dx)
    run.record("t_end", t_end)
    if config.get("seed") is not None or args.seed is not None:
        run.record("seed", args.seed if args.seed is not None else config["seed"])
    try:
        snaps = frontlab.simulate(spec, state0, t_end,
                                  dt=None if dt is None else float(dt),
                                  scheme=scheme, snapshot_times=snapshot_times)
    except IntegrationError as exc:
        run.record("status", exc.reason or "integration-failure")
        run.record("failed_at_t", exc.time)
        raise

    header = ["t", "x"] + [f"u_{i + 1}" for i in range(spec.n)]
    rows = []
    x = grid.x
    for state in snaps:
        for j in range(grid.n_points):
            rows.append([state.t, x[j]] + list(state.values[:, j]))
    _write_csv(run.out / "snapshots.csv", header, rows)

    run.record("status", "ok")
    run.record("n_snapshots", len(snaps))
    run.record("final_sup", snaps[-1].values.max())
    run.record("final_positive", snaps[-1].positive)
    return 0


def cmd_wave(config, args, run: _Run) -> int:
    spec = _system(config, "wave")
    c = float(_require(config, "c", "wave"))
    R = float(config.get("R", 60.0))
    n_points = int(config.get("n_points", 481))
    tol = _get_tol(config, args, default=1e-9)
    right = config.get("right_boundary", "decay")

    run.record("c", c)
    run.record("R", R)
    run.record("n_points", n_points)
    try:
        profile = frontlab.solve_wave_profile(spec, c, R=R, n_points=n_points,
                                              tol=tol, right_boundary=right)
    except NoProfileError:
        run.record("status", "no-profile")
        raise

    header = ["xi"] + [f"p_{i + 1}" for i in range(spec.n)]
    xi = profile.grid.x
    rows = [[xi[j]] + list(profile.values[:, j]) for j in range(xi.size)]
    _write_csv(run.out / "profile.csv", header, rows)
    sidecar = {"c": profile.c, "residual": profile.residual, "R": R}
    (run.out / "wave.json").write_text(json.dumps(sidecar, indent=1) + "\n")

    ledger = energy_estimate(profile)
    lines = [f"R = {_fmt(ledger.R)}", f"lhs = {_fmt(ledger.lhs)}",
             f"rhs = {_fmt(ledger.rhs)}", f"slack = {_fmt(ledger.slack)}",
             f"bracket_decreasing = {ledger.bracket_decreasing}"]
    lines.extend(f"bracket_at_{_fmt(r)} = {_fmt(b)}"
                 for r, b in zip(ledger.radii, ledger.brackets))
    _write_lines(run.out / "energy.txt", lines)

    run.record("status", "ok")
    run.record("residual", profile.residual)
    run.record("iterations", profile.iterations)
    run.record("energy_slack", ledger.slack)
    return 0


def _continuum_spec(config):
    if "preset" in config:
        node = dict(config["preset"])
        name = node.pop("name", None)
        if name != "cane_toads":
            raise ValueError(f"unknown continuum preset {name!r}")
        return continuum.cane_toads_preset(float(node.pop("theta_lo")),
                                           float(node.pop("theta_hi")),
                                           float(node.pop("alpha")))
    # assembled from parts: omega plus coefficient/kernel nodes
    omega = tuple(float(v) for v in _require(config, "omega", "continuum"))

    def coefficient(node, name):
        if "constant" in node:
            v = float(node["constant"])
            return lambda y: v
        if node.get("trait"):
            return lambda y: y
        raise ValueError(f"{name} needs {{'constant': v}} or {{'trait': true}}")

    def kernel(node, name):
        if "constant" in node:
            v = float(node["constant"])
            return lambda y, z: v
        if "table" in node:
            return continuum.kernel_from_table(node["table"])
        raise ValueError(f"{name} needs {{'constant': v}} or {{'table': path}}")

    return continuum.ContinuumSpec(
        omega=omega,
        d=coefficient(_require(config, "d", "continuum"), "d"),
        sigma=coefficient(_require(config, "sigma", "continuum"), "sigma"),
        m_kernel=kernel(_require(config, "m_kernel", "continuum"), "m_kernel"),
        k_kernel=kernel(_require(config, "k_kernel", "continuum"), "k_kernel"),
    )


def cmd_continuum(config, args, run: _Run) -> int:
    cspec = _continuum_spec(config)
    n_bins = int(_require(config, "n_bins", "continuum"))
    domain_length = float(config.get("domain_length", 400.0))
    t_end = float(config.get("t_end", 100.0))
    dx = float(config.get("dx", 0.5))

    run.record("n_bins", n_bins)
    run.record("domain_length", domain_length)
    run.record("t_end", t_end)
    run.record("dx", dx)

    disc = continuum.discretize(cspec, n_bins)
    lines = [f"{name} = {verdict.status}"
             for name, verdict in disc.report.items()]
    _write_lines(run.out / "assumptions.txt", lines)

    try:
        wake = continuum.continuum_front_experiment(
            cspec, n_bins, domain_length=domain_length, t_end=t_end, dx=dx)
    except (IntegrationError, DomainTooShortError) as exc:
        run.record("status", exc.__class__.__name__)
        raise

    lines = [f"{k} = {_fmt(v)}" for k, v in wake.as_record().items()]
    lines.append(f"wake_mean_min = {_fmt(wake.wake_mean.min())}")
    lines.append(f"wake_mean_max = {_fmt(wake.wake_mean.max())}")
    _write_lines(run.out / "wake.txt", lines)

    run.record("status", "ok")
    run.record("verdict", wake.verdict)
    run.record("sup_deviation", wake.sup_deviation)
    return 0


_COMMANDS = {
    "check": cmd_check,
    "equilibria": cmd_equilibria,
    "bifurcate": cmd_bifurcate,
    "simulate": cmd_simulate,
    "wave": cmd_wave,
    "continuum": cmd_continuum,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kppfronts",
        description="Structure checks, equilibria, fronts, and wake "
                    "diagnostics for non-cooperative KPP systems.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in _COMMANDS.items():
        p = sub.add_parser(name, help=fn.__doc__)
        p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--tol", type=float, default=None,
                       help="override the config tolerance")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config_bytes = Path(args.config).read_bytes()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return USAGE_ERROR
    try:
        config = json.loads(config_bytes)
        if not isinstance(config, dict):
            raise ValueError("config must be a JSON object")
    except (json.JSONDecodeError, ValueError) as exc:
        print(f"error: malformed config: {exc}", file=sys.stderr)
        return USAGE_ERROR

    out_dir = (args.out or os.environ.get("KPPFRONTS_OUT")
               or config.get("out") or ".")
    run = _Run(args.command, config_bytes, out_dir)
    try:
        code = _COMMANDS[args.command](config, args, run)
    except AssumptionError as exc:
        print(f"error: assumption failure: {exc}", file=sys.stderr)
        run.record("status", "assumption-failure")
        code = ASSUMPTION_ERROR
    except NoProfileError as exc:
        print(f"error: no-profile: {exc}", file=sys.stderr)
        code = SOLVER_ERROR
    except (IntegrationError, DomainTooShortError) as exc:
        print(f"error: solver failure: {exc}", file=sys.stderr)
        code = SOLVER_ERROR
    except KppfrontsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        code = SOLVER_ERROR
    except (ValueError, KeyError, TypeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        code = USAGE_ERROR
    run.finish()
    return code


if __name__ == "__main__":
    raise SystemExit(main())

"""Command-line front end: configured experiment runs with stable outputs.

A run consumes a JSON config (or a named preset), executes one
experiment family over the configured components, and writes its report
into the output directory:

* ``results.json``  - all numbers, deterministic bytes for a fixed config
* ``timings.json``  - wall-clock data, isolated so results stay stable
* per-component CSV tables and PNG figures on the decay and sweep paths

Writes are atomic (temp file + rename), so a crashed run never leaves a
half-written report.  Exit codes: 0 success, 1 a runtime assertion
failed, 2 the config is unusable.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
import time
from dataclasses import asdict, dataclass

import numpy as np

from . import experiments as xp
from .errors import (
    AssertionFailed,
    ConfigError,
    ConfigParse,
    HorolabError,
    InvalidCasimir,
    SchemaViolation,
)
from .rep_core import build_rep
from .tensor_rep import build_tensor

__all__ = [
    "ComponentSpec",
    "ExperimentConfig",
    "RunReport",
    "SCHEMA_VERSION",
    "PRESETS",
    "load_config",
    "run",
    "run_command",
    "main",
    "COMMANDS",
]

SCHEMA_VERSION = 1

COMMANDS = (
    "build-rep",
    "solve",
    "transfer",
    "split",
    "cascade",
    "const-cohomology",
    "decay",
    "sweep",
)

BATTERY = tuple(c for c in COMMANDS if c != "sweep")


@dataclass(frozen=True)
class ComponentSpec:
    mu: float
    theta: float
    T: float
    S: float
    K: int
    pad: int


@dataclass(frozen=True)
class ExperimentConfig:
    components: tuple[ComponentSpec, ...]
    kernel_tol: float
    solve_tol: float
    sobolev_orders: tuple[float, ...]
    seed: int
    output_dir: str

    def as_dict(self) -> dict:
        d = asdict(self)
        d["components"] = [asdict(c) for c in self.components]
        d["schema_version"] = SCHEMA_VERSION
        # results must not depend on where they are written
        d.pop("output_dir")
        return d


@dataclass(frozen=True)
class RunReport:
    command: str
    output_dir: str
    files: tuple[str, ...]
    passed: bool
    elapsed: float


PRESETS = {
    "acceptance": {
        "schema_version": 1,
        "components": [
            {"mu": 0.25, "theta": 0.25, "T": 1.0, "S": 1.0, "K": 16, "pad": 16},
            {"mu": 5.0, "theta": 5.0, "T": 1.0, "S": 1.0, "K": 16, "pad": 16},
            {"mu": -2.0, "theta": 5.0, "T": 1.0, "S": 1.0, "K": 16, "pad": 16},
        ],
        "tolerances": {"kernel_tol": 1e-8, "solve_tol": 1e-6},
        "sobolev_orders": [0.0, 1.0, 2.0],
        "seed": 0,
        "output_dir": "horolab-acceptance",
    }
}


def _expect(cond: bool, msg: str):
    if not cond:
        raise SchemaViolation(msg)


def _number(raw: dict, path: str, key: str) -> float:
    _expect(key in raw, f"{path}.{key}: missing")
    val = raw[key]
    _expect(isinstance(val, (int, float)) and not isinstance(val, bool),
            f"{path}.{key}: must be a number")
    return float(val)


def _validate(raw: dict) -> ExperimentConfig:
    _expect(isinstance(raw, dict), "config root must be a JSON object")
    _expect(raw.get("schema_version") == SCHEMA_VERSION,
            f"schema_version: must be {SCHEMA_VERSION}")

    comps_raw = raw.get("components")
    _expect(isinstance(comps_raw, list), "components: must be a list")
    _expect(len(comps_raw) > 0, "components: must be nonempty")
    comps = []
    for i, c in enumerate(comps_raw):
        path = f"components[{i}]"
        _expect(isinstance(c, dict), f"{path}: must be an object")
        mu = _number(c, path, "mu")
        theta = _number(c, path, "theta")
        t = _number(c, path, "T")
        s = _number(c, path, "S")
        k = _number(c, path, "K")
        pad = _number(c, path, "pad")
        _expect(k == int(k) and k >= 2, f"{path}.K: must be an integer >= 2")
        _expect(pad == int(pad) and pad >= 0, f"{path}.pad: must be an integer >= 0")
        for name, val in (("mu", mu), ("theta", theta)):
            if val == 0:
                raise InvalidCasimir(f"{path}.{name}: mu = 0 is not a valid Casimir")
            try:
                build_rep(val, 2, 0)
            except InvalidCasimir as exc:
                raise InvalidCasimir(f"{path}.{name}: {exc}") from exc
        comps.append(ComponentSpec(mu=mu, theta=theta, T=t, S=s, K=int(k), pad=int(pad)))

    tols = raw.get("tolerances")
    _expect(isinstance(tols, dict), "tolerances: must be an object")
    kernel_tol = _number(tols, "tolerances", "kernel_tol")
    solve_tol = _number(tols, "tolerances", "solve_tol")
    _expect(1e-14 < kernel_tol < 1e-4, "tolerances.kernel_tol: outside (1e-14, 1e-4)")
    _expect(solve_tol > 0, "tolerances.solve_tol: must be positive")

    orders_raw = raw.get("sobolev_orders")
    _expect(isinstance(orders_raw, list) and len(orders_raw) > 0,
            "sobolev_orders: must be a nonempty list")
    orders = []
    for i, r in enumerate(orders_raw):
        _expect(isinstance(r, (int, float)) and not isinstance(r, bool),
                f"sobolev_orders[{i}]: must be a number")
        _expect(r >= 0, f"sobolev_orders[{i}]: must be >= 0")
        orders.append(float(r))

    seed = raw.get("seed", 0)
    _expect(isinstance(seed, int) and not isinstance(seed, bool), "seed: must be an integer")
    outdir = raw.get("output_dir", "horolab-run")
    _expect(isinstance(outdir, str) and outdir, "output_dir: must be a nonempty string")

    return ExperimentConfig(
        components=tuple(comps),
        kernel_tol=kernel_tol,
        solve_tol=solve_tol,
        sobolev_orders=tuple(orders),
        seed=seed,
        output_dir=outdir,
    )


def load_config(path: str) -> ExperimentConfig:
    """Read and validate a JSON config file."""
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigParse(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigParse(f"{path} is not valid JSON: {exc}") from exc
    return _validate(raw)


def preset_config(name: str, output_dir: str | None = None) -> ExperimentConfig:
    if name not in PRESETS:
        raise SchemaViolation(f"unknown preset {name!r}; available: {sorted(PRESETS)}")
    raw = json.loads(json.dumps(PRESETS[name]))
    if output_dir:
        raw["output_dir"] = output_dir
    return _validate(raw)


# ---------------------------------------------------------------------------
# output helpers


def _jsonify(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        if not np.isfinite(f):
            return repr(f)
        return f
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return _jsonify(obj.tolist())
    return obj


def _atomic_write(path: str, text: str):
    d = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_json(path: str, obj) -> str:
    _atomic_write(path, json.dumps(_jsonify(obj), indent=2, sort_keys=True) + "\n")
    return path


def _write_csv(path: str, header: list[str], rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(header)
    for row in rows:
        writer.writerow(row)
    _atomic_write(path, buf.getvalue())
    return path


def _save_decay_figure(path: str, result: dict) -> str:
    import matplotlib

    matplotlib.use("Agg", force=True)
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    plotted = False
    for r, table in sorted(result["tables"].items()):
        if not table["rows"]:
            continue
        rows = np.array(table["rows"], dtype=float)
        keep = rows[:, 1] > 0
        ax.loglog(rows[keep, 0], rows[keep, 1], "o-", ms=3, lw=0.8,
                  label=f"pairing, r={r}")
        ax.loglog(rows[:, 0], rows[:, 2], "--", lw=0.8, label=f"envelope, r={r}")
        plotted = True
    ax.set_xlabel("rank n")
    ax.set_ylabel("pairing magnitude")
    ax.set_title(f"pairing decay, mu={result['mu']:g}, K={result['K']}")
    if plotted:
        ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def _save_sweep_figure(path: str, result: dict) -> str:
    import matplotlib

    matplotlib.use("Agg", force=True)
    import matplotlib.pyplot as plt

    rows = result["rows"]
    ks = [row["K"] for row in rows]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8.0, 3.5))
    ax1.plot(ks, [row["count"] for row in rows], "o-", label="map kernel")
    ax1.plot(ks, [row["flow_count"] for row in rows], "s--", label="flow kernel")
    ax1.set_xlabel("K")
    ax1.set_ylabel("count")
    ax1.legend(fontsize=8)
    ax2.semilogy(ks, [max(row["containment"], 1e-17) for row in rows], "o-",
                 label="flow containment")
    ax2.semilogy(ks, [max(row["solve_residual_rel"], 1e-17) for row in rows], "s--",
                 label="solve residual")
    ax2.set_xlabel("K")
    ax2.legend(fontsize=8)
    fig.suptitle(f"window sweep, mu={result['mu']:g}, theta={result['theta']:g}")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


# ---------------------------------------------------------------------------
# command execution


def _check(cond: bool, msg: str):
    if not cond:
        raise AssertionFailed(msg)


def _component_results(command: str, cfg: ExperimentConfig, outdir: str):
    results = []
    files = []
    timings = {}
    for i, spec in enumerate(cfg.components):
        t0 = time.perf_counter()
        if command == "build-rep":
            left = xp.run_build_rep(spec.mu, spec.K, spec.pad, spec.T, cfg.kernel_tol)
            right = xp.run_build_rep(spec.theta, spec.K, spec.pad, spec.S, cfg.kernel_tol)
            for side in (left, right):
                _check(side["casimir_residual"] <= 1e-8,
                       f"component {i}: Casimir residual {side['casimir_residual']:.3e}")
                _check(max(side["bracket_residuals"].values()) <= 1e-8,
                       f"component {i}: bracket residual out of range")
            res = {"component": i, "left": left, "right": right}
        elif command == "solve":
            res = xp.run_solve(spec.mu, spec.K, spec.pad, spec.T, cfg.kernel_tol, cfg.seed)
            _check(res["residual_rel"] <= cfg.solve_tol,
                   f"component {i}: solve residual {res['residual_rel']:.3e}")
            res = {"component": i, **res}
        elif command == "transfer":
            comp = build_tensor(
                build_rep(spec.mu, spec.K, spec.pad),
                build_rep(spec.theta, spec.K, spec.pad),
                spec.T, spec.S,
            )
            res = xp.run_transfer(comp, cfg.kernel_tol, cfg.seed)
            _check(max(res["residual1_rel"], res["residual2_rel"]) <= cfg.solve_tol,
                   f"component {i}: transfer residuals out of range")
            res = {"component": i, **res}
        elif command == "split":
            comp = build_tensor(
                build_rep(spec.mu, spec.K, spec.pad),
                build_rep(spec.theta, spec.K, spec.pad),
                spec.T, spec.S,
            )
            res = xp.run_split(comp, cfg.kernel_tol, cfg.seed)
            _check(res["consistency"] <= cfg.solve_tol * max(res["phi_norm"], 1.0),
                   f"component {i}: split consistency {res['consistency']:.3e}")
            path = os.path.join(outdir, f"c{i}_split_report.csv")
            files.append(_write_csv(
                path,
                ["r", "f_res_ratio", "g_res_ratio", "P_ratio_9r25", "P_ratio_9r28"],
                res["report"],
            ))
            res = {"component": i, **res}
        elif command == "cascade":
            comp = build_tensor(
                build_rep(spec.mu, spec.K, spec.pad),
                build_rep(spec.theta, spec.K, spec.pad),
                spec.T, spec.S,
            )
            res = xp.run_cascade(comp, cfg.kernel_tol, cfg.seed)
            _check(res["preservation"] <= cfg.solve_tol * max(res["input_norm"], 1.0),
                   f"component {i}: cascade preservation {res['preservation']:.3e}")
            _check(max(res["F_res_rel"], res["Y_res_rel"]) <= cfg.solve_tol,
                   f"component {i}: cascade residuals out of range")
            res = {"component": i, **res}
        elif command == "decay":
            res = xp.run_decay(spec.mu, spec.K, spec.pad, spec.T, cfg.seed,
                               orders=cfg.sobolev_orders)
            for r, table in res["tables"].items():
                path = os.path.join(outdir, f"c{i}_decay_r{float(r):g}.csv")
                files.append(_write_csv(
                    path, ["n", "pairing", "envelope", "ratio"], table["rows"]
                ))
            files.append(_save_decay_figure(
                os.path.join(outdir, f"c{i}_decay.png"), res
            ))
            res = {"component": i, **res}
        elif command == "sweep":
            res = xp.run_sweep(spec.mu, spec.theta, spec.T, spec.S,
                               cfg.kernel_tol, cfg.seed)
            path = os.path.join(outdir, f"c{i}_sweep.csv")
            files.append(_write_csv(
                path,
                ["K", "count", "flow_count", "containment",
                 "solve_ratio_r0", "solve_residual_rel"],
                [[row["K"], row["count"], row["flow_count"], row["containment"],
                  row["solve_ratio_r0"], row["solve_residual_rel"]]
                 for row in res["rows"]],
            ))
            files.append(_save_sweep_figure(
                os.path.join(outdir, f"c{i}_sweep.png"), res
            ))
            res = {"component": i, **res}
        else:
            raise ValueError(f"unknown command {command!r}")
        timings[f"component{i}"] = time.perf_counter() - t0
        results.append(res)
    return results, files, timings


def run_command(command: str, cfg: ExperimentConfig) -> RunReport:
    """Execute one experiment family and write its report."""
    t_start = time.perf_counter()
    outdir = cfg.output_dir
    os.makedirs(outdir, exist_ok=True)
    files = []
    if command == "const-cohomology":
        t0 = time.perf_counter()
        res = xp.run_const_cohomology()
        for convention, r in res.items():
            _check(
                (r["cocycle_dim"], r["coboundary_dim"], r["quotient_dim"]) == (8, 4, 4),
                f"{convention}: unexpected cohomology dimensions",
            )
        results = [res]
        timings = {"const-cohomology": time.perf_counter() - t0}
    else:
        results, files, timings = _component_results(command, cfg, outdir)

    payload = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "config": cfg.as_dict(),
        "results": results,
    }
    files.append(_write_json(os.path.join(outdir, "results.json"), payload))
    elapsed = time.perf_counter() - t_start
    _write_json(
        os.path.join(outdir, "timings.json"),
        {"command": command, "steps": timings, "total": elapsed},
    )
    return RunReport(
        command=command,
        output_dir=outdir,
        files=tuple(sorted(files)),
        passed=True,
        elapsed=elapsed,
    )


def run(config_path: str) -> tuple[RunReport, ...]:
    """Run the standard battery (every family except the sweep) from one
    config file, each family into its own subdirectory."""
    cfg = load_config(config_path)
    reports = []
    for command in BATTERY:
        sub = ExperimentConfig(
            components=cfg.components,
            kernel_tol=cfg.kernel_tol,
            solve_tol=cfg.solve_tol,
            sobolev_orders=cfg.sobolev_orders,
            seed=cfg.seed,
            output_dir=os.path.join(cfg.output_dir, command),
        )
        reports.append(run_command(command, sub))
    return tuple(reports)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="horolab",
        description="numerical laboratory for parabolic actions on truncated models",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", "-c", help="JSON config path")
        p.add_argument("--preset", choices=sorted(PRESETS), help="built-in config")
        p.add_argument("--output-dir", "-o", help="override the output directory")
    args = parser.parse_args(argv)

    try:
        if args.config and args.preset:
            raise SchemaViolation("pass either --config or --preset, not both")
        if args.config:
            cfg = load_config(args.config)
            if args.output_dir:
                cfg = ExperimentConfig(
                    components=cfg.components,
                    kernel_tol=cfg.kernel_tol,
                    solve_tol=cfg.solve_tol,
                    sobolev_orders=cfg.sobolev_orders,
                    seed=cfg.seed,
                    output_dir=args.output_dir,
                )
        elif args.preset:
            cfg = preset_config(args.preset, args.output_dir)
        else:
            raise SchemaViolation("a config is required: pass --config or --preset")
        report = run_command(args.command, cfg)
    except (ConfigError, InvalidCasimir) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except AssertionFailed as exc:
        print(f"assertion failed: {exc}", file=sys.stderr)
        return 1
    except HorolabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    print(f"{report.command}: ok ({report.elapsed:.2f}s)")
    for path in report.files:
        print(f"  {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())

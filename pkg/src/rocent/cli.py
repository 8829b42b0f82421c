"""Command-line interface.

Exit codes: 0 success, 2 usage or input error, 3 data not reproducible by any
state (INFEASIBLE_DATA), 4 solver failure.

Every option can also come from a JSON file passed with ``--config``; keys are
the option names with dashes or underscores.  Explicit flags win.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_SOLVER = 0, 2, 3, 4


class UsageError(ValueError):
    pass


# option name -> (type, default, help); shared between flags and config files
OPTIONS: dict[str, tuple[Callable, Any, str]] = {
    "state": (str, "singlet", "singlet | werner | ortho_mixture"),
    "fidelity": (float, 1.0, "Werner fidelity f"),
    "axis": (str, "x", "polarization axis of ortho_mixture (x or z)"),
    "ra": (float, 1.0, "Alice's detector contrast"),
    "rb": (float, 1.0, "Bob's detector contrast"),
    "bins_a": (int, 8, "number of uniform bins for Alice"),
    "bins_b": (int, 8, "number of uniform bins for Bob"),
    "shots": (int, 1_000_000, "number of coincidences"),
    "seed": (int, 0, "RNG seed"),
    "confidence": (float, 0.99, "confidence level c for Hoeffding mode"),
    "mode": (str, "hoeffding", "exact | hoeffding"),
    "bonferroni": (bool, False, "split the confidence over all cells"),
    "grid_step": (float, 0.01, "hypothesis grid step"),
    "workers": (int, 1, "processes for the semi-DI scan"),
    "beta": (float, 1.0, "photon energy over electron rest energy"),
    "theta": (float, np.pi / 2, "scattering angle in radians"),
    "points": (int, 181, "number of curve points"),
    "record": (str, None, "record CSV (sidecar JSON next to it)"),
    "input": (str, None, "input CSV angle_deg,power_mw"),
    "r_known": (bool, True, "Bob knows his contrast"),
    "n": (int, 200, "number of random matrices"),
    "tol": (float, 1e-6, "self-test tolerance"),
    "name": (str, "record", "output file stem"),
    "out_dir": (str, None, "directory for output files"),
}

COMMAND_OPTIONS = {
    "simulate": ["state", "fidelity", "axis", "ra", "rb", "bins_a", "bins_b", "shots", "seed", "name", "out_dir"],
    "certify": ["record", "ra", "rb", "confidence", "mode", "bonferroni", "out_dir"],
    "semidi": ["record", "state", "fidelity", "axis", "ra", "rb", "bins_a", "bins_b", "confidence", "mode",
               "bonferroni", "grid_step", "workers", "out_dir"],
    "steering": ["state", "fidelity", "axis", "rb", "r_known", "out_dir"],
    "compton": ["beta", "theta", "ra", "rb", "points", "out_dir"],
    "fit": ["input", "points", "out_dir"],
    "sdp-selftest": ["n", "seed", "tol"],
}


@dataclass
class RunConfig:
    command: str
    params: dict[str, Any] = field(default_factory=dict)

    def __getattr__(self, item):
        try:
            return self.params[item]
        except KeyError:
            raise AttributeError(item) from None


def _parse_bool(v) -> bool:
    if isinstance(v, bool):
        return v
    s = str(v).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"not a boolean: {v!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rocent", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for cmd, opts in COMMAND_OPTIONS.items():
        p = sub.add_parser(cmd)
        p.add_argument("--config", help="JSON file with default option values")
        for key in opts:
            typ, _, helptext = OPTIONS[key]
            flag = "--" + key.replace("_", "-")
            if typ is bool:
                p.add_argument(flag, dest=key, type=_parse_bool, default=None, metavar="BOOL", help=helptext)
            else:
                p.add_argument(flag, dest=key, type=typ, default=None, help=helptext)
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    file_cfg: dict[str, Any] = {}
    if args.config:
        try:
            raw = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        if not isinstance(raw, dict):
            raise UsageError("config file must hold a JSON object")
        file_cfg = {k.replace("-", "_"): v for k, v in raw.items()}
    params = {}
    for key in COMMAND_OPTIONS[args.command]:
        typ, default, _ = OPTIONS[key]
        val = getattr(args, key)
        if val is None and key in file_cfg:
            try:
                val = _parse_bool(file_cfg[key]) if typ is bool else typ(file_cfg[key])
            except (TypeError, ValueError) as exc:
                raise UsageError(f"config value for {key}: {exc}") from None
        params[key] = default if val is None else val
    cfg = RunConfig(args.command, params)
    validate(cfg)
    return cfg


def validate(cfg: RunConfig) -> None:
    p = cfg.params

    def need(cond, msg):
        if not cond:
            raise UsageError(msg)

    if "state" in p:
        need(p["state"] in ("singlet", "werner", "ortho_mixture"), f"unknown state {p['state']!r}")
        need(0.0 <= p["fidelity"] <= 1.0, "--fidelity must lie in [0, 1]")
        need(p["axis"] in ("x", "z"), "--axis must be x or z")
    for key in ("ra", "rb"):
        if key in p:
            need(0.0 <= p[key] <= 1.0, f"--{key} must lie in [0, 1]")
    for key in ("bins_a", "bins_b"):
        if key in p:
            need(p[key] >= 1, f"--{key.replace('_', '-')} must be >= 1")
    if "shots" in p:
        need(p["shots"] >= 1, "--shots must be >= 1")
    if "mode" in p:
        need(p["mode"] in ("exact", "hoeffding"), "--mode must be exact or hoeffding")
        need(0.0 <= p["confidence"] < 1.0, "--confidence must lie in [0, 1)")
    if "grid_step" in p:
        need(0.0 < p["grid_step"] <= 1.0, "--grid-step must lie in (0, 1]")
        need(p["workers"] >= 1, "--workers must be >= 1")
    if cfg.command == "certify":
        need(p["record"] is not None, "certify needs --record")
    if cfg.command == "fit":
        need(p["input"] is not None, "fit needs --input")
    if "beta" in p:
        need(p["beta"] >= 0.0, "--beta must be >= 0")
        need(0.0 < p["theta"] <= np.pi, "--theta must lie in (0, pi]")
    if "points" in p:
        need(p["points"] >= 2, "--points must be >= 2")
    if cfg.command == "steering":
        need(p["rb"] > 0.0, "--rb must be positive for steering")
    if cfg.command == "sdp-selftest":
        need(p["n"] >= 1, "--n must be >= 1")


# ---------------------------------------------------------------- helpers

def _out_dir(cfg: RunConfig, default: str | None = None) -> Path | None:
    d = cfg.params.get("out_dir") or default
    if d is None:
        return None
    path = Path(d)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _emit(text: str, out: Path | None, filename: str) -> None:
    sys.stdout.write(text)
    if out is not None:
        (out / filename).write_text(text)


def _named_state(cfg: RunConfig):
    from .states import NamedState

    if cfg.state == "werner":
        return NamedState.werner(cfg.fidelity)
    if cfg.state == "ortho_mixture":
        return NamedState.ortho_mixture(cfg.axis)
    return NamedState.singlet()


def _fmt(x: float) -> str:
    return format(float(x), ".12g")


def _exit_for(status) -> int:
    from .certify import CertStatus

    return {CertStatus.INFEASIBLE_DATA: EXIT_INFEASIBLE, CertStatus.SOLVER_FAILURE: EXIT_SOLVER}.get(status, EXIT_OK)


# ---------------------------------------------------------------- commands

def cmd_simulate(cfg: RunConfig) -> int:
    from .states import make_state, sample_record, uniform_povms, write_record

    state = _named_state(cfg)
    pa, pb = uniform_povms(cfg.ra, cfg.rb, cfg.bins_a, cfg.bins_b)
    rec = sample_record(make_state(state), pa, pb, cfg.shots, cfg.seed, meta={"state": state.describe()})
    out = _out_dir(cfg, ".")
    csv_path, side = write_record(rec, out / f"{cfg.name}.csv")
    print(csv_path)
    print(side)
    return EXIT_OK


def cmd_certify(cfg: RunConfig) -> int:
    from .certify import ConfidenceSettings, certify
    from .states import read_record

    rec = read_record(cfg.record)
    settings = ConfidenceSettings(c=cfg.confidence if cfg.mode == "hoeffding" else 0.0, mode=cfg.mode,
                                  bonferroni=cfg.bonferroni)
    res = certify(rec, cfg.ra, cfg.rb, settings)
    _emit(res.to_json(), _out_dir(cfg), "certification.json")
    return _exit_for(res.status)


def cmd_semidi(cfg: RunConfig) -> int:
    from .certify import ConfidenceSettings
    from .povm import AnglePartition
    from .semidi import HypothesisGrid, exact_statistics, scan, werner_family_bound
    from .states import read_record

    if cfg.record:
        rec = read_record(cfg.record)
        stats, part_a, part_b, n = rec.frequencies, rec.partition_a, rec.partition_b, rec.n
        settings = ConfidenceSettings(c=cfg.confidence if cfg.mode == "hoeffding" else 0.0, mode=cfg.mode,
                                      bonferroni=cfg.bonferroni)
    else:
        part_a, part_b = AnglePartition.uniform(cfg.bins_a), AnglePartition.uniform(cfg.bins_b)
        stats = exact_statistics(_named_state(cfg), cfg.ra, cfg.rb, part_a, part_b)
        n, settings = None, ConfidenceSettings()
    grid = HypothesisGrid.from_step(cfg.grid_step)
    verdict = scan(stats, part_a, part_b, grid, settings, n=n, workers=cfg.workers)
    out = _out_dir(cfg)
    if out is not None:
        (out / "semidi_verdict.json").write_text(verdict.to_json())
    summary = {"entangled": verdict.entangled, "grid_points": len(verdict.outcomes),
               "solver_failures": verdict.solver_failures,
               "werner_family_bound": None if cfg.record else werner_family_bound(cfg.ra, cfg.rb)}
    counts: dict[str, int] = {}
    for o in verdict.outcomes:
        counts[o.case.value] = counts.get(o.case.value, 0) + 1
    summary["cases"] = counts
    sys.stdout.write(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return EXIT_SOLVER if verdict.solver_failures else EXIT_OK


def cmd_steering(cfg: RunConfig) -> int:
    from .states import make_state
    from .steering import CorrelationTable, steering_report_json

    rho = make_state(_named_state(cfg))
    table = CorrelationTable.from_roc_bob(rho, cfg.rb, cfg.r_known)
    _emit(steering_report_json(table, cfg.r_known), _out_dir(cfg), "steering.json")
    return EXIT_OK


def cmd_compton(cfg: RunConfig) -> int:
    from .compton import ComptonKinematics, coincidence_density, contrast_from_kn, kn_phi_density

    k = ComptonKinematics(cfg.beta, cfg.theta)
    r = contrast_from_kn(k)
    phis = np.linspace(0.0, np.pi, cfg.points, endpoint=False)
    kn = ["phi_deg,density"] + [f"{_fmt(np.degrees(p))},{_fmt(d)}" for p, d in zip(phis, kn_phi_density(k, phis))]
    co = ["dphi_deg,density"] + [f"{_fmt(np.degrees(p))},{_fmt(d)}"
                                 for p, d in zip(phis, coincidence_density(cfg.ra, cfg.rb, phis))]
    print(f"r={_fmt(r)}")
    out = _out_dir(cfg)
    if out is not None:
        (out / "kn_density.csv").write_text("\n".join(kn) + "\n")
        (out / "coincidence_density.csv").write_text("\n".join(co) + "\n")
    else:
        sys.stdout.write("\n".join(kn) + "\n")
    return EXIT_OK


def cmd_fit(cfg: RunConfig) -> int:
    from .fit import fit_contrast, fitted_curve_csv, load_series

    series = load_series(cfg.input)
    res = fit_contrast(series)
    out = _out_dir(cfg)
    _emit(res.to_json(), out, "fit.json")
    if out is not None:
        angles = np.linspace(0.0, 360.0, cfg.points, endpoint=False)
        (out / "fit_curve.csv").write_text(fitted_curve_csv(res, angles))
    return EXIT_OK


def cmd_sdp_selftest(cfg: RunConfig) -> int:
    from .sdp import positive_part_selftest

    ok, worst = positive_part_selftest(n=cfg.n, seed=cfg.seed, tol=cfg.tol)
    print(json.dumps({"passed": ok, "cases": cfg.n, "worst_abs_error": float(_fmt(worst))}, sort_keys=True))
    return EXIT_OK if ok else 1


COMMANDS = {
    "simulate": cmd_simulate,
    "certify": cmd_certify,
    "semidi": cmd_semidi,
    "steering": cmd_steering,
    "compton": cmd_compton,
    "fit": cmd_fit,
    "sdp-selftest": cmd_sdp_selftest,
}


def main(argv: list[str] | None = None) -> int:
    from .fit import SeriesFormatError
    from .states import RecordFormatError

    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = resolve_config(args)
        return COMMANDS[cfg.command](cfg)
    except (UsageError, RecordFormatError, SeriesFormatError, FileNotFoundError) as exc:
        print(f"rocent {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"rocent {args.command}: invalid input: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

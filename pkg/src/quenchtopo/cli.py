"""Command-line front end.

    quenchtopo model    --spec qwz:m=5,n=1
    quenchtopo quench   --initial qwz:m=1,n=3 --final qwz:m=5,n=1
    quenchtopo emission --initial qwz:m=1,n=3 --final qwz:m=5,n=1 --bins 512
    quenchtopo coldatom --initial atom:delta=2 --final atom:delta=10 --shots 1000
    quenchtopo sweep    --t-so 0.5,1,3

Any option may also come from a JSON file given with ``--config``; flags on
the command line win. A config may hold a ``cases`` list, each entry
overriding the top-level keys and written to its own sub-directory.

Exit codes: 0 success, 1 invalid input, 2 numerical failure or
disagreement between methods, 3 file-system error.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import io, plotting
from .coldatom import ColdAtomSpec, effective_model, infer_overlap, prepared_state_model
from .coldatom import synthesize_densities
from .emission import DEFAULT_BINS, analyse
from .errors import ConfigError, Disagreement, NumericalFailure, Unsupported
from .gauge import DEFAULT_POINTS, KGrid, adaptive_winding, angle_profile, skew_polarization
from .models import Family, ModelSpec, analytic_topological_number, d_vector, eigensystem
from .models import gap_frequency, load_tabulated
from .overlap import overlap_at, overlap_closed_form, overlap_direct, symmetry_check
from .peaks import Thresholds, count_cp, count_cp_exact, count_cp_peaks, with_inference
from .sweep import SWEEP_COLUMNS, SweepConfig, run_sweep

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3

_MODEL_KEYS = {
    "qwz": {"m": float, "t_s": float, "t_so": float, "n": int, "plane": str},
    "ssh": {"t1": float, "t2": float, "n": int},
    "atom": {"delta": float, "t_s": float, "t_so": float, "a": float, "n": int},
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


# -- parsing ---------------------------------------------------------------

def _coerce(family, key, value):
    kinds = _MODEL_KEYS[family]
    if key not in kinds:
        raise ConfigError(f"{family} model: unknown parameter {key!r}; expected {sorted(kinds)}")
    try:
        if kinds[key] is int and float(value) != int(float(value)):
            raise ValueError
        return kinds[key](float(value)) if kinds[key] is int else kinds[key](value)
    except (TypeError, ValueError):
        raise ConfigError(f"{family} model: {key}={value!r} is not a valid {kinds[key].__name__}") \
            from None


def parse_model(value, field="model"):
    """Model from ``family:key=val,...``, ``table:path.csv`` or a dict with ``family``."""
    if isinstance(value, (ModelSpec, ColdAtomSpec)):
        return value
    if isinstance(value, dict):
        params = dict(value)
        family = str(params.pop("family", "")).lower()
        if family == "table":
            return load_tabulated(params.get("path", ""))
    elif isinstance(value, str) and ":" in value:
        family, _, body = value.partition(":")
        family = family.strip().lower()
        if family == "table":
            return load_tabulated(body.strip())
        params = {}
        for item in filter(None, (s.strip() for s in body.split(","))):
            key, eq, val = item.partition("=")
            if not eq:
                raise ConfigError(f"{field}: expected key=value, got {item!r}")
            params[key.strip()] = val.strip()
    else:
        raise ConfigError(f"{field}: expected 'family:key=value,...', got {value!r}")
    if family not in _MODEL_KEYS:
        raise ConfigError(f"{field}: unknown family {family!r}; expected qwz, ssh, atom or table")
    kwargs = {k: _coerce(family, k, v) for k, v in params.items()}
    try:
        if family == "qwz":
            return ModelSpec.qwz(**kwargs)
        if family == "ssh":
            return ModelSpec.ssh(**kwargs)
        return ColdAtomSpec(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"{field}: {exc}") from None


def _as_model(spec):
    return effective_model(spec) if isinstance(spec, ColdAtomSpec) else spec


def _float_list(text):
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise ConfigError(f"expected a comma-separated list of numbers, got {text!r}") from None


def _int_list(text):
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise ConfigError(f"expected a comma-separated list of integers, got {text!r}") from None


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON file with option values")
    common.add_argument("--grid-n", type=int, help=f"k points (default {DEFAULT_POINTS})")
    common.add_argument("--seed", type=int, help="RNG seed (default 0)")
    common.add_argument("--out", type=Path, help="output directory (default ./out)")
    common.add_argument("--plot", action="store_true", default=None,
                        help="also render figures")
    common.add_argument("--plot-format", choices=plotting.FORMATS)

    counting = _Parser(add_help=False)
    counting.add_argument("--eps-hi", type=float, help="high band is >= 1 - eps_hi")
    counting.add_argument("--eps-lo", type=float, help="low band is <= eps_lo")
    counting.add_argument("--suspect-low", type=float,
                          help="flag unfinished excursions that reach this height")

    pair = _Parser(add_help=False)
    pair.add_argument("--initial", help="pre-quench model, e.g. qwz:m=1,n=3")
    pair.add_argument("--final", help="post-quench model, e.g. qwz:m=5,n=1")

    parser = _Parser(prog="quenchtopo", description="Quench readout of 1D winding numbers.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("model", parents=[common], help="bands, band angle and winding")
    p.add_argument("--spec", help="model, e.g. qwz:m=5,n=1 or ssh:t1=0.5")

    p = sub.add_parser("quench", parents=[common, counting, pair],
                       help="post-quench occupation and CP count")
    p.add_argument("--method", choices=("closed_form", "direct"))
    p.add_argument("--allow-cross-plane", action="store_true", default=None)

    p = sub.add_parser("emission", parents=[common, counting, pair],
                       help="emission spectrum and its inversion")
    p.add_argument("--bins", type=int, help=f"frequency bins (default {DEFAULT_BINS})")

    p = sub.add_parser("coldatom", parents=[common, counting, pair],
                       help="synthetic spin-resolved densities and inference")
    p.add_argument("--shots", type=int, help="atoms per momentum point (default 1000)")
    p.add_argument("--densities", type=Path, help="read q,n_up,n_down,shots instead of sampling")

    p = sub.add_parser("sweep", parents=[common, counting], help="theorem check over a grid")
    p.add_argument("--m", type=_float_list, help="comma-separated m values (default 1,5)")
    p.add_argument("--n", type=_int_list, help="comma-separated harmonics (default 0..4)")
    p.add_argument("--t-so", type=_float_list, help="comma-separated t_so (default 0.5,1,3)")
    p.add_argument("--t-s", type=float, help="hopping t_s (default 2)")
    p.add_argument("--workers", type=int, help="worker processes (default 1)")
    p.add_argument("--flag-false-cps", action="store_true", default=None,
                   help="add a false_cps column; gate the exit code on the exact count")
    return parser


_DEFAULTS = {
    "grid_n": DEFAULT_POINTS, "seed": 0, "out": "out", "plot": False, "plot_format": "png",
    "method": "closed_form", "allow_cross_plane": False, "bins": DEFAULT_BINS, "shots": 1000,
    "workers": 1, "flag_false_cps": False, "t_s": 2.0,
}
_NOT_OPTIONS = {"command", "config"}


def resolve_cases(args):
    """Merge defaults, config file and flags into one dict per case."""
    file_cfg = {}
    if args.config is not None:
        file_cfg = io.read_json(args.config)
        if not isinstance(file_cfg, dict):
            raise ConfigError(f"{args.config}: top level must be a JSON object")
    flags = {k: v for k, v in vars(args).items() if v is not None and k not in _NOT_OPTIONS}
    cases = file_cfg.pop("cases", None)
    if cases is None:
        cases = [{}]
    if not isinstance(cases, list) or not cases:
        raise ConfigError("cases: must be a non-empty list")
    merged = []
    for idx, case in enumerate(cases):
        if not isinstance(case, dict):
            raise ConfigError(f"cases[{idx}]: must be an object")
        cfg = {**_DEFAULTS, **file_cfg, **case, **flags}
        cfg.setdefault("name", f"case{idx}" if len(cases) > 1 else "")
        merged.append(cfg)
    names = [c["name"] for c in merged]
    if len(set(names)) != len(names):
        raise ConfigError("cases: names must be unique")
    return merged


def _thresholds(cfg):
    src = cfg.get("thresholds", {})
    if not isinstance(src, dict):
        raise ConfigError("thresholds: must be an object")
    values = {k: cfg.get(k, src.get(k)) for k in ("eps_hi", "eps_lo", "suspect_low")}
    return Thresholds(**{k: float(v) for k, v in values.items() if v is not None})


def _grid(cfg):
    return KGrid(cfg["grid_n"])


def _require(cfg, key):
    if cfg.get(key) is None:
        raise ConfigError(f"{key}: required")
    return parse_model(cfg[key], key)


def _out_dir(cfg):
    return Path(cfg["out"]) / cfg["name"] if cfg["name"] else Path(cfg["out"])


def _nu(spec):
    """Analytic winding when the family has a phase diagram, else the numerical one."""
    try:
        return analytic_topological_number(spec)
    except Unsupported:
        return abs(adaptive_winding(spec)[0])


# -- subcommands -----------------------------------------------------------

def cmd_model(cfg):
    spec = _as_model(_require(cfg, "spec"))
    out = _out_dir(cfg)
    # phase boundaries are rejected before any numerics
    analytic = None
    if spec.family is not Family.GENERIC:
        analytic = analytic_topological_number(spec)
    w, residual, grid = adaptive_winding(spec, cfg["grid_n"])
    profile = angle_profile(spec, grid)
    k = grid.k
    bands = eigensystem(d_vector(spec, k))
    omega = gap_frequency(d_vector(spec, k))
    if spec.family is not Family.GENERIC:
        omega = np.concatenate([omega, gap_frequency(d_vector(spec, np.array([0.0, np.pi])))])
    skew = skew_polarization(spec, grid)
    summary = {
        "spec": spec.to_dict(), "angle_kind": profile.kind, "grid_n": grid.n_points,
        "analytic_winding": analytic, "numerical_winding": abs(w), "signed_advance": w,
        "winding_residual": residual, "skew_polarization": abs(skew),
        "omega_range": [float(omega.min()), float(omega.max())],
    }
    io.write_csv(out / "model.csv", {"k": k, "E_plus": bands.E_plus, "E_minus": bands.E_minus,
                                     "angle": profile.angle})
    io.write_json(out / "model.json", summary)
    if cfg["plot"]:
        plotting.plot_model(k, bands.E_plus, bands.E_minus, profile.angle, spec.describe(),
                            out / "model", cfg["plot_format"])
    if analytic is not None and analytic != abs(w):
        raise Disagreement(f"analytic winding {analytic} != numerical {abs(w)}")
    if abs(round(skew)) != abs(w):
        raise Disagreement(f"skew-polarization winding {skew:.6f} != {abs(w)}")
    return summary


def cmd_quench(cfg):
    spec_i = _as_model(_require(cfg, "initial"))
    spec_f = _as_model(_require(cfg, "final"))
    grid, th, out = _grid(cfg), _thresholds(cfg), _out_dir(cfg)
    method = cfg["method"]
    if method not in ("closed_form", "direct"):
        raise ConfigError(f"method: expected closed_form or direct, got {method!r}")
    cross = bool(cfg["allow_cross_plane"])
    direct = overlap_direct(spec_i, spec_f, grid, allow_cross_plane=cross)
    if direct.plane == "cross":
        profile = direct
        report = count_cp_peaks(profile.c_plus_sq, th, positions=profile.k)
    else:
        closed = overlap_closed_form(spec_i, spec_f, grid)
        profile = closed if method == "closed_form" else direct
        report = count_cp(profile, th)
    nu_f = _nu(spec_f)
    nu_i = _nu(spec_i)
    report = with_inference(report, nu_f, nonnegative=spec_f.family is not Family.GENERIC)
    summary = report.to_dict()
    summary.update({
        "initial": spec_i.to_dict(), "final": spec_f.to_dict(), "plane": profile.plane,
        "provenance": profile.provenance, "grid_n": grid.n_points,
        "nu_initial": nu_i, "nu_final": nu_f, "expected": abs(nu_i - nu_f),
        "symmetry_residual": symmetry_check(profile),
        "method_max_diff": (None if direct.plane == "cross" else
                            float(np.max(np.abs(closed.c_plus_sq - direct.c_plus_sq)))),
        "thresholds": vars(th),
    })
    io.write_csv(out / "overlap.csv", {"k": profile.k, "c_plus_sq": profile.c_plus_sq,
                                       "c_minus_sq": profile.c_minus_sq,
                                       "delta_angle": profile.delta_angle})
    io.write_json(out / "report.json", summary)
    if spec_i.plane == spec_f.plane == profile.plane:
        io.write_csv(out / "angles.csv", {"k": profile.k,
                                          "angle_initial": angle_profile(spec_i, grid).angle,
                                          "angle_final": angle_profile(spec_f, grid).angle})
    if cfg["plot"]:
        title = f"{spec_i.describe()} -> {spec_f.describe()}"
        plotting.plot_overlap(profile, title, out / "overlap", cfg["plot_format"])
    if report.agreement is False:
        raise Disagreement(f"exact count {report.exact_count} != peak count {report.peak_count}"
                           f" ({len(report.false_cp_flags)} false-CP flags)")
    return summary


def cmd_emission(cfg):
    spec_i = _as_model(_require(cfg, "initial"))
    spec_f = _as_model(_require(cfg, "final"))
    grid, th, out = _grid(cfg), _thresholds(cfg), _out_dir(cfg)
    spec, transitions = analyse(spec_i, spec_f, grid, int(cfg["bins"]), th)
    exact = count_cp_exact(overlap_closed_form(spec_i, spec_f, grid)).exact_count
    nu_f = analytic_topological_number(spec_f)
    c4_k = overlap_at(spec_i, spec_f, spec.k) ** 2
    summary = {
        "initial": spec_i.to_dict(), "final": spec_f.to_dict(), "grid_n": grid.n_points,
        "n_bins": int(cfg["bins"]), "omega_range": list(spec.omega_range),
        "direction": spec.direction, "monotone": spec.monotone,
        "total_power": spec.total_power(), "transitions": transitions,
        "exact_count": exact, "nu_final": nu_f,
        "n_initial_omega": transitions if nu_f == 0 else None,
        "n_initial_k": exact if nu_f == 0 else None,
    }
    io.write_csv(out / "emission.csv", {"omega": spec.omega_centers, "I": spec.density,
                                        "c_plus_4": spec.c_plus_4})
    io.write_csv(out / "emission_bins.csv", {"omega_lo": spec.omega_edges[:-1],
                                             "omega_hi": spec.omega_edges[1:],
                                             "I_mean": spec.intensity})
    io.write_csv(out / "emission_k.csv", {"k": spec.k, "omega": spec.omega_k,
                                          "r": spec.dipole_k, "I": spec.intensity_k,
                                          "c_plus_4": c4_k})
    io.write_json(out / "emission.json", summary)
    if cfg["plot"]:
        title = f"{spec_i.describe()} -> {spec_f.describe()}"
        plotting.plot_emission(spec, c4_k, title, out / "emission", cfg["plot_format"])
    if transitions != exact:
        raise Disagreement(f"omega-domain transitions {transitions} != k-domain count {exact}")
    return summary


def cmd_coldatom(cfg):
    grid, th, out = _grid(cfg), _thresholds(cfg), _out_dir(cfg)
    raw_f = _require(cfg, "final")
    spec_f = _as_model(raw_f)
    if cfg.get("initial") is not None:
        spec_i = _as_model(parse_model(cfg["initial"], "initial"))
    else:
        spec_i = prepared_state_model(spec_f.t_s, spec_f.plane)
    truth = None
    if cfg.get("densities") is not None:
        dens = io.read_densities(cfg["densities"])
    else:
        dens = synthesize_densities(spec_i, spec_f, grid, cfg["shots"], cfg["seed"])
        truth = overlap_direct(spec_i, spec_f, grid).c_plus_sq
    estimate = infer_overlap(dens)
    nu_f = analytic_topological_number(spec_f)
    report = with_inference(count_cp_peaks(estimate, th, positions=dens.q), nu_f)
    summary = report.to_dict()
    summary.update({"initial": spec_i.to_dict(), "final": spec_f.to_dict(),
                    "shots": int(np.max(dens.shots)), "seed": dens.seed, "nu_final": nu_f,
                    "thresholds": vars(th)})
    if isinstance(raw_f, ColdAtomSpec):
        summary["lattice_constant"] = raw_f.a
    if truth is not None:
        nu_i = analytic_topological_number(spec_i)
        summary.update({"nu_initial": nu_i, "expected": abs(nu_i - nu_f),
                        "correct": report.peak_count == abs(nu_i - nu_f)})
        io.write_densities(out / "densities.csv", dens)
    cols = {"q": dens.q, "c_plus_sq_est": estimate}
    if truth is not None:
        cols["c_plus_sq"] = truth
    io.write_csv(out / "overlap_estimate.csv", cols)
    io.write_json(out / "report.json", summary)
    if cfg["plot"]:
        plotting.plot_densities(dens.q, estimate, truth, f"shots={summary['shots']}",
                                out / "densities", cfg["plot_format"])
    return summary


def cmd_sweep(cfg):
    out = _out_dir(cfg)
    try:
        sweep_cfg = SweepConfig(
            m_values=tuple(float(x) for x in cfg.get("m", (1.0, 5.0))),
            n_values=tuple(int(x) for x in cfg.get("n", (0, 1, 2, 3, 4))),
            t_so_values=tuple(float(x) for x in cfg.get("t_so", (0.5, 1.0, 3.0))),
            t_s=float(cfg["t_s"]), grid_n=cfg["grid_n"], thresholds=_thresholds(cfg))
    except TypeError as exc:
        raise ConfigError(f"sweep grid: {exc}") from None
    rows = run_sweep(sweep_cfg, workers=int(cfg["workers"]))
    flag_mode = bool(cfg["flag_false_cps"])
    header = SWEEP_COLUMNS + (("false_cps",) if flag_mode else ())
    io.write_rows(out / "sweep.csv", header, rows)
    bad_exact = [r for r in rows if r["exact_count"] != r["expected"]]
    bad_any = [r for r in rows if not r["agree"]]
    summary = {"rows": len(rows), "disagreeing_rows": len(bad_any),
               "exact_failures": len(bad_exact),
               "rows_with_false_cps": sum(r["false_cps"] > 0 for r in rows),
               "max_exact_residual": max(r["exact_residual"] for r in rows),
               "gate": "exact_count" if flag_mode else "exact_and_peak_count"}
    io.write_json(out / "sweep.json", summary)
    if cfg["plot"]:
        plotting.plot_sweep(rows, out / "sweep", cfg["plot_format"])
    failing = bad_exact if flag_mode else bad_any
    if failing:
        r = failing[0]
        raise Disagreement(f"{len(failing)} sweep rows disagree, first: m1={r['m1']:g} "
                           f"n1={r['n1']} m2={r['m2']:g} n2={r['n2']} t_so={r['t_so']:g}")
    return summary


COMMANDS = {"model": cmd_model, "quench": cmd_quench, "emission": cmd_emission,
            "coldatom": cmd_coldatom, "sweep": cmd_sweep}


def _run(command, cfg):
    try:
        COMMANDS[command](cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalFailure as exc:
        print(f"numerical failure ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def main(argv=None):
    """Run every case; the exit code is the largest one among them."""
    try:
        args = build_parser().parse_args(argv)
        cases = resolve_cases(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    worst = EXIT_OK
    for cfg in cases:
        code = _run(args.command, cfg)
        label = f"[{cfg['name']}] " if cfg["name"] else ""
        status = "ok" if code == EXIT_OK else f"exit {code}"
        print(f"{label}{args.command}: {status}, files in {_out_dir(cfg)}")
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    sys.exit(main())

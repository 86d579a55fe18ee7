"""Command-line entry point.

Subcommands::

    spacerotor simulate <config.json>
    spacerotor hj-suite <config.json>
    spacerotor analyze <config.json> <trajectory.csv>

Exit status: 0 when every check passes, 1 when a check fails (or the
integration blows up), 2 on configuration errors.
"""

import argparse
import csv
import datetime
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import hamilton_jacobi as hj
from .dynamics import (
    FullStateC,
    FullStateN,
    constant_torque,
    conserved_quantities,
    full_field,
    integrate_lie_rkmk4,
    integrate_rk4,
    linear_feedback,
    reduced_field,
)
from .errors import ConfigError, NonFiniteError
from .lie import is_rotation
from .model import COINCIDENT, NONCOINCIDENT, InertiaParams, ReducedStateC, ReducedStateN

log = logging.getLogger("spacerotor")

OUTPUT_DIR_ENV = "SPACEROTOR_OUTPUT_DIR"

DEFAULT_TOLERANCES = {
    "energy": 1e-9,
    "casimir": 1e-10,
    "rotor_momentum": 1e-13,
    "control_fiber": 1e-10,
    "spatial_momentum": 1e-9,
    "gravity_axis_momentum": 1e-9,
    "advected_vector": 1e-8,
}

DEFAULT_HJ_TOLERANCES = {
    "type1": 1e-15,
    "closedness_constant": 1e-9,
    "closedness_exact": 1e-6,
    "closedness_witness": 1e-3,
    "type2_gate": 1e-4,
}

HJ_BATTERIES = ("type1", "closedness", "type2")


# -- config parsing -------------------------------------------------------------


def _get(cfg, key, path, kind=None, default=...):
    if key not in cfg:
        if default is ...:
            raise ConfigError(f"{path}.{key}".lstrip("."), "missing required field")
        return default
    value = cfg[key]
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{path}.{key}".lstrip("."), f"expected a number, got {value!r}")
        value = float(value)
        if not math.isfinite(value):
            raise ConfigError(f"{path}.{key}".lstrip("."), "must be finite")
    elif kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{path}.{key}".lstrip("."), f"expected an integer, got {value!r}")
    elif kind == "vec3":
        if (
            not isinstance(value, list)
            or len(value) != 3
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)
        ):
            raise ConfigError(f"{path}.{key}".lstrip("."), "expected a 3-element numeric array")
        value = np.array(value, dtype=float)
    return value


def load_config(path):
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except FileNotFoundError:
        raise ConfigError("<file>", f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"invalid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    return cfg


def parse_params(cfg):
    pc = _get(cfg, "params", "")
    if not isinstance(pc, dict):
        raise ConfigError("params", "expected an object")
    Ibar = _get(pc, "Ibar", "params", "vec3")
    J3 = _get(pc, "J3", "params", float)
    gh = _get(pc, "gh", "params", float, 0.0)
    chi = _get(pc, "chi", "params", "vec3", np.array([0.0, 0.0, 1.0]))
    try:
        return InertiaParams(Ibar[0], Ibar[1], Ibar[2], J3, gh, chi)
    except ValueError as exc:
        raise ConfigError("params", str(exc)) from None


def parse_control(cfg):
    cc = cfg.get("control", {"type": "none"})
    if not isinstance(cc, dict):
        raise ConfigError("control", "expected an object")
    kind = cc.get("type", "none")
    if kind == "none":
        return kind, None, 0.0
    if kind == "constant":
        value = _get(cc, "value", "control", float)
        return kind, constant_torque(value), value
    if kind == "linear_feedback":
        gain = _get(cc, "gain", "control", float)
        return kind, linear_feedback(gain), gain
    raise ConfigError("control.type", f"unknown control type {kind!r}")


class Scenario:
    """Validated simulation settings."""

    def __init__(self, cfg, stride=None):
        self.raw = cfg
        self.case = _get(cfg, "case", "")
        if self.case not in (COINCIDENT, NONCOINCIDENT):
            raise ConfigError("case", f"expected 'coincident' or 'noncoincident', got {self.case!r}")
        self.params = parse_params(cfg)
        self.control_kind, self.control, self.control_value = parse_control(cfg)

        self.dt = _get(cfg, "dt", "", float)
        if not self.dt > 0:
            raise ConfigError("dt", f"must be > 0, got {self.dt!r}")
        self.steps = _get(cfg, "steps", "", int)
        if self.steps < 1:
            raise ConfigError("steps", f"must be >= 1, got {self.steps!r}")
        self.integrator = cfg.get("integrator", "rk4")
        if self.integrator not in ("rk4", "rkmk4"):
            raise ConfigError("integrator", f"expected 'rk4' or 'rkmk4', got {self.integrator!r}")
        self.stride = stride if stride is not None else _get(cfg, "stride", "", int, 1)
        if self.stride < 1:
            raise ConfigError("stride", "must be >= 1")
        if self.steps % self.stride:
            raise ConfigError("stride", f"must divide steps ({self.steps})")
        self.reorthonormalize_every = _get(cfg, "reorthonormalize_every", "", int, 100)

        self.initial = self._parse_initial(cfg)

        outputs = cfg.get("outputs", {})
        if not isinstance(outputs, dict):
            raise ConfigError("outputs", "expected an object")
        self.trajectory_name = outputs.get("trajectory", "trajectory.csv")
        self.report_name = outputs.get("report", "report.json")
        self.output_dir = outputs.get("dir")

        tol = cfg.get("tolerances", {})
        if not isinstance(tol, dict):
            raise ConfigError("tolerances", "expected an object")
        self.tolerances = dict(DEFAULT_TOLERANCES)
        for key in tol:
            if key not in DEFAULT_TOLERANCES:
                raise ConfigError(f"tolerances.{key}", "unknown tolerance")
            self.tolerances[key] = _get(tol, key, "tolerances", float)
        self.checks = self._parse_checks(cfg)

    def _parse_initial(self, cfg):
        ic = _get(cfg, "initial", "")
        if not isinstance(ic, dict):
            raise ConfigError("initial", "expected an object")
        Pi = _get(ic, "Pi", "initial", "vec3")
        alpha = _get(ic, "alpha", "initial", float, 0.0)
        l = _get(ic, "l", "initial", float)
        if self.case == COINCIDENT:
            if "Gamma" in ic:
                raise ConfigError("initial.Gamma", "not used in the coincident case")
            reduced = ReducedStateC(Pi, alpha, l)
        else:
            Gamma = _get(ic, "Gamma", "initial", "vec3")
            reduced = ReducedStateN(Pi, Gamma, alpha, l)
        A = ic.get("A")
        if A is None and self.integrator == "rkmk4":
            A = np.eye(3).tolist()
        if A is None:
            return reduced
        try:
            A = np.array(A, dtype=float).reshape(3, 3)
        except (TypeError, ValueError):
            raise ConfigError("initial.A", "expected a 3x3 numeric array") from None
        if not is_rotation(A, tol=1e-9):
            raise ConfigError("initial.A", "not a rotation matrix")
        return (FullStateC if self.case == COINCIDENT else FullStateN)(A, reduced)

    @property
    def full(self):
        return isinstance(self.initial, (FullStateC, FullStateN))

    def _parse_checks(self, cfg):
        if "checks" in cfg:
            checks = cfg["checks"]
            if not isinstance(checks, list) or not checks:
                raise ConfigError("checks", "expected a non-empty list")
            known = set(self.default_checks(all_checks=True))
            for c in checks:
                if c not in known:
                    raise ConfigError("checks", f"unknown or inapplicable check {c!r}")
            return list(dict.fromkeys(checks))
        return self.default_checks()

    def default_checks(self, all_checks=False):
        checks = []
        if self.control is None or all_checks:
            checks.append("energy")
        if self.case == COINCIDENT:
            checks.append("casimir_pi2")
        else:
            checks += ["casimir_pigamma", "casimir_gamma2"]
        if self.control is None or all_checks:
            checks.append("rotor_momentum")
        if self.control is not None:
            checks.append("control_fiber")
        if self.full:
            if self.case == COINCIDENT:
                checks.append("spatial_momentum")
            else:
                checks += ["gravity_axis_momentum", "advected_vector"]
        return checks


# -- trajectory output ------------------------------------------------------------


def trajectory_columns(case, full):
    cols = ["t", "Pi1", "Pi2", "Pi3"]
    if case == NONCOINCIDENT:
        cols += ["Gamma1", "Gamma2", "Gamma3"]
    cols += ["alpha", "l", "H"]
    if case == COINCIDENT:
        cols.append("casimir_pi2")
    else:
        cols += ["casimir_pigamma", "casimir_gamma2"]
    if full:
        cols += ["mu1", "mu2", "mu3"]
        if case == NONCOINCIDENT:
            cols += ["a1", "a2", "a3"]
    return cols


def trajectory_table(traj, case):
    """Column name -> float array, in CSV order."""
    full = isinstance(traj.states[0], (FullStateC, FullStateN))
    reduced = [s.reduced if full else s for s in traj.states]
    table = {"t": traj.t}
    Pi = np.array([r.Pi for r in reduced])
    table.update(Pi1=Pi[:, 0], Pi2=Pi[:, 1], Pi3=Pi[:, 2])
    if case == NONCOINCIDENT:
        G = np.array([r.Gamma for r in reduced])
        table.update(Gamma1=G[:, 0], Gamma2=G[:, 1], Gamma3=G[:, 2])
    table["alpha"] = np.array([r.alpha for r in reduced])
    table["l"] = np.array([r.l for r in reduced])
    table.update(traj.columns)
    return {c: np.asarray(table[c], dtype=float) for c in trajectory_columns(case, full)}


def _fmt(x):
    return format(float(x), ".17g")


def write_csv(table, path):
    names = list(table)
    n = len(table[names[0]])
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(names)
        for i in range(n):
            w.writerow([_fmt(table[c][i]) for c in names])


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    return {name: np.array([float(r[j]) for r in body]) for j, name in enumerate(header)}


# -- analysis ---------------------------------------------------------------------


def _drift(series, reference=None):
    series = np.asarray(series, dtype=float)
    ref = series[0] if reference is None else np.asarray(reference, dtype=float)
    gap = float(np.max(np.abs(series - ref)))
    scale = abs(float(series[0]))
    return gap / scale if scale > 0.0 else gap


def _vector_drift(rows):
    rows = np.asarray(rows, dtype=float)
    gap = float(np.max(np.linalg.norm(rows - rows[0], axis=1)))
    scale = float(np.linalg.norm(rows[0]))
    return gap / scale if scale > 0.0 else gap


def _check(name, initial, final, drift, tol):
    return {
        "name": name,
        "initial": initial,
        "final": final,
        "max_rel_drift": drift,
        "tolerance": tol,
        "passed": bool(drift < tol),
    }


def analyze_table(table, scenario):
    """Conservation checks computed purely from trajectory columns."""
    tol = scenario.tolerances
    t = table["t"]
    out = []
    for name in scenario.checks:
        if name == "energy":
            c = table["H"]
            out.append(_check(name, c[0], c[-1], _drift(c), tol["energy"]))
        elif name.startswith("casimir_"):
            c = table[name]
            out.append(_check(name, c[0], c[-1], _drift(c), tol["casimir"]))
        elif name == "rotor_momentum":
            c = table["l"]
            out.append(_check(name, c[0], c[-1], _drift(c), tol["rotor_momentum"]))
        elif name == "control_fiber":
            l = table["l"]
            if scenario.control_kind == "constant":
                expected = l[0] + scenario.control_value * (t - t[0])
            else:
                expected = l[0] * np.exp(-scenario.control_value * (t - t[0]))
            out.append(_check(name, l[0], l[-1], _drift(l, expected), tol["control_fiber"]))
        elif name == "spatial_momentum":
            mu = np.column_stack([table["mu1"], table["mu2"], table["mu3"]])
            out.append(
                _check(name, float(np.linalg.norm(mu[0])), float(np.linalg.norm(mu[-1])),
                       _vector_drift(mu), tol["spatial_momentum"])
            )
        elif name == "gravity_axis_momentum":
            mu = np.column_stack([table["mu1"], table["mu2"], table["mu3"]])
            a = np.column_stack([table["a1"], table["a2"], table["a3"]])
            c = np.sum(mu * a, axis=1) / np.linalg.norm(a, axis=1)
            out.append(_check(name, c[0], c[-1], _drift(c), tol["gravity_axis_momentum"]))
        elif name == "advected_vector":
            a = np.column_stack([table["a1"], table["a2"], table["a3"]])
            out.append(
                _check(name, float(np.linalg.norm(a[0])), float(np.linalg.norm(a[-1])),
                       _vector_drift(a), tol["advected_vector"])
            )
    return out


def build_report(command, config_path, checks, extra=None):
    report = {
        "command": command,
        "config": str(config_path),
        "generated_at": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "checks": checks,
        "passed": all(c["passed"] for c in checks),
    }
    if extra:
        report.update(extra)
    return report


def write_report(report, path):
    with open(path, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")


def resolve_output_dir(flag, configured):
    chosen = flag or os.environ.get(OUTPUT_DIR_ENV) or configured or "."
    out = Path(chosen)
    out.mkdir(parents=True, exist_ok=True)
    return out


# -- commands ---------------------------------------------------------------------


def simulate(scenario):
    """Integrate a scenario; returns the Trajectory."""
    observers = [conserved_quantities(scenario.params)]
    if scenario.full:
        field = full_field(scenario.params, scenario.control)
    else:
        field = reduced_field(scenario.params, scenario.control)
    if scenario.integrator == "rkmk4":
        return integrate_lie_rkmk4(
            field, scenario.initial, scenario.dt, scenario.steps, observers, scenario.stride
        )
    return integrate_rk4(
        field,
        scenario.initial,
        scenario.dt,
        scenario.steps,
        observers,
        scenario.stride,
        scenario.reorthonormalize_every,
    )


def run_scenario(config_path, output_dir=None, stride=None):
    """Run ``simulate``; returns ``(report, trajectory_path, report_path)``."""
    scenario = Scenario(load_config(config_path), stride=stride)
    out = resolve_output_dir(output_dir, scenario.output_dir)
    traj = simulate(scenario)
    table = trajectory_table(traj, scenario.case)
    traj_path = out / scenario.trajectory_name
    write_csv(table, traj_path)
    report = build_report("simulate", config_path, analyze_table(table, scenario),
                          {"samples": len(traj), "trajectory": traj_path.name})
    report_path = out / scenario.report_name
    write_report(report, report_path)
    return report, traj_path, report_path


def run_analyze(config_path, csv_path, output_dir=None):
    scenario = Scenario(load_config(config_path))
    out = resolve_output_dir(output_dir, scenario.output_dir)
    table = read_csv(csv_path)
    report = build_report("simulate", config_path, analyze_table(table, scenario),
                          {"samples": len(table["t"]), "trajectory": Path(csv_path).name})
    report_path = out / scenario.report_name
    write_report(report, report_path)
    return report, report_path


def _random_params(rng, lo, hi, gravity):
    Ibar = rng.uniform(lo, hi, 3)
    J3 = rng.uniform(lo, hi)
    if not gravity:
        return InertiaParams(*Ibar, J3)
    chi = rng.normal(size=3)
    return InertiaParams(*Ibar, J3, rng.uniform(lo, hi), chi / np.linalg.norm(chi))


def _type1_battery(rng, n, lo, hi, tol):
    worst_c = worst_n = 0.0
    for _ in range(n):
        p = _random_params(rng, lo, hi, gravity=False)
        worst_c = max(worst_c, hj.type1_residual_c(rng.uniform(-2, 2, 5), p))
        pn = _random_params(rng, lo, hi, gravity=True)
        worst_n = max(worst_n, hj.type1_residual_n(rng.uniform(-2, 2, 8), pn))
    return [
        {"name": "type1_coincident", "points": n, "max_residual": worst_c,
         "tolerance": tol, "passed": worst_c < tol},
        {"name": "type1_noncoincident", "points": n, "max_residual": worst_n,
         "tolerance": tol, "passed": worst_n < tol},
    ]


def _closedness_battery(rng, n, tols):
    def W(q):
        th, a = q[0:3], q[3]
        return np.sin(th[0]) * th[1] + th[2] ** 3 * a + np.cos(a) * th[0] * th[2]

    const = np.array([0.3, -1.2, 0.5, 2.0])
    exact_chart = hj.GradientForm(W)
    exact_reduced = hj.reduced_form_from_generator(W)

    def witness(q):
        return np.array([q[1], 0.0, 0.0, 0.0])

    worst_const = worst_exact = 0.0
    least_witness = math.inf
    for _ in range(n):
        th = rng.normal(size=3)
        th *= rng.uniform(0.0, 1.0) / np.linalg.norm(th)
        q = np.array([*th, rng.uniform(-3, 3)])
        worst_const = max(worst_const, hj.closedness_residual(lambda _q: const, q))
        worst_exact = max(
            worst_exact,
            hj.closedness_residual(exact_chart, q),
            hj.closedness_residual_reduced(exact_reduced, q),
        )
        least_witness = min(least_witness, hj.closedness_residual(witness, q))
    return [
        {"name": "closedness_constant", "points": n, "max_residual": worst_const,
         "tolerance": tols["closedness_constant"], "passed": worst_const < tols["closedness_constant"]},
        {"name": "closedness_exact", "points": n, "max_residual": worst_exact,
         "tolerance": tols["closedness_exact"], "passed": worst_exact < tols["closedness_exact"]},
        {"name": "closedness_nonclosed_witness", "points": n, "min_residual": least_witness,
         "tolerance": tols["closedness_witness"], "passed": least_witness > tols["closedness_witness"]},
    ]


def random_reduced_state(rng, case):
    Pi = rng.uniform(-1.5, 1.5, 3)
    alpha = rng.uniform(-math.pi, math.pi)
    l = rng.uniform(-1.0, 1.0)
    if case == COINCIDENT:
        return ReducedStateC(Pi, alpha, l)
    G = rng.normal(size=3)
    return ReducedStateN(Pi, G / np.linalg.norm(G), alpha, l)


def _type2_battery(rng, settings, tol):
    n = settings.get("points", 2)
    flow_times = settings.get("flow_times", [0.01, 0.05, 0.1])
    flow_dt = settings.get("flow_dt", 1e-3)
    scale = settings.get("scale", 2.0)
    cases = settings.get("cases", [COINCIDENT, NONCOINCIDENT])
    out = []
    for case in cases:
        p = InertiaParams(3.0, 2.0, 1.0, 1.0, 1.0 if case == NONCOINCIDENT else 0.0)
        maps = hj.standard_battery(p, case, flow_times, flow_dt, scale)
        states = [random_reduced_state(rng, case) for _ in range(n)]
        records = hj.type2_equivalence(maps, states, p, case, tol)
        discordant = [r for r in records if not r.concordant]
        out.append({
            "name": f"type2_equivalence_{case}",
            "records": [
                {"map": r.map_name, "point": r.point, "lhs_res": r.lhs_res,
                 "rhs_res": r.rhs_res, "concordant": r.concordant}
                for r in records
            ],
            "discordant": len(discordant),
            "tolerance": tol,
            "passed": not discordant,
        })
    return out


def run_hj_suite(config_path, output_dir=None, seed=0):
    cfg = load_config(config_path)
    batteries = cfg.get("batteries", list(HJ_BATTERIES))
    if not isinstance(batteries, list) or not batteries:
        raise ConfigError("batteries", "expected a non-empty list")
    for b in batteries:
        if b not in HJ_BATTERIES:
            raise ConfigError("batteries", f"unknown battery {b!r}")
    n = _get(cfg, "points", "", int, 1000)
    if n < 1:
        raise ConfigError("points", "must be >= 1")
    lo, hi = cfg.get("param_range", [0.5, 5.0])
    if not 0 < lo < hi:
        raise ConfigError("param_range", "expected 0 < lo < hi")
    tols = dict(DEFAULT_HJ_TOLERANCES)
    for key, value in cfg.get("tolerances", {}).items():
        if key not in tols:
            raise ConfigError(f"tolerances.{key}", "unknown tolerance")
        tols[key] = _get(cfg["tolerances"], key, "tolerances", float)
    type2_settings = cfg.get("type2", {})
    if not isinstance(type2_settings, dict):
        raise ConfigError("type2", "expected an object")

    outputs = cfg.get("outputs", {})
    out = resolve_output_dir(output_dir, outputs.get("dir"))

    rng = np.random.default_rng(seed)
    checks = []
    for b in dict.fromkeys(batteries):
        if b == "type1":
            checks += _type1_battery(rng, n, lo, hi, tols["type1"])
        elif b == "closedness":
            checks += _closedness_battery(rng, min(n, 200), tols)
        elif b == "type2":
            checks += _type2_battery(rng, type2_settings, tols["type2_gate"])
    report = build_report("hj-suite", config_path, checks, {"seed": seed})
    report_path = out / outputs.get("report", "hj_report.json")
    write_report(report, report_path)
    return report, report_path


def main(argv=None):
    parser = argparse.ArgumentParser(prog="spacerotor", description=__doc__.splitlines()[0])
    parser.add_argument("--output-dir", help=f"output directory (env: {OUTPUT_DIR_ENV})")
    parser.add_argument("--stride", type=int, help="record every k-th step")
    parser.add_argument("--seed", type=int, default=0, help="seed for random batteries")
    parser.add_argument("--quiet", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    p_sim = sub.add_parser("simulate", help="integrate a scenario and audit conservation")
    p_sim.add_argument("config")
    p_hj = sub.add_parser("hj-suite", help="run Hamilton-Jacobi residual batteries")
    p_hj.add_argument("config")
    p_an = sub.add_parser("analyze", help="recompute a report from a saved trajectory CSV")
    p_an.add_argument("config")
    p_an.add_argument("trajectory")
    args = parser.parse_args(argv)

    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s")
    if args.seed < 0 or args.seed >= 2**64:
        parser.error("--seed must be an unsigned 64-bit integer")

    try:
        if args.command == "simulate":
            report, traj_path, report_path = run_scenario(args.config, args.output_dir, args.stride)
            log.info("trajectory: %s", traj_path)
        elif args.command == "hj-suite":
            report, report_path = run_hj_suite(args.config, args.output_dir, args.seed)
        else:
            report, report_path = run_analyze(args.config, args.trajectory, args.output_dir)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NonFiniteError as exc:
        print(f"integration failed: {exc}", file=sys.stderr)
        return 1

    for c in report["checks"]:
        log.info("%-32s %s", c["name"], "PASS" if c["passed"] else "FAIL")
    log.info("report: %s", report_path)
    return 0 if report["passed"] else 1


if __name__ == "__main__":
    sys.exit(main())

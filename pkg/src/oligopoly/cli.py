"""Command-line interface: ``oligopoly simulate|stability|threshold|scan|verify-paper``.

Exit codes: 0 success, 1 invalid input (the message names the field),
2 the map hit an invalid state during ``simulate``.  ``verify-paper`` exits
1 when an internal check fails.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import re
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from . import dynamics, region, stability
from ._accel import backend_name
from .dynamics import InvalidState, Kind, Mechanism, Outcome
from .market import MarketParams

CONFIG_KEYS = ("mechanisms", "k", "l", "c", "q0", "steps", "tol", "grid")
GRID_KEYS = ("ksqrtc_min", "ksqrtc_max", "ksqrtc_steps", "l_min", "l_max", "l_steps")
_ALL_KINDS = (Kind.GRADIENT, Kind.BEST_RESPONSE, Kind.ADAPTIVE, Kind.LMA, Kind.RATIONAL)
PRESET_KINDS = {name: _ALL_KINDS[:n] for name, n in zip(dynamics.PRESET_ORDER, (2, 3, 4, 5))}
DEFAULT_STEPS = 10_000
DEFAULT_TOL = 1e-10
# default start for simulate: the interior equilibrium scaled by this factor
DEFAULT_START_SCALE = 1.01


class ConfigError(ValueError):
    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


# -- number parsing --------------------------------------------------------------

_SQRT = re.compile(r"^sqrt\((.+)\)$")


def parse_number(text, field):
    """Parse ``"3/4"``, ``"0.9"``, ``"sqrt(2)"`` or a ``*``-product of those.

    String literals stay exact (Fraction) while every factor is rational;
    JSON numbers are taken as floats.
    """
    if isinstance(text, bool):
        raise ConfigError(field, f"expected a number, got {text!r}")
    if isinstance(text, int):
        return Fraction(text)
    if isinstance(text, float):
        if not math.isfinite(text):
            raise ConfigError(field, f"expected a finite number, got {text!r}")
        return text
    if not isinstance(text, str) or not text.strip():
        raise ConfigError(field, f"expected a number, got {text!r}")
    value = Fraction(1)
    for factor in text.replace(" ", "").split("*"):
        m = _SQRT.match(factor)
        try:
            if m:
                inner = Fraction(m.group(1))
                if inner < 0:
                    raise ConfigError(field, f"square root of a negative number in {text!r}")
                root = stability.rational_sqrt(inner)
                f = root if root is not None else math.sqrt(inner)
            else:
                f = Fraction(factor)
        except (ValueError, ZeroDivisionError):
            raise ConfigError(field, f"cannot parse {text!r} as a number") from None
        value = value * f
    if isinstance(value, float) and not math.isfinite(value):
        raise ConfigError(field, f"expected a finite number, got {text!r}")
    return value


def _positive(value, field):
    if not value > 0:
        raise ConfigError(field, f"must be > 0, got {_num(value)}")
    return value


def _num(x) -> str:
    return format(float(x), ".17g")


# -- configuration ---------------------------------------------------------------

@dataclass
class RunConfig:
    mechanisms: tuple
    preset: Optional[str]
    k: object
    l: object
    c: object
    q0: Optional[tuple]
    steps: int
    tol: float
    grid: dict

    def model(self):
        mechs = [Mechanism.parse(kind.value, float(self.k) if self.k is not None else None,
                                 float(self.l) if self.l is not None else None)
                 for kind in self.mechanisms]
        return dynamics.build_model(mechs, MarketParams(float(self.c)), self.preset)


def _load_file(path):
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as err:
        raise ConfigError("config", f"cannot read {path}: {err.strerror}") from None
    except json.JSONDecodeError as err:
        raise ConfigError("config", f"invalid JSON in {path}: {err.msg} (line {err.lineno})") from None
    if not isinstance(data, dict):
        raise ConfigError("config", "top level must be a JSON object")
    unknown = sorted(set(data) - set(CONFIG_KEYS))
    if unknown:
        raise ConfigError(unknown[0], f"unknown config key (allowed: {', '.join(CONFIG_KEYS)})")
    return data


def _mechanism_list(raw):
    """Returns (preset name or None, tuple of Kind)."""
    if isinstance(raw, str):
        name = raw.strip().lower()
        if name in PRESET_KINDS:
            return name, PRESET_KINDS[name]
        items = [s for s in name.split(",")]
    elif isinstance(raw, list):
        items = raw
    else:
        raise ConfigError("mechanisms", f"expected a preset name or a list, got {raw!r}")
    kinds = []
    for item in items:
        if not isinstance(item, str):
            raise ConfigError("mechanisms", f"mechanism names must be strings, got {item!r}")
        try:
            kinds.append(Mechanism.parse(item, 1.0, 0.5).kind)
        except ValueError as err:
            raise ConfigError("mechanisms", str(err)) from None
    for name, seq in PRESET_KINDS.items():
        if tuple(kinds) == seq:
            return name, seq
    return None, tuple(kinds)


def resolve_config(args, need_model=True) -> RunConfig:
    """Merge the config file with command-line flags (flags win) and
    validate everything before any work happens."""
    data = _load_file(args.config) if getattr(args, "config", None) else {}
    flags = {key: getattr(args, key, None) for key in CONFIG_KEYS if key != "grid"}
    if getattr(args, "preset", None) is not None:
        flags["mechanisms"] = args.preset
    merged = dict(data)
    merged.update({k: v for k, v in flags.items() if v is not None})

    preset = None
    kinds = None
    if need_model:
        if "mechanisms" not in merged:
            raise ConfigError("mechanisms", "a preset or mechanism list is required")
        preset, kinds = _mechanism_list(merged["mechanisms"])

    c = _positive(parse_number(merged.get("c", 1), "c"), "c")

    k = None
    ksqrtc = getattr(args, "ksqrtc", None)
    if ksqrtc is not None:
        t = _positive(parse_number(ksqrtc, "ksqrtc"), "ksqrtc")
        root = stability.rational_sqrt(c) if isinstance(c, Fraction) else None
        k = t / root if (root is not None and isinstance(t, Fraction)) else float(t) / math.sqrt(float(c))
    elif "k" in merged:
        k = _positive(parse_number(merged["k"], "k"), "k")
    uses_k = need_model and Kind.GRADIENT in kinds
    if uses_k and k is None:
        raise ConfigError("k", "the gradient firm needs a speed k (or --ksqrtc)")

    l = None
    if "l" in merged:
        l = parse_number(merged["l"], "l")
        if not 0 < l <= 1:
            raise ConfigError("l", f"must lie in (0, 1], got {_num(l)}")
    if need_model and Kind.ADAPTIVE in kinds and l is None:
        raise ConfigError("l", "the adaptive firm needs a weight l")

    steps = merged.get("steps", DEFAULT_STEPS)
    if isinstance(steps, str):
        try:
            steps = int(steps)
        except ValueError:
            raise ConfigError("steps", f"expected an integer, got {steps!r}") from None
    if isinstance(steps, bool) or not isinstance(steps, int) or steps < 1:
        raise ConfigError("steps", f"must be a positive integer, got {steps!r}")

    tol = float(parse_number(merged.get("tol", DEFAULT_TOL), "tol"))
    _positive(tol, "tol")

    q0 = merged.get("q0")
    if q0 is not None:
        if isinstance(q0, str):
            q0 = [s for s in q0.split(",") if s.strip()]
        if not isinstance(q0, list):
            raise ConfigError("q0", f"expected a list of outputs, got {q0!r}")
        vals = []
        for i, v in enumerate(q0):
            x = float(parse_number(v, f"q0[{i}]"))
            if not x > 0:
                raise ConfigError(f"q0[{i}]", f"outputs must be > 0, got {_num(x)}")
            vals.append(x)
        q0 = tuple(vals)

    grid = dict(data.get("grid") or {})
    if not isinstance(grid, dict):
        raise ConfigError("grid", "expected an object")
    for key in grid:
        if key not in GRID_KEYS:
            raise ConfigError(f"grid.{key}", f"unknown grid key (allowed: {', '.join(GRID_KEYS)})")
    for axis in ("ksqrtc", "l"):
        rng = getattr(args, f"{axis}_range", None)
        if rng is not None:
            grid[f"{axis}_min"], grid[f"{axis}_max"], grid[f"{axis}_steps"] = rng
    cfg = RunConfig(kinds, preset, k, l, c, q0, steps, tol, grid)
    if need_model:
        try:
            model = cfg.model()
        except ValueError as err:
            raise ConfigError("mechanisms", str(err)) from None
        if q0 is not None and len(q0) != model.dim:
            raise ConfigError("q0", f"expected {model.dim} outputs for this model, got {len(q0)}")
    return cfg


def build_grid(cfg: RunConfig) -> region.GridDef:
    kwargs = {}
    for key in GRID_KEYS:
        if key in cfg.grid:
            v = cfg.grid[key]
            if key.endswith("_steps"):
                try:
                    iv = int(v)
                except (TypeError, ValueError):
                    raise ConfigError(f"grid.{key}", f"expected an integer, got {v!r}") from None
                if isinstance(v, bool) or iv != float(v):
                    raise ConfigError(f"grid.{key}", f"expected an integer, got {v!r}")
                kwargs[key] = iv
            else:
                kwargs[key] = float(parse_number(v, f"grid.{key}"))
    for key in ("l_min", "l_max"):
        if key in kwargs and not 0 < kwargs[key] <= 1:
            raise ConfigError(f"grid.{key}", f"l must lie in (0, 1], got {_num(kwargs[key])}")
    for key in ("ksqrtc_min", "ksqrtc_max"):
        if key in kwargs and not kwargs[key] > 0:
            raise ConfigError(f"grid.{key}", f"must be > 0, got {_num(kwargs[key])}")
    try:
        return region.GridDef(c=float(cfg.c), **kwargs)
    except ValueError as err:
        msg = str(err)
        field = msg.split(" ", 1)[0] if msg.split(" ", 1)[0] in GRID_KEYS else "grid"
        raise ConfigError(f"grid.{field}" if field != "grid" else field, msg) from None


# -- JSON with 17 significant digits -----------------------------------------------

def dumps(obj) -> str:
    """JSON text where every float is written with 17 significant digits."""
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return "null"
        text = format(obj, ".17g")
        return text if any(ch in text for ch in ".en") else text + ".0"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {dumps(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(dumps(v) for v in obj) + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _floats(xs):
    return [float(x) for x in xs]


def _matrix(M):
    return [[float(v) for v in row] for row in M]


# -- simulate --------------------------------------------------------------------

def simulation_csv(model, states) -> str:
    n = model.n_firms
    buf = io.StringIO()
    buf.write("t," + ",".join(f"q{i + 1}" for i in range(n)) + ",Q,price\n")
    for t, x in enumerate(states):
        full = dynamics.full_state(model, x)
        Q = float(np.sum(full))
        p = 1.0 / Q if Q > 0 else float("nan")
        buf.write(f"{t}," + ",".join(_num(v) for v in full) + f",{_num(Q)},{_num(p)}\n")
    return buf.getvalue()


def simulation_summary(model, cfg, traj) -> dict:
    return {
        "model": model.name or ",".join(m.kind.value for m in model.mechanisms),
        "classification": traj.label,
        "outcome": traj.classification.value,
        "period": traj.period,
        "steps_used": traj.steps_used,
        "confirmed": traj.confirmed,
        "invalid_step": traj.invalid_step,
        "final_state": _floats(dynamics.full_state(model, traj.final)) if len(traj.states) else [],
        "backend": backend_name(),
    }


def cmd_simulate(args) -> int:
    cfg = resolve_config(args)
    model = cfg.model()
    E = dynamics.interior_equilibrium(model)
    q0 = np.array(cfg.q0) if cfg.q0 is not None else DEFAULT_START_SCALE * E
    traj = dynamics.simulate(model, q0, cfg.steps, cfg.tol)
    if args.out:
        region.write_atomic(args.out, simulation_csv(model, traj.states))
    summary = simulation_summary(model, cfg, traj)
    if args.json:
        print(dumps(summary))
    else:
        print(traj.label)
        print(f"steps_used: {traj.steps_used}  confirmed: {str(traj.confirmed).lower()}")
        print("final: " + " ".join(_num(v) for v in summary["final_state"]))
        if traj.classification is Outcome.INVALID_STATE:
            print(f"map undefined at step {traj.invalid_step}", file=sys.stderr)
    return 2 if traj.classification is Outcome.INVALID_STATE else 0


# -- stability -------------------------------------------------------------------

def _exact_scale(preset, k, l, c):
    if preset is None or not isinstance(k, Fraction) or not isinstance(c, Fraction):
        return None
    if preset != "gb" and not isinstance(l, Fraction):
        return None
    r = stability.radical_scale(preset, c)
    return None if r is None else k * r


def stability_report(cfg: RunConfig, variant: str = "printed") -> dict:
    """Everything ``stability`` prints, as JSON-ready values."""
    model = cfg.model()
    E = dynamics.interior_equilibrium(model)
    J_fd = stability.jacobian_fd(model, E)
    report = {
        "model": model.name or ",".join(m.kind.value for m in model.mechanisms),
        "k": None if cfg.k is None else float(cfg.k),
        "l": None if cfg.l is None else float(cfg.l),
        "c": float(cfg.c),
        "variant": variant if cfg.preset else None,
        "equilibrium": _floats(dynamics.full_state(model, E)),
        "step_residual": float(np.max(np.abs(dynamics.step(model, E) - E))),
    }
    exact = False
    if cfg.preset:
        l = None if cfg.preset == "gb" else cfg.l
        s = _exact_scale(cfg.preset, cfg.k, l, cfg.c)
        if s is not None:
            J = stability.scaled_jacobian(cfg.preset, s, l if l is not None else Fraction(0), variant)
            exact = True
        else:
            J = stability.jacobian_analytic(cfg.preset, float(cfg.k), None if l is None else float(l),
                                            float(cfg.c), variant)
        source = "analytic"
    else:
        J = J_fd
        source = "finite-difference"
    p = stability.char_poly(J) if not exact else stability.CharPoly(
        tuple(stability.char_poly_coefficients([list(r) for r in J])[:-1]))
    sc = stability.schur_cohn(p)
    report.update({
        "jacobian_source": source,
        "exact": exact,
        "jacobian": _matrix(J),
        "jacobian_fd": _matrix(J_fd),
        "char_poly": _floats(p.full),
        "schur_cohn": {k: float(v) for k, v in list(sc.boundary_checks.items()) + list(sc.determinants.items())},
        "eigenvalue_moduli": sorted(float(abs(z)) for z in p.roots()),
    })
    if cfg.preset in stability.CD_NORMALIZATION:
        if exact:
            block = stability.cd_block_scaled(cfg.preset, s, cfg.l, variant)
        else:
            block = stability.cd_block(cfg.preset, float(cfg.k), float(cfg.l), float(cfg.c), variant)
        report["conditions"] = {
            name: {"value": float(v), "relation": rel, "holds": bool(ok)}
            for name, v, rel, ok in zip(block.names, block.values, block.relations, block.satisfied)
        }
    elif p.degree in (3, 4):
        block = stability.corollary_conditions(p)
        report["conditions"] = {name: {"value": float(v), "relation": ">", "holds": bool(ok)}
                                for name, v, ok in zip(block.names, block.values, block.satisfied)}
    else:
        report["conditions"] = None
    if cfg.preset:
        t = stability.stability_threshold(cfg.preset, None if cfg.preset == "gb" else float(cfg.l), variant)
        report["threshold_ksqrtc"] = t
        report["ksqrtc"] = float(cfg.k) * math.sqrt(float(cfg.c))
    report["verdict"] = sc.verdict
    return report


def cmd_stability(args) -> int:
    cfg = resolve_config(args)
    rep = stability_report(cfg, args.variant)
    if args.json:
        print(dumps(rep))
        return 0
    out = [f"model: {rep['model']}  k={_fmt_opt(rep['k'])} l={_fmt_opt(rep['l'])} c={_num(rep['c'])}"]
    out.append("equilibrium: " + " ".join(_num(v) for v in rep["equilibrium"]))
    out.append(f"jacobian ({rep['jacobian_source']}{', exact' if rep['exact'] else ''}):")
    out += ["  " + " ".join(_num(v) for v in row) for row in rep["jacobian"]]
    out.append("char_poly a0..an: " + " ".join(_num(v) for v in rep["char_poly"]))
    out.append("schur-cohn:")
    out += [f"  {name} = {_num(v)}" for name, v in rep["schur_cohn"].items()]
    if rep["conditions"]:
        out.append("conditions:")
        out += [f"  {name} = {_num(d['value'])} {d['relation']} 0: {str(d['holds']).lower()}"
                for name, d in rep["conditions"].items()]
    if "threshold_ksqrtc" in rep:
        out.append(f"k*sqrt(c) = {_num(rep['ksqrtc'])}  threshold = {_num(rep['threshold_ksqrtc'])}")
    out.append(f"verdict: {rep['verdict']}")
    print("\n".join(out))
    return 0


def _fmt_opt(x):
    return "-" if x is None else _num(x)


# -- threshold -------------------------------------------------------------------

def cmd_threshold(args) -> int:
    presets = [args.preset] if args.preset else list(stability.PRESETS)
    l = float(parse_number(args.l, "l")) if args.l is not None else 1.0
    if not 0 < l <= 1:
        raise ConfigError("l", f"must lie in (0, 1], got {_num(l)}")
    rows = {}
    for p in presets:
        entry = {"threshold_ksqrtc": stability.stability_threshold(p, l, args.variant)}
        if args.locate:
            entry["schur_cohn_flip"] = stability.locate_flip(p, l, args.variant)
        rows[p] = entry
    if args.json:
        print(dumps({"l": l, "variant": args.variant, "presets": rows}))
    else:
        for p, entry in rows.items():
            line = f"{p:6s} {_num(entry['threshold_ksqrtc'])}"
            if "schur_cohn_flip" in entry:
                line += f"  flip {_num(entry['schur_cohn_flip'])}"
            print(line)
    return 0


# -- scan ------------------------------------------------------------------------

def cmd_scan(args) -> int:
    cfg = resolve_config(args, need_model=False)
    grid = build_grid(cfg)
    presets = list(stability.PRESETS)
    if args.presets:
        presets = [p.strip().lower() for p in args.presets.split(",") if p.strip()]
        for p in presets:
            if p not in stability.PRESETS:
                raise ConfigError("presets", f"unknown preset {p!r}")
    workers = args.workers if args.workers is not None else region.default_workers()
    if workers < 1:
        raise ConfigError("workers", f"must be >= 1, got {workers}")
    grids = [region.scan_plane(p, grid, args.variant, workers) for p in presets]
    csv_text = region.export_region(grids, "csv")
    svg_text = region.export_region(grids, "svg") if args.svg else None
    if args.out:
        region.write_atomic(args.out, csv_text)
    else:
        sys.stdout.write(csv_text)
    if svg_text is not None:
        region.write_atomic(args.svg, svg_text)
    info = {p: int(g.stable.sum()) for p, g in zip(presets, grids)}
    msg = (f"nodes per preset: {grid.ksqrtc_steps * grid.l_steps}; stable: "
           + ", ".join(f"{p}={n}" for p, n in info.items())
           + f"; nesting violations: {region.nesting_violations(grids)}")
    print(msg, file=sys.stderr)
    return 0


# -- verify-paper ----------------------------------------------------------------

FD_GRID_K = (0.5, 1.0, 2.0)
FD_GRID_L = (0.25, 0.75, 1.0)
FD_GRID_C = (0.25, 0.5, 1.5)


def verification_report() -> dict:
    tables = region.verify_tables()
    l_grid = [i / 100 for i in range(1, 101)]
    ordering = {v: stability.threshold_ordering(l_grid, v) for v in stability.VARIANTS}

    worst_residual = 0.0
    worst_fd = {"derived": 0.0, "printed": 0.0}
    printed_gap = {}
    for p in stability.PRESETS:
        gap = 0.0
        for k in FD_GRID_K:
            for l in FD_GRID_L:
                for c in FD_GRID_C:
                    model = dynamics.preset(p, k, l, c)
                    E = dynamics.interior_equilibrium(model)
                    worst_residual = max(worst_residual, float(np.max(np.abs(dynamics.step(model, E) - E))))
                    J = stability.jacobian_fd(model, E)
                    for v in stability.VARIANTS:
                        dev = float(np.max(np.abs(J - stability.jacobian_analytic(p, k, l, c, v))))
                        worst_fd[v] = max(worst_fd[v], dev)
                        if v == "printed":
                            gap = max(gap, dev)
        printed_gap[p] = gap

    checks = {
        "table_rows": tables.n_rows == 33,
        "table_internal_consistency": not tables.inconsistencies,
        "threshold_ordering": ordering["printed"].ordered and ordering["derived"].ordered,
        "fixed_point_residual": worst_residual < 1e-12,
        "jacobian_fd_vs_derived": worst_fd["derived"] < 1e-6,
    }
    findings = []
    for r in tables.mismatches:
        findings.append({
            "kind": "table_mismatch", "preset": r.preset,
            "point": [str(r.k), str(r.l), str(r.c)],
            "conditions": [f"CD{i}" for i in r.mismatched_conditions()],
            "printed": list(r.expected), "computed": list(r.computed),
        })
    for p, gap in printed_gap.items():
        if gap >= 1e-6:
            findings.append({"kind": "printed_jacobian_differs", "preset": p, "max_deviation": gap})
    for preset, idx in tables.reference_sign_discrepancies():
        findings.append({"kind": "reference_polynomial_sign", "preset": preset, "condition": f"CD{idx}"})
    return {
        "passed": all(checks.values()),
        "checks": checks,
        "table_rows": tables.n_rows,
        "table_mismatches": len(tables.mismatches),
        "ordering_points": {v: ordering[v].n_ordered for v in stability.VARIANTS},
        "ordering_total": len(l_grid),
        "max_step_residual": worst_residual,
        "max_fd_deviation": worst_fd,
        "findings": findings,
    }


def cmd_verify_paper(args) -> int:
    rep = verification_report()
    if args.json:
        print(dumps(rep))
    else:
        print(f"table rows checked: {rep['table_rows']}  printed-pattern mismatches: {rep['table_mismatches']}")
        for v, n in rep["ordering_points"].items():
            print(f"threshold ordering ({v}): {n}/{rep['ordering_total']} strictly ordered")
        print(f"max |step(E) - E|: {_num(rep['max_step_residual'])}")
        for v, d in rep["max_fd_deviation"].items():
            print(f"max |J_fd - J_{v}|: {_num(d)}")
        for name, ok in rep["checks"].items():
            print(f"[{'PASS' if ok else 'FAIL'}] {name}")
        internal_failures = sum(not ok for ok in rep["checks"].values())
        print(f"internal failures: {internal_failures}")
        if rep["findings"]:
            print("findings:")
            for f in rep["findings"]:
                print("  " + dumps(f))
    return 0 if rep["passed"] else 1


# -- argument parsing ------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _model_args(p):
    p.add_argument("--config", help="JSON file with keys " + ", ".join(CONFIG_KEYS))
    p.add_argument("--preset", choices=list(stability.PRESETS), help="shorthand for --mechanisms")
    p.add_argument("--mechanisms", help="preset name or comma list, e.g. g,b,a")
    p.add_argument("--k", help="gradient speed; accepts 3/4, sqrt(2), 0.9*sqrt(2)")
    p.add_argument("--ksqrtc", help="give k*sqrt(c) instead of k")
    p.add_argument("--l", help="adaptive weight in (0, 1]")
    p.add_argument("--c", help="marginal cost coefficient (default 1)")


def _triple(text):
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected MIN,MAX,STEPS")
    return parts[0], parts[1], parts[2]


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="oligopoly", description="Heterogeneous Cournot maps and their stability.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="iterate a model and classify the orbit")
    _model_args(p)
    p.add_argument("--q0", help="comma list of initial outputs (rational firm excluded)")
    p.add_argument("--steps", help=f"step budget (default {DEFAULT_STEPS})")
    p.add_argument("--tol", help=f"detection tolerance (default {DEFAULT_TOL:g})")
    p.add_argument("--out", help="trajectory CSV path")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("stability", help="local stability of the interior equilibrium")
    _model_args(p)
    p.add_argument("--variant", choices=stability.VARIANTS, default="printed")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_stability)

    p = sub.add_parser("threshold", help="closed-form stability thresholds on k*sqrt(c)")
    p.add_argument("--preset", choices=list(stability.PRESETS))
    p.add_argument("--l", help="adaptive weight (default 1)")
    p.add_argument("--variant", choices=stability.VARIANTS, default="printed")
    p.add_argument("--locate", action="store_true", help="also bisect for the Schur-Cohn flip")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("scan", help="classify the (k*sqrt(c), l) plane")
    p.add_argument("--config")
    p.add_argument("--presets", help="comma list (default: all)")
    p.add_argument("--c", help="fixed cost coefficient (default 1)")
    p.add_argument("--ksqrtc-range", type=_triple, metavar="MIN,MAX,STEPS")
    p.add_argument("--l-range", type=_triple, metavar="MIN,MAX,STEPS")
    p.add_argument("--variant", choices=stability.VARIANTS, default="printed")
    p.add_argument("--workers", type=int, help="thread count (default $OLIGOPOLY_WORKERS or 1)")
    p.add_argument("--out", help="CSV path (default stdout)")
    p.add_argument("--svg", help="also write a layered SVG here")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("verify-paper", help="reproduce the published tables and internal checks")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_verify_paper)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"oligopoly {args.command}: error: {err}", file=sys.stderr)
        return 1
    except InvalidState as err:
        print(f"oligopoly {args.command}: invalid state: {err}", file=sys.stderr)
        return 2
    except ValueError as err:
        print(f"oligopoly {args.command}: error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

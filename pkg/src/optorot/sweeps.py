"""Point evaluation pipeline, parameter sweeps, threshold search and output files."""

from __future__ import annotations

import configparser
import csv
import io
import json
import math
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Callable

import numpy as np

from .dynamics import (
    ConvergenceError,
    EffectiveResponse,
    EigenvalueError,
    StabilityVerdict,
    assess_stability,
    build_linear_model,
    effective_response,
)
from .entanglement import EntanglementReport, UnphysicalCovarianceError, log_negativity
from .lyapunov import (
    CovarianceMatrix,
    LyapunovError,
    lyapunov_residual,
    solve_lyapunov_direct,
    solve_lyapunov_elimination,
)
from .params import (
    ParameterError,
    ParameterSet,
    derive_quantities,
    validate_parameters,
)
from .steadystate import SteadyState, steady_state

AXES = ("temperature", "detuning", "angular_momentum", "mass")

CSV_COLUMNS = (
    "axis_value",
    "a_s",
    "G",
    "stable",
    "omega_eff",
    "nbar",
    "T_eff",
    "eta_minus",
    "E_N",
    "nu_min",
)

TOLERANCES = {
    "effective_frequency_rtol": 1e-10,
    "effective_frequency_max_iter": 1000,
    "lyapunov_residual_max": 1e-10,
    "solver_agreement_rtol": 1e-8,
    "threshold_rtol": 1e-6,
    "threshold_max_iter": 40,
}

CONVENTIONS = {
    "cavity_decay": "gamma = pi*c/(L*finesse)",
    "photon_flux": "P_in/(hbar*omega_c)",
    "omega_c": "2*pi*c/lambda unless omega_c is given",
    "detuning_axis": "Delta/omega_phi",
    "vacuum_variance": 0.5,
    "thermal_occupancy_frequency": "omega_eff",
}


# -- single-point pipeline ---------------------------------------------------


@dataclass(frozen=True)
class PointEvaluation:
    params: ParameterSet
    steady: SteadyState
    verdict: StabilityVerdict | None = None
    response: EffectiveResponse | None = None
    covariance: CovarianceMatrix | None = None
    report: EntanglementReport | None = None
    residual: float | None = None
    solver_deviation: float | None = None
    error: str | None = None

    @property
    def stable(self) -> bool:
        return self.verdict is not None and self.verdict.stable


def evaluate_point(p: ParameterSet, verify_solvers: bool = False) -> PointEvaluation:
    """Run derive -> steady state -> stability -> response -> covariance -> entanglement.

    Numerical failures are captured in ``error`` rather than raised; invalid
    parameters still raise :class:`ParameterError`.
    """
    validate_parameters(p)
    d = derive_quantities(p)
    ss = steady_state(p, d)
    try:
        verdict = assess_stability(build_linear_model(ss, p, d, 0.0))
    except EigenvalueError as exc:
        return PointEvaluation(p, ss, error=str(exc))
    if not verdict.stable:
        return PointEvaluation(p, ss, verdict, error="unstable")
    try:
        resp = effective_response(ss, p, d)
    except ConvergenceError as exc:
        return PointEvaluation(p, ss, verdict, error=str(exc))
    model = build_linear_model(ss, p, d, resp.nbar)
    try:
        cov = solve_lyapunov_direct(model)
        report = log_negativity(cov)
    except (LyapunovError, UnphysicalCovarianceError) as exc:
        return PointEvaluation(p, ss, verdict, resp, error=str(exc))
    residual = lyapunov_residual(model, cov)
    deviation = None
    if verify_solvers and model.G != 0 and model.Delta != 0:
        try:
            alt = solve_lyapunov_elimination(model)
            deviation = float(np.max(np.abs(alt.C - cov.C)) / np.max(np.abs(cov.C)))
        except LyapunovError as exc:
            return PointEvaluation(p, ss, verdict, resp, cov, report, residual, error=str(exc))
    return PointEvaluation(p, ss, verdict, resp, cov, report, residual, deviation)


# -- sweeps ------------------------------------------------------------------


@dataclass(frozen=True)
class SweepSpec:
    axis: str
    values: tuple
    base: ParameterSet = field(default_factory=ParameterSet)
    overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.axis not in AXES:
            raise ValueError(f"axis must be one of {AXES}, got {self.axis!r}")
        if len(self.values) == 0:
            raise ValueError("sweep range is empty")
        vals = tuple(float(v) for v in self.values)
        if self.axis == "angular_momentum":
            if any(v != round(v) for v in vals):
                raise ValueError("angular_momentum values must be integers")
            vals = tuple(int(round(v)) for v in vals)
        object.__setattr__(self, "values", vals)
        for v in vals:
            validate_parameters(self.point(v))

    @classmethod
    def from_range(cls, axis, vmin, vmax, points, base=None, overrides=None, spacing="linear"):
        if points < 1:
            raise ValueError("points must be >= 1")
        if spacing == "log":
            if vmin <= 0 or vmax <= 0:
                raise ValueError("log spacing needs positive bounds")
            vals = np.geomspace(vmin, vmax, points)
        elif spacing == "linear":
            vals = np.linspace(vmin, vmax, points)
        else:
            raise ValueError(f"spacing must be 'linear' or 'log', got {spacing!r}")
        if axis == "angular_momentum":
            vals = np.unique(np.round(vals))
        return cls(axis, tuple(vals.tolist()), base or ParameterSet(), dict(overrides or {}))

    @property
    def resolved_base(self) -> ParameterSet:
        return self.base.replace(**self.overrides) if self.overrides else self.base

    def point(self, value) -> ParameterSet:
        b = self.resolved_base
        if self.axis == "temperature":
            return b.replace(T=float(value))
        if self.axis == "detuning":
            return b.replace(Delta=float(value) * b.omega_phi)
        if self.axis == "mass":
            return b.replace(M=float(value))
        return b.replace(l=int(value))


@dataclass(frozen=True)
class SweepRow:
    axis_value: float
    a_s: float
    G: float
    stable: bool
    omega_eff: float | None
    nbar: float | None
    T_eff: float | None
    eta_minus: float | None
    E_N: float | None
    nu_min: float | None
    error: str | None = None
    solver_deviation: float | None = None


def row_from_evaluation(axis_value, ev: PointEvaluation) -> SweepRow:
    r, rep = ev.response, ev.report
    return SweepRow(
        axis_value=axis_value,
        a_s=ev.steady.a_s,
        G=ev.steady.G,
        stable=ev.stable,
        omega_eff=r.omega_eff if r else None,
        nbar=r.nbar if r else None,
        T_eff=r.T_eff if r else None,
        eta_minus=rep.eta_minus if rep else None,
        E_N=rep.E_N if rep else None,
        nu_min=rep.nu_min if rep else None,
        error=ev.error,
        solver_deviation=ev.solver_deviation,
    )


@dataclass(frozen=True)
class SweepResult:
    spec: SweepSpec
    rows: tuple
    provenance: dict

    def column(self, name: str) -> list:
        return [getattr(r, name) for r in self.rows]


def _eval_row(args) -> SweepRow:
    spec, value, verify = args
    return row_from_evaluation(value, evaluate_point(spec.point(value), verify))


def run_sweep(spec: SweepSpec, verify_solvers: bool = False, workers: int = 1) -> SweepResult:
    """Evaluate every axis value; rows come back in axis order regardless of ``workers``."""
    jobs = [(spec, v, verify_solvers) for v in spec.values]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = tuple(pool.map(_eval_row, jobs))
    else:
        rows = tuple(_eval_row(j) for j in jobs)
    provenance = {
        "axis": spec.axis,
        "values": list(spec.values),
        "parameters": _params_record(spec.resolved_base),
        "overrides": _jsonable(spec.overrides),
        "tolerances": dict(TOLERANCES),
        "conventions": dict(CONVENTIONS),
        "verify_solvers": verify_solvers,
    }
    return SweepResult(spec, rows, provenance)


def find_threshold(
    result: SweepResult,
    target: str = "E_N",
    evaluate: Callable[[float], float | None] | None = None,
    rel_tol: float = 1e-6,
    max_iter: int = 40,
):
    """Axis value where ``target > 0`` first switches, refined by bisection.

    ``evaluate`` maps an axis value to the target quantity; by default the
    point pipeline is re-run. On the angular-momentum axis the answer is the
    first integer on the far side of the switch.
    """
    if evaluate is None:
        spec = result.spec

        def evaluate(x):
            return getattr(_eval_row((spec, x, False)), target)

    xs = [r.axis_value for r in result.rows]
    flags = [_positive(getattr(r, target)) for r in result.rows]
    for i in range(len(xs) - 1):
        if flags[i] != flags[i + 1]:
            lo, hi = xs[i], xs[i + 1]
            break
    else:
        return None
    flag_lo = flags[i]
    integer = result.spec.axis == "angular_momentum"
    for _ in range(max_iter):
        if integer:
            if hi - lo <= 1:
                return hi
            mid = (lo + hi) // 2
        else:
            if abs(hi - lo) <= rel_tol * max(abs(lo), abs(hi)):
                break
            mid = (lo + hi) / 2
        if _positive(evaluate(mid)) == flag_lo:
            lo = mid
        else:
            hi = mid
    return hi if integer else (lo + hi) / 2


def _positive(v) -> bool:
    return v is not None and v > 0


# -- output ------------------------------------------------------------------


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, int):
        return str(v)
    return repr(float(v))


def sweep_csv(result: SweepResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in result.rows:
        w.writerow([_fmt(getattr(r, c)) for c in CSV_COLUMNS])
    return buf.getvalue()


def render_outputs(result: SweepResult, destination) -> dict[str, Path]:
    """Write ``<prefix>.csv``, ``<prefix>.svg`` (E_N vs axis) and ``<prefix>.json``."""
    prefix = Path(destination)
    paths = {
        "csv": prefix.with_name(prefix.name + ".csv"),
        "plot": prefix.with_name(prefix.name + ".svg"),
        "provenance": prefix.with_name(prefix.name + ".json"),
    }
    try:
        prefix.parent.mkdir(parents=True, exist_ok=True)
        paths["csv"].write_text(sweep_csv(result))
        sidecar = dict(result.provenance)
        sidecar["failures"] = [
            {"axis_value": r.axis_value, "error": r.error}
            for r in result.rows
            if r.error is not None
        ]
        devs = [r.solver_deviation for r in result.rows if r.solver_deviation is not None]
        if devs:
            sidecar["max_solver_deviation"] = max(devs)
        paths["provenance"].write_text(json.dumps(_jsonable(sidecar), indent=2, sort_keys=True) + "\n")
        _plot(result, paths["plot"])
    except OSError as exc:
        raise OSError(f"cannot write sweep outputs under {prefix}: {exc}") from exc
    return paths


_AXIS_LABELS = {
    "temperature": "T (K)",
    "detuning": r"$\Delta/\omega_\phi$",
    "angular_momentum": "l",
    "mass": "M (kg)",
}


def _plot(result: SweepResult, path: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    xs = [r.axis_value for r in result.rows]
    ys = [r.E_N if r.E_N is not None else math.nan for r in result.rows]
    with matplotlib.rc_context({"svg.hashsalt": "optorot"}):
        fig, ax = plt.subplots(figsize=(5, 3.5))
        ax.plot(xs, ys, "-o", ms=2.5)
        pos = [x for x in xs if x > 0]
        if result.spec.axis in ("temperature", "mass") and len(pos) > 1 and max(pos) / min(pos) > 100:
            ax.set_xscale("log")
        ax.set_xlabel(_AXIS_LABELS[result.spec.axis])
        ax.set_ylabel(r"$E_N$")
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)


def _params_record(p: ParameterSet) -> dict:
    d = p.as_dict()
    d["lambda"] = d.pop("lambda_")
    return d


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


# -- configuration -----------------------------------------------------------


class ConfigError(ValueError):
    def __init__(self, message: str, key: str | None = None, line: int | None = None):
        where = []
        if key is not None:
            where.append(f"key '{key}'")
        if line is not None:
            where.append(f"line {line}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.key = key
        self.line = line


# Config key -> ParameterSet field.
_KEYS = {f.name: f.name for f in fields(ParameterSet)}
_KEYS["lambda"] = _KEYS.pop("lambda_")
_ALIASES = {
    "length": "L",
    "wavelength": "lambda_",
    "mass": "M",
    "radius": "R",
    "power": "P_in",
    "temperature": "T",
    "detuning": "Delta",
}
_SWEEP_KEYS = ("axis", "min", "max", "points", "spacing", "values")
_SECTION = re.compile(r"^\s*\[([^\]]+)\]\s*$")


def _line_of(text: str, key: str, section: str | None = None) -> int | None:
    current = "physical"
    pat = re.compile(rf"^\s*{re.escape(key)}\s*[=:]")
    for n, line in enumerate(text.splitlines(), 1):
        m = _SECTION.match(line)
        if m:
            current = m.group(1).strip()
            continue
        if (section is None or current == section) and pat.match(line):
            return n
    return None


def parse_config(text: str) -> tuple[ParameterSet, SweepSpec | None]:
    """Parse a key = value document into parameters and an optional sweep.

    Top-level keys (or a ``[physical]`` section) name ParameterSet fields;
    unspecified fields keep their reference defaults, and ``Delta`` defaults to
    ``omega_phi``. A ``[sweep]`` section sets axis, min, max, points and
    optionally ``spacing`` (linear|log) or an explicit comma-separated ``values``.
    """
    first = next(
        (ln for ln in text.splitlines() if ln.strip() and not ln.strip().startswith(("#", ";"))),
        "",
    )
    offset = 0 if _SECTION.match(first) else 1
    doc = text if offset == 0 else "[physical]\n" + text
    cp = configparser.ConfigParser(interpolation=None, strict=True, inline_comment_prefixes=("#",))
    cp.optionxform = str
    try:
        cp.read_string(doc)
    except configparser.DuplicateOptionError as exc:
        raise ConfigError("duplicate key", exc.option, (exc.lineno or 0) - offset) from exc
    except configparser.DuplicateSectionError as exc:
        raise ConfigError(f"duplicate section [{exc.section}]", line=(exc.lineno or 0) - offset) from exc
    except configparser.ParsingError as exc:
        lineno, line = exc.errors[0]
        raise ConfigError(f"malformed line {line.strip()!r}", line=lineno - offset) from exc
    except configparser.Error as exc:
        raise ConfigError(f"malformed document: {exc}") from exc

    for sec in cp.sections():
        if sec not in ("physical", "sweep"):
            raise ConfigError(f"unknown section [{sec}]", line=_line_of(text, f"[{sec}]"))

    values: dict = {}
    written: dict = {}
    if cp.has_section("physical"):
        for key, raw in cp.items("physical"):
            name = _KEYS.get(key) or _ALIASES.get(key)
            if name is None:
                raise ConfigError("unknown key", key, _line_of(text, key, "physical"))
            if name in values:
                raise ConfigError("duplicate key", key, _line_of(text, key, "physical"))
            values[name] = _parse_value(name, key, raw, _line_of(text, key, "physical"))
            written[name] = key
    if "Delta" not in values:
        values["Delta"] = values.get("omega_phi", ParameterSet.omega_phi)
    p = ParameterSet(**values)
    try:
        validate_parameters(p)
    except ParameterError as exc:
        key = written.get(exc.field, exc.field)
        raise ConfigError(str(exc).split(": ", 1)[1], key, _line_of(text, key, "physical")) from exc

    spec = None
    if cp.has_section("sweep"):
        spec = _parse_sweep(dict(cp.items("sweep")), p, text)
    return p, spec


def _parse_value(name: str, key: str, raw: str, line):
    raw = raw.strip()
    if name == "omega_c" and raw.lower() in ("", "none"):
        return None
    try:
        v = float(raw)
    except ValueError:
        raise ConfigError(f"not a number: {raw!r}", key, line) from None
    if name == "l":
        if not v.is_integer():
            raise ConfigError(f"must be an integer, got {raw!r}", key, line)
        return int(v)
    return v


def _parse_sweep(sec: dict, base: ParameterSet, text: str) -> SweepSpec:
    for key in sec:
        if key not in _SWEEP_KEYS:
            raise ConfigError("unknown key", key, _line_of(text, key, "sweep"))
    if "axis" not in sec:
        raise ConfigError("missing axis", "axis")
    axis = sec["axis"].strip()
    try:
        if "values" in sec:
            vals = tuple(float(v) for v in sec["values"].split(",") if v.strip())
            return SweepSpec(axis, vals, base)
        for k in ("min", "max", "points"):
            if k not in sec:
                raise ConfigError("missing key", k)
        return SweepSpec.from_range(
            axis,
            float(sec["min"]),
            float(sec["max"]),
            int(sec["points"]),
            base,
            spacing=sec.get("spacing", "linear").strip(),
        )
    except ConfigError:
        raise
    except (ValueError, ParameterError) as exc:
        raise ConfigError(str(exc), "sweep", _line_of(text, "axis", "sweep")) from exc


def serialize_config(p: ParameterSet, spec: SweepSpec | None = None) -> str:
    lines = []
    for key, name in _KEYS.items():
        v = getattr(p, name)
        if v is None:
            continue
        lines.append(f"{key} = {_fmt(v)}")
    if spec is not None:
        lines.append("")
        lines.append("[sweep]")
        lines.append(f"axis = {spec.axis}")
        lines.append("values = " + ", ".join(_fmt(v) for v in spec.values))
    return "\n".join(lines) + "\n"


def load_config(path) -> tuple[ParameterSet, SweepSpec | None]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


def row_dict(row: SweepRow) -> dict:
    return asdict(row)


__all__ = [
    "AXES",
    "CSV_COLUMNS",
    "ConfigError",
    "PointEvaluation",
    "SweepResult",
    "SweepRow",
    "SweepSpec",
    "evaluate_point",
    "find_threshold",
    "load_config",
    "parse_config",
    "render_outputs",
    "run_sweep",
    "serialize_config",
    "sweep_csv",
]


"""TOML run configurations.

A configuration has the sections ``[space1]``, ``[space2]``, ``[operator]``,
``[maps]`` (with sub-tables ``[maps.T]``, ``[maps.S]`` and optionally
``[maps.K]``), ``[schedule]``, ``[init]``, ``[stop]`` and ``[output]``.
Unknown sections or keys are errors.  Example::

    [space1]
    dim = 1
    p = 2.0

    [space2]
    dim = 2

    [operator]
    matrix = [[0.5], [0.3333333333333333]]

    [maps]
    variant = "banach"

    [maps.T]
    kind = "scaling"
    factor = 0.25

    [maps.S]
    kind = "box_projection"
    lower = [0.0, -inf]
    upper = [inf, 0.0]

    [schedule]
    gamma = "const:1"
    alpha = "rat:0,1,0,7"
    theta = "const:1/5"

    [init]
    x0 = [6.0]
    x1 = [6.0]
    base_lower = [0.0]
    base_upper = [inf]

    [stop]
    max_iter = 24

Schedule rules are ``"const:v"`` or ``"rat:a,b,c,d"`` for ``(a n + b)/(c n + d)``.
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field, fields

import numpy as np
import tomli

from .operators import (MonotoneLinearOp, compose, equilibrium_resolvent,
                        identity_map, projection_map, resolvent_linear,
                        scaling_map)
from .projections import BoxSet
from .solvers import (VARIANTS, ProblemSpec, Rule, ScheduleSpec, StoppingRule,
                      schedule_case)
from .space import LinearOperator, SpaceSpec

__all__ = ["ConfigError", "RunConfig", "parse_config", "load_config",
           "render_config", "build_problem", "study_config"]


class ConfigError(ValueError):
    """Invalid configuration; ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


_SPACE_KEYS = {"dim": None, "p": 2.0, "smoothness_const": 1.0, "convexity_const": None}
_MAP_KEYS = {
    "identity": (),
    "scaling": ("factor",),
    "box_projection": ("lower", "upper"),
    "resolvent": ("matrix", "shift", "mu"),
    "equilibrium": ("matrix", "shift", "r", "lower", "upper"),
}
_SECTIONS = {
    "space1": _SPACE_KEYS,
    "space2": _SPACE_KEYS,
    "operator": {"matrix": None, "norm_bound": None},
    "maps": {"variant": "banach", "T": None, "S": None, "K": None},
    "schedule": {"gamma": None, "alpha": None, "theta": "const:0.0", "case": None,
                 "tabulated": False, "alpha_bounds": None, "theta_bound": None,
                 "baseline_k": 1.0},
    "init": {"x0": None, "x1": None, "base_lower": None, "base_upper": None,
             "x_star": None},
    "stop": {"max_iter": 25, "step_tol": 0.0, "residual_tol": 0.0},
    "output": {"label": "x", "plot_data": False},
}
_REQUIRED = {"space1": ("dim",), "space2": ("dim",), "operator": ("matrix",),
             "maps": ("T", "S"), "init": ("x0", "x1")}


@dataclass
class RunConfig:
    """Normalized configuration; one dict per section."""

    space1: dict = field(default_factory=dict)
    space2: dict = field(default_factory=dict)
    operator: dict = field(default_factory=dict)
    maps: dict = field(default_factory=dict)
    schedule: dict = field(default_factory=dict)
    init: dict = field(default_factory=dict)
    stop: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)


def _locate(text, section, key=None):
    """Best-effort 1-based line of ``[section]`` or of ``key`` inside it."""
    if text is None:
        return None
    lines = text.splitlines()
    header = re.compile(r"^\s*\[\s*([A-Za-z0-9_.\-]+)\s*\]")
    current = None
    for i, line in enumerate(lines, 1):
        m = header.match(line)
        if m:
            current = m.group(1)
            if key is None and current == section:
                return i
            continue
        if key is not None and current == section and re.match(
                rf"^\s*{re.escape(key)}\s*=", line):
            return i
    return None


def _floats(value, where, text, section, key, length=None):
    try:
        arr = [float(v) for v in (value if isinstance(value, list) else [value])]
    except (TypeError, ValueError):
        raise ConfigError(f"{where} must be a number or list of numbers",
                          _locate(text, section, key)) from None
    if any(math.isnan(v) for v in arr):
        raise ConfigError(f"{where} contains NaN", _locate(text, section, key))
    if length is not None and len(arr) != length:
        raise ConfigError(f"{where} needs {length} entries, got {len(arr)}",
                          _locate(text, section, key))
    return arr


def _matrix(value, where, text, section, key):
    if not isinstance(value, list) or not value:
        raise ConfigError(f"{where} must be a non-empty list of rows",
                          _locate(text, section, key))
    rows = [v if isinstance(v, list) else [v] for v in value]
    rows = [_floats(r, where, text, section, key) for r in rows]
    if len({len(r) for r in rows}) != 1:
        raise ConfigError(f"{where} has ragged rows", _locate(text, section, key))
    return rows


def _normalize_map(raw, section, text):
    if not isinstance(raw, dict):
        raise ConfigError(f"[{section}] must be a table", _locate(text, section))
    kind = raw.get("kind", "resolvent" if section == "maps.K" else None)
    if kind not in _MAP_KEYS:
        raise ConfigError(f"[{section}] kind must be one of {sorted(_MAP_KEYS)}, got {kind!r}",
                          _locate(text, section, "kind") or _locate(text, section))
    allowed = set(_MAP_KEYS[kind]) | {"kind"}
    for key in raw:
        if key not in allowed:
            raise ConfigError(f"unknown key {key!r} in [{section}] of kind {kind!r}",
                              _locate(text, section, key))
    out = {"kind": kind}
    for key in _MAP_KEYS[kind]:
        if key not in raw:
            raise ConfigError(f"[{section}] of kind {kind!r} needs {key!r}",
                              _locate(text, section))
        where = f"{section}.{key}"
        if key == "matrix":
            out[key] = _matrix(raw[key], where, text, section, key)
        elif key in ("lower", "upper", "shift"):
            out[key] = _floats(raw[key], where, text, section, key)
        else:
            out[key] = _floats(raw[key], where, text, section, key, 1)[0]
    return out


def _normalize(data: dict, text: str | None = None) -> RunConfig:
    for sec in data:
        if sec not in _SECTIONS:
            raise ConfigError(f"unknown section [{sec}]", _locate(text, sec))
    cfg = RunConfig()
    for sec, defaults in _SECTIONS.items():
        raw = data.get(sec, {})
        if not isinstance(raw, dict):
            raise ConfigError(f"[{sec}] must be a table", _locate(text, sec))
        for key in raw:
            if key not in defaults:
                line = _locate(text, sec, key) or _locate(text, f"{sec}.{key}")
                raise ConfigError(f"unknown key {key!r} in [{sec}]", line)
        for key in _REQUIRED.get(sec, ()):
            if key not in raw:
                raise ConfigError(f"[{sec}] is missing required key {key!r}",
                                  _locate(text, sec))
        out = {}
        for key, default in defaults.items():
            value = raw.get(key, default)
            where = f"{sec}.{key}"
            if value is None:
                out[key] = None
            elif sec == "maps" and key in ("T", "S", "K"):
                out[key] = _normalize_map(value, f"maps.{key}", text)
            elif sec in ("space1", "space2") and key == "dim":
                if not isinstance(value, int) or isinstance(value, bool):
                    raise ConfigError(f"{where} must be an integer", _locate(text, sec, key))
                out[key] = value
            elif sec == "operator" and key == "matrix":
                out[key] = _matrix(value, where, text, sec, key)
            elif sec == "schedule" and key in ("gamma", "alpha", "theta"):
                try:
                    rule = (Rule.const(float(value)) if isinstance(value, (int, float))
                            and not isinstance(value, bool) else Rule.parse(value))
                except (ValueError, TypeError) as exc:
                    raise ConfigError(f"{where}: {exc}", _locate(text, sec, key)) from None
                out[key] = str(rule)
            elif sec == "schedule" and key == "case":
                if value not in (1, 2, 3, 4) or isinstance(value, bool):
                    raise ConfigError(f"{where} must be 1, 2, 3 or 4", _locate(text, sec, key))
                out[key] = value
            elif key in ("tabulated", "plot_data"):
                if not isinstance(value, bool):
                    raise ConfigError(f"{where} must be true or false", _locate(text, sec, key))
                out[key] = value
            elif sec == "stop" and key == "max_iter":
                if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                    raise ConfigError(f"{where} must be a positive integer, got {value!r}",
                                      _locate(text, sec, key))
                out[key] = value
            elif key in ("variant", "label"):
                if not isinstance(value, str):
                    raise ConfigError(f"{where} must be a string", _locate(text, sec, key))
                out[key] = value
            elif key in ("x0", "x1", "x_star", "base_lower", "base_upper", "alpha_bounds"):
                out[key] = _floats(value, where, text, sec, key)
            else:
                out[key] = _floats(value, where, text, sec, key, 1)[0]
        setattr(cfg, sec, out)
    sch = cfg.schedule
    if sch["case"] is None and (sch["gamma"] is None or sch["alpha"] is None):
        raise ConfigError("[schedule] needs either 'case' or both 'gamma' and 'alpha'",
                          _locate(text, "schedule"))
    if cfg.maps["variant"] not in VARIANTS:
        raise ConfigError(f"maps.variant must be one of {VARIANTS}",
                          _locate(text, "maps", "variant"))
    return cfg


def parse_config(text: str) -> RunConfig:
    """Parse TOML text into a :class:`RunConfig`; raises :class:`ConfigError`."""
    try:
        data = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise ConfigError(f"syntax error: {exc}", int(m.group(1)) if m else None) from None
    return _normalize(data, text)


def load_config(path) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    return parse_config(text)


def _toml_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return repr(v)
    if isinstance(v, str):
        # raw unicode; TOML also forbids a literal DEL
        return json.dumps(v, ensure_ascii=False).replace("\x7f", "\\u007f")
    if isinstance(v, list):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    raise TypeError(f"cannot render {type(v).__name__}")


def render_config(cfg: RunConfig) -> str:
    """Render to TOML such that ``parse_config(render_config(c)) == c``."""
    out = []
    for f in fields(cfg):
        sec = f.name
        body = getattr(cfg, sec)
        out.append(f"[{sec}]")
        subtables = []
        for key, value in body.items():
            if value is None:
                continue
            if isinstance(value, dict):
                subtables.append((key, value))
                continue
            out.append(f"{key} = {_toml_value(value)}")
        out.append("")
        for key, table in subtables:
            out.append(f"[{sec}.{key}]")
            out.extend(f"{k} = {_toml_value(v)}" for k, v in table.items())
            out.append("")
    return "\n".join(out)


def _space(d):
    return SpaceSpec(d["dim"], d["p"], d["smoothness_const"], d["convexity_const"])


def _build_map(spec, dim):
    kind = spec["kind"]
    if kind == "identity":
        return identity_map()
    if kind == "scaling":
        return scaling_map(spec["factor"])
    if kind == "box_projection":
        return projection_map(BoxSet(spec["lower"], spec["upper"]))
    if kind == "resolvent":
        return resolvent_linear(MonotoneLinearOp(spec["matrix"], spec["shift"]), spec["mu"])
    return equilibrium_resolvent(MonotoneLinearOp(spec["matrix"], spec["shift"]),
                                 BoxSet(spec["lower"], spec["upper"]), spec["r"])


def build_problem(cfg: RunConfig, max_iter: int | None = None,
                  step_tol: float | None = None) -> ProblemSpec:
    """Turn a configuration into a validated :class:`ProblemSpec`.

    ``max_iter`` and ``step_tol`` override the ``[stop]`` section.  Every
    failure, including out-of-range schedule values, is a :class:`ConfigError`.
    """
    try:
        e1, e2 = _space(cfg.space1), _space(cfg.space2)
        A = LinearOperator(cfg.operator["matrix"], e1, e2, cfg.operator["norm_bound"])
        T = _build_map(cfg.maps["T"], e1.dim)
        S = _build_map(cfg.maps["S"], e2.dim)
        if cfg.maps["K"] is not None:
            T = compose(T, _build_map(cfg.maps["K"], e1.dim))
        sch = cfg.schedule
        if sch["case"] is not None:
            base = schedule_case(sch["case"], sch["tabulated"])
        else:
            base = ScheduleSpec(Rule.parse(sch["gamma"]), Rule.parse(sch["alpha"]),
                                Rule.parse(sch["theta"]))
        schedule = ScheduleSpec(base.gamma, base.alpha, base.theta,
                                sch["alpha_bounds"], sch["theta_bound"])
        ini = cfg.init
        if ini["base_lower"] is None and ini["base_upper"] is None:
            base_set = None
        else:
            lo = ini["base_lower"] or [-np.inf] * e1.dim
            hi = ini["base_upper"] or [np.inf] * e1.dim
            base_set = BoxSet(lo, hi)
        st = cfg.stop
        stop = StoppingRule(max_iter if max_iter is not None else st["max_iter"],
                            step_tol if step_tol is not None else st["step_tol"],
                            st["residual_tol"])
        problem = ProblemSpec(
            space1=e1, space2=e2, A=A, T=T, S=S,
            x0=e1.point(ini["x0"]), x1=e1.point(ini["x1"]),
            schedule=schedule, base_set=base_set, stop=stop,
            variant=cfg.maps["variant"],
            x_star=None if ini["x_star"] is None else e1.point(ini["x_star"]),
            baseline_k=sch["baseline_k"],
        )
        problem.validate_schedule()
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return problem


def study_config(x0: float, x1: float, variant: str = "banach", case: int | None = None,
                 max_iter: int = 24, label: str = "x") -> RunConfig:
    """Configuration of the one-dimensional numerical-study problem.

    Without ``case`` the inertial variant uses ``gamma = 1, alpha = 1/7`` and
    the tabulated constant inertia ``theta = 1/5``; the baseline ignores theta.
    """
    sched = {"gamma": "const:1", "alpha": "rat:0,1,0,7", "theta": "rat:0,1,0,5"}
    if case is not None:
        sched = {"case": case, "tabulated": True}
    text_cfg = {
        "space1": {"dim": 1, "p": 2.0},
        "space2": {"dim": 2, "p": 2.0},
        "operator": {"matrix": [[0.5], [1.0 / 3.0]]},
        "maps": {"variant": variant,
                 "T": {"kind": "scaling", "factor": 0.25},
                 "S": {"kind": "box_projection", "lower": [0.0, -math.inf],
                       "upper": [math.inf, 0.0]}},
        "schedule": sched,
        "init": {"x0": [float(x0)], "x1": [float(x1)], "base_lower": [0.0],
                 "base_upper": [math.inf], "x_star": [0.0]},
        "stop": {"max_iter": max_iter},
        "output": {"label": label},
    }
    return _normalize(text_cfg)

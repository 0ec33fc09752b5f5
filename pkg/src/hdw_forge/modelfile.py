"""Line-oriented model files: [section] headers with key = value entries.

Sections: [bundle] (m, n), exactly one of [hamiltonian] / [lagrangian],
optional [gauge], [solve], [submanifold].  The full format is documented in
docs/model-format.md.  All expressions are parsed against the declared
bundle's coordinate names; every error carries the source line.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import sympy as sp

from .coords import BundleChart
from .errors import ModelFileError
from .exprparse import parse_expression
from .hdw import GaugeChoice

_SECTION_RE = re.compile(r"^\[([a-z0-9_]+)\]$")
_GAUGE_G_RE = re.compile(r"^G\[(\d+)\]\[(\d+)\]\[(\d+)\]$")
_GAUGE_PSI_RE = re.compile(r"^psi\[(\d+)\]\[(\d+)\]$")

_KNOWN_SECTIONS = {"bundle", "hamiltonian", "lagrangian", "gauge", "solve",
                   "submanifold"}


@dataclass
class ModelFile:
    chart: BundleChart
    hamiltonian: sp.Expr | None = None
    lagrangian: sp.Expr | None = None
    gauge: GaugeChoice = field(default_factory=GaugeChoice)
    solve: dict | None = None
    submanifold: dict | None = None
    path: str | None = None
    text: str = ""

    @property
    def physics(self) -> str:
        return "hamiltonian" if self.hamiltonian is not None else "lagrangian"


def _split_sections(text: str):
    """Yield (section, [(line_no, key, value), ...]) preserving order."""
    sections = []
    current = None
    for i, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        m = _SECTION_RE.match(line.strip())
        if m:
            name = m.group(1)
            if name not in _KNOWN_SECTIONS:
                raise ModelFileError(f"unknown section [{name}]", i)
            current = (name, [])
            sections.append(current)
            continue
        if current is None:
            raise ModelFileError("entry before any [section] header", i)
        if "=" not in line:
            raise ModelFileError("expected 'key = value'", i)
        key, value = line.split("=", 1)
        current[1].append((i, key.strip(), value.strip()))
    return sections


def _get_int(entries, key, line_hint):
    for ln, k, v in entries:
        if k == key:
            try:
                return int(v), ln
            except ValueError:
                raise ModelFileError(f"{key} must be an integer, got {v!r}", ln) from None
    raise ModelFileError(f"missing required key {key!r}", line_hint)


def _get_float(value, ln, key):
    try:
        return float(sp.Rational(value) if "/" in value else value)
    except (ValueError, TypeError):
        raise ModelFileError(f"{key} must be numeric, got {value!r}", ln) from None


def parse_model_text(text: str, path: str | None = None) -> ModelFile:
    sections = _split_sections(text)
    by_name = {}
    for name, entries in sections:
        if name in by_name:
            raise ModelFileError(f"duplicate section [{name}]", entries[0][0] if entries else 1)
        by_name[name] = entries

    if "bundle" not in by_name:
        raise ModelFileError("missing [bundle] section", 1)
    m, _ = _get_int(by_name["bundle"], "m", 1)
    n, _ = _get_int(by_name["bundle"], "n", 1)
    try:
        chart = BundleChart(m, n)
    except Exception as exc:
        raise ModelFileError(str(exc), 1) from exc

    has_h = "hamiltonian" in by_name
    has_l = "lagrangian" in by_name
    if has_h == has_l:
        raise ModelFileError(
            "need exactly one of [hamiltonian] or [lagrangian]", 1)

    model = ModelFile(chart, path=path, text=text)

    if has_h:
        entries = by_name["hamiltonian"]
        for ln, k, v in entries:
            if k != "h":
                raise ModelFileError(f"unexpected key {k!r} in [hamiltonian]", ln)
            model.hamiltonian = parse_expression(v, chart, "J1", line=ln)
        if model.hamiltonian is None:
            raise ModelFileError("[hamiltonian] needs an 'h = ...' entry", 1)
    else:
        entries = by_name["lagrangian"]
        for ln, k, v in entries:
            if k != "lag":
                raise ModelFileError(f"unexpected key {k!r} in [lagrangian]", ln)
            model.lagrangian = parse_expression(v, chart, "L", line=ln)
        if model.lagrangian is None:
            raise ModelFileError("[lagrangian] needs a 'lag = ...' entry", 1)

    if "gauge" in by_name:
        model.gauge = _parse_gauge(by_name["gauge"], chart)
    if "solve" in by_name:
        model.solve = _parse_solve(by_name["solve"], chart)
    if "submanifold" in by_name:
        model.submanifold = _parse_submanifold(by_name["submanifold"], chart)
    return model


def _parse_gauge(entries, chart) -> GaugeChoice:
    mode = "equal-split"
    off_trace = {}
    redistribution = {}
    for ln, k, v in entries:
        if k == "mode":
            if v not in ("equal-split", "user-table"):
                raise ModelFileError(f"unknown gauge mode {v!r}", ln)
            mode = v
            continue
        mg = _GAUGE_G_RE.match(k)
        if mg:
            a, rho, nu = (int(g) for g in mg.groups())
            off_trace[(a, rho, nu)] = parse_expression(v, chart, "J1", line=ln)
            continue
        mp = _GAUGE_PSI_RE.match(k)
        if mp:
            a, nu = (int(g) for g in mp.groups())
            redistribution[(a, nu)] = parse_expression(v, chart, "J1", line=ln)
            continue
        raise ModelFileError(
            f"unexpected gauge key {k!r} (use mode, G[A][rho][nu], psi[A][nu])", ln)
    if (off_trace or redistribution) and mode == "equal-split":
        mode = "user-table"
    gauge = GaugeChoice(mode, off_trace, redistribution)
    try:
        gauge.validate(chart)
    except Exception as exc:
        raise ModelFileError(str(exc), entries[0][0] if entries else 1) from exc
    return gauge


def _parse_solve(entries, chart) -> dict:
    out = {"kind": None, "extended": False, "init": {}}
    scalar_keys = {"t0", "t1", "dt", "xmin", "xmax"}
    for ln, k, v in entries:
        if k == "kind":
            if v not in ("ode", "field1p1"):
                raise ModelFileError(f"unknown solve kind {v!r}", ln)
            out["kind"] = v
        elif k == "extended":
            if v not in ("true", "false"):
                raise ModelFileError("extended must be true or false", ln)
            out["extended"] = v == "true"
        elif k in scalar_keys:
            out[k] = _get_float(v, ln, k)
        elif k in ("steps", "points"):
            try:
                out[k] = int(v)
            except ValueError:
                raise ModelFileError(f"{k} must be an integer", ln) from None
        else:
            # initial value (number) or initial profile (expression of base coords)
            out["init"][k] = (ln, v)
    if out["kind"] is None:
        raise ModelFileError("[solve] needs kind = ode | field1p1",
                             entries[0][0] if entries else 1)
    kind = out["kind"]
    required = {"ode": ("t0", "t1", "dt"),
                "field1p1": ("t0", "t1", "dt", "xmin", "xmax", "points")}[kind]
    for key in required:
        if key not in out:
            raise ModelFileError(f"[solve] kind={kind} needs key {key!r}",
                                 entries[0][0] if entries else 1)
    if out.get("t1") is not None and out["t1"] <= out["t0"]:
        raise ModelFileError("need t1 > t0", entries[0][0])

    init = {}
    for name, (ln, v) in out["init"].items():
        try:
            chart.resolve(name)
        except Exception:
            raise ModelFileError(f"unknown coordinate {name!r} in [solve]", ln) from None
        if kind == "ode":
            init[name] = _get_float(v, ln, name)
        else:
            init[name] = parse_expression(v, chart, "E", line=ln)
    out["init"] = init
    return out


def _parse_submanifold(entries, chart) -> dict:
    params = None
    embedding = {}
    h_P = None
    samples = []
    for ln, k, v in entries:
        if k == "params":
            params = tuple(sp.Symbol(p) for p in v.split())
        elif k == "h_P":
            if params is None:
                raise ModelFileError("declare params before h_P", ln)
            h_P = parse_expression(v, None, extra_names=[p.name for p in params],
                                   line=ln)
        elif k == "samples":
            for chunk in v.split(";"):
                chunk = chunk.strip()
                if chunk:
                    samples.append(tuple(_get_float(w, ln, "sample") for w in chunk.split()))
        else:
            if params is None:
                raise ModelFileError("declare params before embedding entries", ln)
            try:
                sym = chart.resolve(k)
            except Exception:
                raise ModelFileError(f"unknown coordinate {k!r} in [submanifold]", ln) from None
            embedding[sym] = parse_expression(
                v, None, extra_names=[p.name for p in params], line=ln)
    if params is None or h_P is None or not samples:
        raise ModelFileError("[submanifold] needs params, h_P, and samples",
                             entries[0][0] if entries else 1)
    return {"params": params, "embedding": embedding, "h_P": h_P,
            "samples": samples}


def parse_model(path) -> ModelFile:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ModelFileError(f"cannot read {path}: {exc}") from exc
    return parse_model_text(text, path=str(path))

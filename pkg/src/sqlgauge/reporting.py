"""Turn raw evaluation records into reports, CSV exports, and plots.

Everything here is a pure function of the record list (plus run
metadata), which is what makes stored runs reproducible: ``report.json``
can always be regenerated from ``records.jsonl``, and every plot derives
from the report alone.  SVG output is deterministic — no timestamps, no
randomness — so image diffs are meaningful in tests.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from xml.sax.saxutils import escape

from .metrics import METRIC_NAMES

REPORT_SCHEMA_VERSION = 1
RATE_METRICS = ("EA", "EM", "CC", "ETC")
PLOT_KINDS = ("model_comparison", "workload_versions", "scaling")

_PALETTE = ("#4c78a8", "#f58518", "#54a24b", "#e45756",
            "#72b7b2", "#b279a2", "#9d755d", "#bab0ac")


class MissingMetric(Exception):
    pass


# ---------------------------------------------------------------------------
# aggregation


def _mean(values: list[float]) -> float:
    return sum(values) / len(values)


def _cell(records: list[dict], metric: str) -> dict:
    values = []
    dp_ids = set()
    for record in records:
        outcome = record.get("outcomes", {}).get(metric)
        if outcome is None or outcome.get("value") is None:
            continue
        values.append(float(outcome["value"]))
        dp_ids.add(record["dp_id"])
    if not values:
        return {"score": None, "support": 0, "data_points": 0}
    return {"score": _mean(values), "support": len(values),
            "data_points": len(dp_ids)}


def _cells(records: list[dict], metrics: list[str]) -> dict:
    return {m: _cell(records, m) for m in metrics}


def _group(records: list[dict], key) -> dict:
    table: dict = {}
    for record in records:
        table.setdefault(key(record), []).append(record)
    return table


def _token_stats(records: list[dict]) -> dict:
    total = 0
    counted = 0
    approximate = False
    for record in records:
        outcome = record.get("outcomes", {}).get("TU")
        if outcome is None or outcome.get("value") is None:
            continue
        total += int(outcome["value"])
        counted += 1
        if outcome.get("detail", {}).get("approximate"):
            approximate = True
    return {"total": total, "records": counted, "approximate": approximate}


def _repair_stats(records: list[dict]) -> dict:
    with_suggestions = 0
    by_transform: dict[str, int] = {}
    for record in records:
        suggestions = record.get("repairs") or []
        if suggestions:
            with_suggestions += 1
        for sequence in suggestions:
            for transform in sequence:
                by_transform[transform] = by_transform.get(transform, 0) + 1
    return {"records_with_suggestions": with_suggestions,
            "by_transform": dict(sorted(by_transform.items()))}


def _model_entry(model_id: str, records: list[dict],
                 metrics: list[str]) -> dict:
    by_cat = _group(records, lambda r: r["category"])
    by_sub = _group(records, lambda r: r["subcategory"])
    by_factor = _group(records, lambda r: r["scale_factor"])
    by_iteration = _group(records, lambda r: r["iteration"])
    latencies = [float(r["generation"].get("latency_ms", 0.0))
                 for r in records]
    errors = sum(1 for r in records if r["generation"].get("error"))
    return {
        "model_id": model_id,
        "overall": _cells(records, metrics),
        "by_category": {m: {str(c): _cell(by_cat[c], m)
                            for c in sorted(by_cat)} for m in metrics},
        "by_subcategory": {m: {s: _cell(by_sub[s], m)
                               for s in sorted(by_sub)} for m in metrics},
        "by_factor": {str(f): _cells(by_factor[f], metrics)
                      for f in sorted(by_factor)},
        "by_iteration": {str(i): _cells(by_iteration[i], metrics)
                         for i in sorted(by_iteration)},
        "generation_error_rate": (errors / len(records)) if records else 0.0,
        "latency_ms": {
            "total": sum(latencies),
            "mean": _mean(latencies) if latencies else 0.0,
            "max": max(latencies) if latencies else 0.0,
        },
        "tokens": _token_stats(records),
        "repairs": _repair_stats(records),
    }


def aggregate_records(records: list[dict], run_info: dict) -> dict:
    """Build the full report from raw records.

    Pure: calling this on a run's persisted ``records.jsonl`` with the
    ``run`` block of its ``report.json`` reproduces the report exactly.
    """
    metrics = [m for m in run_info.get("metrics", list(METRIC_NAMES))]
    by_model = _group(records, lambda r: r["model_id"])
    return {
        "schema_version": REPORT_SCHEMA_VERSION,
        "run": dict(run_info),
        "totals": {
            "records": len(records),
            "data_points": len({r["dp_id"] for r in records}),
        },
        "models": [_model_entry(model_id, by_model[model_id], metrics)
                   for model_id in sorted(by_model)],
    }


def report_bytes(report: dict) -> bytes:
    """Canonical serialization — the single source of report.json bytes."""
    return (json.dumps(report, indent=2, sort_keys=True) + "\n").encode()


# ---------------------------------------------------------------------------
# CSV export


def export_csv(report: dict) -> str:
    """One row per (model, metric, level, group).

    Groups are metric-independent: every populated category and
    subcategory emits a row for every configured metric, so the row
    count is models × metrics × (1 + categories + subcategories).
    """
    metrics = report["run"].get("metrics", list(METRIC_NAMES))
    lines = ["model,metric,level,group,score,support"]
    for model in report["models"]:
        categories = sorted({c for m in metrics
                             for c in model["by_category"].get(m, {})},
                            key=int)
        subcategories = sorted({s for m in metrics
                                for s in model["by_subcategory"].get(m, {})})
        for metric in metrics:
            rows = [("overall", "", model["overall"][metric])]
            for cat in categories:
                cell = model["by_category"][metric].get(
                    cat, {"score": None, "support": 0})
                rows.append(("category", cat, cell))
            for sub in subcategories:
                cell = model["by_subcategory"][metric].get(
                    sub, {"score": None, "support": 0})
                rows.append(("subcategory", sub, cell))
            for level, group, cell in rows:
                score = "" if cell["score"] is None else repr(cell["score"])
                lines.append(f"{model['model_id']},{metric},{level},"
                             f"{group},{score},{cell['support']}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# plots


@dataclass(frozen=True)
class Series:
    label: str
    x: tuple
    y: tuple

    def to_json(self) -> dict:
        return {"label": self.label, "x": list(self.x), "y": list(self.y)}


@dataclass(frozen=True)
class PlotSpec:
    kind: str
    metric: str
    title: str
    x_label: str
    y_label: str
    series: tuple[Series, ...]
    groups: tuple[str, ...] = ()
    x_scale: str = "linear"

    def __post_init__(self):
        if self.kind not in PLOT_KINDS:
            raise ValueError(f"unknown plot kind: {self.kind!r}")
        for s in self.series:
            if len(s.x) != len(s.y):
                raise ValueError(f"series {s.label!r} length mismatch")

    def to_json(self) -> dict:
        return {"kind": self.kind, "metric": self.metric,
                "title": self.title, "x_label": self.x_label,
                "y_label": self.y_label, "x_scale": self.x_scale,
                "groups": list(self.groups),
                "series": [s.to_json() for s in self.series]}


def _require_metric(report: dict, metric: str) -> None:
    if metric not in report["run"].get("metrics", []):
        raise MissingMetric(
            f"metric {metric!r} was not computed in run "
            f"{report['run'].get('run_id', '?')!r}")


def _overall(model: dict, metric: str):
    return model["overall"].get(metric, {}).get("score")


def build_model_comparison(reports: list[dict], metric: str) -> PlotSpec:
    """Grouped bars: an overall group plus one group per subcategory."""
    if not reports:
        raise ValueError("at least one report required")
    for report in reports:
        _require_metric(report, metric)
    subcategories: set[str] = set()
    for report in reports:
        for model in report["models"]:
            subcategories.update(model["by_subcategory"].get(metric, {}))
    groups = ("overall",) + tuple(sorted(subcategories))

    labels_seen: set[str] = set()
    series = []
    for report in reports:
        for model in report["models"]:
            label = model["model_id"]
            if label in labels_seen:
                label = f"{label} ({report['run'].get('run_id', '?')})"
            labels_seen.add(label)
            ys = [_overall(model, metric)]
            table = model["by_subcategory"].get(metric, {})
            for sub in groups[1:]:
                cell = table.get(sub)
                ys.append(None if cell is None else cell["score"])
            series.append(Series(label=label, x=groups, y=tuple(ys)))
    return PlotSpec(kind="model_comparison", metric=metric,
                    title=f"{metric} by model and subcategory",
                    x_label="subcategory", y_label=metric,
                    series=tuple(series), groups=groups)


def build_workload_versions(reports_by_version: dict[int, dict],
                            metric: str) -> PlotSpec:
    """Overall score per workload version, one line per model."""
    if not reports_by_version:
        raise ValueError("at least one report required")
    versions = sorted(reports_by_version)
    for version in versions:
        _require_metric(reports_by_version[version], metric)
    model_ids = sorted({m["model_id"]
                        for r in reports_by_version.values()
                        for m in r["models"]})
    series = []
    for model_id in model_ids:
        ys = []
        for version in versions:
            score = None
            for model in reports_by_version[version]["models"]:
                if model["model_id"] == model_id:
                    score = _overall(model, metric)
            ys.append(score)
        series.append(Series(label=model_id, x=tuple(versions), y=tuple(ys)))
    return PlotSpec(kind="workload_versions", metric=metric,
                    title=f"{metric} across workload versions",
                    x_label="workload version", y_label=metric,
                    series=tuple(series))


def build_scaling(report: dict, metric: str) -> PlotSpec:
    """Overall score per scale factor, one line per model."""
    _require_metric(report, metric)
    factors = sorted({int(f) for model in report["models"]
                      for f in model["by_factor"]})
    series = []
    for model in report["models"]:
        ys = []
        for factor in factors:
            cells = model["by_factor"].get(str(factor))
            ys.append(None if cells is None
                      else cells.get(metric, {}).get("score"))
        series.append(Series(label=model["model_id"], x=tuple(factors),
                             y=tuple(ys)))
    spans_two_decades = (len(factors) >= 2 and factors[0] > 0
                         and factors[-1] / factors[0] >= 100)
    return PlotSpec(kind="scaling", metric=metric,
                    title=f"{metric} across database scale factors",
                    x_label="scale factor", y_label=metric,
                    series=tuple(series),
                    x_scale="log" if spans_two_decades else "linear")


# ---------------------------------------------------------------------------
# SVG rendering


def _fmt(value: float) -> str:
    return f"{value:.2f}"


def _y_domain(spec: PlotSpec) -> tuple[float, float]:
    if spec.metric in RATE_METRICS:
        return 0.0, 1.0
    top = 0.0
    for s in spec.series:
        for y in s.y:
            if y is not None:
                top = max(top, float(y))
    return 0.0, (top * 1.05) if top > 0 else 1.0


def _text(x: float, y: float, content: str, size: int = 11,
          anchor: str = "middle", rotate: float = 0.0,
          color: str = "#333333") -> str:
    transform = (f' transform="rotate({_fmt(rotate)} {_fmt(x)} {_fmt(y)})"'
                 if rotate else "")
    return (f'<text x="{_fmt(x)}" y="{_fmt(y)}" font-size="{size}" '
            f'font-family="sans-serif" fill="{color}" '
            f'text-anchor="{anchor}"{transform}>{escape(content)}</text>')


def render_svg(spec: PlotSpec) -> str:
    n_groups = max(1, len(spec.groups))
    n_series = max(1, len(spec.series))
    if spec.groups:
        width = max(640, 100 + n_groups * (n_series * 14 + 18))
    else:
        width = 640
    height = 400
    left, right, top, bottom = 56, 16, 40, 64
    x0, y0 = left, top
    x1, y1 = width - right, height - bottom
    y_min, y_max = _y_domain(spec)

    def sy(v: float) -> float:
        return y1 - (v - y_min) / (y_max - y_min) * (y1 - y0)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="#ffffff"/>',
        _text((x0 + x1) / 2, 20, spec.title, size=14),
    ]

    # y axis with five gridlines
    for i in range(5):
        v = y_min + (y_max - y_min) * i / 4
        y = sy(v)
        parts.append(f'<line x1="{_fmt(x0)}" y1="{_fmt(y)}" '
                     f'x2="{_fmt(x1)}" y2="{_fmt(y)}" stroke="#dddddd"/>')
        parts.append(_text(x0 - 6, y + 4, f"{v:g}", size=10, anchor="end"))
    parts.append(_text(14, (y0 + y1) / 2, spec.y_label, size=11,
                       rotate=-90.0))
    parts.append(_text((x0 + x1) / 2, height - 8, spec.x_label, size=11))

    if spec.groups:
        _render_bars(spec, parts, x0, x1, y1, sy, n_groups)
    else:
        _render_lines(spec, parts, x0, x1, y1, sy)

    # legend along the top
    lx = x0
    for idx, s in enumerate(spec.series):
        color = _PALETTE[idx % len(_PALETTE)]
        parts.append(f'<rect x="{_fmt(lx)}" y="26" width="10" height="10" '
                     f'fill="{color}"/>')
        parts.append(_text(lx + 14, 35, s.label, size=10, anchor="start"))
        lx += 20 + 6 * len(s.label)

    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _render_bars(spec: PlotSpec, parts: list[str], x0: float, x1: float,
                 y1: float, sy, n_groups: int) -> None:
    slot = (x1 - x0) / n_groups
    n_series = max(1, len(spec.series))
    bar = min(18.0, slot * 0.8 / n_series)
    rotate = len(spec.groups) > 10
    for g, group in enumerate(spec.groups):
        cx = x0 + slot * (g + 0.5)
        start = cx - bar * n_series / 2
        for idx, s in enumerate(spec.series):
            y = s.y[g] if g < len(s.y) else None
            if y is None:
                continue
            color = _PALETTE[idx % len(_PALETTE)]
            top_y = sy(float(y))
            parts.append(
                f'<rect x="{_fmt(start + idx * bar)}" y="{_fmt(top_y)}" '
                f'width="{_fmt(bar)}" height="{_fmt(y1 - top_y)}" '
                f'fill="{color}"/>')
        if rotate:
            parts.append(_text(cx, y1 + 14, group, size=9, anchor="end",
                               rotate=-42.0))
        else:
            parts.append(_text(cx, y1 + 16, group, size=10))


def _line_x_mapper(spec: PlotSpec, x0: float, x1: float):
    xs = [float(x) for s in spec.series for x in s.x]
    if not xs:
        xs = [0.0]
    if spec.x_scale == "log":
        lo, hi = math.log10(min(xs)), math.log10(max(xs))
        def to_pos(v: float) -> float:
            if hi == lo:
                return (x0 + x1) / 2
            return x0 + (math.log10(v) - lo) / (hi - lo) * (x1 - x0)
    else:
        lo, hi = min(xs), max(xs)
        def to_pos(v: float) -> float:
            if hi == lo:
                return (x0 + x1) / 2
            return x0 + (v - lo) / (hi - lo) * (x1 - x0)
    return to_pos


def _render_lines(spec: PlotSpec, parts: list[str], x0: float, x1: float,
                  y1: float, sy) -> None:
    to_pos = _line_x_mapper(spec, x0, x1)
    ticks = sorted({float(x) for s in spec.series for x in s.x})
    for tick in ticks:
        px = to_pos(tick)
        parts.append(f'<line x1="{_fmt(px)}" y1="{_fmt(y1)}" '
                     f'x2="{_fmt(px)}" y2="{_fmt(y1 + 5)}" '
                     f'stroke="#888888"/>')
        parts.append(_text(px, y1 + 18, f"{tick:g}", size=10))
    for idx, s in enumerate(spec.series):
        color = _PALETTE[idx % len(_PALETTE)]
        points = [(to_pos(float(x)), sy(float(y)))
                  for x, y in zip(s.x, s.y) if y is not None]
        if len(points) > 1:
            path = " ".join(f"{_fmt(px)},{_fmt(py)}" for px, py in points)
            parts.append(f'<polyline points="{path}" fill="none" '
                         f'stroke="{color}" stroke-width="2"/>')
        for px, py in points:
            parts.append(f'<circle cx="{_fmt(px)}" cy="{_fmt(py)}" r="3.5" '
                         f'fill="{color}"/>')


def write_plot(spec: PlotSpec, plots_dir: str | Path) -> tuple[Path, Path]:
    """Persist one plot as `<kind>_<metric>.svg` and `.json`."""
    directory = Path(plots_dir)
    directory.mkdir(parents=True, exist_ok=True)
    base = f"{spec.kind}_{spec.metric}"
    svg_path = directory / f"{base}.svg"
    json_path = directory / f"{base}.json"
    svg_path.write_text(render_svg(spec), encoding="utf-8")
    json_path.write_text(json.dumps(spec.to_json(), indent=2, sort_keys=True)
                         + "\n", encoding="utf-8")
    return svg_path, json_path

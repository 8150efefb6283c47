"""Readers and writers: dense matrix CSV, layered edge lists, study CSVs, SVG plots."""
from __future__ import annotations

import html
import json
import math
from typing import Dict, List, Sequence, TextIO

import numpy as np

from .graph_model import MODEL_TAGS, MeanMatrix
from .lazy_process import NetworkSequence

ROWS_HEADER = "study,cell_id,param_json,replicate,metric,value,error_tag"
SUMMARY_HEADER = "cell_id,metric,mean,se,n_ok,n_err"


class FormatError(ValueError):
    pass


def fmt(x) -> str:
    """12 significant digits; integers stay integers."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    return format(x, ".12g")


# --- dense matrices ---------------------------------------------------------

def write_dense_csv(f: TextIO, M: np.ndarray, tag: str):
    """First line ``n,tag``, then n rows of comma-separated values.

    Floats are written with 17 significant digits so reading back is exact.
    """
    M = np.asarray(M)
    n = M.shape[0]
    f.write(f"{n},{tag}\n")
    integer = np.issubdtype(M.dtype, np.integer)
    for row in M:
        f.write(",".join(str(int(v)) if integer else format(float(v), ".17g") for v in row))
        f.write("\n")


def read_dense_csv(f: TextIO):
    """Return ``(matrix, tag)``."""
    lines = [ln.strip() for ln in f if ln.strip()]
    if not lines:
        raise FormatError("empty matrix file")
    head = lines[0].split(",")
    if len(head) != 2:
        raise FormatError("line 1: expected 'n,model_tag'")
    try:
        n = int(head[0])
    except ValueError:
        raise FormatError(f"line 1: bad vertex count {head[0]!r}") from None
    if len(lines) != n + 1:
        raise FormatError(f"expected {n} matrix rows, found {len(lines) - 1}")
    M = np.empty((n, n))
    for i, ln in enumerate(lines[1:]):
        vals = ln.split(",")
        if len(vals) != n:
            raise FormatError(f"line {i + 2}: expected {n} values, found {len(vals)}")
        M[i] = [float(v) for v in vals]
    return M, head[1]


def write_mean_matrix(f: TextIO, P: MeanMatrix):
    write_dense_csv(f, P.entries, P.model_tag)


def read_mean_matrix(f: TextIO) -> MeanMatrix:
    M, tag = read_dense_csv(f)
    if tag not in MODEL_TAGS:
        raise FormatError(f"line 1: unknown model tag {tag!r}")
    return MeanMatrix(M, tag)


# --- layered edge lists -----------------------------------------------------

def write_edge_list(f: TextIO, seq: NetworkSequence):
    """``n T alpha`` header, then ``t i j`` with 1-based indices and i <= j."""
    f.write(f"{seq.n} {seq.T} {float(seq.alpha)!r}\n")
    for t, E in enumerate(seq.layers, start=1):
        for i, j in E:
            f.write(f"{t} {i + 1} {j + 1}\n")


def read_edge_list(f: TextIO) -> NetworkSequence:
    header = f.readline().split()
    if len(header) != 3:
        raise FormatError("line 1: expected 'n T alpha'")
    n, T, alpha = int(header[0]), int(header[1]), float(header[2])
    layers: List[List] = [[] for _ in range(T)]
    for lineno, ln in enumerate(f, start=2):
        parts = ln.split()
        if not parts:
            continue
        if len(parts) != 3:
            raise FormatError(f"line {lineno}: expected 't i j'")
        t, i, j = (int(p) for p in parts)
        if not (1 <= t <= T and 1 <= i <= j <= n):
            raise FormatError(f"line {lineno}: entry out of range")
        layers[t - 1].append((i - 1, j - 1))
    return NetworkSequence(n=n, layers=tuple(np.array(L, dtype=np.int64).reshape(-1, 2) for L in layers),
                           alpha=alpha)


# --- small result tables ----------------------------------------------------

def write_labels_csv(f: TextIO, labels):
    f.write("vertex,label\n")
    for v, lab in enumerate(labels, start=1):
        f.write(f"{v},{int(lab)}\n")


def write_profile_csv(f: TextIO, profile):
    f.write("t,S_xi\n")
    for t, s in zip(profile.t, profile.values):
        f.write(f"{int(t)},{fmt(s)}\n")


def write_rows_csv(f: TextIO, result):
    f.write(ROWS_HEADER + "\n")
    for r in result.rows:
        f.write(",".join([result.study, r.cell_id, _quote(r.param_json), str(r.replicate), r.metric,
                          fmt(r.value), r.error_tag]) + "\n")


def write_summary_csv(f: TextIO, result):
    f.write(SUMMARY_HEADER + "\n")
    for s in result.summary:
        f.write(",".join([s.cell_id, s.metric, fmt(s.mean), fmt(s.se), str(s.n_ok), str(s.n_err)]) + "\n")


def _quote(s: str) -> str:
    return '"' + s.replace('"', '""') + '"'


# --- SVG --------------------------------------------------------------------

PALETTE = ("#e6a100", "#d62728", "#2ca02c", "#1f77b4", "#9467bd", "#8c564b", "#17becf", "#7f7f7f")
_LABELS = {"a": "a", "b": "b", "k": "k", "gamma": "Γ", "delta_e": "Δe", "delta_p": "Δp",
           "model": "model"}


def legend_label(params: Dict) -> str:
    parts = []
    for key, value in params.items():
        if key == "alpha":
            continue
        if key == "model":
            parts.append(str(value).upper())
        else:
            parts.append(f"{_LABELS.get(key, key)}={fmt(value)}")
    return ", ".join(parts)


def _ticks(lo, hi, count=5):
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    start = math.floor(lo / step)
    stop = math.ceil(hi / step)
    return [round(k * step, 12) for k in range(start, stop + 1)]


def emit_svg_plot(summary: Sequence, metric: str, title: str = "", ylabel: str = "",
                  xlabel: str = "α", width: int = 640, height: int = 420) -> str:
    """Line chart of metric mean against alpha, +-1 SE bars, one line per cell series."""
    series: Dict[str, List] = {}
    labels: Dict[str, str] = {}
    for s in summary:
        if s.metric != metric:
            continue
        key = json.dumps({k: v for k, v in s.params.items() if k != "alpha"}, sort_keys=True)
        series.setdefault(key, []).append(s)
        labels[key] = legend_label(s.params)
    if not series:
        raise FormatError(f"no summary rows for metric {metric!r}")
    for pts in series.values():
        pts.sort(key=lambda s: s.params["alpha"])

    xs = [s.params["alpha"] for pts in series.values() for s in pts]
    ys = []
    for pts in series.values():
        for s in pts:
            if math.isfinite(s.mean):
                se = s.se if math.isfinite(s.se) else 0.0
                ys += [s.mean - se, s.mean + se]
    if not ys:
        ys = [0.0, 1.0]
    xt, yt = _ticks(min(xs), max(xs)), _ticks(min(ys), max(ys))
    x0, x1, y0, y1 = xt[0], xt[-1], yt[0], yt[-1]
    left, right, top, bottom = 70, 170, 40, 50
    pw, ph = width - left - right, height - top - bottom

    def X(v):
        return left + (v - x0) / ((x1 - x0) or 1.0) * pw

    def Y(v):
        return top + ph - (v - y0) / ((y1 - y0) or 1.0) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<text x="{left + pw / 2:.2f}" y="22" text-anchor="middle" font-size="14">{html.escape(title)}</text>',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for v in xt:
        out.append(f'<line x1="{X(v):.2f}" y1="{top + ph}" x2="{X(v):.2f}" y2="{top + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{X(v):.2f}" y="{top + ph + 18}" text-anchor="middle">{fmt(v)}</text>')
    for v in yt:
        out.append(f'<line x1="{left - 5}" y1="{Y(v):.2f}" x2="{left}" y2="{Y(v):.2f}" stroke="black"/>')
        out.append(f'<text x="{left - 8}" y="{Y(v) + 4:.2f}" text-anchor="end">{fmt(v)}</text>')
    out.append(f'<text x="{left + pw / 2:.2f}" y="{height - 10}" text-anchor="middle">{html.escape(xlabel)}</text>')
    out.append(f'<text x="16" y="{top + ph / 2:.2f}" text-anchor="middle" '
               f'transform="rotate(-90 16 {top + ph / 2:.2f})">{html.escape(ylabel or metric)}</text>')

    for idx, (key, pts) in enumerate(series.items()):
        color = PALETTE[idx % len(PALETTE)]
        ok = [s for s in pts if math.isfinite(s.mean)]
        coords = " ".join(f"{X(s.params['alpha']):.2f},{Y(s.mean):.2f}" for s in ok)
        out.append(f'<g class="series" stroke="{color}" fill="{color}">')
        out.append(f'<polyline points="{coords}" fill="none" stroke-width="2"/>')
        for s in ok:
            cx, cy = X(s.params["alpha"]), Y(s.mean)
            if math.isfinite(s.se) and s.se > 0:
                out.append(f'<line class="errbar" x1="{cx:.2f}" y1="{Y(s.mean - s.se):.2f}" '
                           f'x2="{cx:.2f}" y2="{Y(s.mean + s.se):.2f}" stroke-width="1"/>')
            out.append(f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="3"/>')
        out.append("</g>")
        ly = top + 10 + 18 * idx
        out.append(f'<line x1="{left + pw + 12}" y1="{ly}" x2="{left + pw + 32}" y2="{ly}" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{left + pw + 38}" y="{ly + 4}">{html.escape(labels[key])}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def study_figures(result) -> Dict[str, str]:
    """File name -> SVG for each panel a study produces."""
    figs: Dict[str, str] = {}
    if result.study == "concentration":
        for model, fig in (("sbm", "fig1"), ("graphon", "fig2")):
            panel = [s for s in result.summary if s.params.get("model") == model]
            if not panel:
                continue
            name = "SBM" if model == "sbm" else "graphon"
            figs[f"{fig}-adj.svg"] = emit_svg_plot(panel, "adj_dev", f"Adjacency concentration, {name}",
                                                   "||A - Ā|| / sqrt(T d_avg)")
            figs[f"{fig}-lap.svg"] = emit_svg_plot(panel, "lap_dev", f"Laplacian concentration, {name}",
                                                   "||L - L̄|| sqrt(T d_avg)")
    elif result.study == "community":
        figs["fig3-adj.svg"] = emit_svg_plot(result.summary, "me_adjacency",
                                             "Misclustering error, adjacency", "ME")
        figs["fig3-lap.svg"] = emit_svg_plot(result.summary, "me_laplacian",
                                             "Misclustering error, Laplacian", "ME")
    elif result.study == "changepoint":
        for dp in sorted({s.params["delta_p"] for s in result.summary}):
            panel = [s for s in result.summary if s.params["delta_p"] == dp]
            figs[f"fig4-dp{fmt(dp)}.svg"] = emit_svg_plot(panel, "abs_error",
                                                          f"Changepoint error, Δp={fmt(dp)}",
                                                          "mean |τ̂ - τ|")
    return figs


def write_text(path, text: str):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)


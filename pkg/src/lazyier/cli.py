"""Command-line entry point.

Subcommands: ``simulate``, ``concentration``, ``community``, ``changepoint``
and ``oracle``. Study configs are INI-style files, one section per study::

    [concentration]
    profile = desk          ; optional preset, keys below override it
    n = 200
    alpha_grid = 0, 0.3, 0.6, 0.9
    sbm_pairs = 7:1, 9:3

A run writes ``manifest.txt`` in the same format, so it can be fed back with
``--config`` to reproduce the CSVs byte for byte.
"""
from __future__ import annotations

import argparse
import configparser
import datetime as _dt
import math
import os
import re
import sys
from dataclasses import fields
from typing import Dict, List, Optional, Sequence, Tuple

from . import __version__, kernels
from .experiments import STUDIES, StudyConfig, StudyError, desk_config, full_config, run_study, substream
from .formats import study_figures, write_edge_list, write_rows_csv, write_summary_csv, write_text
from .graph_model import GraphonSpec, ModelError, SbmSpec, build_sbm_mean, sample_graphon_mean
from .lazy_process import LazyProcessParams, ProcessError, edge_moments, edge_sum_distribution, simulate

_INT = {"n", "T", "replicates", "master_seed", "K", "restarts", "tau", "Lambda"}
_FLOAT = {"k_scale", "xi"}
_BOOL = {"allow_self_loops", "normalize_rows"}
_FLOATS = {"alpha_grid", "graphon_k", "delta_p"}
_INTS = {"delta_e"}
_PAIRS = {"sbm_pairs", "ab_pairs"}
_REQUIRED = {
    "concentration": ("n", "T", "replicates", "alpha_grid"),
    "community": ("n", "T", "replicates", "alpha_grid", "ab_pairs"),
    "changepoint": ("n", "T", "replicates", "alpha_grid", "delta_e", "delta_p", "tau"),
}


class ConfigError(ValueError):
    pass


def _key_line(text: str, section: str, key: str) -> Optional[int]:
    current = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        m = re.match(r"\[(.+)\]$", stripped)
        if m:
            current = m.group(1).strip()
        elif current == section and re.match(rf"{re.escape(key)}\s*[=:]", stripped):
            return lineno
    return None


def _parse_value(key: str, raw: str):
    raw = raw.strip()
    if key in _INT:
        return int(raw)
    if key in _FLOAT:
        return float(raw)
    if key in _BOOL:
        low = raw.lower()
        if low not in ("true", "false", "1", "0", "yes", "no"):
            raise ValueError(f"expected a boolean, got {raw!r}")
        return low in ("true", "1", "yes")
    items = [s.strip() for s in raw.split(",") if s.strip()]
    if key in _FLOATS:
        return tuple(float(s) for s in items)
    if key in _INTS:
        return tuple(int(s) for s in items)
    if key in _PAIRS:
        pairs = []
        for s in items:
            a, sep, b = s.partition(":")
            if not sep:
                raise ValueError(f"expected a:b pairs, got {s!r}")
            pairs.append((float(a), float(b)))
        return tuple(pairs)
    raise KeyError(key)


def _format_value(key: str, value) -> str:
    if key in _PAIRS:
        return ", ".join(f"{a!r}:{b!r}" for a, b in value)
    if isinstance(value, tuple):
        return ", ".join(repr(v) for v in value)
    if isinstance(value, bool):
        return "true" if value else "false"
    return repr(value) if isinstance(value, float) else str(value)


def load_study_config(path: str, study: str) -> Tuple[StudyConfig, int]:
    """Parse ``[study]`` from a config file. Returns ``(config, workers)``."""
    with open(path, encoding="utf-8") as f:
        text = f.read()
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
    cp.optionxform = str
    try:
        cp.read_string(text, source=path)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if not cp.has_section(study):
        raise ConfigError(f"{path}: missing section [{study}]")
    sec = cp[study]

    def where(key):
        line = _key_line(text, study, key)
        return f"{path}:{line}" if line else path

    profile = sec.get("profile")
    if profile is None:
        values: Dict = {}
    elif profile in ("desk", "full"):
        base = desk_config(study) if profile == "desk" else full_config(study)
        values = base.to_dict()
    else:
        raise ConfigError(f"{where('profile')}: key 'profile': expected 'desk' or 'full', got {profile!r}")
    values["study"] = study

    workers = 1
    known = {f.name for f in fields(StudyConfig)} - {"study"}
    for key, raw in sec.items():
        if key == "profile":
            continue
        if key == "workers":
            try:
                workers = int(raw)
            except ValueError:
                raise ConfigError(f"{where(key)}: key 'workers': invalid integer {raw!r}") from None
            continue
        if key not in known:
            raise ConfigError(f"{where(key)}: unknown key {key!r} in [{study}]")
        try:
            values[key] = _parse_value(key, raw)
        except ValueError as exc:
            raise ConfigError(f"{where(key)}: key {key!r}: {exc}") from None

    if profile is None:
        for key in _REQUIRED[study]:
            if key not in values:
                raise ConfigError(f"{path}: missing required key {key!r} in [{study}]")
        if study == "concentration" and not (values.get("sbm_pairs") or values.get("graphon_k")):
            raise ConfigError(f"{path}: missing required key 'sbm_pairs' or 'graphon_k' in [concentration]")
    try:
        return StudyConfig.from_dict(values), workers
    except (StudyError, TypeError) as exc:
        raise ConfigError(f"{path}: [{study}]: {exc}") from None


def format_manifest(cfg: StudyConfig, info: Dict[str, str]) -> str:
    lines = ["[manifest]"]
    lines += [f"{k} = {v}" for k, v in info.items()]
    lines += ["", f"[{cfg.study}]"]
    for key, value in cfg.to_dict().items():
        if key == "study":
            continue
        lines.append(f"{key} = {_format_value(key, value)}")
    return "\n".join(lines) + "\n"


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def run_study_command(study: str, config: str, out: str, workers: Optional[int]) -> int:
    cfg, cfg_workers = load_study_config(config, study)
    workers = workers or cfg_workers
    os.makedirs(out, exist_ok=True)
    started = _now()
    result = run_study(cfg, workers=workers)
    finished = _now()
    rows_path = os.path.join(out, "rows.csv")
    summary_path = os.path.join(out, "summary.csv")
    with open(rows_path, "w", encoding="utf-8", newline="\n") as f:
        write_rows_csv(f, result)
    with open(summary_path, "w", encoding="utf-8", newline="\n") as f:
        write_summary_csv(f, result)
    figures = study_figures(result)
    for name, svg in figures.items():
        write_text(os.path.join(out, name), svg)
    tally = result.error_tally()
    info = {
        "tool_version": __version__,
        "study": study,
        "master_seed": str(cfg.master_seed),
        "started": started,
        "finished": finished,
        "kernel_backend": kernels.BACKEND,
        "workers": str(workers),
        "rows": rows_path,
        "summary": summary_path,
        "figures": ", ".join(os.path.join(out, n) for n in figures),
        "errors": ", ".join(f"{k}:{v}" for k, v in sorted(tally.items())) or "none",
    }
    write_text(os.path.join(out, "manifest.txt"), format_manifest(cfg, info))
    print(f"{study}: {len(result.rows)} rows, {sum(tally.values())} errors -> {out}")
    return 0


def _pair(s: str) -> Tuple[float, float]:
    a, _, b = s.replace(":", ",").partition(",")
    return float(a), float(b)


def run_simulate(args) -> int:
    if (args.sbm is None) == (args.graphon is None):
        raise ConfigError("simulate needs exactly one of --sbm or --graphon")
    if args.sbm is not None:
        a, b = _pair(args.sbm)
        P = build_sbm_mean(SbmSpec.two_block(args.n, a, b, allow_self_loops=not args.no_self_loops))
    else:
        P = sample_graphon_mean(GraphonSpec(args.n, args.graphon, not args.no_self_loops),
                                substream(args.seed, 1))
    seq = simulate(LazyProcessParams(P, args.alpha, args.t), args.seed)
    with open(args.output, "w", encoding="utf-8", newline="\n") as f:
        write_edge_list(f, seq)
    return 0


def oracle_report(ps: Sequence[float], alphas: Sequence[float], Ts: Sequence[int]) -> str:
    """Exact per-edge moments next to the renewal-window values and the variance bound."""
    lines = ["p alpha T mean mean_T+1 variance bound bound_applies distribution"]
    for p in ps:
        for alpha in alphas:
            for T in Ts:
                m = edge_moments(p, alpha, T)
                bound = T * p * (3 - alpha) / (1 - alpha)
                applies = alpha == 0 or math.sqrt(T) > math.log(T) / math.log(1 / alpha)
                dist = " ".join(format(x, ".6g") for x in edge_sum_distribution(p, alpha, T))
                lines.append(f"{p!r} {alpha!r} {T} {m.mean:.12g} {(T + 1) * p:.12g} {m.variance:.12g} "
                             f"{bound:.12g} {'yes' if applies else 'no'} [{dist}]")
    return "\n".join(lines) + "\n"


def _floats(s: str) -> List[float]:
    return [float(x) for x in s.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lazyier", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="write a lazy IER network sequence as an edge list")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--t", type=int, required=True, help="number of layers")
    s.add_argument("--alpha", type=float, required=True)
    s.add_argument("--sbm", help="two-block SBM 'a,b' (probabilities a/n, b/n)")
    s.add_argument("--graphon", type=float, help="logistic graphon scale k")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--no-self-loops", action="store_true")
    s.add_argument("-o", "--output", required=True)

    for study in STUDIES:
        p = sub.add_parser(study, help=f"run the {study} study")
        p.add_argument("--config", required=True)
        p.add_argument("--out", default=".")
        p.add_argument("--workers", type=int, default=None)

    o = sub.add_parser("oracle", help="exact edge-moment and edge-sum reports")
    o.add_argument("--p", type=_floats, default=[0.1, 0.5, 0.9])
    o.add_argument("--alpha", type=_floats, default=[0.0, 0.5, 0.9])
    o.add_argument("--T", type=lambda s: [int(x) for x in s.split(",")], default=[1, 2, 3, 5])
    o.add_argument("-o", "--output")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            return run_simulate(args)
        if args.command == "oracle":
            report = oracle_report(args.p, args.alpha, args.T)
            if args.output:
                write_text(args.output, report)
            else:
                sys.stdout.write(report)
            return 0
        return run_study_command(args.command, args.config, args.out, args.workers)
    except (ConfigError, StudyError, ModelError, ProcessError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

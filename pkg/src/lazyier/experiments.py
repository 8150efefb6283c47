"""Monte-Carlo studies: concentration, community recovery, changepoint estimation.

Every replicate is seeded from ``(master_seed, cell index, replicate index)``
alone, so the rows of a study do not depend on how many workers ran it.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import Dict, List, Tuple

import numpy as np

from .aggregate import ZeroDegreeError, aggregate_adjacency, aggregate_laplacian, population_aggregates
from .changepoint import build_perturbed_mean, estimate_changepoint
from .community import estimate_communities, misclustering_error
from .graph_model import GraphonSpec, SbmSpec, build_sbm_mean, degree_stats, sample_graphon_mean
from .lazy_process import LazyProcessParams, simulate, simulate_piecewise
from .spectral import NonConvergence, operator_norm

STUDIES = ("concentration", "community", "changepoint")
METRICS = {
    "concentration": ("adj_dev", "lap_dev"),
    "community": ("me_adjacency", "me_laplacian"),
    "changepoint": ("abs_error",),
}
_RECOVERABLE = (ZeroDegreeError, NonConvergence)

# substream tags inside one replicate
_PROCESS, _GRAPHON, _PERTURB, _KMEANS = range(4)


class StudyError(ValueError):
    pass


@dataclass(frozen=True)
class StudyConfig:
    study: str
    n: int
    T: int
    replicates: int
    alpha_grid: Tuple[float, ...]
    master_seed: int = 0
    allow_self_loops: bool = True
    # concentration
    sbm_pairs: Tuple[Tuple[float, float], ...] = ()
    graphon_k: Tuple[float, ...] = ()
    # community
    ab_pairs: Tuple[Tuple[float, float], ...] = ()
    K: int = 2
    restarts: int = 20
    normalize_rows: bool = False
    # changepoint
    k_scale: float = 72.0
    delta_e: Tuple[int, ...] = ()
    delta_p: Tuple[float, ...] = ()
    tau: int = 0
    xi: float = 0.5
    Lambda: int = 1

    def __post_init__(self):
        if self.study not in STUDIES:
            raise StudyError(f"study must be one of {STUDIES}, got {self.study!r}")
        if self.replicates < 1:
            raise StudyError("replicates must be >= 1")
        if not self.alpha_grid or any(not 0.0 <= a < 1.0 for a in self.alpha_grid):
            raise StudyError("alpha_grid values must lie in [0, 1)")
        if not 0 <= self.master_seed < 2**32:
            raise StudyError("master_seed must lie in [0, 2**32)")
        if self.study == "concentration" and not (self.sbm_pairs or self.graphon_k):
            raise StudyError("concentration study needs sbm_pairs or graphon_k")
        if self.study == "community" and not self.ab_pairs:
            raise StudyError("community study needs ab_pairs")
        if self.study == "changepoint":
            if not (self.delta_e and self.delta_p):
                raise StudyError("changepoint study needs delta_e and delta_p")
            if not 1 <= self.Lambda <= min(self.tau, self.T - self.tau):
                raise StudyError("need 1 <= tau <= T-1 and 1 <= Lambda <= min(tau, T-tau)")
        if len(self.cells()) >= 2**16 or self.replicates >= 2**16:
            raise StudyError("at most 65535 cells and replicates")

    def cells(self) -> List[Dict]:
        """Parameter dict of every grid cell, alpha varying fastest."""
        if self.study == "concentration":
            models = [{"model": "sbm", "a": a, "b": b} for a, b in self.sbm_pairs]
            models += [{"model": "graphon", "k": k} for k in self.graphon_k]
        elif self.study == "community":
            models = [{"a": a, "b": b, "gamma": (a - b) ** 2 / (2 * (a + b))} for a, b in self.ab_pairs]
        else:
            models = [{"delta_e": de, "delta_p": dp} for dp in self.delta_p for de in self.delta_e]
        return [dict(m, alpha=a) for m in models for a in self.alpha_grid]

    def to_dict(self) -> Dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: Dict) -> "StudyConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise StudyError(f"unknown config keys: {sorted(unknown)}")
        d = dict(d)
        for key in ("alpha_grid", "graphon_k", "delta_e", "delta_p"):
            if key in d:
                d[key] = tuple(d[key])
        for key in ("sbm_pairs", "ab_pairs"):
            if key in d:
                d[key] = tuple(tuple(p) for p in d[key])
        return cls(**d)


def desk_config(study: str, master_seed: int = 20261014) -> StudyConfig:
    """CI-scale settings used by the acceptance suite."""
    alphas = (0.0, 0.3, 0.6, 0.9)
    if study == "concentration":
        return StudyConfig(study, n=200, T=20, replicates=20, alpha_grid=alphas, master_seed=master_seed,
                           sbm_pairs=((7.0, 1.0),), graphon_k=(60.0 * 200 / 500,))
    if study == "community":
        return StudyConfig(study, n=200, T=20, replicates=50, alpha_grid=alphas, master_seed=master_seed,
                           ab_pairs=((7.0, 3.0), (8.0, 2.0)))
    if study == "changepoint":
        # k and delta_e scaled by n/500 from the n=500 settings
        return StudyConfig(study, n=200, T=30, replicates=50, alpha_grid=alphas, master_seed=master_seed,
                           k_scale=72.0 * 200 / 500, delta_e=(40, 44, 48), delta_p=(0.05, 0.07),
                           tau=15, xi=0.5, Lambda=3)
    raise StudyError(f"unknown study {study!r}")


def full_config(study: str, master_seed: int = 20261014) -> StudyConfig:
    """Full-size grids: n=500, T=30 and 100 replicates per cell."""
    alphas = tuple(round(0.1 * i, 1) for i in range(10))
    if study == "concentration":
        return StudyConfig(study, n=500, T=30, replicates=100, alpha_grid=alphas, master_seed=master_seed,
                           sbm_pairs=((7.0, 1.0), (8.0, 2.0), (9.0, 3.0)), graphon_k=(60.0, 72.0, 90.0))
    if study == "community":
        return StudyConfig(study, n=500, T=30, replicates=100, alpha_grid=alphas, master_seed=master_seed,
                           ab_pairs=((7.0, 3.0), (7.5, 2.5), (8.0, 2.0)))
    if study == "changepoint":
        return StudyConfig(study, n=500, T=30, replicates=100, alpha_grid=alphas, master_seed=master_seed,
                           k_scale=72.0, delta_e=(100, 110, 120), delta_p=(0.05, 0.07), tau=15, xi=0.5, Lambda=3)
    raise StudyError(f"unknown study {study!r}")


def replicate_seed(master_seed: int, cell: int, replicate: int) -> int:
    """Injective packing of (master_seed < 2**32, cell < 2**16, replicate < 2**16)."""
    if not (0 <= master_seed < 2**32 and 0 <= cell < 2**16 and 0 <= replicate < 2**16):
        raise StudyError("seed components out of range")
    return (master_seed << 32) | (cell << 16) | replicate


def substream(seed: int, tag: int) -> int:
    return int(np.random.SeedSequence([seed, tag]).generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class StudyRow:
    cell_id: str
    params: Dict
    replicate: int
    metric: str
    value: float
    error_tag: str = ""

    @property
    def param_json(self) -> str:
        return json.dumps(self.params, sort_keys=True, separators=(",", ":"))


@dataclass(frozen=True)
class SummaryRow:
    cell_id: str
    params: Dict
    metric: str
    mean: float
    se: float
    n_ok: int
    n_err: int


@dataclass
class StudyResult:
    study: str
    rows: List[StudyRow]
    summary: List[SummaryRow] = field(default_factory=list)

    def __post_init__(self):
        if not self.summary:
            self.summary = summarize(self.rows)

    def error_tally(self) -> Dict[str, int]:
        tally: Dict[str, int] = {}
        for r in self.rows:
            if r.error_tag:
                tally[r.error_tag] = tally.get(r.error_tag, 0) + 1
        return tally

    def series(self, metric: str) -> Dict[str, List[Tuple[float, SummaryRow]]]:
        """Summary rows of ``metric`` grouped by the non-alpha parameters, ordered by alpha."""
        out: Dict[str, List[Tuple[float, SummaryRow]]] = {}
        for s in self.summary:
            if s.metric != metric:
                continue
            key = json.dumps({k: v for k, v in s.params.items() if k != "alpha"}, sort_keys=True)
            out.setdefault(key, []).append((s.params["alpha"], s))
        for v in out.values():
            v.sort(key=lambda x: x[0])
        return out


def summarize(rows: List[StudyRow]) -> List[SummaryRow]:
    groups: Dict[Tuple[str, str], List[StudyRow]] = {}
    for r in rows:
        groups.setdefault((r.cell_id, r.metric), []).append(r)
    out = []
    for (cell_id, metric), rs in groups.items():
        ok = np.array([r.value for r in rs if not r.error_tag], dtype=np.float64)
        mean = float(ok.mean()) if ok.size else math.nan
        se = float(ok.std(ddof=1) / math.sqrt(ok.size)) if ok.size > 1 else math.nan
        out.append(SummaryRow(cell_id, rs[0].params, metric, mean, se, int(ok.size), len(rs) - int(ok.size)))
    return out


# --- replicate bodies -------------------------------------------------------

def _concentration_replicate(cfg: StudyConfig, params: Dict, seed: int):
    if params["model"] == "sbm":
        P = build_sbm_mean(SbmSpec.two_block(cfg.n, params["a"], params["b"], allow_self_loops=cfg.allow_self_loops))
    else:
        spec = GraphonSpec(cfg.n, params["k"], allow_self_loops=cfg.allow_self_loops)
        P = sample_graphon_mean(spec, substream(seed, _GRAPHON))
    seq = simulate(LazyProcessParams(P, params["alpha"], cfg.T), substream(seed, _PROCESS))
    A, degrees = aggregate_adjacency(seq)
    scale = math.sqrt(cfg.T * degree_stats(P).d_avg)
    out = [("adj_dev", math.nan, ""), ("lap_dev", math.nan, "")]
    try:
        out[0] = ("adj_dev", operator_norm(A - cfg.T * P.entries) / scale, "")
    except _RECOVERABLE as exc:
        out[0] = ("adj_dev", math.nan, type(exc).__name__)
    try:
        _, _, pop_L = population_aggregates(P, cfg.T)
        out[1] = ("lap_dev", operator_norm(aggregate_laplacian(A, degrees) - pop_L) * scale, "")
    except _RECOVERABLE as exc:
        out[1] = ("lap_dev", math.nan, type(exc).__name__)
    return out


def _community_replicate(cfg: StudyConfig, params: Dict, seed: int):
    spec = SbmSpec.two_block(cfg.n, params["a"], params["b"], allow_self_loops=cfg.allow_self_loops)
    P = build_sbm_mean(spec)
    Z = spec.membership()
    seq = simulate(LazyProcessParams(P, params["alpha"], cfg.T), substream(seed, _PROCESS))
    out = []
    for mode in ("adjacency", "laplacian"):
        try:
            res = estimate_communities(seq, cfg.K, mode=mode, restarts=cfg.restarts,
                                       seed=substream(seed, _KMEANS), normalize_rows=cfg.normalize_rows)
            out.append((f"me_{mode}", misclustering_error(res.Z_hat, Z), ""))
        except _RECOVERABLE as exc:
            out.append((f"me_{mode}", math.nan, type(exc).__name__))
    return out


def _changepoint_replicate(cfg: StudyConfig, params: Dict, seed: int):
    P = sample_graphon_mean(GraphonSpec(cfg.n, cfg.k_scale, cfg.allow_self_loops), substream(seed, _GRAPHON))
    Q = build_perturbed_mean(P, params["delta_e"], params["delta_p"], substream(seed, _PERTURB))
    seq = simulate_piecewise(LazyProcessParams(P, params["alpha"], cfg.T), Q, cfg.tau, substream(seed, _PROCESS))
    try:
        tau_hat = estimate_changepoint(seq, cfg.Lambda, cfg.xi).argmax
        return [("abs_error", float(abs(tau_hat - cfg.tau)), "")]
    except _RECOVERABLE as exc:
        return [("abs_error", math.nan, type(exc).__name__)]


_BODIES = {
    "concentration": _concentration_replicate,
    "community": _community_replicate,
    "changepoint": _changepoint_replicate,
}


def _run_task(task):
    cfg, cell, params, rep = task
    seed = replicate_seed(cfg.master_seed, cell, rep)
    return _BODIES[cfg.study](cfg, params, seed)


def run_study(cfg: StudyConfig, workers: int = 1) -> StudyResult:
    """Run every (cell, replicate) of ``cfg``; rows come back in grid order."""
    tasks = [(cfg, c, params, r) for c, params in enumerate(cfg.cells()) for r in range(cfg.replicates)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_task, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    else:
        results = [_run_task(t) for t in tasks]
    rows = []
    for (_, c, params, rep), metrics in zip(tasks, results):
        for metric, value, tag in metrics:
            rows.append(StudyRow(f"c{c:03d}", params, rep, metric, value, tag))
    return StudyResult(cfg.study, rows)


def run_concentration_study(cfg: StudyConfig, workers: int = 1) -> StudyResult:
    _expect(cfg, "concentration")
    return run_study(cfg, workers)


def run_community_study(cfg: StudyConfig, workers: int = 1) -> StudyResult:
    _expect(cfg, "community")
    return run_study(cfg, workers)


def run_changepoint_study(cfg: StudyConfig, workers: int = 1) -> StudyResult:
    _expect(cfg, "changepoint")
    return run_study(cfg, workers)


def _expect(cfg, study):
    if cfg.study != study:
        raise StudyError(f"expected a {study} config, got {cfg.study}")


@dataclass(frozen=True)
class FitReport:
    series: str
    alphas: Tuple[float, ...]
    means: Tuple[float, ...]
    slope: float
    intercept: float
    r2: float


def fit_log_scaling(alphas, means, series: str = "") -> FitReport:
    """Least squares of ``log(mean)`` on ``log(1 / (1 - alpha))``."""
    alphas = np.asarray(alphas, dtype=np.float64)
    means = np.asarray(means, dtype=np.float64)
    if np.unique(alphas).size < 3 or 0.0 not in alphas:
        raise StudyError("need at least 3 distinct alpha values including 0")
    if np.any(~np.isfinite(means)) or np.any(means <= 0):
        raise StudyError("means must be finite and positive")
    x = -np.log1p(-alphas)
    y = np.log(means)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - float((resid**2).sum()) / ss_tot if ss_tot > 0 else 1.0
    return FitReport(series, tuple(alphas), tuple(means), float(slope), float(intercept), r2)


def fit_alpha_scaling(result: StudyResult, metric: str = "adj_dev") -> List[FitReport]:
    """One log-log fit per parameter series of a concentration study."""
    if result.study != "concentration":
        raise StudyError("fit_alpha_scaling expects a concentration study")
    reports = []
    for key, pts in result.series(metric).items():
        reports.append(fit_log_scaling([a for a, _ in pts], [s.mean for _, s in pts], series=key))
    if not reports:
        raise StudyError(f"no summary rows for metric {metric!r}")
    return reports

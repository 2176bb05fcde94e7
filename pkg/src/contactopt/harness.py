"""Declarative experiment harness.

An :class:`ExperimentSpec` names an objective, an initialization rule, and a
list of optimizers with hyperparameter search ranges.  Running it means:
random search over each optimizer's ranges (best final gap wins), then
Monte-Carlo repetitions at the tuned parameters, reduced to per-iteration
quantile bands.  Everything is seeded through one master seed; trial seeds
are derived by hashing (master, label, index) so results are reproducible
bit-for-bit regardless of execution order or thread count.

Diverged runs are first-class data: they score +inf during search and their
traces are padded with +inf before quantiles, so instability shows up in the
bands instead of being silently dropped.

File formats are deliberately plain: two CSV schemas (per-run traces and
quantile bands, floats in shortest round-trip decimal, infinities spelled
"inf") and a self-contained SVG renderer for log-scale convergence plots.
"""

import hashlib
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .objectives import Objective, get_objective, OBJECTIVE_NAMES
from .optimizers import (
    OPTIMIZER_KINDS,
    OptimizerConfig,
    RunRecord,
    run,
)

__all__ = [
    "ConfigError",
    "RateUndefinedError",
    "derive_seed",
    "InitSpec",
    "SearchRanges",
    "OptimizerEntry",
    "ObjectiveSpec",
    "ExperimentSpec",
    "SearchResult",
    "QuantileBand",
    "BenchOutcome",
    "random_search",
    "monte_carlo",
    "run_bench",
    "estimate_rate",
    "export_csv",
    "export_trace_csv",
    "export_band_csv",
    "read_trace_csv",
    "read_band_csv",
    "export_svg",
    "parse_experiment",
    "spec_to_doc",
    "parallel_map",
    "RunRecord",
]

_U64 = 2**64


class ConfigError(ValueError):
    """Config rejection carrying the JSON path of the offending key."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"at {path}: {message}")


class RateUndefinedError(ValueError):
    """Raised when a trace window contains non-positive or non-finite values."""


def derive_seed(master: int, label: str, index: int) -> int:
    """Stable 64-bit seed from (master, label, index).

    Uses sha256 rather than Python's hash() so the stream is identical
    across processes and interpreter versions.
    """
    digest = hashlib.sha256(f"{master % _U64}:{label}:{index}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


def parallel_map(fn, items: Sequence, jobs: int = 1) -> list:
    """Map preserving input order; with jobs > 1 work runs on a thread pool.

    Results are reduced in index order, so output is independent of
    scheduling -- the determinism contract of the whole harness.
    """
    items = list(items)
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items))


# ---------------------------------------------------------------------------
# Experiment description
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class InitSpec:
    """Initialization rule for X0.

    kind "fixed": values is the full start vector (length must match dim).
    kind "pattern": values is a cycle tiled to the dimension, e.g.
    (-1.2, 1.0) alternates the two.  kind "box": each coordinate uniform on
    [lo, hi], drawn from the seeded per-run generator.
    """

    kind: str
    values: Tuple[float, ...] = ()
    lo: float = 0.0
    hi: float = 0.0

    def __post_init__(self):
        if self.kind not in ("fixed", "pattern", "box"):
            raise ValueError(
                f"init kind must be 'fixed', 'pattern' or 'box', got {self.kind!r}"
            )
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if self.kind in ("fixed", "pattern") and len(self.values) == 0:
            raise ValueError(f"init kind {self.kind!r} needs at least one value")
        if self.kind == "box" and not (self.lo < self.hi):
            raise ValueError(f"box init needs lo < hi, got [{self.lo}, {self.hi}]")

    @property
    def random(self) -> bool:
        return self.kind == "box"

    def materialize(self, dim: int, rng: Optional[np.random.Generator] = None) -> np.ndarray:
        if self.kind == "fixed":
            if len(self.values) != dim:
                raise ValueError(
                    f"fixed init has {len(self.values)} values but dim is {dim}"
                )
            return np.array(self.values)
        if self.kind == "pattern":
            reps = -(-dim // len(self.values))  # ceil
            return np.tile(self.values, reps)[:dim]
        if rng is None:
            raise ValueError("box init needs a generator")
        return rng.uniform(self.lo, self.hi, size=dim)


_PARAM_NAMES = ("tau", "epsilon", "mu", "delta")
# parameters a kind tunes during search
_KIND_PARAMS = {
    "gd": ("tau",),
    "cm": ("tau", "mu"),
    "nag": ("tau", "mu"),
    "rgd": ("epsilon", "mu", "delta"),
    "crgd": ("epsilon", "mu", "delta"),
}


@dataclass(frozen=True)
class SearchRanges:
    """Closed sampling intervals per tunable, plus optional law overrides.

    The default law is uniform; tau and epsilon switch to log-uniform when
    the interval is positive and spans at least two decades, since uniform
    sampling over several decades almost never probes the small end.
    """

    tau: Optional[Tuple[float, float]] = None
    epsilon: Optional[Tuple[float, float]] = None
    mu: Optional[Tuple[float, float]] = None
    delta: Optional[Tuple[float, float]] = None
    sampling: Dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        for name in _PARAM_NAMES:
            iv = getattr(self, name)
            if iv is None:
                continue
            lo, hi = float(iv[0]), float(iv[1])
            if not (math.isfinite(lo) and math.isfinite(hi)):
                raise ValueError(f"{name} interval bounds must be finite")
            if lo > hi:
                raise ValueError(f"{name} interval has lo > hi: [{lo}, {hi}]")
            object.__setattr__(self, name, (lo, hi))
        for name, law in self.sampling.items():
            if name not in _PARAM_NAMES:
                raise ValueError(f"sampling law for unknown parameter {name!r}")
            if law not in ("uniform", "log_uniform"):
                raise ValueError(
                    f"sampling law must be 'uniform' or 'log_uniform', got {law!r}"
                )
            iv = getattr(self, name)
            if law == "log_uniform" and (iv is None or iv[0] <= 0):
                raise ValueError(
                    f"log_uniform sampling for {name} needs a positive lower bound"
                )

    def law(self, name: str) -> str:
        if name in self.sampling:
            return self.sampling[name]
        iv = getattr(self, name)
        if name in ("tau", "epsilon") and iv is not None:
            lo, hi = iv
            if lo > 0 and hi / lo >= 100.0:
                return "log_uniform"
        return "uniform"

    def draw(self, name: str, rng: np.random.Generator) -> float:
        iv = getattr(self, name)
        if iv is None:
            raise ValueError(f"no search interval declared for {name}")
        lo, hi = iv
        if lo == hi:
            return lo
        if self.law(name) == "log_uniform":
            v = float(math.exp(rng.uniform(math.log(lo), math.log(hi))))
        else:
            v = float(rng.uniform(lo, hi))
        if name in ("tau", "epsilon") and v <= 0.0:
            v = math.ulp(0.0)  # interval touched zero; keep the config valid
        return v


@dataclass(frozen=True)
class OptimizerEntry:
    kind: str
    ranges: SearchRanges
    momentum_schedule: str = "constant"
    clock: str = "iteration"

    def __post_init__(self):
        if self.kind not in OPTIMIZER_KINDS:
            raise ValueError(f"unknown optimizer kind {self.kind!r}")
        for name in _KIND_PARAMS[self.kind]:
            if getattr(self.ranges, name) is None:
                raise ValueError(
                    f"optimizer {self.kind!r} needs a search range for {name!r}"
                )

    def make_config(self, params: Dict[str, float]) -> OptimizerConfig:
        return OptimizerConfig(
            kind=self.kind,
            momentum_schedule=self.momentum_schedule,
            clock=self.clock,
            **params,
        )


@dataclass(frozen=True)
class ObjectiveSpec:
    name: str
    dim: int
    seed: int = 1
    eigen_lo: float = 1e-3
    eigen_hi: float = 1.0

    def __post_init__(self):
        if self.name not in OBJECTIVE_NAMES:
            raise ValueError(
                f"unknown objective {self.name!r}; valid: {', '.join(OBJECTIVE_NAMES)}"
            )
        if self.name == "camelback" and self.dim != 2:
            raise ValueError("camelback is two-dimensional; set dim = 2")

    @property
    def randomized(self) -> bool:
        """Quadratics are redrawn per Monte-Carlo run; the rest are fixed."""
        return self.name == "quadratic"

    def build(self, seed: Optional[int] = None) -> Objective:
        return get_objective(
            self.name,
            dim=self.dim,
            seed=self.seed if seed is None else seed,
            eigen_lo=self.eigen_lo,
            eigen_hi=self.eigen_hi,
        )


@dataclass(frozen=True)
class ExperimentSpec:
    objective: ObjectiveSpec
    init: InitSpec
    optimizers: Tuple[OptimizerEntry, ...]
    search_trials: int
    mc_runs: int
    iters: int
    master_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "optimizers", tuple(self.optimizers))
        if len(self.optimizers) == 0:
            raise ValueError("experiment needs at least one optimizer")
        for label, v in (
            ("search_trials", self.search_trials),
            ("mc_runs", self.mc_runs),
            ("iters", self.iters),
        ):
            if v < 1:
                raise ValueError(f"{label} must be >= 1, got {v}")
        if self.init.kind == "fixed" and len(self.init.values) != self.objective.dim:
            raise ValueError(
                f"fixed init length {len(self.init.values)} does not match dim {self.objective.dim}"
            )


# ---------------------------------------------------------------------------
# Search and Monte Carlo
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SearchResult:
    kind: str
    best_params: Optional[Dict[str, float]]
    best_gap: float
    n_trials: int
    n_diverged: int

    @property
    def viable(self) -> bool:
        return self.best_params is not None


@dataclass(frozen=True)
class QuantileBand:
    """Per-iteration median and 2.5/97.5 percent quantiles for one optimizer."""

    kind: str
    median: Tuple[float, ...]
    q025: Tuple[float, ...]
    q975: Tuple[float, ...]

    def __post_init__(self):
        med = tuple(float(v) for v in self.median)
        lo = tuple(float(v) for v in self.q025)
        hi = tuple(float(v) for v in self.q975)
        if not (len(med) == len(lo) == len(hi)):
            raise ValueError("band columns must have equal length")
        for i, (a, m, b) in enumerate(zip(lo, med, hi)):
            if not (a <= m <= b):
                raise ValueError(
                    f"band ordering violated at iteration {i}: {a} <= {m} <= {b} fails"
                )
        object.__setattr__(self, "median", med)
        object.__setattr__(self, "q025", lo)
        object.__setattr__(self, "q975", hi)


def _quantile(sorted_vals: Sequence[float], q: float) -> float:
    """Linear interpolation between order statistics; +inf entries stay +inf
    instead of poisoning the arithmetic."""
    n = len(sorted_vals)
    if n == 1:
        return sorted_vals[0]
    pos = q * (n - 1)
    i = int(math.floor(pos))
    if i >= n - 1:
        return sorted_vals[-1]
    frac = pos - i
    lo, hi = sorted_vals[i], sorted_vals[i + 1]
    if frac == 0.0 or lo == hi:
        return lo
    if math.isinf(hi):
        return hi
    return lo + frac * (hi - lo)


def _search_trial(
    spec: ExperimentSpec, entry: OptimizerEntry, index: int
) -> Tuple[Dict[str, float], RunRecord]:
    tseed = derive_seed(spec.master_seed, f"search:{entry.kind}", index)
    rng = np.random.default_rng(tseed)
    params = {name: entry.ranges.draw(name, rng) for name in _KIND_PARAMS[entry.kind]}
    obj = spec.objective.build()
    x0 = spec.init.materialize(spec.objective.dim, rng)
    rec = run(obj, entry.make_config(params), x0, spec.iters, trial_seed=tseed)
    return params, rec


def random_search(
    spec: ExperimentSpec, entry: OptimizerEntry, jobs: int = 1
) -> SearchResult:
    """Draw search_trials parameter tuples and keep the one with the lowest
    final gap.  Diverged trials score +inf; if every trial diverges the
    result is flagged non-viable rather than raising."""
    results = parallel_map(
        lambda i: _search_trial(spec, entry, i), range(spec.search_trials), jobs
    )
    best_params, best_gap = None, math.inf
    n_diverged = 0
    for params, rec in results:
        gap = rec.final_gap
        n_diverged += int(rec.diverged)
        if gap < best_gap:
            best_params, best_gap = params, gap
    return SearchResult(
        kind=entry.kind,
        best_params=best_params,
        best_gap=best_gap,
        n_trials=spec.search_trials,
        n_diverged=n_diverged,
    )


def _mc_run(
    spec: ExperimentSpec, entry: OptimizerEntry, params: Dict[str, float], index: int
) -> RunRecord:
    rseed = (spec.master_seed ^ index) % _U64
    if spec.objective.randomized:
        obj = spec.objective.build(seed=derive_seed(rseed, "objective", 0))
    else:
        obj = spec.objective.build()
    if spec.init.random:
        rng = np.random.default_rng(derive_seed(rseed, "init", 0))
        x0 = spec.init.materialize(spec.objective.dim, rng)
    else:
        x0 = spec.init.materialize(spec.objective.dim)
    return run(obj, entry.make_config(params), x0, spec.iters, trial_seed=rseed)


def monte_carlo(
    spec: ExperimentSpec,
    entry: OptimizerEntry,
    params: Dict[str, float],
    jobs: int = 1,
) -> Tuple[QuantileBand, List[RunRecord]]:
    """mc_runs repetitions at fixed parameters, reduced to quantile bands.

    Run seeds are master_seed XOR run-index; the random pieces are the
    objective draw (quadratic only) and the init box (when used).  Diverged
    traces are padded with +inf before taking quantiles.
    """
    records = parallel_map(
        lambda j: _mc_run(spec, entry, params, j), range(spec.mc_runs), jobs
    )
    width = spec.iters + 1
    padded = [
        list(r.trace) + [math.inf] * (width - len(r.trace)) for r in records
    ]
    med, lo, hi = [], [], []
    for i in range(width):
        col = sorted(row[i] for row in padded)
        med.append(_quantile(col, 0.5))
        lo.append(_quantile(col, 0.025))
        hi.append(_quantile(col, 0.975))
    band = QuantileBand(kind=entry.kind, median=tuple(med), q025=tuple(lo), q975=tuple(hi))
    return band, records


@dataclass(frozen=True)
class BenchOutcome:
    search: SearchResult
    band: Optional[QuantileBand]
    records: Tuple[RunRecord, ...]


def run_bench(spec: ExperimentSpec, jobs: int = 1) -> List[BenchOutcome]:
    """Full pipeline per optimizer: tune, then Monte Carlo at the optimum."""
    outcomes = []
    for entry in spec.optimizers:
        sr = random_search(spec, entry, jobs=jobs)
        if sr.viable:
            band, records = monte_carlo(spec, entry, sr.best_params, jobs=jobs)
        else:
            band, records = None, []
        outcomes.append(BenchOutcome(search=sr, band=band, records=tuple(records)))
    return outcomes


# ---------------------------------------------------------------------------
# Rate estimation
# ---------------------------------------------------------------------------


def estimate_rate(trace: Sequence[float], window: Tuple[int, int]) -> float:
    """Fit f_k ~ k^(-p) on a window by least squares in log-log, return p.

    window = (k_lo, k_hi) indexes iterations inclusively; k_lo must be >= 1
    because log(k) is taken.  Non-positive or non-finite trace values on the
    window make the rate undefined.
    """
    k_lo, k_hi = int(window[0]), int(window[1])
    if k_lo < 1:
        raise ValueError(f"window start must be >= 1, got {k_lo}")
    if k_hi <= k_lo:
        raise ValueError(f"window must satisfy k_lo < k_hi, got [{k_lo}, {k_hi}]")
    if k_hi >= len(trace):
        raise ValueError(
            f"window end {k_hi} exceeds last iteration {len(trace) - 1}"
        )
    vals = [float(trace[k]) for k in range(k_lo, k_hi + 1)]
    if any((not math.isfinite(v)) or v <= 0 for v in vals):
        raise RateUndefinedError(
            "trace has non-positive or non-finite values on the window"
        )
    ks = np.log(np.arange(k_lo, k_hi + 1, dtype=float))
    slope = np.polyfit(ks, np.log(vals), 1)[0]
    return float(-slope)


# ---------------------------------------------------------------------------
# CSV export / import
# ---------------------------------------------------------------------------


def _fmt(v: float) -> str:
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return repr(float(v))


TRACE_HEADER = "optimizer,trial,iter,f_gap,diverged"
BAND_HEADER = "optimizer,iter,median,q025,q975"


def export_trace_csv(records: Sequence[RunRecord], path: str) -> None:
    """One row per iteration: optimizer,trial,iter,f_gap,diverged."""
    try:
        with open(path, "w", newline="") as fh:
            fh.write(TRACE_HEADER + "\n")
            for trial, rec in enumerate(records):
                flag = "true" if rec.diverged else "false"
                for it, gap in enumerate(rec.trace):
                    fh.write(f"{rec.kind},{trial},{it},{_fmt(gap)},{flag}\n")
    except OSError as e:
        raise OSError(f"cannot write trace CSV {path!r}: {e}") from e


def export_band_csv(bands: Sequence[QuantileBand], path: str) -> None:
    """One row per iteration per band: optimizer,iter,median,q025,q975."""
    try:
        with open(path, "w", newline="") as fh:
            fh.write(BAND_HEADER + "\n")
            for band in bands:
                for it in range(len(band.median)):
                    fh.write(
                        f"{band.kind},{it},{_fmt(band.median[it])},"
                        f"{_fmt(band.q025[it])},{_fmt(band.q975[it])}\n"
                    )
    except OSError as e:
        raise OSError(f"cannot write band CSV {path!r}: {e}") from e


def export_csv(data, path: str) -> None:
    """Dispatch on payload type: RunRecords to the trace schema, bands to
    the band schema."""
    items = list(data)
    if items and isinstance(items[0], QuantileBand):
        export_band_csv(items, path)
    else:
        export_trace_csv(items, path)


def read_trace_csv(path: str) -> List[Tuple[int, RunRecord]]:
    """Inverse of export_trace_csv; returns (trial id, record) pairs in file
    order.  Values round-trip exactly."""
    try:
        with open(path) as fh:
            lines = [ln.rstrip("\n") for ln in fh]
    except OSError as e:
        raise OSError(f"cannot read trace CSV {path!r}: {e}") from e
    if not lines or lines[0] != TRACE_HEADER:
        raise ValueError(f"{path!r} is not a trace CSV (bad header)")
    order: List[Tuple[str, int]] = []
    buckets: Dict[Tuple[str, int], dict] = {}
    for ln in lines[1:]:
        if not ln:
            continue
        kind, trial, it, gap, flag = ln.split(",")
        key = (kind, int(trial))
        if key not in buckets:
            buckets[key] = {"trace": [], "diverged": flag == "true"}
            order.append(key)
        buckets[key]["trace"].append(float(gap))
        buckets[key]["diverged"] = flag == "true"
    out = []
    for kind, trial in order:
        b = buckets[(kind, trial)]
        out.append(
            (
                trial,
                RunRecord(
                    kind=kind,
                    params={},
                    trace=tuple(b["trace"]),
                    diverged=b["diverged"],
                ),
            )
        )
    return out


def read_band_csv(path: str) -> List[QuantileBand]:
    try:
        with open(path) as fh:
            lines = [ln.rstrip("\n") for ln in fh]
    except OSError as e:
        raise OSError(f"cannot read band CSV {path!r}: {e}") from e
    if not lines or lines[0] != BAND_HEADER:
        raise ValueError(f"{path!r} is not a band CSV (bad header)")
    order: List[str] = []
    buckets: Dict[str, dict] = {}
    for ln in lines[1:]:
        if not ln:
            continue
        kind, _it, med, lo, hi = ln.split(",")
        if kind not in buckets:
            buckets[kind] = {"median": [], "q025": [], "q975": []}
            order.append(kind)
        buckets[kind]["median"].append(float(med))
        buckets[kind]["q025"].append(float(lo))
        buckets[kind]["q975"].append(float(hi))
    return [
        QuantileBand(
            kind=kind,
            median=tuple(buckets[kind]["median"]),
            q025=tuple(buckets[kind]["q025"]),
            q975=tuple(buckets[kind]["q975"]),
        )
        for kind in order
    ]


# ---------------------------------------------------------------------------
# SVG rendering
# ---------------------------------------------------------------------------

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def export_svg(
    bands: Sequence[QuantileBand],
    path: str,
    title: str = "",
    width: int = 880,
    height: int = 540,
) -> None:
    """Self-contained convergence figure: log10 objective gap vs iteration.

    Each band draws a median polyline plus a translucent quantile polygon.
    Non-positive and infinite values are clipped to the plot range bottom /
    top respectively (a diverged band hugs the ceiling).
    """
    bands = list(bands)
    if not bands:
        raise ValueError("export_svg needs at least one band")
    finite = [
        v
        for b in bands
        for col in (b.median, b.q025, b.q975)
        for v in col
        if math.isfinite(v) and v > 0
    ]
    if finite:
        y_lo = math.floor(math.log10(min(finite)))
        y_hi = math.ceil(math.log10(max(finite)))
    else:
        y_lo, y_hi = -1, 1
    if y_hi <= y_lo:
        y_hi = y_lo + 1
    n_iter = max(len(b.median) for b in bands) - 1
    n_iter = max(n_iter, 1)

    ml, mr, mt, mb = 64.0, 16.0, 34.0, 44.0
    pw, ph = width - ml - mr, height - mt - mb

    def sx(it: float) -> float:
        return ml + pw * it / n_iter

    def sy(v: float) -> float:
        if math.isinf(v) or v != v:
            lv = y_hi
        elif v <= 0:
            lv = y_lo
        else:
            lv = min(max(math.log10(v), y_lo), y_hi)
        return mt + ph * (y_hi - lv) / (y_hi - y_lo)

    def pts(values) -> str:
        return " ".join(f"{sx(i):.2f},{sy(v):.2f}" for i, v in enumerate(values))

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="#333"/>',
    ]
    if title:
        parts.append(
            f'<text x="{width / 2:.1f}" y="20" text-anchor="middle" font-size="14">{title}</text>'
        )
    # y ticks at decades (thin to at most ~10 labels)
    step = max(1, int(math.ceil((y_hi - y_lo) / 10)))
    for d in range(y_lo, y_hi + 1, step):
        y = sy(10.0**d)
        parts.append(
            f'<line x1="{ml}" y1="{y:.2f}" x2="{ml + pw}" y2="{y:.2f}" stroke="#ddd"/>'
        )
        parts.append(
            f'<text x="{ml - 6}" y="{y + 4:.2f}" text-anchor="end">1e{d}</text>'
        )
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        it = frac * n_iter
        x = sx(it)
        parts.append(
            f'<line x1="{x:.2f}" y1="{mt + ph}" x2="{x:.2f}" y2="{mt + ph + 4}" stroke="#333"/>'
        )
        parts.append(
            f'<text x="{x:.2f}" y="{mt + ph + 18}" text-anchor="middle">{int(round(it))}</text>'
        )
    parts.append(
        f'<text x="{ml + pw / 2:.1f}" y="{height - 8}" text-anchor="middle">iteration</text>'
    )
    parts.append(
        f'<text x="16" y="{mt + ph / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 16 {mt + ph / 2:.1f})">objective gap</text>'
    )
    for idx, band in enumerate(bands):
        color = _PALETTE[idx % len(_PALETTE)]
        hull = pts(band.q975) + " " + " ".join(
            f"{sx(i):.2f},{sy(v):.2f}"
            for i, v in reversed(list(enumerate(band.q025)))
        )
        parts.append(
            f'<polygon points="{hull}" fill="{color}" fill-opacity="0.18" stroke="none"/>'
        )
        parts.append(
            f'<polyline points="{pts(band.median)}" fill="none" stroke="{color}" stroke-width="1.6"/>'
        )
        ly = mt + 16 + 16 * idx
        lx = ml + pw - 110
        parts.append(
            f'<line x1="{lx}" y1="{ly}" x2="{lx + 22}" y2="{ly}" stroke="{color}" stroke-width="2"/>'
        )
        parts.append(f'<text x="{lx + 28}" y="{ly + 4}">{band.kind}</text>')
    parts.append("</svg>")
    try:
        with open(path, "w", newline="") as fh:
            fh.write("\n".join(parts) + "\n")
    except OSError as e:
        raise OSError(f"cannot write SVG {path!r}: {e}") from e


# ---------------------------------------------------------------------------
# JSON config parsing
# ---------------------------------------------------------------------------


def _expect_mapping(doc, path: str) -> dict:
    if not isinstance(doc, dict):
        raise ConfigError(path, f"expected an object, got {type(doc).__name__}")
    return doc


def _reject_unknown(doc: dict, allowed, path: str) -> None:
    for key in doc:
        if key not in allowed:
            raise ConfigError(f"{path}.{key}", "unknown key")


def _get_number(doc: dict, key: str, path: str, required: bool = True, default=None):
    if key not in doc:
        if required:
            raise ConfigError(f"{path}.{key}", "missing required key")
        return default
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{path}.{key}", f"expected a number, got {type(v).__name__}")
    return v


def _get_int(doc: dict, key: str, path: str, required: bool = True, default=None):
    v = _get_number(doc, key, path, required, default)
    if v is None:
        return None
    if isinstance(v, float) and not v.is_integer():
        raise ConfigError(f"{path}.{key}", f"expected an integer, got {v}")
    return int(v)


def _get_str(doc: dict, key: str, path: str, required: bool = True, default=None):
    if key not in doc:
        if required:
            raise ConfigError(f"{path}.{key}", "missing required key")
        return default
    v = doc[key]
    if not isinstance(v, str):
        raise ConfigError(f"{path}.{key}", f"expected a string, got {type(v).__name__}")
    return v


def _parse_interval(v, path: str) -> Tuple[float, float]:
    if (
        not isinstance(v, (list, tuple))
        or len(v) != 2
        or any(isinstance(x, bool) or not isinstance(x, (int, float)) for x in v)
    ):
        raise ConfigError(path, "expected an interval [lo, hi] of two numbers")
    return float(v[0]), float(v[1])


def parse_experiment(doc) -> ExperimentSpec:
    """Validate a JSON document (already loaded) into an ExperimentSpec.

    Unknown keys anywhere are rejected with the JSON path of the offender,
    so a typo fails loudly instead of silently using a default.
    """
    root = _expect_mapping(doc, "$")
    _reject_unknown(
        root,
        {"objective", "init", "optimizers", "search_trials", "mc_runs", "iters", "master_seed"},
        "$",
    )
    for key in ("objective", "init", "optimizers"):
        if key not in root:
            raise ConfigError(f"$.{key}", "missing required key")

    odoc = _expect_mapping(root["objective"], "$.objective")
    _reject_unknown(odoc, {"name", "dim", "seed"}, "$.objective")
    name = _get_str(odoc, "name", "$.objective")
    dim = _get_int(odoc, "dim", "$.objective")
    oseed = _get_int(odoc, "seed", "$.objective", required=False, default=1)
    try:
        ospec = ObjectiveSpec(name=name, dim=dim, seed=oseed)
    except ValueError as e:
        raise ConfigError("$.objective", str(e)) from e

    idoc = _expect_mapping(root["init"], "$.init")
    _reject_unknown(idoc, {"kind", "lo", "hi", "pattern"}, "$.init")
    ikind = _get_str(idoc, "kind", "$.init")
    if ikind == "box":
        lo = _get_number(idoc, "lo", "$.init")
        hi = _get_number(idoc, "hi", "$.init")
        if "pattern" in idoc:
            raise ConfigError("$.init.pattern", "not allowed for box init")
        try:
            init = InitSpec(kind="box", lo=float(lo), hi=float(hi))
        except ValueError as e:
            raise ConfigError("$.init", str(e)) from e
    elif ikind in ("fixed", "pattern"):
        if "lo" in idoc or "hi" in idoc:
            raise ConfigError("$.init", f"lo/hi not allowed for {ikind} init")
        pat = idoc.get("pattern")
        if (
            not isinstance(pat, (list, tuple))
            or len(pat) == 0
            or any(isinstance(x, bool) or not isinstance(x, (int, float)) for x in pat)
        ):
            raise ConfigError("$.init.pattern", "expected a non-empty list of numbers")
        try:
            init = InitSpec(kind=ikind, values=tuple(float(x) for x in pat))
        except ValueError as e:
            raise ConfigError("$.init", str(e)) from e
    else:
        raise ConfigError("$.init.kind", f"expected 'fixed', 'pattern' or 'box', got {ikind!r}")

    opt_docs = root["optimizers"]
    if not isinstance(opt_docs, list) or len(opt_docs) == 0:
        raise ConfigError("$.optimizers", "expected a non-empty list")
    entries = []
    for i, edoc in enumerate(opt_docs):
        path = f"$.optimizers[{i}]"
        edoc = _expect_mapping(edoc, path)
        _reject_unknown(edoc, {"kind", "ranges", "sampling"}, path)
        kind = _get_str(edoc, "kind", path)
        if kind not in OPTIMIZER_KINDS:
            raise ConfigError(
                f"{path}.kind", f"unknown optimizer {kind!r}; valid: {', '.join(OPTIMIZER_KINDS)}"
            )
        rdoc = _expect_mapping(edoc.get("ranges", {}), f"{path}.ranges")
        _reject_unknown(rdoc, set(_PARAM_NAMES), f"{path}.ranges")
        intervals = {
            p: _parse_interval(rdoc[p], f"{path}.ranges.{p}") for p in rdoc
        }
        sampling = {}
        if "sampling" in edoc:
            sdoc = _expect_mapping(edoc["sampling"], f"{path}.sampling")
            _reject_unknown(sdoc, set(_PARAM_NAMES), f"{path}.sampling")
            for p, law in sdoc.items():
                if not isinstance(law, str):
                    raise ConfigError(f"{path}.sampling.{p}", "expected a string law")
                sampling[p] = law
        try:
            entry = OptimizerEntry(
                kind=kind, ranges=SearchRanges(**intervals, sampling=sampling)
            )
        except (TypeError, ValueError) as e:
            raise ConfigError(path, str(e)) from e
        entries.append(entry)

    st = _get_int(root, "search_trials", "$")
    mc = _get_int(root, "mc_runs", "$")
    iters = _get_int(root, "iters", "$")
    mseed = _get_int(root, "master_seed", "$", required=False, default=0)
    try:
        return ExperimentSpec(
            objective=ospec,
            init=init,
            optimizers=tuple(entries),
            search_trials=st,
            mc_runs=mc,
            iters=iters,
            master_seed=mseed,
        )
    except ValueError as e:
        raise ConfigError("$", str(e)) from e


def spec_to_doc(spec: ExperimentSpec) -> dict:
    """Inverse of parse_experiment, for dumping presets as editable JSON."""
    init: Dict[str, object] = {"kind": spec.init.kind}
    if spec.init.kind == "box":
        init["lo"] = spec.init.lo
        init["hi"] = spec.init.hi
    else:
        init["pattern"] = list(spec.init.values)
    optimizers = []
    for e in spec.optimizers:
        ranges = {
            p: list(getattr(e.ranges, p))
            for p in _PARAM_NAMES
            if getattr(e.ranges, p) is not None
        }
        entry: Dict[str, object] = {"kind": e.kind, "ranges": ranges}
        if e.ranges.sampling:
            entry["sampling"] = dict(e.ranges.sampling)
        optimizers.append(entry)
    return {
        "objective": {
            "name": spec.objective.name,
            "dim": spec.objective.dim,
            "seed": spec.objective.seed,
        },
        "init": init,
        "optimizers": optimizers,
        "search_trials": spec.search_trials,
        "mc_runs": spec.mc_runs,
        "iters": spec.iters,
        "master_seed": spec.master_seed,
    }

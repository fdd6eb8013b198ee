"""Sweep driver: runs the exponent estimator over (J, theta) grids of
ensembles, bins the results, and emits CSV/JSON.

Work items are (sweep cell x sample index); they may execute on a thread
pool (the compiled kernels drop the GIL) and are merged back in sample
order, so output is identical for any worker count.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .dynamics import DivergenceError, EnergyDriftError, IntegratorConfig, SingularityError
from .ensemble import SamplingSpec, init_adiabatic_state, init_mapping_state, sample_nuclear
from .lyapunov import LyapunovConfig, LyapunovRecord, benettin_lambda
from .model import ModelParams

__all__ = [
    "HistogramSpec",
    "Histogram",
    "RunSpec",
    "CellResult",
    "RecordRow",
    "make_histogram",
    "run_experiment",
    "preset_spec",
    "write_csv",
    "write_records_csv",
    "write_histogram_csv",
    "write_summary_json",
    "write_outputs",
    "PRESETS",
]

RECORD_FIELDS = (
    "system", "J", "theta", "sample_index", "phi", "x0", "y0",
    "lambda_max", "seg_lambdas_mean", "energy_drift", "status",
)

HIST_FIELDS = ("system", "J", "theta", "bin_left", "bin_right", "count")

# reference integration steps; see IntegratorConfig for the mapping-step
# rationale -- the adiabatic system only carries the slow nuclear
# frequencies, so a 10x coarser grid holds the same drift budget
MAPPING_DT = 5e-5
ADIABATIC_DT = 5e-4


@dataclass(frozen=True)
class HistogramSpec:
    bin_width: float = 0.05
    lo: float = -0.2
    hi: float = 2.0

    def __post_init__(self):
        if not self.bin_width > 0.0:
            raise ValueError("bin_width must be positive")
        if not self.lo < self.hi:
            raise ValueError("histogram range must have lo < hi")

    def edges(self) -> np.ndarray:
        n_bins = max(1, int(round((self.hi - self.lo) / self.bin_width)))
        return self.lo + self.bin_width * np.arange(n_bins + 1)


@dataclass
class Histogram:
    bin_edges: np.ndarray
    counts: np.ndarray
    n_total: int
    underflow: int
    overflow: int

    def mode_bin(self):
        """(left, right) of the most occupied bin; None when empty."""
        if self.counts.sum() == 0:
            return None
        k = int(np.argmax(self.counts))
        return float(self.bin_edges[k]), float(self.bin_edges[k + 1])


def make_histogram(values, spec: HistogramSpec) -> Histogram:
    edges = spec.edges()
    vals = np.asarray(list(values), dtype=np.float64)
    underflow = int(np.sum(vals < edges[0]))
    overflow = int(np.sum(vals >= edges[-1]))
    inside = vals[(vals >= edges[0]) & (vals < edges[-1])]
    idx = np.searchsorted(edges, inside, side="right") - 1
    counts = np.bincount(idx, minlength=len(edges) - 1).astype(np.int64)
    return Histogram(edges, counts, int(vals.size), underflow, overflow)


@dataclass(frozen=True)
class RunSpec:
    model: ModelParams = ModelParams()
    integrator: IntegratorConfig = IntegratorConfig()
    lyapunov: LyapunovConfig = LyapunovConfig()
    sampling: SamplingSpec = SamplingSpec()
    system_kind: str = "mapping"
    j_values: tuple | None = None
    theta_values: tuple | None = None
    histogram: HistogramSpec = HistogramSpec()
    workers: int = 1
    output_dir: str | None = None

    def __post_init__(self):
        if self.system_kind not in ("mapping", "adiabatic"):
            raise ValueError(f"unknown system kind {self.system_kind!r}")
        if self.j_values is not None and len(self.j_values) == 0:
            raise ValueError("j_values must be non-empty when given")
        if self.theta_values is not None and len(self.theta_values) == 0:
            raise ValueError("theta_values must be non-empty when given")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    def cells(self):
        js = self.j_values if self.j_values is not None else (self.model.J,)
        thetas = self.theta_values if self.theta_values is not None else (self.model.theta,)
        return [(float(j), float(th)) for j in js for th in thetas]


@dataclass
class RecordRow:
    system: str
    J: float
    theta: float
    sample_index: int
    phi: float
    x0: float
    y0: float
    lambda_max: float
    seg_lambdas_mean: float
    energy_drift: float
    status: str


@dataclass
class CellResult:
    system: str
    J: float
    theta: float
    records: list
    rows: list
    histogram: Histogram
    summary: dict


def _perturbation_seed(base: int, sample_index: int) -> int:
    ss = np.random.SeedSequence([base, sample_index, 1])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _run_one(state, cell_params, integrator, lyap, system_kind, sample_index):
    cfg = replace(lyap, seed=_perturbation_seed(lyap.seed, sample_index))
    try:
        return benettin_lambda(state, cell_params, integrator, cfg,
                               system_kind, sample_index=sample_index)
    except (DivergenceError, EnergyDriftError) as exc:
        rec = exc.record
        if rec is None:
            rec = LyapunovRecord(sample_index=sample_index, status="divergence")
        return rec
    except SingularityError:
        return LyapunovRecord(sample_index=sample_index, status="singularity")


def run_experiment(spec: RunSpec) -> dict:
    """All sweep cells -> CellResult, deterministic for any worker count."""
    tasks = []
    cell_meta = []
    for j, th in spec.cells():
        cell_params = replace(spec.model, J=j, theta=th)
        points = sample_nuclear(spec.sampling, cell_params)
        if spec.system_kind == "mapping":
            states = [init_mapping_state(p, cell_params, spec.sampling) for p in points]
        else:
            states = [init_adiabatic_state(p) for p in points]
        cell_meta.append(((spec.system_kind, j, th), cell_params, points))
        for p, s in zip(points, states):
            tasks.append((len(cell_meta) - 1, p.index, s, cell_params))

    def work(task):
        _, index, state, cell_params = task
        return _run_one(state, cell_params, spec.integrator, spec.lyapunov,
                        spec.system_kind, index)

    if spec.workers > 1:
        with ThreadPoolExecutor(max_workers=spec.workers) as pool:
            results = list(pool.map(work, tasks))
    else:
        results = [work(t) for t in tasks]

    out = {}
    pos = 0
    for key, cell_params, points in cell_meta:
        system, j, th = key
        n = len(points)
        records = results[pos:pos + n]
        pos += n
        rows = [
            RecordRow(
                system=system, J=j, theta=th, sample_index=p.index, phi=p.phi,
                x0=p.x, y0=p.y, lambda_max=r.lambda_max,
                seg_lambdas_mean=(float(np.mean(r.segment_exponents))
                                  if r.segment_exponents else math.nan),
                energy_drift=r.energy_drift, status=r.status,
            )
            for p, r in zip(points, records)
        ]
        ok = [r.lambda_max for r in records if r.status == "ok"]
        hist = make_histogram(ok, spec.histogram)
        summary = {
            "system": system,
            "J": j,
            "theta": th,
            "n_samples": n,
            "failed": n - len(ok),
            "mean": float(np.mean(ok)) if ok else None,
            "median": float(np.median(ok)) if ok else None,
            "mode_bin": list(hist.mode_bin()) if hist.mode_bin() else None,
            "iqr": (float(np.percentile(ok, 75) - np.percentile(ok, 25))
                    if ok else None),
        }
        out[key] = CellResult(system, j, th, records, rows, hist, summary)
    return out


def _fmt(value) -> str:
    # repr gives shortest round-trip decimal for floats
    return repr(float(value)) if isinstance(value, float) else str(value)


def write_records_csv(rows, path):
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            fh.write(",".join(RECORD_FIELDS) + "\n")
            for row in rows:
                fh.write(",".join(_fmt(getattr(row, f)) for f in RECORD_FIELDS) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write records CSV to {path}: {exc}") from exc


# short alias matching the operation name used elsewhere
write_csv = write_records_csv


def write_histogram_csv(histogram: Histogram, path, system: str, J: float, theta: float):
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            fh.write(",".join(HIST_FIELDS) + "\n")
            for k, count in enumerate(histogram.counts):
                cells = (system, J, theta,
                         float(histogram.bin_edges[k]), float(histogram.bin_edges[k + 1]),
                         int(count))
                fh.write(",".join(_fmt(c) for c in cells) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write histogram CSV to {path}: {exc}") from exc


def write_summary_json(summaries, path):
    path = Path(path)
    try:
        with path.open("w") as fh:
            json.dump(list(summaries), fh, indent=2)
            fh.write("\n")
    except OSError as exc:
        raise OSError(f"cannot write summary JSON to {path}: {exc}") from exc


def _cell_tag(system: str, J: float, theta: float) -> str:
    return f"{system}_J{J:g}_theta{theta:.6g}"


def write_outputs(cells: dict, output_dir) -> list:
    """records.csv + per-cell histogram CSVs + summary.json under output_dir."""
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    rows = [row for cell in cells.values() for row in cell.rows]
    records_path = out / "records.csv"
    write_records_csv(rows, records_path)
    written.append(records_path)

    for (system, j, th), cell in cells.items():
        hist_path = out / f"hist_{_cell_tag(system, j, th)}.csv"
        write_histogram_csv(cell.histogram, hist_path, system, j, th)
        written.append(hist_path)

    summary_path = out / "summary.json"
    write_summary_json([cell.summary for cell in cells.values()], summary_path)
    written.append(summary_path)
    return written


PRESETS = ("fig2", "fig3", "fig4")


def preset_spec(name: str, seed: int | None = None, workers: int = 1,
                output_dir=None) -> RunSpec:
    """The three named reproduction runs.

    fig2 -- mapping system, J in {0.3, 1.5, 7.5} at theta = pi/3
    fig3 -- same sweep on the lower adiabatic surface
    fig4 -- mapping system, theta in {0, pi/6, pi/3} at J = 1.5
    """
    sampling = SamplingSpec() if seed is None else SamplingSpec(seed=seed)
    lyap = LyapunovConfig() if seed is None else LyapunovConfig(seed=seed)
    common = dict(
        model=ModelParams(),
        sampling=sampling,
        lyapunov=lyap,
        workers=workers,
        output_dir=output_dir,
    )
    if name == "fig2":
        return RunSpec(system_kind="mapping",
                       integrator=IntegratorConfig(dt=MAPPING_DT),
                       j_values=(0.3, 1.5, 7.5),
                       theta_values=(math.pi / 3,), **common)
    if name == "fig3":
        return RunSpec(system_kind="adiabatic",
                       integrator=IntegratorConfig(dt=ADIABATIC_DT),
                       j_values=(0.3, 1.5, 7.5),
                       theta_values=(math.pi / 3,), **common)
    if name == "fig4":
        return RunSpec(system_kind="mapping",
                       integrator=IntegratorConfig(dt=MAPPING_DT),
                       j_values=(1.5,),
                       theta_values=(0.0, math.pi / 6, math.pi / 3), **common)
    raise ValueError(f"unknown preset {name!r}; expected one of {PRESETS}")

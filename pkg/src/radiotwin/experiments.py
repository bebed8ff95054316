"""Experiment orchestration: sweeps over shadowing levels, grid sizes,
detectors and seeds, plus result aggregation and figure rendering.

Sweep cells are independent and may run in a process pool; rows are always
emitted in (sigma, grid, detector, seed) order so the output is identical
for any worker count. Wall times are measured by default; pass
timing=False to zero them out when byte-identical result files are needed
(reproducibility comparisons).
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields

import numpy as np

from . import dataset as ds
from .channel import cholesky_factor, covariance, received_rss, sample_shadowing
from .detectors import DETECTORS, make_detector
from .errors import ConfigError
from .metrics import MetricsReport, RocCurve, evaluate_scores
from .scenario import ScenarioConfig, ScenarioInstance, sample_rng
from .twin import expected_rss

RESULT_COLUMNS = (
    "sigma_db",
    "grid_m",
    "detector",
    "seed",
    "auc",
    "precision",
    "recall",
    "f2",
    "fit_ms",
    "score_ms",
)


@dataclass(frozen=True)
class SweepSpec:
    """What to run. Defaults reproduce the shadowing sweep at the 10 m grid
    with the desk-scale sample budget; the paper-scale budget is
    n_train=n_test=10000."""

    sigma_list: tuple[float, ...] = (0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0)
    grid_list: tuple[float, ...] = (10.0,)
    detectors: tuple[str, ...] = ("aed", "ocsvm", "lof", "dbscan")
    seeds: tuple[int, ...] = (0, 1, 2)
    n_train: int = 4000
    n_test: int = 4000
    anomaly_fraction: float = 0.5
    sorting: bool = False
    base_config: ScenarioConfig = field(default_factory=ScenarioConfig)

    def validate(self) -> None:
        if not self.sigma_list or not self.grid_list or not self.seeds:
            raise ConfigError("sigma_list, grid_list, seeds must be non-empty")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigError("seeds must be distinct")
        unknown = [d for d in self.detectors if d not in DETECTORS]
        if unknown or not self.detectors:
            raise ConfigError(f"unknown detectors {unknown}")
        if self.n_train < 1 or self.n_test < 1:
            raise ConfigError("n_train and n_test must be >= 1")
        if not 0.0 <= self.anomaly_fraction <= 1.0:
            raise ConfigError("anomaly_fraction must be in [0, 1]")


def spec_from_file(path: str) -> SweepSpec:
    """Parse a flat key=value sweep config; unknown keys are assumed to be
    ScenarioConfig overrides (e.g. pos_err_std=0)."""
    spec_fields = {f.name for f in fields(SweepSpec)}
    kw: dict = {}
    overrides: dict = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read sweep config {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        try:
            if key == "sigma_list":
                kw[key] = tuple(float(v) for v in value.split(","))
            elif key == "grid_list":
                kw[key] = tuple(float(v) for v in value.split(","))
            elif key == "seeds":
                kw[key] = tuple(int(v) for v in value.split(","))
            elif key == "detectors":
                kw[key] = tuple(v.strip() for v in value.split(","))
            elif key in ("n_train", "n_test"):
                kw[key] = int(value)
            elif key == "anomaly_fraction":
                kw[key] = float(value)
            elif key == "sorting":
                kw[key] = value.lower() in ("1", "true", "yes", "on")
            elif key in spec_fields:
                raise ConfigError(f"{path}:{lineno}: key {key} not settable here")
            else:
                overrides[key] = value
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {value!r}") from exc
    if overrides:
        from .scenario import config_from_kv

        base = config_from_kv("\n".join(f"{k}={v}" for k, v in overrides.items()))
        kw["base_config"] = base
    spec = SweepSpec(**kw)
    spec.validate()
    return spec


@dataclass(frozen=True)
class SweepRow:
    sigma_db: float
    grid_m: float
    detector: str
    seed: int
    auc: float
    precision: float
    recall: float
    f2: float
    fit_ms: float
    score_ms: float


@dataclass
class SweepResult:
    rows: list[SweepRow]
    failures: list[tuple[tuple, str]]  # ((sigma, grid, seed, detector), message)
    roc: dict[tuple, RocCurve] = field(default_factory=dict)


def _cell_config(spec: SweepSpec, sigma: float, grid: float, seed: int) -> ScenarioConfig:
    return spec.base_config.replace(
        sigma_shadow=sigma, grid_size=grid, master_seed=seed
    )


def evaluate_detector(
    name: str,
    train: np.ndarray,
    test: np.ndarray,
    labels: np.ndarray,
    timing: bool = True,
) -> tuple[MetricsReport, float, float]:
    """Fit one detector, score the test split, return (report, fit_ms, score_ms)."""
    det = make_detector(name)
    t0 = time.perf_counter()
    det.fit(train)
    t1 = time.perf_counter()
    scores = det.score_batch(test)
    preds = det.predict_batch(test)
    t2 = time.perf_counter()
    report = evaluate_scores(labels, scores, preds, beta=2.0, keep_roc=True)
    if not timing:
        return report, 0.0, 0.0
    return report, (t1 - t0) * 1e3, (t2 - t1) * 1e3


def _run_cell(args) -> tuple[list[SweepRow], list, dict]:
    spec, sigma, grid, seed, timing = args
    rows: list[SweepRow] = []
    failures: list = []
    roc: dict = {}
    try:
        data = ds.generate(
            _cell_config(spec, sigma, grid, seed),
            spec.n_train,
            spec.n_test,
            spec.anomaly_fraction,
            sorted_features=spec.sorting,
        )
    except Exception as exc:
        for name in spec.detectors:
            failures.append(
                ((sigma, grid, seed, name), f"generation failed: {type(exc).__name__}: {exc}")
            )
        return rows, failures, roc
    train = data.train_matrix()
    test = data.test_matrix()
    for name in spec.detectors:
        try:
            report, fit_ms, score_ms = evaluate_detector(
                name, train, test, data.test_labels, timing
            )
        except Exception as exc:
            failures.append(((sigma, grid, seed, name), f"{type(exc).__name__}: {exc}"))
            continue
        rows.append(
            SweepRow(
                sigma_db=sigma,
                grid_m=grid,
                detector=name,
                seed=seed,
                auc=report.auc,
                precision=report.precision,
                recall=report.recall,
                f2=report.f_beta,
                fit_ms=fit_ms,
                score_ms=score_ms,
            )
        )
        roc[(sigma, grid, seed, name)] = report.roc
    return rows, failures, roc


def run_sweep(spec: SweepSpec, workers: int = 1, timing: bool = True) -> SweepResult:
    """Run every (sigma, grid, seed) cell and every requested detector.

    A failure in one cell marks that cell and the sweep continues. Output
    row order is by (sigma, grid, detector, seed), independent of worker
    scheduling.
    """
    spec.validate()
    cells = [
        (spec, sigma, grid, seed, timing)
        for sigma in spec.sigma_list
        for grid in spec.grid_list
        for seed in spec.seeds
    ]
    rows: list[SweepRow] = []
    failures: list = []
    roc: dict = {}
    if workers <= 1:
        outputs = map(_run_cell, cells)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outputs = list(pool.map(_run_cell, cells))
    for cell_rows, cell_failures, cell_roc in outputs:
        rows.extend(cell_rows)
        failures.extend(cell_failures)
        roc.update(cell_roc)
    rows.sort(key=lambda r: (r.sigma_db, r.grid_m, r.detector, r.seed))
    failures.sort(key=lambda f: f[0])
    return SweepResult(rows, failures, roc)


@dataclass(frozen=True)
class AggregateRow:
    sigma_db: float
    grid_m: float
    detector: str
    n_seeds: int
    auc_mean: float
    auc_std: float
    precision_mean: float
    precision_std: float
    recall_mean: float
    recall_std: float
    f2_mean: float
    f2_std: float


def aggregate(result: SweepResult) -> list[AggregateRow]:
    """Per-(sigma, grid, detector) mean and std over seeds, stable order."""
    groups: dict[tuple, list[SweepRow]] = {}
    for row in result.rows:
        groups.setdefault((row.sigma_db, row.grid_m, row.detector), []).append(row)
    out = []
    for key in sorted(groups):
        rows = groups[key]

        def stats(attr: str) -> tuple[float, float]:
            vals = np.array([getattr(r, attr) for r in rows])
            return float(vals.mean()), float(vals.std())

        auc_m, auc_s = stats("auc")
        p_m, p_s = stats("precision")
        r_m, r_s = stats("recall")
        f_m, f_s = stats("f2")
        out.append(
            AggregateRow(key[0], key[1], key[2], len(rows), auc_m, auc_s, p_m, p_s, r_m, r_s, f_m, f_s)
        )
    return out


def _fmt(v: float) -> str:
    return repr(float(v))


def write_results_csv(result: SweepResult, path: str) -> None:
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(RESULT_COLUMNS) + "\n")
        for r in result.rows:
            fh.write(
                ",".join(
                    [
                        _fmt(r.sigma_db),
                        _fmt(r.grid_m),
                        r.detector,
                        str(r.seed),
                        _fmt(r.auc),
                        _fmt(r.precision),
                        _fmt(r.recall),
                        _fmt(r.f2),
                        f"{r.fit_ms:.3f}",
                        f"{r.score_ms:.3f}",
                    ]
                )
                + "\n"
            )


def write_aggregate_csv(rows: list[AggregateRow], path: str) -> None:
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    header = (
        "sigma_db,grid_m,detector,n_seeds,auc_mean,auc_std,precision_mean,"
        "precision_std,recall_mean,recall_std,f2_mean,f2_std"
    )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for r in rows:
            fh.write(
                ",".join(
                    [
                        _fmt(r.sigma_db),
                        _fmt(r.grid_m),
                        r.detector,
                        str(r.n_seeds),
                        _fmt(r.auc_mean),
                        _fmt(r.auc_std),
                        _fmt(r.precision_mean),
                        _fmt(r.precision_std),
                        _fmt(r.recall_mean),
                        _fmt(r.recall_std),
                        _fmt(r.f2_mean),
                        _fmt(r.f2_std),
                    ]
                )
                + "\n"
            )


# ---------------------------------------------------------------------------
# Rendering


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


_DETECTOR_COLORS = {"aed": "C0", "ocsvm": "C1", "lof": "C2", "dbscan": "C3"}


def render_plots(
    agg_rows: list[AggregateRow],
    out_dir: str,
    roc: dict[tuple, RocCurve] | None = None,
) -> list[str]:
    """Write SVG figures: ROC overlays per (sigma, grid), AUC vs sigma lines,
    and F2/recall bars per scenario. Returns the written paths; an empty
    aggregate produces no files."""
    if not agg_rows:
        print("render_plots: empty aggregate table, nothing to render")
        return []
    plt = _pyplot()
    os.makedirs(out_dir, exist_ok=True)
    written: list[str] = []

    # ROC overlay per (sigma, grid): lowest seed's curve per detector
    if roc:
        first_seed: dict[tuple, int] = {}
        for s, g, seed, det in roc:
            key = (s, g, det)
            if key not in first_seed or seed < first_seed[key]:
                first_seed[key] = seed
        scenarios = sorted({(s, g) for (s, g, _, _) in roc})
        for sigma, grid in scenarios:
            fig, ax = plt.subplots(figsize=(4.2, 4.0))
            for (s, g, seed, det), curve in sorted(roc.items()):
                if (s, g) != (sigma, grid) or seed != first_seed[(s, g, det)]:
                    continue
                ax.plot(curve.fpr, curve.tpr, label=f"{det} (AUC {curve.auc:.3f})",
                        color=_DETECTOR_COLORS.get(det))
            ax.plot([0, 1], [0, 1], "k:", label="no skill")
            ax.set_xlim(0, 1)
            ax.set_ylim(0, 1)
            ax.set_xlabel("false positive rate")
            ax.set_ylabel("true positive rate")
            ax.set_title(f"sigma={sigma:g} dB, grid={grid:g} m")
            ax.legend(loc="lower right", fontsize=8)
            path = os.path.join(out_dir, f"roc_sigma{sigma:g}_grid{grid:g}.svg")
            fig.savefig(path)
            plt.close(fig)
            written.append(path)

    # AUC vs sigma per grid
    grids = sorted({r.grid_m for r in agg_rows})
    for grid in grids:
        rows = [r for r in agg_rows if r.grid_m == grid]
        detectors = sorted({r.detector for r in rows})
        fig, ax = plt.subplots(figsize=(4.8, 3.6))
        for det in detectors:
            pts = sorted((r.sigma_db, r.auc_mean, r.auc_std) for r in rows if r.detector == det)
            sig = [p[0] for p in pts]
            ax.errorbar(sig, [p[1] for p in pts], yerr=[p[2] for p in pts],
                        marker="o", capsize=2, label=det,
                        color=_DETECTOR_COLORS.get(det))
        ax.set_ylim(0.0, 1.02)
        ax.set_xlabel("shadowing std (dB)")
        ax.set_ylabel("AUC")
        ax.set_title(f"grid={grid:g} m")
        ax.legend(fontsize=8)
        path = os.path.join(out_dir, f"auc_vs_sigma_grid{grid:g}.svg")
        fig.savefig(path)
        plt.close(fig)
        written.append(path)

    # F2 and recall bars per (sigma, grid)
    scenarios = sorted({(r.sigma_db, r.grid_m) for r in agg_rows})
    for sigma, grid in scenarios:
        rows = sorted(
            (r for r in agg_rows if (r.sigma_db, r.grid_m) == (sigma, grid)),
            key=lambda r: r.detector,
        )
        x = np.arange(len(rows))
        fig, ax = plt.subplots(figsize=(4.8, 3.2))
        ax.bar(x - 0.2, [r.f2_mean for r in rows], width=0.4, label="F2")
        ax.bar(x + 0.2, [r.recall_mean for r in rows], width=0.4, label="recall")
        ax.set_xticks(x, [r.detector for r in rows])
        ax.set_ylim(0.0, 1.02)
        ax.set_title(f"sigma={sigma:g} dB, grid={grid:g} m")
        ax.legend(fontsize=8)
        path = os.path.join(out_dir, f"scores_sigma{sigma:g}_grid{grid:g}.svg")
        fig.savefig(path)
        plt.close(fig)
        written.append(path)
    return written


# ---------------------------------------------------------------------------
# Radio map rendering (debug raster, Fig-style heatmaps)


def radio_map_rasters(
    scenario: ScenarioInstance, resolution: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """RSS rasters (original, twin, difference) over the whole area.

    A fresh shadowing field over the raster points is drawn from the
    scenario's master seed. Raster axes have (area/resolution + 1) points
    per side, inclusive endpoints.
    """
    if resolution <= 0:
        raise ConfigError(f"resolution must be > 0, got {resolution}")
    cfg = scenario.config
    n_axis = int(np.floor(cfg.area_side / resolution + 1e-9)) + 1
    coords = np.arange(n_axis, dtype=np.float64) * resolution
    xx, yy = np.meshgrid(coords, coords)
    points = np.column_stack([xx.ravel(), yy.ravel()])

    # phase 3: distinct from the dataset phases (0, 1) and from the phase-2
    # stream the radiomap CLI uses to draw the scenario itself
    factor = cholesky_factor(covariance(points, cfg.sigma_shadow, cfg.d_cor))
    rng = sample_rng(cfg.master_seed, phase=3, index=0)
    shadow = sample_shadowing(factor, scenario.n_transmitters, rng)

    probe = ScenarioInstance(
        config=cfg,
        tx_true=scenario.tx_true,
        tx_est=scenario.tx_est,
        tx_power_dbm=scenario.tx_power_dbm,
        su_positions=points,
        jammer_pos=scenario.jammer_pos,
        jammer_power_dbm=scenario.jammer_power_dbm,
    )
    original = received_rss(probe, shadow).reshape(n_axis, n_axis)
    predicted = expected_rss(probe).reshape(n_axis, n_axis)
    return coords, original, predicted, original - predicted


def render_radio_map(
    scenario: ScenarioInstance, resolution: float, out_path: str
) -> tuple[str, str]:
    """Write the documented grid file (<out>.txt) and the heatmap figure
    (<out>.svg); returns both paths."""
    coords, original, predicted, diff = radio_map_rasters(scenario, resolution)
    cfg = scenario.config
    base = out_path
    for suffix in (".txt", ".svg"):
        if base.endswith(suffix):
            base = base[: -len(suffix)]
    parent = os.path.dirname(base)
    if parent:
        os.makedirs(parent, exist_ok=True)

    grid_path = base + ".txt"
    su = scenario.su_positions
    with open(grid_path, "w", encoding="utf-8") as fh:
        fh.write("# radiotwin radio map v1\n")
        fh.write(
            f"# area_side={cfg.area_side} resolution={resolution} "
            f"n={len(coords)} (rows scan y, columns scan x)\n"
        )
        fh.write("# su_positions=" + ";".join(f"{p[0]:g},{p[1]:g}" for p in su) + "\n")
        for name, layer in (
            ("original_dbm", original),
            ("twin_dbm", predicted),
            ("difference_db", diff),
        ):
            fh.write(f"layer {name}\n")
            for row in layer:
                fh.write(" ".join(repr(float(v)) for v in row) + "\n")

    plt = _pyplot()
    fig, axes = plt.subplots(1, 3, figsize=(12.5, 3.8))
    extent = (coords[0], coords[-1], coords[0], coords[-1])
    vmin = min(original.min(), predicted.min())
    vmax = max(original.max(), predicted.max())
    for ax, layer, title, kw in (
        (axes[0], original, "original", {"vmin": vmin, "vmax": vmax}),
        (axes[1], predicted, "digital twin", {"vmin": vmin, "vmax": vmax}),
        (axes[2], diff, "difference", {"cmap": "coolwarm"}),
    ):
        im = ax.imshow(layer, origin="lower", extent=extent, **kw)
        ax.scatter(su[:, 0], su[:, 1], s=6, c="black", marker=".")
        ax.set_title(title)
        fig.colorbar(im, ax=ax, shrink=0.85)
    svg_path = base + ".svg"
    fig.savefig(svg_path)
    plt.close(fig)
    return grid_path, svg_path

"""Experiment grids over (k, sigma, trial) and their CSV output."""

from __future__ import annotations

import csv
import hashlib
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import construction, shadow, smoothed2d
from .errors import ConfigError, InvalidK, ShadowLabError
from .polytope import Plane2D, dumps_cloud, dumps_hpolytope
from .randomdist import SeededRng, derive_seed

METHODS = ("sweep", "exact", "slice")
LADDER = (1e-5, 1e-7, 1e-9)
LB_COLUMNS = ("k", "d", "n", "sigma", "trial", "seed", "method", "shadow_count", "perimeter",
              "angle_sum", "runtime_ms", "status") + tuple(f"count_tol_{t:.0e}" for t in LADDER)
TWO_D_COLUMNS = ("layout", "n", "sigma", "trial", "seed", "edges")


@dataclass(frozen=True)
class ExperimentConfig:
    command: str = "experiment-lb"
    k_list: tuple[int, ...] = (4,)
    sigma_start: float = 0.01
    sigma_end: float | None = None
    sigma_count: int = 20
    sigmas: tuple[float, ...] | None = None
    trials: int = 5
    master_seed: int = 0
    method: str = "sweep"
    dedup_tol: float = 1e-7
    ladder: tuple[float, ...] = LADDER
    angle_offset: float = 0.3
    drop_s_bounds: bool = False
    half_angle_frames: bool = False
    record_runtime: bool = True
    keep_polygons: bool = False
    workers: int = 1
    out: str | None = None
    layout: str = "circle"
    n: int = 10_000

    def validate(self) -> "ExperimentConfig":
        if self.trials < 1:
            raise ConfigError(f"trials must be at least 1, got {self.trials}")
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.dedup_tol <= 0:
            raise ConfigError("dedup_tol must be positive")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        for k in self.k_list:
            construction.ConstructionParams(k)
        if self.sigmas is not None:
            if any(not (s >= 0 and math.isfinite(s)) for s in self.sigmas):
                raise ConfigError("explicit sigmas must be finite and nonnegative")
        else:
            if self.sigma_count < 1 or self.sigma_start <= 0:
                raise ConfigError("sigma grid needs a positive start and count >= 1")
            if self.sigma_end is not None and not (0 < self.sigma_end < self.sigma_start):
                raise ConfigError("sigma grid must be positive and decreasing")
        return self

    def sigma_grid(self, k: int) -> np.ndarray:
        """Log-uniform from ``sigma_start`` down to ``sigma_end`` (default
        ``1e-4 / 2^k``), unless explicit values were given."""
        if self.sigmas is not None:
            return np.array(self.sigmas, dtype=float)
        end = self.sigma_end if self.sigma_end is not None else 1e-4 / 2.0 ** k
        if self.sigma_count == 1:
            return np.array([self.sigma_start])
        return np.logspace(math.log10(self.sigma_start), math.log10(end), self.sigma_count)


def row_seed(master_seed: int, k: int, sigma: float, trial: int) -> int:
    return derive_seed(master_seed, f"lb:k={k}:sigma={float(sigma)!r}:trial={trial}")


_INSTANCE_CACHE: dict = {}


def _base_instance(k: int, drop_s_bounds: bool, half_angle_frames: bool):
    key = (k, drop_s_bounds, half_angle_frames)
    if key not in _INSTANCE_CACHE:
        params = construction.ConstructionParams(k, half_angle_frames)
        h = construction.shifted_polytope(params, drop_s_bounds=drop_s_bounds)
        dual = construction.build_dual_instance(params, drop_s_bounds=drop_s_bounds)
        _INSTANCE_CACHE[key] = (h, dual)
    return _INSTANCE_CACHE[key]


def run_lb_row(cfg: ExperimentConfig, k: int, sigma: float, trial: int, seed: int | None = None) -> dict:
    """One (k, sigma, trial) measurement.  Solver failures become a status
    string instead of an exception so that a grid run always completes."""
    if seed is None:
        seed = row_seed(cfg.master_seed, k, sigma, trial)
    h, dual = _base_instance(k, cfg.drop_s_bounds, cfg.half_angle_frames)
    plane = Plane2D.coordinate(k + 5)
    row = {"k": k, "d": k + 5, "n": h.m, "sigma": float(sigma), "trial": trial, "seed": seed,
           "method": cfg.method, "shadow_count": "", "perimeter": "", "angle_sum": "",
           "runtime_ms": "", "status": "ok"}
    for t in cfg.ladder:
        row[f"count_tol_{t:.0e}"] = ""
    start = time.perf_counter()
    try:
        rng = SeededRng(seed)
        if cfg.method == "slice":
            cloud = construction.perturb_dual(dual, sigma, rng)
            poly = shadow.slice_polygon(cloud, plane)
            count = poly.edge_count
            ladder = {t: len(shadow.dedup_cyclic(poly.vertices, t)) for t in cfg.ladder}
        else:
            hp = construction.perturb_primal(h, sigma, rng)
            if cfg.method == "sweep":
                sweep = shadow.SweepConfig(2 ** (k + 5), cfg.angle_offset, cfg.dedup_tol)
                count, poly = shadow.sweep_count(hp, plane, sweep)
                ladder = shadow.ladder_counts(poly, cfg.ladder)
            else:
                poly = shadow.exact_shadow(hp, plane)
                count = poly.vertex_count
                ladder = {t: len(shadow.dedup_cyclic(poly.vertices, t)) for t in cfg.ladder}
        row["shadow_count"] = count
        if cfg.keep_polygons:
            # not a CSV column; lets callers inspect the polygon behind the count
            row["polygon"] = poly
        for t, c in ladder.items():
            row[f"count_tol_{t:.0e}"] = c
        if poly.vertex_count >= 3:
            stats = shadow.polygon_stats(poly)
            row["perimeter"] = stats.perimeter
            row["angle_sum"] = stats.angle_sum
    except ShadowLabError as exc:
        row["status"] = type(exc).__name__
    if cfg.record_runtime:
        row["runtime_ms"] = (time.perf_counter() - start) * 1e3
    return row


def _lb_job(args):
    cfg, k, sigma, trial = args
    return run_lb_row(cfg, k, sigma, trial)


def run_lb_grid(cfg: ExperimentConfig) -> list[dict]:
    cfg.validate()
    jobs = [(cfg, k, float(s), t) for k in sorted(cfg.k_list) for s in cfg.sigma_grid(k)
            for t in range(cfg.trials)]
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as pool:
            rows = list(pool.map(_lb_job, jobs, chunksize=1))
    else:
        rows = [_lb_job(j) for j in jobs]
    # deterministic order regardless of completion: by k, decreasing sigma, trial
    rows.sort(key=lambda r: (r["k"], -r["sigma"], r["trial"]))
    return rows


def run_2d_grid(cfg: ExperimentConfig) -> list[dict]:
    cfg.validate()
    if cfg.layout == "circle":
        layout = smoothed2d.Layout2D.circle(cfg.n)
    elif cfg.layout == "single_point":
        layout = smoothed2d.Layout2D.single_point(cfg.n)
    else:
        raise ConfigError(f"unknown layout {cfg.layout!r}")
    sigmas = cfg.sigmas if cfg.sigmas is not None else cfg.sigma_grid(0)
    rows = []
    for s in sigmas:
        summary = smoothed2d.run_2d_experiment(layout, float(s), cfg.trials,
                                               derive_seed(cfg.master_seed, f"2d:sigma={float(s)!r}"))
        rows.extend(summary.rows)
    return rows


def _cell(v) -> str:
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


def format_csv(rows: list[dict], columns) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([_cell(r.get(c, "")) for c in columns])
    return buf.getvalue()


def write_csv(rows, columns, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_csv(rows, columns))
    return path


def construct_files(k: int, out_dir, *, drop_s_bounds: bool = False,
                    half_angle_frames: bool = False) -> tuple[Path, Path]:
    """Write the shifted primal and the dual means for level ``k``."""
    params = construction.ConstructionParams(k, half_angle_frames)
    system = construction.build_primal(params, drop_s_bounds=drop_s_bounds)
    h = construction.shift_and_normalize(system, construction.center_point(params))
    dual = construction.build_dual_instance(params, drop_s_bounds=drop_s_bounds)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    htext = dumps_hpolytope(h, [f"shifted primal, k={k}, rows: {' '.join(system.row_tags)}"])
    dtext = dumps_cloud(dual.means, [f"dual means (rows / 30), k={k}, plane: coordinates 0 and 1"])
    hp = out / f"hpoly_k{k}_{_content_hash(htext)}.txt"
    dp = out / f"dual_k{k}_{_content_hash(dtext)}.txt"
    hp.write_text(htext)
    dp.write_text(dtext)
    return hp, dp


def _content_hash(text: str) -> str:
    return hashlib.blake2b(text.encode(), digest_size=4).hexdigest()


__all__ = ["ExperimentConfig", "METHODS", "LB_COLUMNS", "TWO_D_COLUMNS", "row_seed", "run_lb_row",
           "run_lb_grid", "run_2d_grid", "format_csv", "write_csv", "construct_files", "InvalidK"]

"""Seeded Monte Carlo studies: dephasing sweeps under static disorder,
reorganization-energy curves, vibrational-assistance comparisons,
segment-count studies, noise-distribution comparisons, and excitation
traces.

Every study is deterministic given its master seed.  Realizations are the
unit of parallelism; the per-realization seed is derived from (master
seed, grid index, realization index), and results are aggregated in a
fixed order so the worker count never changes the output.
"""

from __future__ import annotations

import csv
import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import analysis, dynamics, noise as noise_mod
from .errors import PhysicsError
from .model import (FmoSpec, Hamiltonian, apply_static_disorder, attach_sink,
                    attach_vibrational_mode, build_fmo_hamiltonian)

__all__ = ["SweepConfig", "SweepResult", "sweep_dephasing",
           "reorganization_curve", "vibrational_comparison",
           "segment_count_study", "noise_distribution_comparison",
           "excitation_trace_study", "write_sweep_csv", "write_manifest"]

DEFAULT_GRID = tuple(round(0.1 * k, 10) for k in range(11))


@dataclass(frozen=True)
class SweepConfig:
    """Parameters of one Monte Carlo sweep over detuning amplitude."""

    grid: tuple = DEFAULT_GRID
    realizations: int = 100
    fmo: FmoSpec = field(default_factory=FmoSpec)
    noise_kind: str = "uniform_white"
    disorder: float = 0.0
    observe_z: float = 20.0
    seed: int = 0
    sink_length: int = 100
    segments: int = 20
    with_vibration: bool = False
    coupling_correction: bool = False
    filter_time_scale: float = 0.2
    threads: int = 1

    def __post_init__(self):
        if self.realizations < 1:
            raise PhysicsError("realizations must be >= 1")
        if not self.grid:
            raise PhysicsError("grid must be nonempty")
        if any(b < a for a, b in zip(self.grid, self.grid[1:])):
            raise PhysicsError("grid must be sorted ascending")
        if self.disorder < 0:
            raise PhysicsError("disorder strength must be nonnegative")
        if self.observe_z <= 0:
            raise PhysicsError("observation length must be positive")
        object.__setattr__(self, "grid", tuple(float(g) for g in self.grid))

    def canonical_dict(self) -> dict:
        d = asdict(self)
        # worker count is an execution detail, not part of the study:
        # results are aggregated in fixed order, so any thread count
        # yields identical output and must hash identically
        d.pop("threads")
        fd = asdict(self.fmo)
        fd["raw_hamiltonian"] = np.asarray(fd["raw_hamiltonian"]).tolist()
        d["fmo"] = fd
        return d

    def config_hash(self) -> str:
        blob = json.dumps(self.canonical_dict(), sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class SweepResult:
    """Per-grid-point observable statistics plus raw realization values."""

    grid: np.ndarray
    means: np.ndarray
    stds: np.ndarray
    values: np.ndarray          # (len(grid), realizations)
    config_hash: str
    seed: int

    def __post_init__(self):
        for name in ("grid", "means", "stds", "values"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if np.any(self.stds < 0):
            raise PhysicsError("standard deviations must be nonnegative")

    @property
    def argmax_value(self) -> float:
        return float(self.grid[int(np.argmax(self.means))])


def _base_hamiltonian(cfg: SweepConfig) -> Hamiltonian:
    h = build_fmo_hamiltonian(cfg.fmo)
    if cfg.with_vibration:
        h = attach_vibrational_mode(h)
    return attach_sink(h, cfg.sink_length)


def _noise_seed(master: int, grid_index: int, realization: int) -> int:
    ss = np.random.SeedSequence((master, grid_index, realization))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _realization_trace(cfg: SweepConfig, base: Hamiltonian, amplitude: float,
                       grid_index: int, realization: int,
                       fine_step: float) -> dynamics.EvolutionTrace:
    h = base
    if cfg.disorder > 0:
        h = apply_static_disorder(
            h, cfg.disorder,
            rng_seed=[cfg.seed, grid_index, realization, 1], sites="all")
    ncfg = noise_mod.NoiseConfig(
        kind=cfg.noise_kind, amplitude=amplitude, segments=cfg.segments,
        total_length=cfg.observe_z, seed=_noise_seed(cfg.seed, grid_index, realization),
        filter_time_scale=cfg.filter_time_scale)
    if amplitude == 0.0:
        det = noise_mod.NoiseRealization(
            np.zeros((len(h.fmo_indices), cfg.segments)),
            replace(ncfg, amplitude=0.0))
    else:
        det = noise_mod.generate(ncfg, n_sites=len(h.fmo_indices))
    ph = dynamics.PiecewiseHamiltonian(
        h, det, segment_length=cfg.observe_z / cfg.segments,
        total_length=cfg.observe_z, coupling_correction=cfg.coupling_correction)
    return dynamics.evolve(ph, fine_step=fine_step)


def _efficiency_matrix(cfg: SweepConfig, base: Hamiltonian) -> np.ndarray:
    grid = cfg.grid
    values = np.empty((len(grid), cfg.realizations))
    tasks = [(gi, r) for gi in range(len(grid)) for r in range(cfg.realizations)]

    def one(task):
        gi, r = task
        tr = _realization_trace(cfg, base, grid[gi], gi, r,
                                fine_step=cfg.observe_z / cfg.segments)
        return gi, r, analysis.transport_efficiency(tr)

    if cfg.threads == 1:
        results = map(one, tasks)
    else:
        workers = cfg.threads if cfg.threads > 0 else None
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(one, tasks))
    for gi, r, eta in results:
        values[gi, r] = eta
    return values


def _make_result(cfg: SweepConfig, values: np.ndarray) -> SweepResult:
    return SweepResult(np.asarray(cfg.grid), values.mean(axis=1),
                       values.std(axis=1), values, cfg.config_hash(), cfg.seed)


def sweep_dephasing(cfg: SweepConfig) -> SweepResult:
    """Mean transport efficiency at z per detuning amplitude on the grid."""
    return _make_result(cfg, _efficiency_matrix(cfg, _base_hamiltonian(cfg)))


def reorganization_curve(cfg: SweepConfig):
    """(variance, reorganization energy) pairs over the grid plus their fit.

    Pure noise post-processing: sequences are generated at each amplitude,
    their variance and periodogram-based reorganization energy averaged
    over sites and realizations.  Returns (points array, LinearFitResult).
    """
    pts = []
    for gi, amplitude in enumerate(cfg.grid):
        if amplitude == 0.0:
            pts.append((0.0, 0.0))
            continue
        var_acc = 0.0
        er_acc = 0.0
        count = 0
        for r in range(cfg.realizations):
            ncfg = noise_mod.NoiseConfig(
                kind=cfg.noise_kind, amplitude=amplitude, segments=cfg.segments,
                total_length=cfg.observe_z,
                seed=_noise_seed(cfg.seed, gi, r),
                filter_time_scale=cfg.filter_time_scale)
            real = noise_mod.generate(ncfg)
            f_s = ncfg.sampling_frequency
            for row in real.sequences:
                var_acc += analysis.variance(row)
                er_acc += analysis.reorganization_energy(
                    analysis.psd_periodogram(row, f_s))
                count += 1
        pts.append((var_acc / count, er_acc / count))
    points = np.asarray(pts)
    fit = analysis.fit_reorganization_law(points)
    return points, fit


def vibrational_comparison(cfg: SweepConfig):
    """Mean efficiency vs z with and without the auxiliary vibration mode.

    Returns (positions, mean_with, mean_without), each averaged over the
    realizations at every amplitude on the grid; shapes are
    (n_samples,), (len(grid), n_samples), (len(grid), n_samples).
    """
    fine = cfg.observe_z / cfg.segments / 4.0
    base_without = _base_hamiltonian(replace(cfg, with_vibration=False))
    base_with = _base_hamiltonian(replace(cfg, with_vibration=True))
    positions = None
    curves = {}
    for label, base in (("with", base_with), ("without", base_without)):
        per_amp = []
        for gi, amplitude in enumerate(cfg.grid):
            acc = None
            for r in range(cfg.realizations):
                tr = _realization_trace(cfg, base, amplitude, gi, r, fine)
                sink = list(tr.sink_indices)
                p = np.abs(tr.amplitudes) ** 2
                eta = p[:, sink].sum(axis=1) / p.sum(axis=1)
                acc = eta if acc is None else acc + eta
                if positions is None:
                    positions = tr.positions
            per_amp.append(acc / cfg.realizations)
        curves[label] = np.asarray(per_amp)
    return positions, curves["with"], curves["without"]


def segment_count_study(cfg: SweepConfig, segment_counts=(10, 20, 40, 60, 80)):
    """Efficiency at the chip end for several segmentations of 20 mm.

    Returns a dict mapping segment count to a SweepResult over cfg.grid.
    """
    out = {}
    for n_seg in segment_counts:
        sub = replace(cfg, segments=int(n_seg))
        out[int(n_seg)] = sweep_dephasing(sub)
    return out


def noise_distribution_comparison(cfg: SweepConfig):
    """Efficiency curve per noise kind plus each kind's normalized mean.

    Returns (results, profile_means): results maps kind -> SweepResult;
    profile_means maps kind -> mean of the unit-amplitude noise profile,
    estimated over the study's realizations.
    """
    results = {}
    profile_means = {}
    for kind in noise_mod.NOISE_KINDS:
        sub = replace(cfg, noise_kind=kind)
        results[kind] = sweep_dephasing(sub)
        acc = 0.0
        for r in range(cfg.realizations):
            ncfg = noise_mod.NoiseConfig(
                kind=kind, amplitude=1.0, segments=cfg.segments,
                total_length=cfg.observe_z, seed=_noise_seed(cfg.seed, 0, r),
                filter_time_scale=cfg.filter_time_scale)
            acc += float(noise_mod.generate(ncfg).sequences.mean())
        profile_means[kind] = acc / cfg.realizations
    return results, profile_means


def excitation_trace_study(cfg: SweepConfig,
                           disorders=(0.0, 3.0, 6.0, 10.0),
                           amplitudes=(0.1, 0.3, 0.5, 0.7, 1.0, 80.0)):
    """Renormalized seven-site probability tables and most-probable-site
    traces for a disorder family (no detuning) and a detuning family (no
    disorder).  Returns {(label, value): (positions, probs, argmax)}.
    """
    out = {}
    fine = cfg.observe_z / cfg.segments / 4.0
    for gamma in disorders:
        sub = replace(cfg, disorder=float(gamma))
        base = _base_hamiltonian(sub)
        tr = _realization_trace(sub, base, 0.0, 0, 0, fine)
        probs = dynamics.site_probabilities(tr, tr.fmo_indices, renormalize=True)
        out[("disorder", float(gamma))] = (tr.positions, probs,
                                           analysis.most_probable_site(tr))
    base = _base_hamiltonian(replace(cfg, disorder=0.0))
    for amplitude in amplitudes:
        sub = replace(cfg, disorder=0.0)
        tr = _realization_trace(sub, base, float(amplitude), 0, 0, fine)
        probs = dynamics.site_probabilities(tr, tr.fmo_indices, renormalize=True)
        out[("detuning", float(amplitude))] = (tr.positions, probs,
                                               analysis.most_probable_site(tr))
    return out


def write_sweep_csv(result: SweepResult, raw_path, summary_path) -> None:
    """Emit raw per-realization values and summary statistics as CSV."""
    with open(raw_path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["grid_value", "realization", "efficiency"])
        for gi, g in enumerate(result.grid):
            for r, v in enumerate(result.values[gi]):
                w.writerow([f"{g:.15g}", r, f"{v:.15g}"])
    with open(summary_path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["grid_value", "mean", "std"])
        for g, m, s in zip(result.grid, result.means, result.stds):
            w.writerow([f"{g:.15g}", f"{m:.15g}", f"{s:.15g}"])


def write_manifest(cfg: SweepConfig, path) -> None:
    """Emit a JSON run manifest: config echo, seed, code version."""
    from . import __version__
    doc = {"config": cfg.canonical_dict(), "seed": cfg.seed,
           "config_hash": cfg.config_hash(), "version": __version__}
    with open(path, "w", encoding="utf-8") as f:
        json.dump(doc, f, indent=2, sort_keys=True)
        f.write("\n")

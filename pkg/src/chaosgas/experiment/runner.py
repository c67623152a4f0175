from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .. import __version__
from ..chaos import (
    DEFAULT_WINDOW,
    ChaoticState,
    MapParams,
    iterate,
    occupancy_asymmetry,
    power_spectrum,
)
from ..market import RNG_ALGORITHM, passive_agents, run_simulation
from ..stats import (
    CLASS_NAMES,
    FitError,
    active_set,
    ccdf,
    classify,
    default_exponential_range,
    fit_exponential,
    fit_pareto,
    winloss_profile,
)
from . import io
from .config import ExperimentConfig, SweepSpec

log = logging.getLogger(__name__)

SUMMARY_COLUMNS = (
    "case_id", "lambda_a", "lambda_b", "status",
    *(f"{c}_population" for c in CLASS_NAMES),
    *(f"{c}_money" for c in CLASS_NAMES),
    "n_active", "n_passive", "n_never_selected", "n_never_lose",
    "executed", "skipped_insufficient", "skipped_self", "error",
)


@dataclass
class RunArtifacts:
    directory: Path
    files: dict[str, Path]
    summary: dict = field(default_factory=dict)


@dataclass
class SweepResult:
    rows: list[dict]
    summary_file: Path

    @property
    def failures(self) -> list[dict]:
        return [r for r in self.rows if r["status"] != "ok"]


def run_case(config: ExperimentConfig) -> RunArtifacts:
    """Simulate one case, analyse it and write every artifact to ``config.case_dir``."""
    out = config.case_dir
    out.mkdir(parents=True, exist_ok=True)
    start = ChaoticState(*config.map_start)

    t0 = time.perf_counter()
    result = run_simulation(
        config.market, config.params, start, config.map_discard,
        config.total_steps, config.rng_seed, trace=config.emit_trace,
    )
    elapsed = time.perf_counter() - t0
    log.info("case %s: %d transactions in %.2f s (%.3g tx/s)",
             config.case_id, config.total_steps, elapsed, config.total_steps / max(elapsed, 1e-12))

    balances = result.ledger.balances
    activity = result.activity
    summ = result.summary
    report = passive_agents(activity)
    active = active_set(config.n_agents, report.passive)

    files: dict[str, Path] = {}
    files["balances"] = io.write_columns(
        out / "balances.csv", ("agent_index", "final_money"), (np.arange(config.n_agents), balances))
    files["activity"] = io.write_columns(
        out / "activity.csv",
        ("agent_index", "times_i", "times_j", "executed_as_i", "executed_as_j"),
        (np.arange(config.n_agents), activity.times_i, activity.times_j,
         activity.executed_as_i, activity.executed_as_j),
    )

    row = {"case_id": config.case_id, "lambda_a": config.lambda_a, "lambda_b": config.lambda_b,
           "status": "ok", "error": ""}
    row.update(n_active=len(active), n_passive=len(report.passive), n_never_selected=report.never_selected,
               executed=summ.executed, skipped_insufficient=summ.skipped_insufficient,
               skipped_self=summ.skipped_self)

    fits = []
    if len(active):
        c = ccdf(balances, active)
        files["ccdf"] = io.write_columns(out / "ccdf.csv", ("money_level", "prob_geq"),
                                         (c.money_levels, c.prob_geq))
        classes = classify(balances, active, config.class_bounds)
        files["classes"] = io.write_csv(
            out / "classes.csv", ("class", "population_share", "money_share"),
            [(n, classes.population_share[n], classes.money_share[n]) for n in CLASS_NAMES],
        )
        for n in CLASS_NAMES:
            row[f"{n}_population"] = classes.population_share[n]
            row[f"{n}_money"] = classes.money_share[n]
        fits = _fits(c, config)
        never_lose = activity.executed_as_i[active] == 0
        row["n_never_lose"] = int(np.count_nonzero(never_lose))
    else:
        log.warning("case %s: no active agents; distribution statistics skipped", config.case_id)
        row["n_never_lose"] = 0

    files["fits"] = io.write_csv(
        out / "fits.csv", ("model", "parameter", "lo", "hi", "r_squared"),
        [(f.model, f.parameter, f.fit_range[0], f.fit_range[1], f.r_squared) for f in fits],
    )
    prof = winloss_profile(activity, balances)
    files["winloss"] = io.write_columns(
        out / "winloss.csv", ("rank", "agent_index", "losses", "net_wins"),
        (np.arange(config.n_agents), prof.agent_index, prof.losses, prof.net_wins),
    )
    if result.trace is not None:
        tr = result.trace
        files["trace"] = io.write_columns(
            out / "trace.csv", ("t", "i", "j", "upsilon", "delta_m", "executed"),
            (np.arange(1, len(tr.i) + 1), tr.i, tr.j, tr.upsilon, tr.delta_m, tr.executed),
        )

    meta = [*config.items(),
            ("total_money", config.market.total_money),
            ("rng_algorithm", RNG_ALGORITHM),
            ("code_version", f"chaosgas {__version__}"),
            ("in_chaotic_window", config.params.in_chaotic_window),
            ("conservation_rel_error", summ.conservation_error),
            ("final_map_state", f"{io.fmt(summ.final_state.x)}, {io.fmt(summ.final_state.y)}"),
            *((k, row[k]) for k in ("executed", "skipped_insufficient", "skipped_self",
                                     "n_passive", "n_never_selected")),
            *((f"file_{k}", p.name) for k, p in files.items())]
    files["metadata"] = io.write_kv(out / "metadata.kv", meta)
    return RunArtifacts(out, files, row)


def _fits(c, config: ExperimentConfig) -> list:
    fits = []
    try:
        lo_hi = default_exponential_range(c, config.exp_fit_min_prob)
        fits.append(fit_exponential(c, lo_hi))
    except FitError as exc:
        log.warning("case %s: exponential fit skipped (%s)", config.case_id, exc)
    segments = [(config.pareto_threshold, config.pareto_break)]
    if config.pareto_break is not None:
        segments.append((config.pareto_break, None))
    for lo, hi in segments:
        try:
            fits.append(fit_pareto(c, lo, hi))
        except FitError as exc:
            log.warning("case %s: pareto fit from %g skipped (%s)", config.case_id, lo, exc)
    for f in fits:
        if f.flagged:
            log.warning("case %s: %s fit has non-negative slope", config.case_id, f.model)
    return fits


def _run_row(config: ExperimentConfig) -> dict:
    try:
        return run_case(config).summary
    except Exception as exc:  # reported per case; siblings keep running
        log.error("case %s failed: %s", config.case_id, exc)
        return {"case_id": config.case_id, "lambda_a": config.lambda_a, "lambda_b": config.lambda_b,
                "status": "failed", "error": f"{type(exc).__name__}: {exc}"}


def run_sweep(spec: SweepSpec, parallelism: int = 1) -> SweepResult:
    """Run every case of ``spec``; write ``summary.csv`` in the base output directory."""
    if parallelism < 1:
        raise ValueError("parallelism must be >= 1")
    configs = spec.configs()
    if parallelism == 1 or len(configs) == 1:
        rows = [_run_row(c) for c in configs]
    else:
        with ProcessPoolExecutor(max_workers=min(parallelism, len(configs))) as pool:
            rows = list(pool.map(_run_row, configs))
    spec.base.output_dir.mkdir(parents=True, exist_ok=True)
    path = io.write_csv(spec.base.output_dir / "summary.csv", SUMMARY_COLUMNS,
                        [[r.get(k, "") for k in SUMMARY_COLUMNS] for r in rows])
    return SweepResult(rows, path)


def emit_diagnostics(params: MapParams, start: ChaoticState, n: int, discard: int, output_dir: Path,
                     window: int = DEFAULT_WINDOW, occupancy_points: int = 1_000_000) -> dict[str, Path]:
    """Write the attractor point cloud, the x_t spectrum and the occupancy record."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if n < 2000:
        log.warning("attractor plots conventionally use at least 2000 points (got %d)", n)
    output_dir = Path(output_dir)
    output_dir.mkdir(parents=True, exist_ok=True)
    orbit = iterate(start, params, max(n, window, occupancy_points), discard)
    cloud = orbit[:n]
    spec = power_spectrum(orbit[:max(n, window), 0], window)
    occ = occupancy_asymmetry(orbit[:occupancy_points])
    return {
        "attractor": io.write_columns(output_dir / "attractor.csv", ("x", "y"), (cloud[:, 0], cloud[:, 1])),
        "spectrum": io.write_columns(output_dir / "spectrum.csv", ("w", "magnitude"),
                                     (spec.freqs, spec.magnitudes)),
        "occupancy": io.write_csv(
            output_dir / "occupancy.csv",
            ("lambda_a", "lambda_b", "n_points", "frac_x_gt_y", "frac_y_gt_x", "frac_diag"),
            [(params.lambda_a, params.lambda_b, occ.n_points, occ.frac_x_gt_y, occ.frac_y_gt_x,
              occ.frac_diag)],
        ),
    }

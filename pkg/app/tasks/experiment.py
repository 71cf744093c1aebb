# app/tasks/experiment.py

import json
import logging
import math
import platform
from datetime import datetime, timezone
from importlib import metadata
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
import yaml

from app.core.config import settings
from app.db.database import open_session
from app.models.run import DensityResult, OracleRun, Run
from app.schemas.scenario import ScenarioConfig
from app.schemas.trace import DensitySummary, OracleResult, RunManifest
from app.sim.coordinator import Scenario, build_scenario, run_sweep
from app.sim.oracle import exhaustive_search
from app.utils import csv_io
from app.utils.config_file import config_hash, dump_config

logger = logging.getLogger(__name__)

PACKAGE_VERSION = "0.1.0"
MANIFEST_NAME = "manifest.json"
ORACLE_MANIFEST_NAME = "oracle_manifest.json"


def output_dir(config: ScenarioConfig) -> Path:
    out = Path(config.output.out_dir or settings.OUT_DIR)
    out.mkdir(parents=True, exist_ok=True)
    return out


def versions() -> Dict[str, str]:
    found = {"femtonet": PACKAGE_VERSION, "python": platform.python_version(), "numpy": np.__version__}
    for package in ("pydantic", "sqlalchemy", "pyyaml"):
        try:
            found[package] = metadata.version(package)
        except metadata.PackageNotFoundError:
            found[package] = "unknown"
    return found


def complexity_rows(scenario: Scenario, summaries: List[DensitySummary]) -> List[Dict]:
    n_power = len(scenario.actions)
    q_entries = scenario.config.rings.n_states * n_power
    return [
        {
            "m": s.m,
            "q_table_entries": q_entries,
            "joint_actions_log2": s.m * math.log2(n_power),
            "iterations_to_converge": s.iterations_to_converge,
        }
        for s in summaries
    ]


def _manifest(kind: str, config: ScenarioConfig, admission_order=(), artifacts=()) -> RunManifest:
    return RunManifest(
        kind=kind,
        seed=config.seed,
        config_hash=config_hash(config),
        created_at=datetime.now(timezone.utc),
        versions=versions(),
        admission_order=list(admission_order),
        artifacts=[str(a) for a in artifacts],
    )


def _write_manifest(out_dir: Path, name: str, manifest: RunManifest) -> Path:
    path = out_dir / name
    path.write_text(manifest.model_dump_json(indent=2) + "\n", encoding="utf-8")
    return path


def run_experiment(config: ScenarioConfig) -> RunManifest:
    """
    Runs the individual and cooperative phases over densities 1..m_max and writes:
      1) one trace CSV per density plus summary.csv
      2) plot-data CSVs (MUE, per-FUE and sum capacity, iterations, fairness, complexity)
      3) the effective scenario, the realized topology and manifest.json
      4) a row set in the results store when one is configured.
    """
    out_dir = output_dir(config)
    logger.info("▶ Experiment seed=%d m_max=%d -> %s", config.seed, config.phases.m_max, out_dir)

    scenario, trace = run_sweep(config)
    summaries = trace.summaries

    artifacts = [csv_io.write_density_trace(out_dir, d) for d in trace.densities]
    artifacts.append(csv_io.write_summary(out_dir, summaries))
    complexity = complexity_rows(scenario, summaries)
    artifacts.extend(csv_io.write_plot_data(out_dir, summaries, complexity))
    artifacts.append(csv_io.write_runtime(out_dir, summaries))
    artifacts.append(dump_config(config, out_dir / "scenario.yaml"))

    topology_path = out_dir / "topology.yaml"
    positions = scenario.topology.to_positions().model_dump(mode="json")
    topology_path.write_text(yaml.safe_dump({"layout": {"positions": positions}}, sort_keys=True), encoding="utf-8")
    artifacts.append(topology_path)

    manifest = _manifest("experiment", config, trace.admission_order, [a.name for a in artifacts])
    _write_manifest(out_dir, MANIFEST_NAME, manifest)
    _persist_experiment(out_dir, manifest, summaries, complexity)

    logger.info("✅ Wrote %d artifacts to %s", len(artifacts) + 1, out_dir)
    return manifest


def _persist_experiment(out_dir: Path, manifest: RunManifest, summaries, complexity) -> None:
    url = settings.database_url_for(out_dir)
    if url is None:
        return
    with open_session(url) as db:
        run = Run(kind=manifest.kind, seed=manifest.seed, config_hash=manifest.config_hash,
                  created_at=manifest.created_at, manifest=manifest.model_dump_json())
        for s, c in zip(summaries, complexity):
            run.densities.append(DensityResult(
                m=s.m,
                c_mue_final=s.c_mue_final,
                min_fue_capacity=s.min_fue_capacity,
                sum_capacity=s.sum_capacity,
                jain=s.jain,
                iterations_to_converge=s.iterations_to_converge,
                converged=s.converged,
                qos_satisfied=s.qos_satisfied,
                elapsed_seconds=s.elapsed_seconds,
                q_table_entries=c["q_table_entries"],
                joint_actions_log2=c["joint_actions_log2"],
            ))
        db.add(run)
    logger.info("⏱ Recorded run in results store %s", url)


def learned_sum_capacity(out_dir: Path, config: ScenarioConfig, m: int) -> Optional[float]:
    """Sum FUE capacity at density m from an earlier experiment on the same scenario, if any."""
    manifest_path = out_dir / MANIFEST_NAME
    summary_path = out_dir / "summary.csv"
    if not (manifest_path.exists() and summary_path.exists()):
        return None
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    if manifest.get("config_hash") != config_hash(config):
        logger.warning("⚠️ %s belongs to a different scenario; no optimality gap", manifest_path)
        return None
    for row in csv_io.read_rows(summary_path):
        if int(row["m"]) == m:
            return float(row["sum_capacity"])
    return None


def optimality_gap(oracle_sum: float, learned_sum: float) -> float:
    return (oracle_sum - learned_sum) / oracle_sum


def run_oracle(config: ScenarioConfig) -> Tuple[OracleResult, Optional[float]]:
    """
    Exhaustive search on the full m_max layout; writes oracle.csv and, when an
    experiment for the same scenario sits in the output directory, the optimality gap.
    """
    out_dir = output_dir(config)
    scenario = build_scenario(config)
    result = exhaustive_search(scenario.gains, scenario.actions, scenario.thresholds, config)

    m = scenario.m_total
    learned = learned_sum_capacity(out_dir, config, m)
    gap = optimality_gap(result.best_objective, learned) if learned is not None else None
    path = csv_io.write_oracle(out_dir / "oracle.csv", m, len(scenario.actions), result, learned, gap)

    manifest = _manifest("oracle", config, artifacts=[path.name])
    _write_manifest(out_dir, ORACLE_MANIFEST_NAME, manifest)
    url = settings.database_url_for(out_dir)
    if url is not None:
        with open_session(url) as db:
            run = Run(kind="oracle", seed=config.seed, config_hash=manifest.config_hash,
                      created_at=manifest.created_at, manifest=manifest.model_dump_json())
            run.oracle_runs.append(OracleRun(
                m=m,
                n_power=len(scenario.actions),
                joint_actions=result.joint_actions,
                best_action=" ".join(str(i) for i in result.best_action),
                best_objective=result.best_objective,
                feasible=result.feasible,
                optimality_gap=gap,
            ))
            db.add(run)

    logger.info("✅ Oracle best=%s objective=%.4f feasible=%s gap=%s",
                result.best_action, result.best_objective, result.feasible, gap)
    return result, gap

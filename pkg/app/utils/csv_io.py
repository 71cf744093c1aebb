# app/utils/csv_io.py

"""
CSV artifacts of a run. Column lists are part of the output contract; floats are
written with repr() so values round-trip exactly and reruns are byte-identical.
"""

import csv
from pathlib import Path
from typing import Dict, Iterable, List, Sequence

from app.schemas.trace import DensitySummary, DensityTrace, OracleResult

TRACE_COLUMNS = ["iteration", "agent_id", "action_dbm", "c_mue", "c_fue_i", "reward", "max_q_delta"]
SUMMARY_COLUMNS = ["m", "c_mue_final", "min_fue_capacity", "sum_capacity", "jain", "iterations_to_converge"]
ORACLE_COLUMNS = ["m", "n_power", "joint_actions", "best_action", "best_objective", "feasible", "c_mue", "c_fue",
                  "learned_sum_capacity", "optimality_gap"]


def _fmt(value) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_rows(path: Path, columns: Sequence[str], rows: Iterable[Dict]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in columns])
    return path


def read_rows(path: Path) -> List[Dict[str, str]]:
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.DictReader(f))


def density_trace_name(m: int) -> str:
    return f"density_{m:02d}.csv"


def write_density_trace(out_dir: Path, trace: DensityTrace) -> Path:
    rows = (row for record in trace.records for row in record.rows())
    return write_rows(Path(out_dir) / density_trace_name(trace.m), TRACE_COLUMNS, rows)


def write_summary(out_dir: Path, summaries: Sequence[DensitySummary]) -> Path:
    return write_rows(Path(out_dir) / "summary.csv", SUMMARY_COLUMNS, (s.model_dump() for s in summaries))


def write_plot_data(out_dir: Path, summaries: Sequence[DensitySummary], complexity: Sequence[Dict]) -> List[Path]:
    """One tidy file per chart: MUE capacity, per-FUE capacities, sum capacity, iterations, fairness."""
    out_dir = Path(out_dir)
    written = [
        write_rows(out_dir / "plot_mue_capacity.csv", ["m", "c_mue"],
                   ({"m": s.m, "c_mue": s.c_mue_final} for s in summaries)),
        write_rows(out_dir / "plot_fue_capacity.csv", ["m", "agent_id", "c_fue"],
                   ({"m": s.m, "agent_id": a, "c_fue": c}
                    for s in summaries for a, c in zip(s.agent_ids, s.fue_capacities))),
        write_rows(out_dir / "plot_sum_capacity.csv", ["m", "sum_capacity"],
                   ({"m": s.m, "sum_capacity": s.sum_capacity} for s in summaries)),
        write_rows(out_dir / "plot_iterations.csv", ["m", "iterations_to_converge", "converged"],
                   ({"m": s.m, "iterations_to_converge": s.iterations_to_converge, "converged": s.converged}
                    for s in summaries)),
        write_rows(out_dir / "plot_fairness.csv", ["m", "jain"],
                   ({"m": s.m, "jain": s.jain} for s in summaries)),
        write_rows(out_dir / "complexity.csv",
                   ["m", "q_table_entries", "joint_actions_log2", "iterations_to_converge"], complexity),
    ]
    return written


def write_runtime(out_dir: Path, summaries: Sequence[DensitySummary]) -> Path:
    """Wall-clock per density; kept apart from the summary so the summary stays reproducible."""
    return write_rows(Path(out_dir) / "runtime.csv", ["m", "elapsed_seconds", "iterations_run"],
                      (s.model_dump() for s in summaries))


def write_oracle(path: Path, m: int, n_power: int, result: OracleResult,
                 learned_sum: float | None, gap: float | None) -> Path:
    row = {
        "m": m,
        "n_power": n_power,
        "joint_actions": result.joint_actions,
        "best_action": " ".join(str(i) for i in result.best_action),
        "best_objective": result.best_objective,
        "feasible": result.feasible,
        "c_mue": result.c_mue,
        "c_fue": " ".join(repr(c) for c in result.c_fue),
        "learned_sum_capacity": "" if learned_sum is None else learned_sum,
        "optimality_gap": "" if gap is None else gap,
    }
    return write_rows(path, ORACLE_COLUMNS, [row])

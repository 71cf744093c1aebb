# app/sim/coordinator.py

"""
Multi-agent orchestration: synchronous joint-action iterations, same-state Q-row
sharing, the individual -> cooperative admission protocol, convergence detection,
constraint checks and fairness metrics.
"""

import logging
import time
from dataclasses import dataclass, replace
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from app.core.errors import DomainError
from app.schemas.scenario import ConvergenceCriterion, ScenarioConfig
from app.schemas.trace import ConstraintReport, DensitySummary, DensityTrace, IterationRecord, RunTrace
from app.sim.channel import GainMatrix, NoisePower, build_gain_matrix, evaluate_capacities, link_budget
from app.sim.learning import ActionSet, QTable, action_set_from_config, epsilon_at, q_update, select_action
from app.sim.reward import QosThresholds, RewardInputs, resolve_reward
from app.sim.topology import AgentState, Topology, agent_state, beta, layout_from_config

logger = logging.getLogger(__name__)

ADMISSION_STREAM = 0xA11
AGENT_STREAM = 0xA6E


@dataclass
class FemtoAgent:
    agent_id: int
    state: AgentState
    beta: float
    table: QTable
    rng: np.random.Generator

    @property
    def row_index(self) -> int:
        return self.table.row_index(self.state)

    @property
    def active_row(self) -> np.ndarray:
        return self.table.values[self.row_index]


@dataclass(frozen=True, eq=False)
class Scenario:
    """Everything fixed for a run: geometry, gains, action set, per-FBS state and beta."""

    config: ScenarioConfig
    topology: Topology
    gains: GainMatrix
    actions: ActionSet
    states: Tuple[AgentState, ...]
    betas: Tuple[float, ...]
    thresholds: QosThresholds
    p_bs_mw: float
    noise: NoisePower
    reward_fn: Callable[[RewardInputs], float]

    @property
    def m_total(self) -> int:
        return self.topology.m


def build_scenario(config: ScenarioConfig, topology: Optional[Topology] = None) -> Scenario:
    topology = topology or layout_from_config(config.layout, config.phases.m_max, config.seed)
    p_bs_mw, noise = link_budget(config.channel)
    return Scenario(
        config=config,
        topology=topology,
        gains=build_gain_matrix(topology, config.channel),
        actions=action_set_from_config(config.power),
        states=tuple(agent_state(f, topology.mbs, topology.mue, config.rings) for f in topology.fbs),
        betas=tuple(beta(f, topology.mue, config.reward.d_th_m) for f in topology.fbs),
        thresholds=QosThresholds(config.qos.q_mue, config.fue_thresholds(topology.m)),
        p_bs_mw=p_bs_mw,
        noise=noise,
        reward_fn=resolve_reward(config.reward),
    )


def make_agent(agent_id: int, scenario: Scenario, table: Optional[QTable] = None) -> FemtoAgent:
    if not 0 <= agent_id < scenario.m_total:
        raise DomainError(f"agent {agent_id} is not part of the {scenario.m_total}-FBS layout")
    return FemtoAgent(
        agent_id=agent_id,
        state=scenario.states[agent_id],
        beta=scenario.betas[agent_id],
        table=table or QTable(scenario.config.rings, len(scenario.actions)),
        rng=np.random.default_rng([scenario.config.seed, AGENT_STREAM, agent_id]),
    )


# ─── One iteration ───────────────────────────────────────────────────────────
def step(agents: Sequence[FemtoAgent], scenario: Scenario, iteration: int) -> IterationRecord:
    """
    All active agents pick a power, the environment is evaluated once for the
    joint action, and each agent applies its own Q-update.
    """
    learning = scenario.config.learning
    eps = epsilon_at(iteration, learning)
    actions = np.array([select_action(a.active_row, eps, a.rng) for a in agents], dtype=int)
    ids = [a.agent_id for a in agents]

    powers = np.zeros(scenario.m_total)
    powers[ids] = scenario.actions.levels_mw[actions]
    c_mue, c_fue_all = evaluate_capacities(scenario.p_bs_mw, powers, scenario.gains, scenario.noise)
    c_mue = float(c_mue)
    c_fue = c_fue_all[ids]

    q_mue = scenario.thresholds.q_mue
    rewards = np.empty(len(agents))
    max_delta = 0.0
    for k, agent in enumerate(agents):
        rewards[k] = scenario.reward_fn(
            RewardInputs(float(c_fue[k]), c_mue, agent.beta, scenario.thresholds.q_fue[agent.agent_id], q_mue)
        )
        before = agent.table.values[agent.row_index, actions[k]]
        after = q_update(agent.table, agent.state, int(actions[k]), float(rewards[k]), agent.state, learning)
        max_delta = max(max_delta, abs(after - before))

    return IterationRecord(
        iteration=iteration,
        agent_ids=tuple(ids),
        actions=actions,
        action_dbm=scenario.actions.levels_dbm[actions],
        powers_mw=scenario.actions.levels_mw[actions],
        c_mue=c_mue,
        c_fue=c_fue,
        rewards=rewards,
        max_q_delta=max_delta,
    )


def share_rows(agents: Iterable[FemtoAgent], quantization: Optional[float] = None) -> float:
    """
    Replace the active row of every agent in a same-state group by the group mean.
    Returns the largest absolute entry change.
    """
    groups = {}
    for agent in agents:
        groups.setdefault(agent.state, []).append(agent)

    max_change = 0.0
    for members in groups.values():
        if len(members) < 2:
            continue
        rows = np.stack([a.active_row for a in members])
        if quantization:
            rows = np.round(rows / quantization) * quantization
        elif np.all(rows == rows[0]):
            continue
        mean = rows.mean(axis=0)
        for agent in members:
            idx = agent.row_index
            max_change = max(max_change, float(np.max(np.abs(agent.table.values[idx] - mean))))
            agent.table.values[idx] = mean
    return max_change


# ─── Convergence ─────────────────────────────────────────────────────────────
def detect_convergence(deltas: Sequence[float], criterion: ConvergenceCriterion) -> bool:
    """True iff a full window is available and every delta in it is below tolerance."""
    if len(deltas) < criterion.window:
        return False
    return max(deltas[-criterion.window:]) < criterion.tolerance


class ConvergenceMonitor:
    """Streaming form of detect_convergence: counts the current run of small deltas."""

    def __init__(self, criterion: ConvergenceCriterion):
        self.criterion = criterion
        self.quiet_streak = 0

    def observe(self, delta: float) -> bool:
        self.quiet_streak = self.quiet_streak + 1 if delta < self.criterion.tolerance else 0
        return self.quiet_streak >= self.criterion.window


# ─── Metrics ─────────────────────────────────────────────────────────────────
def jain_index(capacities: Sequence[float]) -> float:
    x = np.asarray(capacities, dtype=float)
    if x.size == 0:
        raise DomainError("Jain's index needs at least one value")
    squares = float(np.sum(x * x))
    if squares == 0:
        raise DomainError("Jain's index is undefined for all-zero capacities")
    return float(np.sum(x)) ** 2 / (x.size * squares)


def check_constraints(record: IterationRecord, thresholds: QosThresholds, p_max: float) -> ConstraintReport:
    return ConstraintReport(
        agent_ids=list(record.agent_ids),
        mue_ok=record.c_mue >= thresholds.q_mue,
        fue_ok=[bool(c >= thresholds.q_fue[a]) for a, c in zip(record.agent_ids, record.c_fue)],
        power_ok=[bool(p <= p_max) for p in record.action_dbm],
    )


# ─── Density steps and phases ────────────────────────────────────────────────
def run_density_step(agents: List[FemtoAgent], scenario: Scenario, share: bool) -> Tuple[DensityTrace, DensitySummary]:
    """Iterate the active agents until convergence (or the iteration budget) and summarize."""
    config = scenario.config
    stride = config.output.trace_stride
    monitor = ConvergenceMonitor(config.convergence)
    trace = DensityTrace(m=len(agents))
    converged_at = None
    record = None
    started = time.perf_counter()

    for t in range(config.learning.max_iterations):
        if share:
            before = np.stack([a.active_row for a in agents])
        record = step(agents, scenario, t)
        if share:
            share_rows(agents, config.phases.share_quantization)
            after = np.stack([a.active_row for a in agents])
            record = replace(record, max_q_delta=float(np.max(np.abs(after - before))))

        if t % stride == 0:
            trace.records.append(record)
        if converged_at is None and monitor.observe(record.max_q_delta):
            converged_at = t + 1
            if config.phases.stop_on_convergence:
                break

    trace.final = record
    if trace.records[-1] is not record:
        trace.records.append(record)

    report = check_constraints(record, scenario.thresholds, scenario.actions.p_max_dbm)
    summary = DensitySummary(
        m=len(agents),
        agent_ids=list(record.agent_ids),
        c_mue_final=record.c_mue,
        fue_capacities=[float(c) for c in record.c_fue],
        min_fue_capacity=float(np.min(record.c_fue)),
        sum_capacity=float(np.sum(record.c_fue)),
        jain=jain_index(record.c_fue),
        iterations_to_converge=converged_at or config.learning.max_iterations,
        converged=converged_at is not None,
        iterations_run=record.iteration + 1,
        elapsed_seconds=time.perf_counter() - started,
        qos_satisfied=report.qos_satisfied,
    )
    logger.info(
        "M=%d converged=%s after %d iterations: C_MUE=%.3f min C_FUE=%.3f Jain=%.3f",
        summary.m, summary.converged, summary.iterations_to_converge,
        summary.c_mue_final, summary.min_fue_capacity, summary.jain,
    )
    return trace, summary


def run_individual_phase(
    seed_agents: int, config: ScenarioConfig, scenario: Optional[Scenario] = None
) -> Tuple[List[FemtoAgent], RunTrace]:
    """
    The first seed_agents FBSs learn from zero tables without any sharing. They are
    brought up one at a time so every density 1..seed_agents gets a summary.
    """
    if seed_agents < 1:
        raise DomainError(f"seed_agents must be >= 1, got {seed_agents}")
    scenario = scenario or build_scenario(config)
    seeds = min(seed_agents, scenario.m_total)
    logger.info("Individual phase: %d seed FBSs", seeds)

    agents: List[FemtoAgent] = []
    trace = RunTrace(admission_order=list(range(seeds)))
    for agent_id in range(seeds):
        agents.append(make_agent(agent_id, scenario))
        density, summary = run_density_step(agents, scenario, share=False)
        trace.densities.append(density)
        trace.summaries.append(summary)
    return agents, trace


def admission_order(config: ScenarioConfig, first: int, total: int) -> List[int]:
    rng = np.random.default_rng([config.seed, ADMISSION_STREAM])
    return [int(a) for a in rng.permutation(np.arange(first, total))]


def warm_start_table(agent_id: int, peers: Sequence[FemtoAgent], scenario: Scenario) -> QTable:
    """Zero table whose row for the newcomer's state is the mean of same-state peers' rows."""
    table = QTable(scenario.config.rings, len(scenario.actions))
    state = scenario.states[agent_id]
    rows = [p.active_row for p in peers if p.state == state]
    if rows:
        table.values[table.row_index(state)] = np.mean(rows, axis=0)
    return table


def run_cooperative_phase(
    trained: List[FemtoAgent], config: ScenarioConfig, scenario: Optional[Scenario] = None
) -> RunTrace:
    """
    Admit the remaining FBSs one by one in a seeded random order. Newcomers are
    warm-started from same-state peers and same-state rows are averaged after
    every iteration; with phases.share_rows off both are skipped.
    """
    scenario = scenario or build_scenario(config)
    share = config.phases.share_rows
    agents = list(trained)
    order = admission_order(config, len(agents), scenario.m_total)
    logger.info("Cooperative phase: admitting %d FBSs in order %s (sharing=%s)", len(order), order, share)

    trace = RunTrace(admission_order=order)
    for agent_id in order:
        table = warm_start_table(agent_id, agents, scenario) if share else None
        agents.append(make_agent(agent_id, scenario, table))
        density, summary = run_density_step(agents, scenario, share=share)
        trace.densities.append(density)
        trace.summaries.append(summary)
    return trace


def run_sweep(config: ScenarioConfig, scenario: Optional[Scenario] = None) -> Tuple[Scenario, RunTrace]:
    """Both phases over densities 1..m_max."""
    scenario = scenario or build_scenario(config)
    agents, trace = run_individual_phase(config.phases.seed_agents, config, scenario)
    trace.extend(run_cooperative_phase(agents, config, scenario))
    return scenario, trace

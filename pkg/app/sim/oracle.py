# app/sim/oracle.py

"""
Brute-force baseline over every joint power assignment of a small instance.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence, Tuple

import numpy as np

from app.core.errors import DomainError, OracleCapExceeded
from app.schemas.scenario import ScenarioConfig
from app.schemas.trace import OracleResult
from app.sim.channel import GainMatrix, evaluate_capacities, link_budget
from app.sim.learning import ActionSet
from app.sim.reward import QosThresholds

logger = logging.getLogger(__name__)

JointAction = Tuple[int, ...]
# (objective, flat index) of the best candidate seen so far
Candidate = Optional[Tuple[float, int]]


def joint_action_count(n_power: int, m: int) -> int:
    return n_power**m


def _better(a: Candidate, b: Candidate) -> Candidate:
    """Higher objective wins; equal objectives go to the lexicographically smaller index vector."""
    if a is None:
        return b
    if b is None:
        return a
    if b[0] > a[0] or (b[0] == a[0] and b[1] < a[1]):
        return b
    return a


def _scan_chunk(start, stop, shape, levels_mw, gains, thresholds, p_bs_mw, noise) -> Tuple[Candidate, Candidate]:
    flat = np.arange(start, stop)
    indices = np.stack(np.unravel_index(flat, shape), axis=1)
    c_mue, c_fue = evaluate_capacities(p_bs_mw, levels_mw[indices], gains, noise)
    objective = c_fue.sum(axis=1)
    feasible = (c_mue >= thresholds.q_mue) & np.all(c_fue >= np.asarray(thresholds.q_fue), axis=1)

    k = int(np.argmax(objective))
    unconstrained = (float(objective[k]), int(flat[k]))
    best_feasible = None
    if feasible.any():
        masked = np.where(feasible, objective, -np.inf)
        k = int(np.argmax(masked))
        best_feasible = (float(objective[k]), int(flat[k]))
    return best_feasible, unconstrained


def sum_capacity(joint_action: Sequence[int], gains: GainMatrix, actions: ActionSet, config: ScenarioConfig) -> float:
    p_bs_mw, noise = link_budget(config.channel)
    _, c_fue = evaluate_capacities(p_bs_mw, actions.levels_mw[list(joint_action)], gains, noise)
    return float(np.sum(c_fue))


def exhaustive_search(
    gains: GainMatrix, actions: ActionSet, thresholds: QosThresholds, config: ScenarioConfig
) -> OracleResult:
    """
    Maximize the FUE sum capacity over all N_power^M joint actions subject to the
    QoS constraints. Infeasible instances return the unconstrained maximizer with
    feasible=False.
    """
    m, n = gains.m, len(actions)
    if len(thresholds.q_fue) < m:
        raise DomainError(f"{len(thresholds.q_fue)} FUE thresholds for {m} FBSs")
    total = joint_action_count(n, m)
    params = config.oracle
    if total > params.max_joint_actions:
        raise OracleCapExceeded(n, m, params.max_joint_actions)

    p_bs_mw, noise = link_budget(config.channel)
    shape = (n,) * m
    thresholds = QosThresholds(thresholds.q_mue, list(thresholds.q_fue[:m]))
    starts = range(0, total, params.chunk_size)
    logger.info("Enumerating %d^%d = %d joint actions with %d worker(s)", n, m, total, params.workers)

    def scan(start):
        stop = min(start + params.chunk_size, total)
        return _scan_chunk(start, stop, shape, actions.levels_mw, gains, thresholds, p_bs_mw, noise)

    if params.workers > 1:
        with ThreadPoolExecutor(max_workers=params.workers) as pool:
            partials = list(pool.map(scan, starts))
    else:
        partials = [scan(s) for s in starts]

    best_feasible, best_any = None, None
    for feasible_candidate, candidate in partials:
        best_feasible = _better(best_feasible, feasible_candidate)
        best_any = _better(best_any, candidate)

    chosen = best_feasible or best_any
    best_action = tuple(int(i) for i in np.unravel_index(chosen[1], shape))
    c_mue, c_fue = evaluate_capacities(p_bs_mw, actions.levels_mw[list(best_action)], gains, noise)

    return OracleResult(
        best_action=best_action,
        best_objective=chosen[0],
        feasible=best_feasible is not None,
        c_mue=float(c_mue),
        c_fue=[float(c) for c in c_fue],
        joint_actions=total,
    )

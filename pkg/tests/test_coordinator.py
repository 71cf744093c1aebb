import numpy as np
import pytest
from conftest import small_scenario
from hypothesis import given, strategies as st

from app.core.errors import DomainError
from app.schemas.scenario import ConvergenceCriterion, RingRadii
from app.schemas.trace import IterationRecord
from app.sim.channel import evaluate_capacities
from app.sim.coordinator import (
    ConvergenceMonitor,
    FemtoAgent,
    admission_order,
    build_scenario,
    check_constraints,
    detect_convergence,
    jain_index,
    make_agent,
    run_cooperative_phase,
    run_density_step,
    run_individual_phase,
    run_sweep,
    share_rows,
    step,
    warm_start_table,
)
from app.sim.learning import QTable
from app.sim.reward import QosThresholds
from app.sim.topology import AgentState

PINNED = {
    "mbs": (300.0, 0.0),
    "mue": (0.0, 0.0),
    # the first two share state (2, 1), the third sits in (2, 2)
    "fbs": [(20.0, 0.0), (-20.0, 0.0), (0.0, 100.0)],
    "fue": [(20.0, 3.0), (-20.0, 3.0), (0.0, 103.0)],
}


@pytest.fixture
def pinned_config():
    return small_scenario(layout={"positions": PINNED}, phases={"seed_agents": 1, "m_max": 3})


def bare_agent(agent_id, state, row=None, n_actions=2):
    table = QTable(RingRadii(), n_actions)
    agent = FemtoAgent(agent_id, state, 1.0, table, np.random.default_rng(agent_id))
    if row is not None:
        agent.table.values[agent.row_index] = row
    return agent


# ─── One iteration ───────────────────────────────────────────────────────────
def test_greedy_first_step_picks_lowest_power():
    scenario = build_scenario(small_scenario(learning={"epsilon": 0.0}))
    agent = make_agent(0, scenario)
    record = step([agent], scenario, 0)
    assert record.actions.tolist() == [0]
    assert record.action_dbm[0] == -20.0
    assert agent.table.values[agent.row_index, 0] == pytest.approx(0.5 * record.rewards[0])


def test_step_updates_exactly_one_entry_per_agent(small_config):
    scenario = build_scenario(small_config)
    agents = [make_agent(k, scenario) for k in range(4)]
    record = step(agents, scenario, 0)
    for agent, action in zip(agents, record.actions):
        touched = np.argwhere(agent.table.values != 0)
        assert touched.tolist() in ([[agent.row_index, action]], [])
    assert record.max_q_delta == pytest.approx(np.max(np.abs(0.5 * record.rewards)))


def test_inactive_fbss_do_not_interfere(small_config):
    scenario = build_scenario(small_config)
    agents = [make_agent(0, scenario), make_agent(2, scenario)]
    record = step(agents, scenario, 0)
    c_mue, c_fue = evaluate_capacities(
        scenario.p_bs_mw, record.powers_mw, scenario.gains.subset([0, 2]), scenario.noise
    )
    assert record.c_mue == pytest.approx(float(c_mue), rel=1e-12)
    np.testing.assert_allclose(record.c_fue, c_fue, rtol=1e-12)


def test_agent_outside_layout_is_rejected(small_config):
    scenario = build_scenario(small_config)
    with pytest.raises(DomainError):
        make_agent(4, scenario)


# ─── Sharing ─────────────────────────────────────────────────────────────────
def test_share_rows_averages_same_state_rows():
    a = bare_agent(0, AgentState(1, 1), [0.0, 2.0])
    b = bare_agent(1, AgentState(1, 1), [2.0, 0.0])
    assert share_rows([a, b]) == pytest.approx(1.0)
    np.testing.assert_array_equal(a.active_row, [1.0, 1.0])
    np.testing.assert_array_equal(b.active_row, [1.0, 1.0])


def test_share_rows_leaves_distinct_states_alone():
    a = bare_agent(0, AgentState(0, 1), [0.0, 2.0])
    b = bare_agent(1, AgentState(1, 0), [2.0, 0.0])
    assert share_rows([a, b]) == 0.0
    np.testing.assert_array_equal(a.active_row, [0.0, 2.0])
    np.testing.assert_array_equal(b.active_row, [2.0, 0.0])


def test_share_rows_only_touches_active_rows():
    a = bare_agent(0, AgentState(1, 1), [0.0, 2.0])
    b = bare_agent(1, AgentState(1, 1), [2.0, 0.0])
    a.table.values[0] = [7.0, 7.0]
    share_rows([a, b])
    np.testing.assert_array_equal(a.table.values[0], [7.0, 7.0])
    np.testing.assert_array_equal(b.table.values[0], [0.0, 0.0])


@given(st.lists(st.lists(st.floats(-100, 100), min_size=3, max_size=3), min_size=2, max_size=6))
def test_share_rows_preserves_mean_and_is_idempotent(rows):
    agents = [bare_agent(k, AgentState(2, 2), row, n_actions=3) for k, row in enumerate(rows)]
    mean = np.mean(rows, axis=0)
    share_rows(agents)
    for agent in agents:
        np.testing.assert_allclose(agent.active_row, mean, atol=1e-9)
    snapshot = [agent.active_row.copy() for agent in agents]
    assert share_rows(agents) == 0.0
    for agent, before in zip(agents, snapshot):
        np.testing.assert_array_equal(agent.active_row, before)


def test_quantized_sharing_rounds_before_averaging():
    a = bare_agent(0, AgentState(1, 1), [0.24, 1.0])
    b = bare_agent(1, AgentState(1, 1), [0.76, 1.0])
    share_rows([a, b], quantization=0.5)
    np.testing.assert_allclose(a.active_row, [0.5, 1.0])


# ─── Convergence ─────────────────────────────────────────────────────────────
def test_detect_convergence():
    criterion = ConvergenceCriterion(window=3, tolerance=0.1)
    assert not detect_convergence([0.0, 0.0], criterion)
    assert detect_convergence([5.0, 0.01, 0.02, 0.0], criterion)
    assert not detect_convergence([0.01, 0.02, 0.1], criterion)


@given(st.lists(st.floats(0, 1), max_size=40))
def test_monitor_agrees_with_window_check(deltas):
    criterion = ConvergenceCriterion(window=3, tolerance=0.5)
    monitor = ConvergenceMonitor(criterion)
    for k, delta in enumerate(deltas):
        assert monitor.observe(delta) == detect_convergence(deltas[: k + 1], criterion)


def test_frozen_tables_converge_after_one_window():
    config = small_scenario(learning={"alpha": 0.0})
    scenario = build_scenario(config)
    _, summary = run_density_step([make_agent(0, scenario)], scenario, share=False)
    assert summary.converged
    assert summary.iterations_to_converge == config.convergence.window
    assert summary.iterations_run == config.convergence.window


def test_full_budget_still_reports_first_convergence():
    config = small_scenario(learning={"alpha": 0.0}, phases={"stop_on_convergence": False})
    scenario = build_scenario(config)
    _, summary = run_density_step([make_agent(0, scenario)], scenario, share=False)
    assert summary.converged
    assert summary.iterations_to_converge == 50
    assert summary.iterations_run == 400


def test_budget_exhaustion_is_reported():
    config = small_scenario(learning={"max_iterations": 30}, convergence={"window": 100})
    scenario = build_scenario(config)
    trace, summary = run_density_step([make_agent(0, scenario)], scenario, share=False)
    assert not summary.converged
    assert summary.iterations_to_converge == 30
    assert trace.final.iteration == 29


def test_trace_is_decimated_but_keeps_the_final_record(small_config):
    scenario = build_scenario(small_config.model_copy(update={"convergence": ConvergenceCriterion(window=1000)}))
    trace, _ = run_density_step([make_agent(0, scenario)], scenario, share=False)
    assert [r.iteration for r in trace.records[:-1]] == list(range(0, 400, 5))
    assert trace.records[-1] is trace.final
    assert trace.final.iteration == 399


# ─── Metrics / constraints ───────────────────────────────────────────────────
@pytest.mark.parametrize(
    "values, expected",
    [([1, 1, 1], 1.0), ([1, 0, 0], 1 / 3), ([1, 0, 0, 0], 0.25), ([1, 2, 3], 6 / 7), ([3, 1], 0.8)],
)
def test_jain_index(values, expected):
    assert jain_index(values) == pytest.approx(expected)


def test_jain_index_domain():
    with pytest.raises(DomainError):
        jain_index([])
    with pytest.raises(DomainError):
        jain_index([0.0, 0.0])


@given(st.lists(st.floats(0.01, 100), min_size=1, max_size=20))
def test_jain_index_bounds(values):
    assert 1 / len(values) - 1e-12 <= jain_index(values) <= 1 + 1e-12


def test_constraints_are_inclusive_at_the_thresholds():
    record = IterationRecord(
        iteration=0,
        agent_ids=(0, 1),
        actions=np.array([3, 4]),
        action_dbm=np.array([10.0, 25.0]),
        powers_mw=np.array([10.0, 316.0]),
        c_mue=1.0,
        c_fue=np.array([1.0, 0.99]),
        rewards=np.zeros(2),
        max_q_delta=0.0,
    )
    report = check_constraints(record, QosThresholds(1.0, [1.0, 1.0]), p_max=20.0)
    assert report.mue_ok
    assert report.fue_ok == [True, False]
    assert report.power_ok == [True, False]
    assert not report.qos_satisfied
    assert not report.all_satisfied


# ─── Phases ──────────────────────────────────────────────────────────────────
def test_pinned_states(pinned_config):
    scenario = build_scenario(pinned_config)
    assert scenario.states == (AgentState(2, 1), AgentState(2, 1), AgentState(2, 2))
    assert scenario.betas == pytest.approx((0.8, 0.8, 4.0))


def test_shared_density_step_leaves_peers_identical(pinned_config):
    scenario = build_scenario(pinned_config)
    agents = [make_agent(0, scenario), make_agent(1, scenario)]
    run_density_step(agents, scenario, share=True)
    np.testing.assert_array_equal(agents[0].active_row, agents[1].active_row)


def test_individual_phase_has_one_summary_per_density(small_config):
    agents, trace = run_individual_phase(2, small_config)
    assert [a.agent_id for a in agents] == [0, 1]
    assert [s.m for s in trace.summaries] == [1, 2]
    assert trace.admission_order == [0, 1]


def test_individual_phase_needs_a_seed(small_config):
    with pytest.raises(DomainError):
        run_individual_phase(0, small_config)


def test_warm_start_copies_same_state_peers(pinned_config):
    scenario = build_scenario(pinned_config)
    trained, _ = run_individual_phase(1, pinned_config, scenario)
    peer_row = trained[0].active_row.copy()
    assert np.any(peer_row != 0)

    same = warm_start_table(1, trained, scenario)
    np.testing.assert_array_equal(same.row(AgentState(2, 1)), peer_row)
    assert np.count_nonzero(same.values) == np.count_nonzero(peer_row)

    other = warm_start_table(2, trained, scenario)
    assert not other.values.any()


def test_admission_order_is_a_seeded_permutation(small_config):
    order = admission_order(small_config, 2, 8)
    assert sorted(order) == list(range(2, 8))
    assert order == admission_order(small_config, 2, 8)


def test_cooperative_phase_admits_everyone(pinned_config):
    scenario = build_scenario(pinned_config)
    trained, _ = run_individual_phase(1, pinned_config, scenario)
    trace = run_cooperative_phase(trained, pinned_config, scenario)
    assert sorted(trace.admission_order) == [1, 2]
    assert [s.m for s in trace.summaries] == [2, 3]
    assert sorted(trace.summaries[-1].agent_ids) == [0, 1, 2]


def test_sweep_covers_every_density(small_config):
    _, trace = run_sweep(small_config)
    assert [s.m for s in trace.summaries] == [1, 2, 3, 4]
    assert sorted(trace.admission_order) == [0, 1, 2, 3]
    assert trace.admission_order[:2] == [0, 1]
    assert trace.summary_for(3).m == 3


def test_sweep_is_deterministic(small_config):
    def fingerprint():
        _, trace = run_sweep(small_config)
        return [s.model_dump(exclude={"elapsed_seconds"}) for s in trace.summaries]

    assert fingerprint() == fingerprint()


def test_sweep_without_sharing_still_runs(small_config):
    config = small_config.model_copy(
        update={"phases": small_config.phases.model_copy(update={"share_rows": False})}
    )
    _, trace = run_sweep(config)
    assert len(trace.summaries) == 4

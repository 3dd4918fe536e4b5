"""Tests for the LNS engine, destroy heuristics and neighborhood-size adaptation."""

import itertools
import math
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest

from lbrelax import (
    Assignment,
    BnbResult,
    BnbStatus,
    FractionalAssignment,
    Heuristic,
    IlpInstance,
    InfeasibleIncumbentError,
    LnsConfig,
    LnsState,
    LpSolution,
    LpStatus,
    NoSolutionError,
    RrMode,
    RunTrace,
    SolveBudget,
    TraceEvent,
    brute_force,
    destroy_graph,
    destroy_lb,
    destroy_lb_relax,
    destroy_lb_relax_s,
    destroy_random,
    find_initial_solution,
    generate_mvc,
    generate_sc,
    hamming,
    is_feasible,
    run_bnb_baseline,
    run_lns,
    step_lb_relax_rr,
    update_neighborhood_size,
    update_rr_mode,
    variable_graph,
)
from lbrelax._lns import _relaxation_deltas, select_neighborhood

NODES = SolveBudget(node_limit=300)


def make_state(n, k=1, seed=0, values=None):
    values = np.zeros(n, dtype=np.int8) if values is None else values
    return LnsState(incumbent=Assignment(values, 0.0), k=k, rng=np.random.default_rng(seed))


def counting_clock(step=0.001):
    """Deterministic clock advancing ``step`` seconds per call."""
    return itertools.count(step, step).__next__


def reproducible_config(heuristic, **kwargs):
    defaults = {
        "heuristic": heuristic,
        "k0": 5,
        "repair_budget": NODES,
        "lb_repair_budget": NODES,
        "initial_budget": SolveBudget(node_limit=2_000),
        "time_limit": None,
        "iteration_limit": 8,
        "seed": 3,
    }
    defaults.update(kwargs)
    return LnsConfig(**defaults)


class TestNeighborhoodSize:
    def test_grows(self):
        config = LnsConfig(k0=100)
        state = make_state(400, k=100)
        assert update_neighborhood_size(state, False, config) == 102

    def test_capped(self):
        config = LnsConfig(k0=100)
        state = make_state(400, k=199)
        assert update_neighborhood_size(state, False, config) == 200

    def test_improved_unchanged(self):
        state = make_state(400, k=37)
        assert update_neighborhood_size(state, True, LnsConfig()) == 37

    def test_fixed_k(self):
        state = make_state(400, k=37)
        assert update_neighborhood_size(state, False, LnsConfig(fixed_k=True)) == 37

    def test_strict_growth_for_small_k(self):
        state = make_state(400, k=1)
        assert update_neighborhood_size(state, False, LnsConfig()) == 2

    def test_never_below_one(self):
        state = make_state(1, k=1)
        assert update_neighborhood_size(state, False, LnsConfig(beta=0.5)) == 1

    def test_recurrence_matches_exact_arithmetic(self):
        """Replaying a flag sequence reproduces ``min(ceil(alpha * k), floor(beta * n))`` exactly."""
        n, alpha = 400, Fraction("1.02")
        config = LnsConfig(k0=100, alpha=1.02, beta=0.5)
        flags = np.random.default_rng(17).random(100) < 0.3
        state = make_state(n, k=100)
        expected = 100
        for improved in flags:
            if not improved:
                expected = min(max(expected + 1, math.ceil(alpha * expected)), n // 2)
            state.k = update_neighborhood_size(state, bool(improved), config)
            assert state.k == expected
        assert state.k == 200

    def test_start_state(self, cover_triangle):
        incumbent = Assignment.from_values(cover_triangle, [1, 1, 1])
        state = LnsState.start(cover_triangle, LnsConfig(k0=30), incumbent)
        assert state.k == 1
        assert state.graph is None
        assert state.rr_mode is RrMode.RELAX
        graph_state = LnsState.start(cover_triangle, LnsConfig(heuristic="GRAPH", k0=1), incumbent)
        assert graph_state.graph is not None
        assert sum(1 for _, side in graph_state.graph.nodes(data="bipartite") if side == 0) == 3


class TestDestroyRandom:
    def test_all_indices(self):
        assert destroy_random(make_state(6), 6).indices.tolist() == list(range(6))

    def test_clamped_to_n(self):
        assert len(destroy_random(make_state(4), 9)) == 4

    def test_reproducible(self):
        first = destroy_random(make_state(50, seed=5), 10)
        second = destroy_random(make_state(50, seed=5), 10)
        assert first == second
        assert len(np.unique(first.indices)) == 10

    def test_uniform_frequency(self):
        state = make_state(10, seed=2024)
        counts = Counter(int(destroy_random(state, 1).indices[0]) for _ in range(10_000))
        sigma = math.sqrt(10_000 * 0.1 * 0.9)
        for i in range(10):
            assert abs(counts[i] - 1_000) <= 4 * sigma


class TestDestroyGraph:
    def test_chain(self):
        inst = IlpInstance(objective=[1, 1, 1], rows=[[(0, 1), (1, 1)], [(1, 1), (2, 1)]], senses=["LE", "LE"], rhs=[1, 1])
        neighborhood = destroy_graph(inst, make_state(3), 2, start=0)
        assert neighborhood.indices.tolist() == [0, 1]

    @pytest.mark.parametrize("seed", range(5))
    def test_all_variables(self, cover_triangle, seed):
        assert destroy_graph(cover_triangle, make_state(3, seed=seed), 3).indices.tolist() == [0, 1, 2]

    @pytest.mark.parametrize("seed", range(5))
    def test_restart_on_exhausted_component(self, seed):
        triangle = [[(0, 1), (1, 1)], [(1, 1), (2, 1)], [(0, 1), (2, 1)]]
        shifted = [[(i + 3, a) for i, a in row] for row in triangle]
        inst = IlpInstance(objective=[1] * 6, rows=triangle + shifted, senses=["GE"] * 6, rhs=[1] * 6)
        neighborhood = destroy_graph(inst, make_state(6, seed=seed), 4, start=0)
        selected = set(neighborhood.indices.tolist())
        assert len(selected) == 4
        assert {0, 1, 2} <= selected

    def test_isolated_variables(self):
        inst = IlpInstance(objective=[1, 1, 1, 1], rows=[], senses=[], rhs=[])
        assert len(destroy_graph(inst, make_state(4), 3)) == 3

    def test_bfs_layers(self):
        # Star around variable 0: rows {0,1}, {0,2}; variable 3 hangs off variable 1.
        rows = [[(0, 1), (1, 1)], [(0, 1), (2, 1)], [(1, 1), (3, 1)]]
        inst = IlpInstance(objective=[1] * 4, rows=rows, senses=["LE"] * 3, rhs=[1] * 3)
        assert destroy_graph(inst, make_state(4), 3, start=0).indices.tolist() == [0, 1, 2]

    def test_prebuilt_graph(self):
        rows = [[(0, 1), (1, 1)], [(1, 1), (2, 1)], [(2, 1), (3, 1)]]
        inst = IlpInstance(objective=[1] * 4, rows=rows, senses=["LE"] * 3, rhs=[1] * 3)
        graph = variable_graph(inst)
        assert destroy_graph(inst, make_state(4), 2, graph=graph, start=3).indices.tolist() == [2, 3]
        assert destroy_graph(inst, make_state(4), 4, graph=graph, start=1).indices.tolist() == [0, 1, 2, 3]


class TestVariableGraph:
    def test_bipartite(self):
        rows = [[(0, 2), (2, -1)], [(1, 1), (2, 1)]]
        inst = IlpInstance(objective=[1, 1, 1], rows=rows, senses=["LE", "GE"], rhs=[1, 1])
        graph = variable_graph(inst)
        assert graph.number_of_nodes() == 5
        assert dict(graph.nodes(data="bipartite")) == {0: 0, 1: 0, 2: 0, 3: 1, 4: 1}
        assert sorted(graph.edges()) == [(0, 3), (1, 4), (2, 3), (2, 4)]

    def test_adjacency_ascending(self):
        inst = generate_sc(15, 12, density=0.3, seed=4)
        graph = variable_graph(inst)
        assert graph.number_of_edges() == len(inst.coordinates()[0])
        for node in graph:
            neighbors = list(graph.adj[node])
            assert neighbors == sorted(neighbors)

    def test_isolated_variable(self):
        inst = IlpInstance(objective=[1, 1], rows=[[(0, 1)]], senses=["LE"], rhs=[1])
        graph = variable_graph(inst)
        assert graph.degree(1) == 0


class TestDestroyLbRelax:
    @pytest.fixture
    def three_vars(self):
        return IlpInstance(objective=[0, -1, 0], rows=[], senses=[], rhs=[])

    def test_largest_delta(self, three_vars, mocker):
        mocker.patch("lbrelax._lns._relaxation_deltas", return_value=(np.array([0.0, 0.3, 0.0]), ""))
        state = make_state(3, values=np.array([1, 0, 0], dtype=np.int8))
        assert destroy_lb_relax(three_vars, state, 1).indices.tolist() == [1]

    def test_top_two(self, three_vars, mocker):
        mocker.patch("lbrelax._lns._relaxation_deltas", return_value=(np.array([0.5, 0.5, 0.2]), ""))
        for seed in range(10):
            assert destroy_lb_relax(three_vars, make_state(3, seed=seed), 2).indices.tolist() == [0, 1]

    def test_ties_broken_at_random(self, mocker):
        inst = IlpInstance(objective=[0, 0, 0, 0], rows=[], senses=[], rhs=[])
        mocker.patch("lbrelax._lns._relaxation_deltas", return_value=(np.array([0.5, 0.5, 0.5, 0.0]), ""))
        state = make_state(4, seed=1)
        seen = Counter(int(destroy_lb_relax(inst, state, 1).indices[0]) for _ in range(300))
        assert set(seen) == {0, 1, 2}

    def test_padding(self, three_vars, mocker):
        mocker.patch("lbrelax._lns._relaxation_deltas", return_value=(np.array([0.0, 0.3, 0.0]), ""))
        neighborhood = destroy_lb_relax(three_vars, make_state(3), 2)
        assert 1 in neighborhood.indices.tolist()
        assert len(neighborhood) == 2

    @pytest.mark.parametrize("destroy", [destroy_lb_relax, destroy_lb_relax_s])
    @pytest.mark.parametrize("seed", range(5))
    def test_no_candidates_equals_random(self, mocker, destroy, seed):
        inst = IlpInstance(objective=np.zeros(20), rows=[], senses=[], rhs=[])
        mocker.patch("lbrelax._lns._relaxation_deltas", return_value=(np.zeros(20), ""))
        assert destroy(inst, make_state(20, seed=seed), 7).indices.tolist() == (
            destroy_random(make_state(20, seed=seed), 7).indices.tolist()
        )

    def test_sampling_all_candidates(self, mocker):
        inst = IlpInstance(objective=np.zeros(6), rows=[], senses=[], rhs=[])
        mocker.patch("lbrelax._lns._relaxation_deltas", return_value=(np.array([0, 0.4, 0, 0.9, 0, 0.1]), ""))
        assert destroy_lb_relax_s(inst, make_state(6), 3).indices.tolist() == [1, 3, 5]

    def test_sampling_pair_frequencies(self, mocker):
        inst = IlpInstance(objective=np.zeros(6), rows=[], senses=[], rhs=[])
        delta = np.array([0.9, 0.0, 0.1, 0.5, 0.0, 0.2])
        mocker.patch("lbrelax._lns._relaxation_deltas", return_value=(delta, ""))
        state = make_state(6, seed=11)
        draws = 6_000
        counts = Counter(tuple(destroy_lb_relax_s(inst, state, 2).indices.tolist()) for _ in range(draws))
        assert set(counts) == {pair for pair in itertools.combinations([0, 2, 3, 5], 2)}
        sigma = math.sqrt(draws * (1 / 6) * (5 / 6))
        for count in counts.values():
            assert abs(count - draws / 6) <= 4 * sigma

    @pytest.mark.parametrize("seed", range(3))
    def test_top_k_on_real_relaxation(self, seed):
        inst = generate_sc(20, 15, density=0.2, seed=seed)
        incumbent = Assignment.from_values(inst, np.ones(inst.n))
        state = make_state(inst.n, seed=seed, values=incumbent.values)
        state.incumbent = incumbent
        delta, _ = _relaxation_deltas(inst, state, 5)
        selected = destroy_lb_relax(inst, state, 5).indices
        candidates = np.flatnonzero(delta > 1e-9)
        assert len(selected) == 5
        if candidates.size >= 5:
            rest = np.setdiff1d(np.arange(inst.n), selected)
            assert delta[selected].min() >= delta[rest].max() - 1e-12

    def test_iteration_limit_in_phase_one(self, cover_triangle, mocker):
        stalled = LpSolution(
            status=LpStatus.ITERATION_LIMIT,
            values=FractionalAssignment([0.5, 0.5, 0.5], 1.5),
            objective=1.5,
            duals=np.zeros(4),
            reduced_costs=np.zeros(3),
            iterations=12,
            phase_one_unresolved=True,
        )
        mocker.patch("lbrelax._lns.solve_lp", return_value=stalled)
        incumbent = Assignment.from_values(cover_triangle, [1, 1, 1])
        state = make_state(3, values=incumbent.values)
        state.incumbent = incumbent
        delta, note = _relaxation_deltas(cover_triangle, state, 1)
        assert note == "lp-iteration-limit"
        assert delta.tolist() == [0.0, 0.0, 0.0]
        assert destroy_lb_relax(cover_triangle, state, 1).note == "lp-iteration-limit"

    def test_infeasible_relaxation(self, cover_triangle, mocker):
        infeasible = LpSolution(
            status=LpStatus.INFEASIBLE,
            values=FractionalAssignment([0.0, 0.0, 0.0], 0.0),
            objective=0.0,
            duals=np.zeros(4),
            reduced_costs=np.zeros(3),
        )
        mocker.patch("lbrelax._lns.solve_lp", return_value=infeasible)
        incumbent = Assignment.from_values(cover_triangle, [1, 1, 1])
        state = make_state(3, values=incumbent.values)
        state.incumbent = incumbent
        with pytest.raises(InfeasibleIncumbentError, match="relaxation"):
            destroy_lb_relax(cover_triangle, state, 1)


class TestDestroyLb:
    @pytest.mark.parametrize("seed", range(4))
    def test_proposal_is_ball_optimum(self, random_ilp, enumerate_binary, seed):
        inst = random_ilp(seed, n=10, m=5)
        points = enumerate_binary(inst.n)
        feasible = [p for p in points if is_feasible(inst, p)]
        worst = max(feasible, key=inst.objective_value)
        incumbent = Assignment.from_values(inst, worst)
        state = make_state(inst.n, seed=seed, values=incumbent.values)
        state.incumbent = incumbent
        k = 3
        neighborhood = destroy_lb(inst, state, k, SolveBudget(node_limit=100_000))
        best_in_ball = min(inst.objective_value(p) for p in feasible if hamming(p, incumbent) <= k)
        assert len(neighborhood) == k
        if best_in_ball < incumbent.objective - 1e-9:
            assert neighborhood.proposal is not None
            assert neighborhood.proposal.objective == pytest.approx(best_in_ball, abs=1e-6)
            differ = np.flatnonzero(neighborhood.proposal.values != incumbent.values)
            assert hamming(neighborhood.proposal, incumbent) <= k
            assert set(differ.tolist()) <= set(neighborhood.indices.tolist())
        else:
            assert neighborhood.proposal is None

    def test_optimal_incumbent_gives_random_indices(self, cover_triangle):
        incumbent = Assignment.from_values(cover_triangle, [1, 1, 0])
        state = make_state(3, values=incumbent.values)
        state.incumbent = incumbent
        neighborhood = destroy_lb(cover_triangle, state, 2, SolveBudget(node_limit=100))
        assert neighborhood.proposal is None
        assert len(neighborhood) == 2

    def test_fallback_to_random(self, cover_triangle, mocker):
        mocker.patch(
            "lbrelax._lns.branch_and_bound",
            return_value=BnbResult(None, math.inf, BnbStatus.NO_SOLUTION_TIMEOUT),
        )
        incumbent = Assignment.from_values(cover_triangle, [1, 1, 1])
        state = make_state(3, values=incumbent.values)
        state.incumbent = incumbent
        neighborhood = destroy_lb(cover_triangle, state, 2, NODES)
        assert neighborhood.note == "lb-fallback"
        assert len(neighborhood) == 2


def reference_rr_modes(flags, times, gamma):
    """Straight-line model of the relax/randomized switching rules."""
    mode, failures, started, found = "relax", 0, 0.0, False
    modes = []
    for improved, now in zip(flags, times):
        if mode == "relax":
            failures = 0 if improved else failures + 1
            if failures == 2:
                mode, failures, started, found = "randomized", 0, now, False
        else:
            found = found or improved
            if found and now - started >= gamma:
                mode, failures = "relax", 0
        modes.append(mode)
    return modes


class TestRrStateMachine:
    def test_success_resets_failures(self):
        state = make_state(5)
        state.rr_failures = 1
        update_rr_mode(state, True, LnsConfig(), 1.0)
        assert state.rr_failures == 0
        assert state.rr_mode is RrMode.RELAX

    def test_two_failures_switch(self):
        state = make_state(5)
        assert update_rr_mode(state, False, LnsConfig(), 1.0) is RrMode.RELAX
        assert update_rr_mode(state, False, LnsConfig(), 2.0) is RrMode.RANDOMIZED
        assert state.rr_phase_started == 2.0
        assert state.rr_failures == 0

    def test_waits_for_gamma(self):
        config = LnsConfig(gamma=30.0)
        state = make_state(5)
        state.rr_mode, state.rr_phase_started = RrMode.RANDOMIZED, 10.0
        assert update_rr_mode(state, True, config, 39.0) is RrMode.RANDOMIZED
        assert update_rr_mode(state, False, config, 40.0) is RrMode.RELAX

    def test_waits_for_improvement(self):
        config = LnsConfig(gamma=30.0)
        state = make_state(5)
        state.rr_mode, state.rr_phase_started = RrMode.RANDOMIZED, 0.0
        assert update_rr_mode(state, False, config, 100.0) is RrMode.RANDOMIZED
        assert update_rr_mode(state, True, config, 101.0) is RrMode.RELAX

    @pytest.mark.parametrize("flags", list(itertools.product((False, True), repeat=6)))
    def test_matches_reference(self, flags):
        config = LnsConfig(gamma=30.0)
        times = [10.0 * (i + 1) for i in range(len(flags))]
        state = make_state(5)
        modes = [update_rr_mode(state, improved, config, now).value for improved, now in zip(flags, times)]
        assert modes == reference_rr_modes(flags, times, 30.0)

    def test_randomized_step_note(self, cover_triangle):
        incumbent = Assignment.from_values(cover_triangle, [1, 1, 1])
        state = make_state(3, k=2, values=incumbent.values)
        state.rr_mode = RrMode.RANDOMIZED
        neighborhood = step_lb_relax_rr(cover_triangle, state, LnsConfig(heuristic="LBRELAX_RR"))
        assert neighborhood.note == "rr-randomized"
        assert len(neighborhood) == 2


class TestSelectNeighborhood:
    @pytest.mark.parametrize("heuristic", Heuristic.lns_heuristics())
    @pytest.mark.parametrize("k", [1, 4, 12, 20])
    def test_size(self, small_family_instances, heuristic, k):
        for inst in small_family_instances["sc"][:2] + small_family_instances["mk"][:2]:
            incumbent = find_initial_solution(inst, SolveBudget(node_limit=1_000))
            config = LnsConfig(heuristic=heuristic, lb_repair_budget=NODES)
            state = LnsState.start(inst, config, incumbent)
            state.k = k
            neighborhood = select_neighborhood(inst, state, config)
            indices = neighborhood.indices
            assert len(neighborhood) == min(k, inst.n)
            assert np.all((indices >= 0) & (indices < inst.n))

    def test_bnb_is_not_a_destroy_heuristic(self, cover_triangle):
        config = LnsConfig(heuristic="BNB")
        state = LnsState.start(cover_triangle, config, Assignment.from_values(cover_triangle, [1, 1, 1]))
        with pytest.raises(ValueError, match="not a destroy heuristic"):
            select_neighborhood(cover_triangle, state, config)


class TestRunLns:
    @pytest.mark.parametrize("heuristic", Heuristic.lns_heuristics())
    def test_deterministic(self, heuristic):
        inst = generate_mvc(40, 2, seed=4)
        config = reproducible_config(heuristic)
        _, first = run_lns(inst, config, clock=counting_clock())
        _, second = run_lns(inst, config, clock=counting_clock())
        assert first.without_timing() == second.without_timing()

    @pytest.mark.parametrize("heuristic", Heuristic.lns_heuristics())
    def test_monotone_and_feasible(self, heuristic):
        inst = generate_mvc(40, 2, seed=8)
        best, trace = run_lns(inst, reproducible_config(heuristic, iteration_limit=10))
        assert is_feasible(inst, best)
        objectives = [event.objective for event in trace.events]
        assert objectives == sorted(objectives, reverse=True)
        improving = [event.objective for event in trace.improvements()]
        assert all(a > b for a, b in itertools.pairwise(improving))
        assert trace.final_objective == best.objective
        assert trace.iterations == 10
        assert len(trace.events) == 11
        assert trace.events[0].note == "initial"
        times = [event.wall_time for event in trace.events]
        assert times == sorted(times)

    def test_k_trace_follows_recurrence(self):
        inst = generate_mvc(60, 2, seed=1)
        config = reproducible_config("RANDOM", k0=3, iteration_limit=15)
        _, trace = run_lns(inst, config)
        cap = inst.n // 2
        for previous, current in itertools.pairwise(trace.events[1:]):
            if previous.improved:
                expected = previous.k
            else:
                expected = min(max(previous.k + 1, math.ceil(Fraction("1.02") * previous.k)), cap)
            assert current.k == expected

    @pytest.mark.parametrize("family", ["mvc", "mis", "sc", "mk"])
    def test_full_neighborhood_is_exact(self, small_family_instances, family):
        for inst in small_family_instances[family]:
            config = LnsConfig(
                heuristic="RANDOM",
                k0=inst.n,
                beta=1.0,
                repair_budget=SolveBudget(node_limit=1_000_000),
                time_limit=None,
                iteration_limit=1,
            )
            initial = find_initial_solution(inst, SolveBudget(node_limit=1_000))
            best, trace = run_lns(inst, config, initial)
            assert best.objective == pytest.approx(brute_force(inst).objective, abs=1e-6), inst.name
            assert trace.events[1].k == inst.n

    def test_initial_time_offset(self, cover_triangle):
        config = reproducible_config("RANDOM", iteration_limit=1)
        _, trace = run_lns(cover_triangle, config, initial_time=2.5, clock=counting_clock())
        assert trace.events[0].wall_time >= 2.5

    def test_infeasible_initial(self, cover_triangle):
        with pytest.raises(InfeasibleIncumbentError, match="violates row 0"):
            run_lns(cover_triangle, reproducible_config("RANDOM"), Assignment([0, 0, 1], 1.0))

    def test_no_initial_solution(self, infeasible):
        with pytest.raises(NoSolutionError):
            run_lns(infeasible, reproducible_config("RANDOM"))

    def test_time_limit(self):
        inst = generate_mvc(40, 2, seed=2)
        config = reproducible_config("RANDOM", time_limit=0.05, iteration_limit=None)
        _, trace = run_lns(inst, config, clock=counting_clock())
        assert trace.events[-1].iteration == trace.iterations
        assert all(event.wall_time >= 0 for event in trace.events)

    def test_lb_adoption_note(self):
        inst = generate_mvc(12, 2, seed=0)
        worst = Assignment.from_values(inst, np.ones(inst.n))
        config = reproducible_config("LB", k0=6, iteration_limit=1, lb_repair_budget=SolveBudget(node_limit=100_000))
        best, trace = run_lns(inst, config, worst)
        assert best.objective < worst.objective
        assert "lb-adopted" in trace.events[1].note


class TestBnbBaseline:
    def test_reaches_optimum(self, small_family_instances):
        inst = small_family_instances["sc"][0]
        config = LnsConfig(heuristic="BNB", time_limit=None, iteration_limit=1)
        best, trace = run_lns(inst, config)
        assert best.objective == pytest.approx(brute_force(inst).objective, abs=1e-6)
        assert trace.heuristic == "BNB"
        assert trace.events[0].note == "initial"
        assert trace.events[-1].note == "optimal"
        assert not trace.events[-1].improved
        assert all(event.k == inst.n for event in trace.events)

    def test_infeasible(self, infeasible):
        with pytest.raises(NoSolutionError, match="no solution"):
            run_bnb_baseline(infeasible, LnsConfig(heuristic="BNB"))


class TestRunTrace:
    def test_record_clamps_time(self):
        trace = RunTrace("x", "RANDOM")
        trace.record(TraceEvent(1.0, 0, 5.0, "RANDOM", 1, True))
        trace.record(TraceEvent(0.5, 1, 4.0, "RANDOM", 1, True))
        assert trace.events[1].wall_time == 1.0

    def test_final_objective(self):
        trace = RunTrace("x", "RANDOM")
        assert trace.final_objective is None
        trace.record(TraceEvent(0.0, 0, 5.0, "RANDOM", 1, True, "initial"))
        trace.record(TraceEvent(1.0, 1, 5.0, "RANDOM", 1, False))
        assert trace.final_objective == 5.0
        assert trace.iterations == 1
        assert trace.without_timing() == [(0, 5.0, "RANDOM", 1, True, "initial"), (1, 5.0, "RANDOM", 1, False, "")]

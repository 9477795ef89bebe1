import math

import numpy as np
import pytest

from multiplex_sir.engine import (InitialCondition, JointState as S, JointStateDistribution,
                                  ModelParams, mmca_step, transition_row)
from multiplex_sir.immunization import apply_immunization
from multiplex_sir.network import GraphSpec, Layer, MultiplexNetwork, build_multiplex
from multiplex_sir.stochastic import (evolve_batch, initial_states, realized_exposures,
                                      run_ensemble, run_ensemble_records, sample_successors,
                                      simulate_realization, summarize_records, write_runs_csv)

from oracles import path3_expected_outbreak


def net_from(n, edges_a, edges_b):
    return MultiplexNetwork(Layer.from_edges(n, edges_a), Layer.from_edges(n, edges_b))


def within_sigmas(counts, probs, runs, k):
    sigma = np.sqrt(probs * (1 - probs) / runs)
    freq = counts / runs
    zero = probs == 0
    return np.all(freq[zero] == 0) and np.all(np.abs(freq - probs)[~zero] <= k * sigma[~zero])


def test_isolated_recovery_without_transmission():
    net = build_multiplex(GraphSpec(n=50, mean_degree=4, seed=1),
                          GraphSpec(n=50, mean_degree=4, seed=2))
    real = simulate_realization(net, ModelParams(beta_b=0, kappa=0, delta_b=1),
                                InitialCondition((4,)), seed=3)
    assert real.s_b == 1 / 50
    assert real.steps == 1
    assert real.infectious_counts == [1, 0]


def test_certain_cascade_covers_the_seed_component():
    # two components in layer B: a path 0-1-2-3 and an edge 4-5
    net = net_from(7, [], [(0, 1), (1, 2), (2, 3), (4, 5)])
    P = ModelParams(beta_a=0, beta_b=1, delta_b=1, kappa=0)
    for seed in range(5):
        real = simulate_realization(net, P, InitialCondition((1,)), seed=seed)
        assert real.s_b == 4 / 7
        assert real.s_a == 0.0


def test_path3_mean_outbreak_matches_enumeration():
    net = net_from(3, [], [(0, 1), (1, 2)])
    P = ModelParams(beta_a=0, beta_b=0.5, delta_b=1, kappa=0)
    runs = 1_000_000
    start = np.tile(initial_states(3, InitialCondition((1,))), (runs, 1))
    final = evolve_batch(net, P, start, np.random.default_rng(2024))
    sizes = np.isin(final, [S.SR, S.IR, S.RR]).sum(axis=1) / 3
    expected = path3_expected_outbreak(0.5)
    assert expected == pytest.approx(2 / 3)
    sigma = sizes.std() / math.sqrt(runs)
    assert abs(sizes.mean() - expected) <= 3 * sigma


def test_realized_exposures_are_powers_of_active_neighbors():
    net = net_from(4, [(0, 1), (0, 2), (0, 3)], [(0, 1), (0, 2), (0, 3)])
    states = np.array([[S.SS, S.IS, S.II, S.SI]])
    q, q_sa, q_ia = realized_exposures(net, states, ModelParams(beta_a=0.5, beta_b=0.4,
                                                                gamma=0.5))
    assert q[0, 0] == pytest.approx(0.25)
    assert q_sa[0, 0] == pytest.approx(0.36)
    assert q_ia[0, 0] == pytest.approx(0.64)


def test_sampled_transitions_have_positive_probability():
    net = build_multiplex(GraphSpec(n=80, mean_degree=4, seed=5),
                          GraphSpec(n=80, mean_degree=4, seed=6))
    P = ModelParams(beta_a=0.6, beta_b=0.7, delta_a=0.4, delta_b=0.5, gamma=0.3, kappa=0.6)
    plan = apply_immunization(net, "random", 0.2, seed=3)
    gen = np.random.default_rng(1)
    states = initial_states(80, InitialCondition((plan.infection_seed,)), plan)
    for _ in range(40):
        q, q_sa, q_ia = realized_exposures(net, states[None, :], P)
        nxt = sample_successors(net, states, P, gen)
        for i in range(80):
            row = transition_row(states[i], q[0, i], q_sa[0, i], q_ia[0, i], P)
            assert row[nxt[i]] > 0
        immunized = np.isin(states, [S.SV, S.IV, S.RV])
        assert np.array_equal(immunized, np.isin(nxt, [S.SV, S.IV, S.RV]))
        states = nxt


def test_realization_is_deterministic_given_seed():
    net = build_multiplex(GraphSpec(n=200, mean_degree=4, seed=1),
                          GraphSpec(n=200, mean_degree=4, seed=2))
    P = ModelParams(beta_b=0.5)
    a = simulate_realization(net, P, InitialCondition((0,)), seed=42)
    b = simulate_realization(net, P, InitialCondition((0,)), seed=42)
    assert np.array_equal(a.node_states, b.node_states)
    assert a.infectious_counts == b.infectious_counts


@pytest.fixture(scope="module")
def small_net():
    return build_multiplex(GraphSpec(n=150, mean_degree=4, seed=8),
                           GraphSpec(n=150, mean_degree=4, seed=9))


def test_single_run_ensemble(small_net):
    P = ModelParams(beta_b=0.5)
    summary = run_ensemble(small_net, P, InitialCondition((0,)), runs=1, base_seed=5)
    records = run_ensemble_records(small_net, P, InitialCondition((0,)), runs=1, base_seed=5)
    assert summary.s_b_mean == records[0][1]
    assert summary.s_b_std == 0.0


def test_ensemble_reproducible_and_worker_independent(small_net):
    P = ModelParams(beta_b=0.5)
    init = InitialCondition((0, 1))
    a = run_ensemble(small_net, P, init, runs=20, base_seed=9)
    b = run_ensemble(small_net, P, init, runs=20, base_seed=9)
    c = run_ensemble(small_net, P, init, runs=20, base_seed=9, workers=2)
    assert a == b == c
    assert 0 <= a.s_b_mean <= 1 and a.s_b_std >= 0
    assert 0 <= a.fraction_extinct <= 1


def test_extinction_fraction():
    records = [(0.0, 0.01, 3), (0.0, 0.5, 9), (0.0, 0.05, 4), (0.0, 0.4, 8)]
    summary = summarize_records(records, 100)
    assert summary.fraction_extinct == 0.5
    assert summary.s_b_mean_outbreak == pytest.approx(0.45)


def test_runs_csv(tmp_path):
    path = tmp_path / "runs.csv"
    write_runs_csv([(0.5, 0.25, 7)], path)
    assert path.read_text() == "run,s_a,s_b,steps\n0,0.5,0.25,7\n"


def test_one_step_from_product_form_start_matches_mmca():
    # random product-form start. One MMCA step is exact only if no pair is linked in
    # both layers; a shared neighbor would correlate q with q_sa / q_ia.
    net = net_from(4, [(0, 1), (1, 2), (2, 3), (0, 3)], [(0, 2), (1, 3)])
    P = ModelParams(beta_a=0.6, beta_b=0.7, delta_a=0.5, delta_b=0.4, gamma=0.4, kappa=0.3)
    rng = np.random.default_rng(77)
    p0 = rng.random((4, 12)) ** 2
    p0 /= p0.sum(axis=1, keepdims=True)
    expected = mmca_step(net, JointStateDistribution(p0), P).p
    runs = 400_000
    cum = np.cumsum(p0, axis=1)
    cum /= cum[:, -1:]
    u = rng.random((runs, 4))
    start = np.stack([np.searchsorted(cum[i], u[:, i], side="right") for i in range(4)], axis=1)
    after = sample_successors(net, start, P, rng)
    for i in range(4):
        counts = np.bincount(after[:, i], minlength=12)
        # 48 cells checked at once, so 4 sigma keeps the family-wise false alarm rate low
        assert within_sigmas(counts, expected[i], runs, 4), i

"""Estimator behavior: the deviation test, the Gaussian disk probability,
the five-case priority logic, and scalar/matrix agreement."""

import math

import numpy as np
import pytest

from tensr.chi2 import chi2_quantile_2
from tensr.estimator import (AdjacencyEstimate, EstimatorParams, NodeView,
                             deviation_test, estimate, estimate_matrix,
                             location_adjacency)
from tensr.linkstate import MAT_A, MAT_D, MAT_R, LinkStateStore
from tensr.mobility import MobilityPlan
from tensr.pli import PliRecord, PliTable, sigma_p

# Frozen output of tools/mc_oracles.py (seed 20260816, 1e6 samples):
# {(separation, sigma_i, sigma_j, d): (estimate, std_error)}
DISK_MC = {
    (450.0, 20.0, 20.0, 500.0): (0.9586940, 1.990e-04),
    (2000.0, 10.0, 10.0, 500.0): (0.0000000, 1.000e-09),
}


def make_view(n=4, q=2, v_max=30.0, **param_kwargs):
    params = EstimatorParams.uniform(n, v_max=v_max, **param_kwargs)
    return NodeView(node_id=q, store=LinkStateStore(n), pli=PliTable(),
                    plans={}, params=params)


# ---------------------------------------------------------------- deviation


def test_deviation_zero_distance_accepted():
    p = np.array([3.0, 4.0])
    assert not deviation_test(p, p, 10.0, 10.0, 0.05)


def test_deviation_textbook_threshold():
    # sigma = sqrt(200); radius = sigma * sqrt(quantile(0.95)) ~ 34.62 m
    radius = math.sqrt(200.0 * chi2_quantile_2(0.95))
    assert abs(radius - 34.62) < 0.01
    theta = np.zeros(2)
    assert deviation_test(np.array([100.0, 0.0]), theta, 10.0, 10.0, 0.05)
    assert not deviation_test(np.array([radius - 1e-9, 0.0]), theta,
                              10.0, 10.0, 0.05)
    assert deviation_test(np.array([radius + 1e-9, 0.0]), theta,
                          10.0, 10.0, 0.05)


def test_deviation_false_rejection_rate():
    # under the null the rejection rate must settle near alpha
    rng = np.random.default_rng(42)
    theta = np.zeros(2)
    sigma = math.sqrt(200.0)
    rejections = sum(
        deviation_test(rng.standard_normal(2) * sigma, theta, 10.0, 10.0,
                       0.05)
        for _ in range(10_000))
    assert 0.04 <= rejections / 10_000 <= 0.06


# ------------------------------------------------------------- disk prob


def test_location_adjacency_coincident_means():
    mu = np.array([120.0, -40.0])
    assert location_adjacency(mu, 10.0, mu, 10.0, 500.0) > 1.0 - 1e-12


def test_location_adjacency_far_apart():
    p = location_adjacency(np.zeros(2), 10.0, np.array([2000.0, 0.0]),
                           10.0, 500.0)
    assert p < 1e-6


def test_location_adjacency_matches_monte_carlo():
    for (sep, si, sj, d), (p_mc, _se) in DISK_MC.items():
        p = location_adjacency(np.zeros(2), si, np.array([sep, 0.0]), sj, d)
        assert abs(p - p_mc) < 2e-3


def test_location_adjacency_rigid_motion_invariant():
    rng = np.random.default_rng(3)
    for _ in range(20):
        mu_i = rng.uniform(-500, 500, 2)
        mu_j = rng.uniform(-500, 500, 2)
        base = location_adjacency(mu_i, 12.0, mu_j, 17.0, 400.0)
        ang = rng.uniform(0, 2 * math.pi)
        rot = np.array([[math.cos(ang), -math.sin(ang)],
                        [math.sin(ang), math.cos(ang)]])
        shift = rng.uniform(-1e4, 1e4, 2)
        moved = location_adjacency(rot @ mu_i + shift, 12.0,
                                   rot @ mu_j + shift, 17.0, 400.0)
        assert abs(base - moved) < 1e-12


def test_location_adjacency_monotone_in_range():
    mu_j = np.array([300.0, 0.0])
    vals = [location_adjacency(np.zeros(2), 15.0, mu_j, 15.0, d)
            for d in np.linspace(50, 900, 30)]
    assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))


def test_location_adjacency_zero_variance_is_exact_test():
    mu_j = np.array([400.0, 0.0])
    assert location_adjacency(np.zeros(2), 0.0, mu_j, 0.0, 500.0) == 1.0
    assert location_adjacency(np.zeros(2), 0.0, mu_j, 0.0, 300.0) == 0.0


# ------------------------------------------------------------ case logic


def test_case1_endpoint_reads_own_row():
    view = make_view(q=0)
    view.store.set_entry(MAT_A, 0, 1, 1.0, 5.0)
    assert estimate(view, 0, 1, 6.0) == AdjacencyEstimate(1.0, 1)
    assert estimate(view, 0, 3, 6.0) == AdjacencyEstimate(0.0, 1)
    assert estimate(view, 2, 0, 6.0).case_used == 1


def test_case2_recent_measurement_within_budget():
    # range 500, distance 200, combined speed 60 -> budget 5 s
    view = make_view(q=2)
    view.store.set_entry(MAT_A, 0, 1, 1.0, 10.0)
    view.store.set_entry(MAT_D, 0, 1, 200.0, 10.0)
    assert estimate(view, 0, 1, 14.0) == AdjacencyEstimate(1.0, 2)


def test_case2_boundary_exact_then_epsilon():
    view = make_view(q=2)
    view.store.set_entry(MAT_A, 0, 1, 1.0, 10.0)
    view.store.set_entry(MAT_D, 0, 1, 200.0, 10.0)
    thresh = (500.0 - 200.0) / 60.0
    assert estimate(view, 0, 1, 10.0 + thresh).case_used == 2
    assert estimate(view, 0, 1, 10.0 + thresh + 1e-9).case_used == 5


def test_case2_requires_populated_entries():
    view = make_view(q=2)
    view.store.set_entry(MAT_A, 0, 1, 1.0, 10.0)  # no distance entry
    assert estimate(view, 0, 1, 10.5).case_used == 5


def test_case3_reports_only():
    view = make_view(q=2)
    view.pli.put(PliRecord(0, np.array([0.0, 0.0]), 9.0))
    view.pli.put(PliRecord(1, np.array([450.0, 0.0]), 10.0))
    got = estimate(view, 0, 1, 12.0)
    assert got.case_used == 3
    s0 = sigma_p(3.0, view.params.pli)
    s1 = sigma_p(2.0, view.params.pli)
    want = location_adjacency(np.zeros(2), s0, np.array([450.0, 0.0]), s1,
                              500.0)
    assert abs(got.p_hat - want) < 1e-12


def test_case3_needs_both_reports_fresh():
    view = make_view(q=2)
    view.pli.put(PliRecord(0, np.zeros(2), 9.0))
    view.pli.put(PliRecord(1, np.array([450.0, 0.0]), 1.0))  # 11 s stale
    assert estimate(view, 0, 1, 12.0).case_used == 5


def test_case3_plan_following_uses_plan_model():
    # reports sit on the planned track, so the accepted branch projects
    # the plan to "now" with the tight plan noise
    view = make_view(q=2)
    plan0 = MobilityPlan(0, np.array([0.0, 100.0]),
                         np.array([[0.0, 0.0], [1000.0, 0.0]]))
    plan1 = MobilityPlan(1, np.array([0.0, 100.0]),
                         np.array([[300.0, 0.0], [300.0, 1000.0]]))
    view.plans = {0: plan0, 1: plan1}
    view.pli.put(PliRecord(0, np.array([80.0, 0.0]), 8.0))
    view.pli.put(PliRecord(1, np.array([300.0, 80.0]), 8.0))
    got = estimate(view, 0, 1, 10.0)
    assert got.case_used == 3
    want = location_adjacency(np.array([100.0, 0.0]), 10.0,
                              np.array([300.0, 100.0]), 10.0, 500.0)
    assert abs(got.p_hat - want) < 1e-12


def test_case3_deviated_report_overrides_plan():
    # node 0 is reported far off its track: the test must reject and fall
    # back to the report with staleness-widened sigma
    view = make_view(q=2)
    plan0 = MobilityPlan(0, np.array([0.0, 100.0]),
                         np.array([[0.0, 0.0], [1000.0, 0.0]]))
    view.plans = {0: plan0}
    view.pli.put(PliRecord(0, np.array([80.0, 400.0]), 8.0))
    view.pli.put(PliRecord(1, np.array([300.0, 100.0]), 8.0))
    got = estimate(view, 0, 1, 10.0)
    assert got.case_used == 3
    sp = sigma_p(2.0, view.params.pli)
    want = location_adjacency(np.array([80.0, 400.0]), sp,
                              np.array([300.0, 100.0]), sp, 500.0)
    assert abs(got.p_hat - want) < 1e-12


def test_case3_expired_plan_horizon_falls_back_to_report():
    view = make_view(q=2)
    plan0 = MobilityPlan(0, np.array([0.0, 100.0]),
                         np.array([[0.0, 0.0], [1000.0, 0.0]]),
                         horizon=9.0)
    view.plans = {0: plan0}
    view.pli.put(PliRecord(0, np.array([80.0, 0.0]), 8.0))
    view.pli.put(PliRecord(1, np.array([300.0, 0.0]), 8.0))
    got = estimate(view, 0, 1, 10.0)  # past the horizon
    sp = sigma_p(2.0, view.params.pli)
    want = location_adjacency(np.array([80.0, 0.0]), sp,
                              np.array([300.0, 0.0]), sp, 500.0)
    assert got.case_used == 3
    assert abs(got.p_hat - want) < 1e-12


def test_case4_tie_ratio():
    view = make_view(q=2)
    view.store.set_entry(MAT_R, 0, 1, 5.0, 100.0)
    assert estimate(view, 0, 1, 130.0) == AdjacencyEstimate(0.5, 4)
    view.store.set_entry(MAT_R, 0, 3, 0.0, 100.0)
    assert estimate(view, 0, 3, 130.0) == AdjacencyEstimate(0.0, 4)


def test_case4_staleness_threshold():
    view = make_view(q=2)
    view.store.set_entry(MAT_R, 0, 1, 5.0, 100.0)
    assert estimate(view, 0, 1, 160.0).case_used == 4   # exactly 60 s
    assert estimate(view, 0, 1, 160.1).case_used == 5


def test_case5_default_prior():
    view = make_view(q=2)
    assert estimate(view, 0, 1, 50.0) == AdjacencyEstimate(0.01, 5)


def test_self_pair_rejected():
    view = make_view()
    with pytest.raises(ValueError):
        estimate(view, 1, 1, 0.0)


def build_loaded_view(now=20.0):
    """A view satisfying cases 2, 3 and 4 simultaneously for pair (0,1)."""
    view = make_view(n=4, q=2)
    view.store.set_entry(MAT_A, 0, 1, 1.0, now - 1.0)
    view.store.set_entry(MAT_D, 0, 1, 100.0, now - 1.0)
    view.store.set_entry(MAT_R, 0, 1, 8.0, now - 5.0)
    view.pli.put(PliRecord(0, np.array([0.0, 0.0]), now - 2.0))
    view.pli.put(PliRecord(1, np.array([100.0, 0.0]), now - 2.0))
    return view


def test_shadowing_order():
    now = 20.0
    view = build_loaded_view(now)

    view.node_id = 0       # endpoint: case 1 wins over everything
    assert estimate(view, 0, 1, now).case_used == 1
    view.node_id = 2
    assert estimate(view, 0, 1, now).case_used == 2

    # stale distance stamp: budget (500-100)/60 ~ 6.67 s < 8 s
    view.store.set_entry(MAT_D, 0, 1, 100.0, now - 8.0)
    assert estimate(view, 0, 1, now).case_used == 3

    # stale report for one endpoint: falls through to the tie (the table
    # keeps the newest record, so swap in a rebuilt one)
    view.pli = PliTable()
    view.pli.put(PliRecord(0, np.array([0.0, 0.0]), now - 2.0))
    view.pli.put(PliRecord(1, np.array([100.0, 0.0]), now - 11.0))
    assert estimate(view, 0, 1, now).case_used == 4

    # decades later everything is stale
    assert estimate(view, 0, 1, now + 1000.0).case_used == 5


# ------------------------------------------------------- matrix agreement


def populate_random_view(rng, n=8):
    view = make_view(n=n, q=int(rng.integers(n)))
    now = 100.0
    for i in range(n):
        for j in range(i + 1, n):
            roll = rng.random()
            if roll < 0.3:
                view.store.set_entry(MAT_A, i, j, 1.0,
                                     now - rng.uniform(0, 3))
                view.store.set_entry(MAT_D, i, j, rng.uniform(0, 600),
                                     now - rng.uniform(0, 10))
            if roll < 0.6:
                view.store.set_entry(MAT_R, i, j, float(rng.integers(0, 11)),
                                     now - rng.uniform(0, 120))
    for node in range(n):
        if rng.random() < 0.7:
            view.pli.put(PliRecord(node, rng.uniform(-800, 800, 2),
                                   now - rng.uniform(0, 15)))
        if rng.random() < 0.5:
            pts = rng.uniform(-800, 800, (3, 2))
            view.plans[node] = MobilityPlan(
                node, np.array([0.0, 60.0, 200.0]), pts,
                horizon=float(rng.choice([50.0, math.inf])))
    return view, now


def test_matrix_matches_scalar_on_random_views():
    rng = np.random.default_rng(2024)
    for _ in range(12):
        view, now = populate_random_view(rng)
        p_mat, case_mat = estimate_matrix(view, now)
        n = view.store.n
        assert np.allclose(np.diag(p_mat), 1.0)
        assert np.all(np.diag(case_mat) == 0)
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                got = estimate(view, i, j, now)
                assert case_mat[i, j] == got.case_used, (i, j)
                assert abs(p_mat[i, j] - got.p_hat) < 1e-9, (i, j)


def test_matrix_probabilities_in_range():
    rng = np.random.default_rng(99)
    for _ in range(5):
        view, now = populate_random_view(rng)
        p_mat, case_mat = estimate_matrix(view, now)
        assert np.all(p_mat >= 0.0) and np.all(p_mat <= 1.0)
        off = ~np.eye(view.store.n, dtype=bool)
        assert np.all(case_mat[off] >= 1) and np.all(case_mat[off] <= 5)


def test_params_validation():
    with pytest.raises(ValueError):
        EstimatorParams.uniform(3, d_max=0.0)
    with pytest.raises(ValueError):
        EstimatorParams.uniform(3, p0=0.0)
    with pytest.raises(ValueError):
        EstimatorParams(sigma_n=np.ones(3), v_max=np.ones(2),
                        d_max=np.ones(3) * 500)

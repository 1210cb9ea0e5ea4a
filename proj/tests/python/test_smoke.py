"""End-to-end smoke tests for the python extension.

Heavy numerics are covered by the C++ suites; these runs keep path counts
small and check that every exposed operation round-trips sanely.
"""

import math

import pytest

import smalltime as st

GBM = {"kind": "GBM", "params": {"sigma": 0.2, "r": 0.05}, "x0": [100.0]}
BM = {"kind": "DriftedBM", "params": {"b": 0.5, "sigma": 1.0}, "x0": [0.0]}


def test_version_is_exposed():
    assert isinstance(st.__version__, str) and st.__version__


def test_canonical_model_and_hash_are_stable():
    a = st.canonical_model(GBM)
    b = st.canonical_model(a["model"])
    assert a["model"] == b["model"]
    assert a["hash"] == b["hash"]
    assert len(a["hash"]) == 16


def test_model_validation_raises():
    with pytest.raises(ValueError):
        st.canonical_model({"kind": "GBM", "params": {"sigma": -1.0, "r": 0.0}, "x0": [1.0]})


def test_check_assumptions_reports_items():
    rep = st.check_assumptions(GBM)
    assert "items" in rep and "overall" in rep
    assert rep["items"]


def test_bounds_at_matches_reference():
    b = st.bounds_at(0.5, 0.01)
    assert b["e_f1"] == pytest.approx(0.470825528367459695, abs=1e-14)
    assert b["e_f2"] == pytest.approx(0.529656455681259558, abs=1e-14)
    assert b["in_horizon"]
    curve = st.girsanov_bounds(0.5, [1e-4, 1e-2])
    assert len(curve["rows"]) == 2
    assert st.expansion_error_limit(1.0) == pytest.approx(
        math.log(2.0) / 2.0 - 0.25, abs=1e-15
    )


def test_drift_bound_and_bracketing():
    assert st.drift_bound(GBM) == pytest.approx(0.15, abs=1e-15)
    rep = st.verify_bracketing(BM, [1e-4, 1e-2], n_paths=1000, seed=3)
    assert rep["all_pass"]
    assert all(row["exact"] for row in rep["rows"])


def test_simulate_terminal_shape_and_reproducibility():
    a = st.simulate_terminal(GBM, 0.25, n_paths=500, seed=9)
    b = st.simulate_terminal(GBM, 0.25, n_paths=500, seed=9)
    assert a["values"].shape == (500, 1)
    assert (a["values"] == b["values"]).all()
    assert a["meta"]["scheme"] == "Exact"
    assert float(a["values"].mean()) == pytest.approx(
        100.0 * math.exp(0.05 * 0.25), rel=0.05
    )


def test_simulate_paths_columns_follow_grid():
    out = st.simulate_paths(BM, [0.0, 0.5, 1.0], n_paths=200, seed=4)
    assert out["values"].shape == (200, 3)
    assert out["columns"][0] == "x1@t=0"
    assert (out["values"][:, 0] == 0.0).all()


def test_clt_check_verdicts():
    rep = st.clt_check(GBM, mapping="log", t_schedule=[1e-2, 1e-6], n_paths=20000, seed=42)
    assert rep["verdict"] == "consistent"
    sq = {"kind": "SquaredBM", "params": {}, "x0": [0.0]}
    assert st.clt_check(sq, t_schedule=[1e-2, 1e-6], n_paths=20000)["verdict"] == "degenerate"


def test_fclt_check_passes_for_brownian_motion():
    rep = st.fclt_check(BM, u_schedule=[1e-3, 1e-5], n_paths=4000, seed=5)
    assert rep["verdict"] == "consistent"


def test_ldp_rate_closed_forms():
    assert st.ldp_rate(lambda u: 2.0, 0.0, 1.0) == pytest.approx(0.125, abs=1e-10)
    half_log2_sq = 0.5 * math.log(2.0) ** 2
    assert st.ldp_rate(lambda u: u, 1.0, 1.0) == pytest.approx(half_log2_sq, abs=1e-8)


def test_pricing_round_trip():
    price = st.bs_call(100.0, 110.0, 0.03, 0.5, 0.25)
    assert price == pytest.approx(3.898551183185060247, abs=1e-12)
    quote = st.implied_vol(price, 100.0, 110.0, 0.03, 0.5)
    assert quote["sigma"] == pytest.approx(0.25, abs=1e-10)
    with pytest.raises(ValueError):
        st.implied_vol(200.0, 100.0, 110.0, 0.03, 0.5)


def test_mc_digital_brackets_closed_form():
    est = st.mc_digital(GBM, 100.0, 1e-4, n_paths=200000, seed=42)
    assert est["exact"]
    lo, hi = est["prob_ci"]
    assert lo <= 0.500595910210388681 <= hi
    assert est["price"] == pytest.approx(est["discount"] * est["prob"], rel=1e-14)


def test_atm_digital_check_passes_for_gbm():
    rep = st.atm_digital_check(GBM, t_schedule=[1e-2, 1e-4], n_paths=100000, seed=42)
    assert rep["verdict"] == "pass"
    assert len(rep["rows"]) == 2


def test_skew_check_analytic():
    rep = st.skew_check(GBM, [2.0**-k for k in range(2, 11)], analytic=True)
    assert len(rep["reports"]) == 9
    assert rep["width_ratio_check"]["pass"]
    assert all(r["in_model_free"] == "inside" for r in rep["reports"])


def test_stats_helpers():
    assert st.normal_cdf(0.0) == pytest.approx(0.5, abs=1e-15)
    assert st.normal_quantile(0.975) == pytest.approx(1.959963984540054236, abs=1e-12)
    lo, hi = st.wilson_interval(620, 1000, 0.99)
    assert lo == pytest.approx(0.5797945446495353968, abs=1e-12)
    assert hi == pytest.approx(0.6586235757736469638, abs=1e-12)

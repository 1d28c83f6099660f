import math

import pytest
from fastapi.testclient import TestClient

from glauberlab import magchain as mc
from glauberlab.model import ModelParams
from glauberlab.service import app


@pytest.fixture(scope="module")
def client():
    return TestClient(app)


class TestBasicEndpoints:
    def test_healthz(self, client):
        r = client.get("/healthz")
        assert r.status_code == 200 and r.json()["status"] == "ok"

    def test_kernel_matches_library(self, client):
        r = client.post("/kernel", json={"n": 8, "beta": 0.9})
        assert r.status_code == 200
        body = r.json()
        chain = mc.build_kernel(ModelParams(8, 0.9))
        assert body["p"] == [float(x) for x in chain.p]
        assert body["q"] == [float(x) for x in chain.q]

    def test_censored_kernel(self, client):
        r = client.post("/kernel", json={"n": 8, "beta": 1.2, "kind": "censored"})
        assert r.json()["states"][0] == 0.0

    def test_stationary(self, client):
        r = client.post("/stationary", json={"n": 50, "beta": 1.1})
        body = r.json()
        assert abs(sum(body["pi"]) - 1.0) < 1e-12
        assert body["route_deviation"] <= 1e-10

    def test_tvcurve_and_mix_consistency(self, client):
        mix = client.post(
            "/mix", json={"n": 80, "beta": 0.8, "eps": 0.25, "start": "all-plus"}
        ).json()
        curve = client.post(
            "/tvcurve", json={"n": 80, "beta": 0.8, "t_max": mix["steps"]}
        ).json()
        assert curve["value"][-1] <= 0.25 < curve["value"][-2]

    def test_gap_endpoints_agree(self, client):
        g1 = client.post("/gap", json={"n": 8, "beta": 0.9}).json()
        g2 = client.post("/fullgap", json={"n": 8, "beta": 0.9}).json()
        assert abs(g1["gap"] - g2["gap"]) <= 1e-8
        assert g1["method"] == "tridiagonal-bisection" and g2["method"] == "dense"
        assert "residual" in g1 and "residual" in g2

    def test_electric_payload(self, client):
        r = client.post("/electric", json={"n": 40, "beta": 1.2}).json()
        assert len(r["log_r"]) == 40 and len(r["log_w"]) == 41
        assert r["log_c"][r["ref_state"]] == 0.0
        assert max(abs(a + b) for a, b in zip(r["log_r"], r["log_c"])) < 1e-12

    def test_zeta_and_texp(self, client):
        z = client.post("/zeta", json={"beta": 1.2}).json()
        assert abs(z["zeta"] - 0.65856966) < 1e-6
        t = client.post("/texp", json={"n": 40, "beta": 1.3}).json()
        assert abs(t["value"] - math.exp(t["log_value"])) < 1e-6

    def test_hitting(self, client):
        r = client.post(
            "/hitting", json={"n": 2, "beta": 0.0, "source": 1.0, "target": 0.0}
        ).json()
        assert abs(r["expected"] - 2.0) < 1e-12


class TestValidation:
    def test_zeta_subcritical_is_422(self, client):
        r = client.post("/zeta", json={"beta": 0.8})
        assert r.status_code == 422

    def test_bad_n_is_422(self, client):
        assert client.post("/kernel", json={"n": 1, "beta": 0.5}).status_code == 422
        assert client.post("/kernel", json={"n": 10, "beta": -1.0}).status_code == 422

    def test_fullgap_size_cap(self, client):
        assert client.post("/fullgap", json={"n": 13, "beta": 0.5}).status_code == 422

    def test_simulate_needs_target(self, client):
        r = client.post("/simulate", json={"n": 20, "beta": 0.9, "mode": "hitting"})
        assert r.status_code == 422


class TestSimulateEndpoint:
    def test_hitting_reproducible(self, client):
        req = {
            "n": 30, "beta": 0.9, "mode": "hitting", "target_kind": "abs_le",
            "target_value": 0.05, "reps": 8, "seed": 21, "include_samples": True,
        }
        a = client.post("/simulate", json=req).json()
        b = client.post("/simulate", json=req).json()
        assert a["samples"] == b["samples"]
        assert a["valid"] and a["capped"] == 0

    def test_coalescence_curve(self, client):
        r = client.post(
            "/simulate", json={"n": 30, "beta": 0.8, "mode": "coalescence", "reps": 6, "seed": 2}
        ).json()
        vals = r["bound_curve"]["value"]
        assert all(b <= a for a, b in zip(vals, vals[1:]))


class TestScanAndVerify:
    def test_scan_endpoint(self, client):
        r = client.post(
            "/scan",
            json={"kind": "critical-scan", "n": [64, 128], "beta": [1.0], "seed": 3},
        )
        body = r.json()
        assert body["kind"] == "critical-scan" and body["passed"] is True
        assert body["env"]["package"] == "glauberlab"

    def test_scan_validation(self, client):
        r = client.post("/scan", json={"kind": "cutoff-scan", "n": [], "beta": [0.8]})
        assert r.status_code == 422

    def test_verify_endpoint_single_suite(self, client):
        r = client.post("/verify", json={"suites": ["drift-identity"]})
        body = r.json()
        assert body["passed"] is True
        assert body["verdicts"][0]["name"] == "drift-identity"

    def test_verify_unknown_suite(self, client):
        assert client.post("/verify", json={"suites": ["nope"]}).status_code == 422

    def test_verify_default_runs_fast_suite(self, client):
        from glauberlab.acceptance import FAST_SUITE

        r = client.post("/verify", json={})
        body = r.json()
        assert [v["name"] for v in body["verdicts"]] == list(FAST_SUITE)
        assert body["passed"] is True

import json
import os
from pathlib import Path

import numpy as np
import pytest

import cscopf

CASES = Path(os.environ.get("CSCOPF_CASE_DIR", Path(__file__).resolve().parents[2] / "cases"))
WSCC9 = str(CASES / "wscc9.json")


def test_load_case_round_trip():
    c = json.loads(cscopf.load_case(WSCC9))
    assert len(c["buses"]) == 9
    assert len(c["generators"]) == 3


def test_malformed_case_raises(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"base_mva": 100, "buses": [{"id": 1}], "branches": [], "generators": []}')
    with pytest.raises(cscopf.CaseError):
        cscopf.load_case(str(bad))


def test_relaxed_opf_9bus():
    r = cscopf.relaxed_opf(WSCC9)
    assert r["status"] == "optimal"
    assert abs(r["cost"] - 5324.30) <= 0.01 * 5324.30
    assert r["V"].shape == (18,)
    assert r["stability"]["sigma_max"] > 0


def test_cscopf_9bus_stabilises():
    r = cscopf.cscopf(WSCC9, gamma=(15, 1, 1, 1, 1))
    assert r["status"] == "optimal"
    assert r["stability"]["verdict"] == "stable"
    assert r["delta_p"] <= 10
    # highest-inertia unit (bus 1) picks up load
    assert r["Pg"][0] > r["base"]["Pg"][0]


def test_spectral_abscissa_and_rank_one():
    assert cscopf.spectral_abscissa(np.diag([-1.0, -2.0])) == pytest.approx((-1.0, 0))
    v = np.array([1.0, -0.5, 0.25])
    x, eps = cscopf.rank_one_decompose(np.outer(v, v))
    assert np.allclose(x, v)
    assert eps == pytest.approx(0.0, abs=1e-14)


def test_run_command(tmp_path):
    rc, log = cscopf.run(command="opf", case=WSCC9, out=str(tmp_path))
    assert rc == 0, log
    assert (tmp_path / "report.csv").exists()
    rc, log = cscopf.run(command="verify", case=WSCC9, out=str(tmp_path))
    assert rc == 1
    assert "unstable" in log
    with pytest.raises(cscopf.ConfigError):
        cscopf.run(command="opf", case=WSCC9, gamma=[1, 2])

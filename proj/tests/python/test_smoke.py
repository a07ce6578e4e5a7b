import math
import os

import numpy as np
import pytest

import pdswitch

CONFIGS = os.environ.get("PDSWITCH_CONFIG_DIR", os.path.join(os.path.dirname(__file__), "..", "..", "configs"))


def test_names_and_version():
    assert "switched_ou" in pdswitch.model_names()
    assert pdswitch.__version__


def test_spectral_summary():
    lmax, lmin, rho = pdswitch.spectral_summary(np.diag([1.0, 3.0]))
    assert (lmax, lmin, rho) == pytest.approx((3.0, 1.0, 1.0))
    assert pdswitch.spectral_summary(np.diag([2.0, -1.0]))[2] == 0.0


def test_stationary_laws():
    nu = pdswitch.stationary("controlled_scalar", 30)
    assert nu[:25] == pytest.approx([2.0 ** -(i + 1) for i in range(25)], abs=1e-8)
    nu = pdswitch.stationary("switched_ou", 30)
    assert nu[0] == pytest.approx(1 / 3, abs=1e-8)


def test_certificates():
    c = pdswitch.certify("switched_ou")
    assert c["verdict"] == "POSITIVE_RECURRENT_CERTIFIED"
    assert c["partial_sum"] == pytest.approx(-1.0, abs=1e-9)
    weak = pdswitch.certify("controlled_scalar", {"L": [1.0, 0.0]})
    assert weak["verdict"] == "INCONCLUSIVE"
    assert pdswitch.search_gain("controlled_scalar") > 2.0
    with pytest.raises(ValueError):
        pdswitch.certify("no_such_model")


def test_simulate_is_deterministic():
    a = pdswitch.simulate("switched_ou", [2.0], T=2.0, seed=5)
    b = pdswitch.simulate("switched_ou", [2.0], T=2.0, seed=5)
    assert np.array_equal(a["x"], b["x"])
    assert a["mode"] == b["mode"]
    assert a["x"].shape == (len(a["t"]), 1)
    assert a["t"][-1] == pytest.approx(2.0)


def test_hitting_time():
    e = pdswitch.hitting_time("switched_ou", [2.0], H=1.0, k0=2, T=50.0, paths=200)
    assert e["usable"]
    assert math.isfinite(e["mean"]) and e["mean"] > 0.0


def test_run_cli(tmp_path):
    code, out, _ = pdswitch.run_cli(
        ["certify", "--model", os.path.join(CONFIGS, "switched_ou.json"), "--out", str(tmp_path)]
    )
    assert code == 0
    assert out.startswith("POSITIVE_RECURRENT_CERTIFIED")
    assert (tmp_path / "certificate.json").exists()
    code, _, err = pdswitch.run_cli(["certify", "--model", "/missing.json", "--out", str(tmp_path)])
    assert code == 2 and "/missing.json" in err

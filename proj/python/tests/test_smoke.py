import math

import numpy as np
import pytest

import quadm


def test_version():
    assert quadm.__version__.count(".") == 2


def test_lattice_closed_form():
    ps = quadm.generate("torus:1", "lattice", 4)
    assert len(ps) == 4
    assert ps.nodes.shape == (4, 1)
    rep = quadm.wce(ps, 1.0, method="kernel")
    ref = (1 / 8) / math.tanh(1 / 8) - 1
    assert abs(rep["value_sq"] - ref) < 1e-10


def test_pointset_from_numpy_and_roundtrip(tmp_path):
    nodes = np.array([[0.1, 0.2], [0.6, 0.7]])
    ps = quadm.PointSet("torus:2", nodes)
    assert ps.weights == [0.5, 0.5]
    path = str(tmp_path / "ps.json")
    ps.save(path)
    back = quadm.PointSet.load(path)
    assert np.array_equal(back.nodes, nodes)
    assert quadm.PointSet.from_json(ps.to_json()).to_json() == ps.to_json()


def test_routes_agree():
    ps = quadm.generate("sphere:2", "random", 12, seed=3)
    vals = [quadm.wce(ps, 1.5, method=m) for m in ("spectral", "kernel", "heat")]
    for v in vals:
        assert v["lower_sq"] - 1e-12 <= vals[1]["value_sq"] <= v["upper_sq"] + 1e-12


def test_exact_rule():
    rule = quadm.build_exact_rule("sphere:2", r2=13)
    assert len(rule) <= 17
    assert quadm.exactness_residual(rule, r2=13) <= 1e-10


def test_kernels():
    assert quadm.bessel_eval("torus:1", 2.0, [0.3], [0.3]) == pytest.approx(0.5 / math.tanh(0.5), rel=1e-12)
    assert quadm.heat_eval("torus:1", 10.0, [0.0], [0.4]) == pytest.approx(1.0, abs=1e-12)


def test_analysis_reports():
    ps = quadm.generate("torus:1", "lattice", 16)
    adv = quadm.adversarial_bound(ps, 1.5)
    assert adv["error"] == 1.0
    assert adv["ratio"] == pytest.approx(1 / adv["sobolev_norm"])
    fit = quadm.scaling_fit([2, 4, 8, 16], [7 * n**-2 for n in (2, 4, 8, 16)])
    assert fit["slope"] == pytest.approx(-2.0, abs=1e-12)
    disc = quadm.cap_discrepancy(quadm.generate("sphere:2", "fibonacci", 50), [0.2, 0.8], centers=16)
    assert len(disc["sup_disc"]) == 2
    q = quadm.qnorm_energy(ps, 1.5, q=float("inf"), grid=256)
    assert q["q"] == "inf"


def test_errors():
    ps = quadm.generate("torus:1", "random", 5)
    with pytest.raises(ValueError, match="alpha must exceed d/2"):
        quadm.wce(ps, 0.4)
    with pytest.raises(ValueError):
        quadm.generate("torus:2", "jittered", 6)
    with pytest.raises(ValueError):
        quadm.PointSet("torus:1", np.array([[0.1]]), [0.4])

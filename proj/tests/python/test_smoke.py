import math

import numpy as np
import pytest

import hsns


def small_config():
    c = hsns.SolverConfig()
    c.nu = 1e-2
    c.K = 2
    c.n_nodes = 96
    c.T = 0.1
    c.dt = 0.05
    return c


def test_erfcx_matches_math():
    for x in (-1.0, 0.0, 0.5, 3.0):
        assert hsns.erfcx(x) == pytest.approx(math.exp(x * x) * math.erfc(x), rel=1e-13)


def test_residual_kernel_oracles_agree():
    args = (1e-3, 2, 0.5, 0.01, 0.02)
    r = hsns.residual_kernel(*args)
    assert hsns.residual_kernel_quadrature(*args) == pytest.approx(r, rel=1e-8)
    assert hsns.contour_residual(*args) == pytest.approx(r, rel=1e-6)


def test_cross_validation_report():
    rep = hsns.cross_validate_green(20, 3)
    assert rep["disagreements"] == 0
    assert rep["n_samples"] == 20


def test_stationary_mode_under_semigroup():
    c = small_config()
    c.n_nodes = 256
    z = np.array(c.grid_nodes())
    modes = np.zeros((2 * c.K + 1, z.size), dtype=complex)
    modes[c.K + 1] = np.exp(-z)
    modes[c.K - 1] = np.exp(-z)
    out = hsns.apply_semigroup(modes, c, 1.0)
    assert np.max(np.abs(out - modes)) < 1e-5


def test_navier_stokes_shear_keeps_no_slip():
    tr = hsns.run_navier_stokes(small_config(), "shear")
    assert tr["complete"]
    assert len(tr["times"]) == 3
    assert max(tr["no_slip_residual"]) < 1e-8
    assert tr["kato"] > 0.0


def test_euler_conserves_energy():
    tr = hsns.run_euler(small_config(), "wall_mode")
    assert tr["complete"]
    e = tr["energy"]
    assert abs(e[-1] - e[0]) < 1e-6 * e[0]


def test_checkpoint_roundtrip(tmp_path):
    c = small_config()
    modes = hsns.sample_datum("two_mode", c)
    path = tmp_path / "w.hsns"
    hsns.save_checkpoint(str(path), modes, c, 0.25)
    back = hsns.load_checkpoint(str(path))
    assert back["K"] == c.K
    assert back["t"] == 0.25
    assert np.array_equal(back["modes"], modes)
    path.write_bytes(path.read_bytes()[:-8])
    with pytest.raises(hsns.CheckpointError):
        hsns.load_checkpoint(str(path))


def test_run_experiment_rejects_unknown_keys(tmp_path):
    with pytest.raises(hsns.ConfigError):
        hsns.run_experiment("bogus = 1\n")
    summary = hsns.run_experiment(
        "command = simulate-ns\nnu = 1e-2\nK = 2\nn_nodes = 96\nT = 0.1\ndt = 0.05\n",
        [f"out={tmp_path / 'run'}"],
    )
    assert summary["complete"]
    assert "timeseries.csv" in summary["files"]


def test_lemma_report():
    rep = hsns.lemma_report()
    checks = {c["name"]: c for c in rep["checks"]}
    assert checks["product"]["max_ratio"] <= 1.0

import numpy as np
import pytest

import portpmp


def test_classic_solve_matches_analytic():
    ex = portpmp.solve(portpmp.classic_problem())
    assert ex.nu == -1.0
    assert ex.cost == pytest.approx(4.0, rel=1e-9)
    np.testing.assert_allclose(ex.lambda0, [12.0, 4.0], rtol=1e-8)
    tr = ex.trajectory
    np.testing.assert_allclose(tr["u"][:, 0], -6 * tr["t"] + 2, atol=1e-6)
    assert tr["q"].shape == (1001, 2)


def test_roundtrip_and_parameters():
    p = portpmp.classic_problem()
    assert portpmp.load_problem(p.serialize()) == p
    assert p.with_parameter("t1", 2.0).t1 == 2.0
    with pytest.raises(portpmp.ValidationError):
        p.with_parameter("mass", 1.0)


def test_parse_error_is_typed():
    with pytest.raises(portpmp.Error):
        portpmp.load_problem("[dims]\nn = two\n")


def test_direct_compare_on_ported():
    params = portpmp.CheapestStopParams()
    params.f = "0.1*t"
    params.fprime = "0.1"
    p = portpmp.ported_problem(params)
    rep = portpmp.compare(portpmp.solve(p), portpmp.solve_direct(p), 0.02)
    assert rep.passed, rep.summary()


def test_abnormal_rejected():
    cfg = portpmp.SolverConfig()
    cfg.nu_mode = portpmp.NuMode.abnormal
    with pytest.raises(portpmp.SolverFailed):
        portpmp.solve(portpmp.classic_problem(), cfg)


def test_maximize_hamiltonian():
    p = portpmp.classic_problem()
    u = portpmp.maximize_hamiltonian(p, np.array([0.7, 3.0]), np.array([0.0, 1.0]), 0.2, -1.0)
    assert u[0] == pytest.approx(1.5, rel=1e-14)

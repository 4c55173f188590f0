import math

import numpy as np
import pytest

import _spinsense as sp


@pytest.fixture(scope="module")
def chain5():
    net = sp.SpinNetwork(5, sp.Topology.Chain, 1.0)
    ctrl = sp.Controller(
        biases=np.array([0.9, -0.3, 1.7, 0.2, 0.0]),
        readout_time=4.5,
        input_spin=1,
        output_spin=3,
    )
    h = sp.build_hamiltonian(net, ctrl)
    return net, ctrl, h


def test_hamiltonian_structure(chain5):
    _, _, h = chain5
    m = np.asarray(h.matrix)
    assert m.shape == (5, 5)
    assert np.allclose(m, m.T)
    assert m[0, 1] == 1.0 and m[0, 2] == 0.0


def test_transfer_targets():
    chain = sp.SpinNetwork(5, sp.Topology.Chain, 1.0)
    ring = sp.SpinNetwork(6, sp.Topology.Ring, 1.0)
    assert sp.transfer_targets(chain) == [3, 5]
    assert sp.transfer_targets(ring) == [2, 3]


def test_error_pipeline(chain5):
    _, ctrl, h = chain5
    basis = sp.HermitianBasis(5)
    deph = sp.generate_dephasing_set(h, basis, 20, 42)
    assert deph.size() == 20

    evaluator = sp.ErrorEvaluator(h, 1, 3)
    e0 = evaluator.nominal_error(ctrl.readout_time)
    assert 0.0 <= e0 <= 1.0
    assert evaluator.perturbed_error(ctrl.readout_time, deph.ops[0], 0.0) == e0

    grid = sp.StrengthGrid(100, 0.1)
    egrid = sp.compute_error_grid(evaluator, ctrl.readout_time, deph, grid, 0, 1)
    values = np.asarray(egrid.values)
    assert values.shape == (101, 20)
    assert np.all(values[0, :] == e0)

    curve = sp.rim1_curve(egrid)
    assert np.asarray(curve.values)[0] == e0
    assert np.asarray(curve.adjusted)[0] == 0.0

    rec = sp.compute_sensitivity_record(evaluator, ctrl.readout_time, deph, egrid, 0)
    assert rec.zeta_a == rec.s_a * rec.e_T


def test_kendall_tau():
    assert sp.kendall_tau([1, 2, 3], [1, 2, 3]) == 1.0
    assert sp.kendall_tau([1, 2, 3], [3, 2, 1]) == -1.0
    r = sp.tau_significance(0.201, 100, concordance=True)
    assert 0.0013 < r.p < 0.0025
    assert r.rejects()


def test_synthesis():
    net = sp.SpinNetwork(2, sp.Topology.Chain, 1.0)
    config = sp.OptimizationConfig()
    config.restarts = 15
    config.keep = 3
    config.seed = 9
    best = sp.synthesize_set(net, 2, config, 1).controllers[0]
    assert best.nominal_error < 1e-10
    assert math.isclose(
        math.fmod(best.readout_time, math.pi) % math.pi, math.pi / 2, rel_tol=1e-3
    )

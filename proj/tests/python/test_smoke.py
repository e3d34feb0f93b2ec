import math
from pathlib import Path

import pytest

import branchlab as bl

CONFIGS = Path(__file__).resolve().parents[2] / "configs"


def test_oracles():
    assert bl.oracles.riccati_w(1.0, 1.0, 1.0) == pytest.approx(2.0 / 3.0, rel=1e-15)
    assert bl.oracles.feller_laplace(1.0, 1.0, 1.0, 1.0) == pytest.approx(
        math.exp(-2.0 / 3.0), rel=1e-15
    )
    assert bl.oracles.scheme_laplace(10, 1.0, 1e-2, 50, 0.7, 10) == pytest.approx(
        0.5489316108622656, rel=1e-12
    )
    assert bl.oracles.qv_ratio_quadratic(1, 1.0, 1.0, 1.0) == pytest.approx(
        13.0 / 12.0, rel=1e-12
    )


def test_measure_discretization():
    mu = bl.atoms([0.0], [1.0], level=10)
    assert mu.total_units() == 10
    assert mu.total_mass() == pytest.approx(1.0)
    assert mu.atom_count() == 1
    assert "AtomicMeasure" in repr(mu)


def test_solve_and_value():
    ex = bl.load_experiment(
        str(CONFIGS / "riccati_dpp.ini"),
        ["sim.replicates=50", "grid.nt=2000"],
    )
    assert ex.dim == 1
    assert len(ex.config_hash) == 16
    surface = bl.solve_hjb(ex)
    assert surface.cfl <= 0.5
    assert surface.w(0.0, 0.0) == pytest.approx(2.0 / 3.0, abs=1e-6)
    v = surface.value_of_measure(0.0, ex.initial_measure())
    assert v == pytest.approx(math.exp(-2.0 / 3.0), abs=1e-6)


def test_simulation():
    ex = bl.load_experiment(
        str(CONFIGS / "feller_laplace.ini"),
        ["sim.level=5", "sim.replicates=20", "sim.dt=0.01"],
    )
    masses = bl.simulate_terminal_masses(ex)
    assert len(masses) == 20
    assert all(m >= 0.0 for m in masses)
    assert 0.0 < sum(masses) / len(masses) < 5.0


def test_deterministic_cost():
    ex = bl.load_experiment(
        str(CONFIGS / "feller_laplace.ini"),
        ["coefficients.gamma=constant 0", "sim.replicates=3", "sim.dt=0.25"],
    )
    out = bl.evaluate_cost(ex)
    assert out["mean"] == pytest.approx(math.exp(-1.0), rel=1e-14)
    assert out["std_error"] == 0.0
    assert out["replicates"] == 3


def test_config_errors():
    with pytest.raises(bl.ConfigError):
        bl.load_experiment(str(CONFIGS / "feller_laplace.ini"), ["sim.bogus=1"])

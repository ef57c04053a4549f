import csv

import numpy as np
import pytest

from hdft.worldsheet_dynamics import (
    CFLError, MetricData, cross_term_orthogonality, energy, energy_study,
    evolve, heisenberg_state, remark_stencil_check, simulate, step_heisenberg,
    step_twisted_torus, tduality_map, tduality_refinement, torus_state,
    torus_tduality_check, _smooth_torus_data,
)

M = 64


def zeros():
    return np.zeros((3, M)), np.zeros((3, M))


class TestTorus:
    def test_cfl_guard(self):
        u, v = zeros()
        with pytest.raises(CFLError):
            torus_state(u, v, dt=2.0 / M)
        with pytest.raises(ValueError):
            torus_state(np.zeros((2, M)), np.zeros((2, M)))

    def test_pure_winding_stationary(self):
        s0 = torus_state(*zeros(), winding=(2, -1, 3))
        s = evolve(s0, 200)
        assert np.array_equal(s.u, s0.u) and np.array_equal(s.v, s0.v)
        assert s.winding == (2, -1, 3)

    def test_parallel_velocity_linear_motion(self):
        u = np.zeros((3, M))
        v = np.tile(np.array([[1.0], [0.0], [2.0]]), (1, M))
        s0 = torus_state(u, v, winding=(1, 0, 2))
        s = evolve(s0, 40)
        assert np.allclose(s.u, v * s.tau, atol=1e-13)
        assert np.allclose(s.v, v, atol=1e-13)

    def test_left_mover(self):
        n = 256
        sig = np.arange(n) / n
        u = np.zeros((3, n))
        v = np.zeros((3, n))
        u[0] = 0.1 * np.sin(2 * np.pi * sig)
        v[0] = -0.1 * 2 * np.pi * np.cos(2 * np.pi * sig)
        s = evolve(torus_state(u, v, winding=(1, 0, 0)), n)   # tau = 1/4
        exact = 0.1 * np.sin(2 * np.pi * (sig - s.tau))
        assert np.max(np.abs(s.u[0] - exact)) < 1e-3
        assert np.max(np.abs(s.u[1:])) == 0

    def test_winding_preserved_and_orthogonality(self):
        u, v = _smooth_torus_data(M, 0.1, 4)
        s = torus_state(u, v, winding=(1, 2, -1))
        for _ in range(50):
            s = step_twisted_torus(s)
            assert s.winding == (1, 2, -1)
            assert abs(cross_term_orthogonality(s)) < 1e-12

    def test_free_mode_energy(self):
        sig = np.arange(M) / M
        u = np.zeros((3, M))
        v = np.zeros((3, M))
        u[0] = 0.3 * np.cos(2 * np.pi * sig)
        v[1] = 0.5 * np.sin(2 * np.pi * sig)
        s = torus_state(u, v, flux=False)
        k_disc = 2 * M * np.sin(np.pi / M)        # forward-difference symbol
        want = 0.5 * (0.5 ** 2 / 2 + k_disc ** 2 * 0.3 ** 2 / 2)
        assert abs(energy(s) - want) < 1e-12
        assert energy(torus_state(*zeros())) == 0

    def test_energy_conservation(self):
        r256 = energy_study(256, 1000)
        r512 = energy_study(512, 1000)
        assert r256["relative_drift"] < 1e-6
        assert r256["relative_drift"] / r512["relative_drift"] >= 4
        assert r256["max_cross_term"] < 1e-12


class TestHeisenberg:
    def test_constant_stationary(self):
        u = np.tile(np.array([[0.3], [-0.2], [0.7]]), (1, M))
        for system in ("direct", "lagrangian"):
            s = evolve(heisenberg_state(u, np.zeros((3, M)), system=system), 30)
            assert np.allclose(s.u, u, atol=1e-14)

    def test_decoupled_y2(self):
        sig = np.arange(M) / M
        u = np.zeros((3, M))
        v = np.zeros((3, M))
        u[1] = 0.2 * np.sin(2 * np.pi * sig)
        s = evolve(heisenberg_state(u, v), 20)
        # d'Alembert solution of the free wave equation for a standing wave
        exact = 0.2 * np.sin(2 * np.pi * sig) * np.cos(2 * np.pi * s.tau)
        assert np.max(np.abs(s.u[1] - exact)) < 1e-3
        assert np.all(s.u[[0, 2]] == 0)

    def test_bad_system(self):
        with pytest.raises(ValueError):
            heisenberg_state(*zeros(), system="other")

    def test_metric_inverse(self):
        y = np.random.default_rng(2).normal(size=(3, 50)) * 3
        m = MetricData("heisenberg")
        assert m.inverse_defect(y) < 1e-14
        assert MetricData("flat").inverse_defect(y) == 0


class TestDuality:
    def test_lagrangian_covariant_second_order(self):
        r = tduality_refinement((64, 128, 256), system="lagrangian", covariant=True)
        assert r["min_slope"] >= 1.8
        assert r["rows"][-1]["residual"] < r["rows"][0]["residual"]

    def test_flux_off_floor(self):
        r = tduality_refinement((64, 128), flux=False, system="direct")
        assert all(row["residual"] < 1e-8 for row in r["rows"])

    def test_map_needs_three_levels(self):
        s = torus_state(*zeros())
        with pytest.raises(ValueError):
            tduality_map([s, s])

    def test_remark_stencil(self):
        assert remark_stencil_check()["ok"]

    def test_circle(self):
        assert torus_tduality_check(2, "1/2")["match"]
        assert torus_tduality_check("3/2", "2/3")["match"]
        assert torus_tduality_check(1, 1)["match"]
        bad = torus_tduality_check(2, 2)
        assert not bad["match"] and bad["mismatches"] > 0
        assert bad["pairing_preserved"]
        with pytest.raises(ValueError):
            torus_tduality_check(0, 1)


def test_simulate_and_csv(tmp_path):
    path = tmp_path / "run.csv"
    man, snaps = simulate({"model": "torus", "M": 32, "steps": 20, "winding": "1,0,1",
                           "csv": str(path)})
    assert man["finite"] and man["csv"] == str(path)
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["tau", "sigma", "f1", "f2", "f3"]
    assert len(rows) == 1 + 32 * len(snaps)
    man2, _ = simulate({"model": "heisenberg", "M": 32, "steps": 20, "gamma": "1,0,1"})
    assert man2["boundary"] == {"gamma": [1, 0, 1]}
    with pytest.raises(ValueError):
        simulate({"model": "sphere"})


def test_heisenberg_boundary_holonomy():
    u, v = _smooth_torus_data(M, 0.1, 3)
    s = heisenberg_state(u, v, gamma=(1, 2, -1))
    s = step_heisenberg(s)
    ends = s.full(np.array([0.0, 1.0]), s.u[:, [0, 0]])
    y0, y1 = ends[:, 0], ends[:, 1]
    g1, g2, g3 = s.gamma
    want = [g1 + y0[0], g2 + y0[1] + 0.5 * (g1 * y0[2] - g3 * y0[0]), g3 + y0[2]]
    assert np.allclose(y1, want, atol=1e-14)

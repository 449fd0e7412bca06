"""Moving-frame IMEX integration: steady waves, stability, order preservation."""

import math

import numpy as np
import pytest

from forcedwaves import oracles as orc
from forcedwaves import pdesim as ps
from forcedwaves import wavesolver as ws
from forcedwaves.pdesim import StepRejectedError


@pytest.fixture(scope="module")
def wave_state(exp_wave_c1, exp2):
    return ps.state_from_wave(exp_wave_c1, exp2)


class TestStateConstruction:
    def test_state_from_wave_matches_bcs(self, exp_wave_c1, exp2, wave_state):
        assert wave_state.left_value == pytest.approx(exp2.a(exp_wave_c1.grid[0]))
        assert wave_state.robin_sigma == exp_wave_c1.bc_right
        assert wave_state.t == 0.0

    def test_make_state_defaults_left_value_to_a(self, exp2):
        grid = np.linspace(-40.0, 40.0, 1001)
        st = ps.make_state(exp2, 1.0, grid, np.zeros(1001), left_value=None)
        assert st.left_value == pytest.approx(exp2.a(-40.0))
        assert st.robin_sigma is None  # Neumann unless asked otherwise

    def test_shape_mismatch_rejected(self, exp2):
        with pytest.raises(ValueError, match="shapes"):
            ps.make_state(exp2, 1.0, np.linspace(0, 1, 10), np.zeros(9))

    def test_snapshot_csv(self, wave_state, tmp_path):
        p = tmp_path / "snap.csv"
        wave_state.snapshot_to_csv(p)
        rows = p.read_text().strip().splitlines()
        assert rows[0] == "t,z,u"
        assert len(rows) == len(wave_state.grid) + 1


class TestEquilibria:
    def test_zero_is_exactly_steady(self, exp2, exp_wave_c1):
        grid = exp_wave_c1.grid
        st = ps.make_state(exp2, 1.0, grid, np.zeros_like(grid), left_value=0.0)
        res = ps.evolve(st, 5.0, dt=0.01)
        assert float(np.abs(res.state.u).max()) == 0.0

    def test_solved_wave_is_steady(self, wave_state, exp_wave_c1):
        # the IMEX fixed point coincides with the Newton solution, so drift
        # is Newton-tolerance-sized, not O(dt)
        res = ps.evolve(wave_state, 10.0, dt=0.01,
                        monitors={"dist": ps.distance_monitor(exp_wave_c1.phi)})
        assert max(res.series["dist"]) < 1e-10  # measured 5.3e-15
        assert res.steps_taken == 1000

    def test_steady_residual_monitor_stays_small(self, wave_state):
        res = ps.evolve(wave_state, 1.0, dt=0.01,
                        monitors={"res": ps.residual_monitor()})
        assert max(res.series["res"]) < 1e-8


class TestDynamics:
    def test_plateau_start_decays_to_local_equilibrium(self, exp2, exp_wave_c1):
        # constant alpha is far from equilibrium in the tail where a ~ 0;
        # by T=50 the right end has collapsed toward a
        grid = exp_wave_c1.grid
        st = ps.make_state(exp2, 1.0, grid, np.ones_like(grid))
        res = ps.evolve(st, 50.0, dt=0.01)
        assert res.state.u[-1] < 0.05  # measured 0.0196
        assert float(res.state.u.min()) >= 0.0
        assert float(res.state.u.max()) <= 1.0 + 1e-12

    def test_localized_bump_converges_to_minimal_wave(self, exp2):
        # unique-exponential regime: the flow forgets the initial condition
        # and locks onto the solved wave
        cfg = ws.SolverConfig(L=40.0, N=2001, newton_tol=1e-10,
                              newton_max_iter=120, max_halvings=30,
                              continuation_step=0.05)
        wmin = ws.solve_wave(exp2, 1.0, "sigma1", cfg=cfg)
        zz = wmin.grid
        bump = np.minimum(0.5 * np.exp(-(zz / 5.0) ** 2), 1.0)
        st = ps.make_state(exp2, 1.0, zz, bump)
        res = ps.evolve(st, 200.0, dt=0.01,
                        monitors={"dist": ps.distance_monitor(wmin.phi)})
        assert res.series["dist"][-1] < 1e-3  # measured 4.4e-14

    def test_front_position_monitor(self, exp2, exp_wave_c1, wave_state):
        mon = ps.front_position_monitor(1.0)
        pos = mon(wave_state)
        assert -10.0 < pos < 10.0  # the half-level crossing sits in the blend
        empty = ps.make_state(exp2, 1.0, exp_wave_c1.grid,
                              np.zeros_like(exp_wave_c1.phi), left_value=0.0)
        assert mon(empty) == -math.inf


class TestStepControl:
    def test_large_dt_rejected_with_suggestion(self, exp2, exp_wave_c1):
        st = ps.make_state(exp2, 1.0, exp_wave_c1.grid,
                           np.ones_like(exp_wave_c1.phi))
        with pytest.raises(StepRejectedError) as ei:
            ps.step(st, 1.0)
        assert ei.value.suggested_dt == pytest.approx(0.45, rel=1e-12)

    def test_suggested_dt_is_accepted(self, exp2, exp_wave_c1):
        st = ps.make_state(exp2, 1.0, exp_wave_c1.grid,
                           np.ones_like(exp_wave_c1.phi))
        with pytest.raises(StepRejectedError) as ei:
            ps.step(st, 1.0)
        ps.step(st, ei.value.suggested_dt)  # must not raise

    def test_nonpositive_inputs(self, wave_state):
        with pytest.raises(ValueError):
            ps.step(wave_state, 0.0)
        with pytest.raises(ValueError):
            ps.evolve(wave_state, 0.0)


class TestComparison:
    def test_zero_below_wave(self, exp2, exp_wave_c1):
        lo = ps.make_state(exp2, 1.0, exp_wave_c1.grid,
                           np.zeros_like(exp_wave_c1.phi),
                           robin_sigma=exp_wave_c1.bc_right, left_value=0.0)
        hi = ps.state_from_wave(exp_wave_c1, exp2)
        assert ps.comparison_test(lo, hi, 10.0, dt=0.01) <= 1e-12

    def test_sub_below_super_solution(self, exp2, exp_wave_c1):
        grid = exp_wave_c1.grid
        sub = orc.cos_bump_sub(1.0, 1.0, exp2)
        sup = orc.exp_super(1.0, 1.0, 0.5, exp2)
        lo = ps.make_state(exp2, 1.0, grid, sub.on_grid(grid),
                           left_value=float(sub.on_grid(np.array([grid[0]]))[0]))
        hi = ps.make_state(exp2, 1.0, grid, sup.on_grid(grid), left_value=1.0)
        assert ps.comparison_test(lo, hi, 50.0, dt=0.01) <= 1e-8

    def test_family_members_stay_ordered(self, alg3, alg3_family):
        lo = ps.state_from_wave(alg3_family[0], alg3)
        hi = ps.state_from_wave(alg3_family[1], alg3)
        assert ps.comparison_test(lo, hi, 10.0, dt=0.01) <= 1e-8

    def test_rejects_unordered_initial_states(self, exp2, exp_wave_c1):
        hi = ps.state_from_wave(exp_wave_c1, exp2)
        lo = hi.copy()
        lo.u = hi.u + 1e-3  # strictly above
        with pytest.raises(ValueError, match="not ordered"):
            ps.comparison_test(lo, hi, 1.0)

    def test_rejects_mismatched_bcs(self, exp2, exp_wave_c1):
        hi = ps.state_from_wave(exp_wave_c1, exp2)
        lo = ps.make_state(exp2, 1.0, exp_wave_c1.grid,
                           np.zeros_like(exp_wave_c1.phi), left_value=0.0)
        with pytest.raises(ValueError, match="boundary"):
            ps.comparison_test(lo, hi, 1.0)  # Neumann vs Robin


class TestEvolveBookkeeping:
    def test_monitor_series_aligned_with_times(self, wave_state, exp_wave_c1):
        res = ps.evolve(wave_state, 1.0, dt=0.01,
                        monitors={"dist": ps.distance_monitor(exp_wave_c1.phi),
                                  "front": ps.front_position_monitor(1.0)})
        assert len(res.times) == len(res.series["dist"]) == len(res.series["front"])
        assert res.times[0] == 0.0
        assert res.times[-1] == pytest.approx(1.0, abs=1e-9)

    def test_monitors_csv_format(self, wave_state, exp_wave_c1, tmp_path):
        res = ps.evolve(wave_state, 0.1, dt=0.01,
                        monitors={"dist": ps.distance_monitor(exp_wave_c1.phi)})
        p = tmp_path / "mon.csv"
        res.monitors_to_csv(p)
        rows = p.read_text().strip().splitlines()
        assert rows[0] == "t,metric,value"
        assert all(r.split(",")[1] == "dist" for r in rows[1:])

    def test_final_time_reached_exactly(self, wave_state):
        res = ps.evolve(wave_state, 0.35, dt=0.1)  # non-divisible horizon
        assert res.state.t == pytest.approx(0.35, abs=1e-12)
        assert res.steps_taken == 4

"""Fixed-point engine: convergence, self-consistency, initial-condition independence."""
import pytest

import dataclasses

from conftest import scenario
from v2xmac.coupling import (CouplingState, adaptive_cam_rate,
                             resolve_adaptive_t_c, solve_coupled, _sweep)
from v2xmac.dot11p import update_theta


class TestSolveCoupled:
    def test_cv2x_converges_at_defaults(self):
        rep = solve_coupled("cv2x", scenario())
        assert rep.converged
        assert rep.residual <= 1e-8
        assert 0.0 < rep.state.p_t < 1.0
        assert rep.state.theta == 0.0

    def test_dot11p_converges_at_defaults(self):
        rep = solve_coupled("dot11p", scenario(n=50))
        assert rep.converged

    def test_dot11p_theta_self_consistent(self):
        rep = solve_coupled("dot11p", scenario(n=50), tolerance=1e-10)
        assert rep.state.theta == pytest.approx(
            update_theta(rep.state.p_t, 50), abs=1e-8)

    def test_determinism(self):
        a = solve_coupled("cv2x", scenario())
        b = solve_coupled("cv2x", scenario())
        assert a.state == b.state
        assert a.iterations == b.iterations

    def test_default_point_regression(self):
        # frozen after the first verified run at Gamma=100 defaults, N=50
        rep = solve_coupled("cv2x", scenario(n=50))
        assert rep.state.p_t == pytest.approx(0.007523999695817362, abs=1e-10)
        assert rep.state.p_qe == pytest.approx(0.13341382258030007, abs=1e-10)
        assert rep.state.p_arr == pytest.approx(0.0062784639240275365, abs=1e-10)

    def test_cv2x_p_t_read_back_consistent(self):
        # the converged linking P_t equals the MAC solution's own product
        rep = solve_coupled("cv2x", scenario(), tolerance=1e-12)
        assert rep.state.p_t == pytest.approx(rep.cv2x.p_t, abs=1e-10)
        assert rep.cv2x.p_t == pytest.approx(
            rep.cv2x.p_txo * (1.0 - rep.state.p_qe), abs=1e-10)

    def test_self_consistency_one_sweep(self):
        # feeding the converged state back through one sweep moves nothing
        s = scenario()
        rep = solve_coupled("cv2x", s, tolerance=1e-12)
        _, residual, *_ = _sweep("cv2x", s, rep.state)
        assert residual <= 1e-8

    @pytest.mark.parametrize("tech", ["cv2x", "dot11p"])
    def test_initial_condition_independence(self, tech):
        s = scenario(n=100)
        guesses = [
            CouplingState(p_t=0.01, p_qe=0.9, p_arr=0.0, theta=0.1),
            CouplingState(p_t=0.5, p_qe=0.1, p_arr=0.0, theta=0.5),
            CouplingState(p_t=0.99, p_qe=0.5, p_arr=0.0, theta=0.9),
            CouplingState(p_t=0.2, p_qe=0.2, p_arr=0.0, theta=0.0),
            CouplingState(p_t=0.001, p_qe=0.999, p_arr=0.0, theta=0.05),
        ]
        states = [solve_coupled(tech, s, initial=g, tolerance=1e-10).state
                  for g in guesses]
        ref = states[0]
        for st in states[1:]:
            assert abs(st.p_t - ref.p_t) < 1e-7
            assert abs(st.p_qe - ref.p_qe) < 1e-7
            assert abs(st.theta - ref.theta) < 1e-7

    def test_light_load_single_vehicle(self):
        # near-zero DENM load and slowest CAM at N=1: no contention, and the
        # queue sits at this model's single-source value of exactly one half
        # (blocked-arrival and service flows coincide, so states 0 and 1 are
        # equally occupied)
        s = scenario(t_c=1000, lam=1e-6, k=1, n=1)
        rep = solve_coupled("dot11p", s)
        assert rep.state.theta < 1e-6
        assert rep.converged
        assert rep.state.p_qe == pytest.approx(0.5, abs=1e-6)

    def test_theta_monotone_in_n(self):
        thetas = [solve_coupled("dot11p", scenario(n=n)).state.theta
                  for n in (50, 100, 200, 300)]
        assert all(b >= a for a, b in zip(thetas, thetas[1:]))

    def test_unknown_tech(self):
        with pytest.raises(ValueError):
            solve_coupled("wimax", scenario())


class TestAdaptiveCamRate:
    def test_policy_floor(self):
        assert adaptive_cam_rate(0.0, 100) == 100
        assert adaptive_cam_rate(0.3, 100) == 100

    def test_policy_ceiling(self):
        assert adaptive_cam_rate(0.9, 100) == 500
        assert adaptive_cam_rate(1.0, 100) == 500

    def test_midpoint(self):
        assert adaptive_cam_rate(0.6, 100) == 300

    def test_clipped_to_standard_range(self):
        assert adaptive_cam_rate(1.0, 300) == 1000

    def test_rejects_bad_theta(self):
        with pytest.raises(ValueError):
            adaptive_cam_rate(1.5, 100)

    def test_resolve_is_noop_when_disabled_or_cv2x(self):
        s = scenario(n=300)
        assert resolve_adaptive_t_c("dot11p", s) is s
        s_on = dataclasses.replace(s, adaptive_cam=True)
        assert resolve_adaptive_t_c("cv2x", s_on) is s_on

    def test_resolve_stretches_t_c_under_load(self):
        # theta at N=300 sits above the policy floor, so T_C must grow
        s = dataclasses.replace(scenario(n=300), adaptive_cam=True)
        eff = resolve_adaptive_t_c("dot11p", s)
        assert eff.traffic.t_c > 100
        assert 100 <= eff.traffic.t_c <= 1000
        # deterministic
        assert resolve_adaptive_t_c("dot11p", s).traffic.t_c == eff.traffic.t_c

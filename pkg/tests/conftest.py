import numpy as np
import pytest
from hypothesis import settings

from v2xmac.chains import CouplingInputs
from v2xmac.config import Cv2xParams, Dot11pParams, ScenarioConfig, TrafficParams

settings.register_profile("repo", derandomize=True)
settings.load_profile("repo")

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def default_scenario():
    return ScenarioConfig().validate()


def scenario(t_c=100, t_d=100, k=5, lam=1.0, m=10, gamma=100, r_low=None,
             r_high=None, p_rk=0.4, p_sch=1.0, n=100, tech="both", aifsn=6):
    from v2xmac.config import STANDARD_WINDOWS
    lo, hi = STANDARD_WINDOWS.get(gamma, (5, 15))
    return ScenarioConfig(
        tech=tech, n=n,
        traffic=TrafficParams(t_c=t_c, t_d=t_d, k=k, lam=lam, m=m),
        cv2x=Cv2xParams(gamma=gamma, r_low=r_low or lo, r_high=r_high or hi,
                        p_rk=p_rk, p_sch=p_sch),
        dot11p=Dot11pParams(aifsn=aifsn),
    ).validate()


def coupling(p_t=0.5, p_qe=0.5, p_arr=0.1, theta=0.0, alpha=0.1, alpha1=0.1, beta=0.3):
    return CouplingInputs(p_t=p_t, p_qe=p_qe, p_arr=p_arr, theta=theta,
                          alpha=alpha, alpha1=alpha1, beta=beta)


def assert_close(a, b, tol=1e-9):
    assert abs(a - b) <= tol, f"{a!r} vs {b!r} (tol {tol:g})"


def max_abs(a, b):
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))

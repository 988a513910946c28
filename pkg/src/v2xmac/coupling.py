"""Fixed-point engine linking the generators, queue and MAC chains."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .config import ScenarioConfig
from .cv2x import Cv2xSolution, solve_cv2x
from .dot11p import Dot11pSolution, solve_dot11p, update_theta
from .errors import NoFixedPoint
from .traffic import (GeneratorSolution, QueueSolution, combine_transition_probs,
                      solve_cam, solve_denm, solve_queue)

TOLERANCE = 1e-8
MAX_ITERATIONS = 10_000
DAMPING = 0.5
INIT_P_T = 0.01
INIT_P_QE = 0.9
INIT_THETA = 0.1


@dataclass(frozen=True)
class CouplingState:
    """Linking probabilities exchanged between the chains per sweep."""

    p_t: float
    p_qe: float
    p_arr: float
    theta: float  # 802.11p only; held at 0 for C-V2X

    @property
    def p_qne(self) -> float:
        return 1.0 - self.p_qe


@dataclass(frozen=True)
class FixedPointReport:
    tech: str
    state: CouplingState
    iterations: int
    residual: float
    converged: bool
    cam: GeneratorSolution
    denm: GeneratorSolution
    queue: QueueSolution
    cv2x: Optional[Cv2xSolution] = None
    dot11p: Optional[Dot11pSolution] = None


def _sweep(tech: str, scenario: ScenarioConfig, state: CouplingState):
    """One Gauss-Seidel sweep: generators -> combine -> queue -> MAC chain."""
    cam = solve_cam(scenario.traffic, state.p_t)
    denm = solve_denm(scenario.traffic, state.p_t)
    alpha, alpha1, beta, p_arr = combine_transition_probs(
        cam, denm, state.p_t, scenario.traffic)
    queue = solve_queue(alpha, alpha1, beta, scenario.traffic.m, p_arr)
    p_qe_new = queue.p_qe
    p_qe = DAMPING * state.p_qe + (1.0 - DAMPING) * p_qe_new
    p_qne = 1.0 - p_qe

    if tech == "cv2x":
        mac = solve_cv2x(scenario.cv2x, p_qe, p_qne, p_arr)
        p_t_new = mac.p_t
        theta_new = 0.0
    else:
        mac = solve_dot11p(scenario.dot11p, p_qe, p_arr, state.theta)
        p_t_new = mac.p_t
        theta_new = update_theta(p_t_new, scenario.n)

    p_t = DAMPING * state.p_t + (1.0 - DAMPING) * p_t_new
    theta = DAMPING * state.theta + (1.0 - DAMPING) * theta_new
    residual = max(abs(p_t - state.p_t), abs(p_qe - state.p_qe),
                   abs(theta - state.theta), abs(p_arr - state.p_arr))
    new_state = CouplingState(p_t=p_t, p_qe=p_qe, p_arr=p_arr, theta=theta)
    return new_state, residual, cam, denm, queue, mac


def solve_coupled(tech: str, scenario: ScenarioConfig,
                  initial: Optional[CouplingState] = None,
                  tolerance: float = TOLERANCE,
                  max_iterations: int = MAX_ITERATIONS) -> FixedPointReport:
    """Iterate the coupled chains to a fixed point of the linking probabilities.

    Each linking probability is damped as x <- 0.5 x_old + 0.5 x_new, which
    suppresses the two-cycle oscillation the undamped map exhibits.
    Raises NoFixedPoint (with the residual trace attached) if the sweep does
    not reach `tolerance` within `max_iterations`.
    """
    if tech not in ("cv2x", "dot11p"):
        raise ValueError(f"unknown technology {tech!r}")
    state = initial or CouplingState(
        p_t=INIT_P_T, p_qe=INIT_P_QE, p_arr=0.0,
        theta=INIT_THETA if tech == "dot11p" else 0.0)
    trace = []
    for it in range(1, max_iterations + 1):
        state, residual, cam, denm, queue, mac = _sweep(tech, scenario, state)
        trace.append(residual)
        if residual <= tolerance:
            return FixedPointReport(
                tech=tech, state=state, iterations=it, residual=residual,
                converged=True, cam=cam, denm=denm, queue=queue,
                cv2x=mac if tech == "cv2x" else None,
                dot11p=mac if tech == "dot11p" else None)
    raise NoFixedPoint(
        f"{tech}: residual {trace[-1]:.3e} after {max_iterations} iterations "
        f"(tolerance {tolerance:g})", residual_trace=trace)


def adaptive_cam_rate(theta: float, base_t_c: int) -> int:
    """Transmit-rate-control policy: stretch T_C with channel load.

    T_C = base * (1 + 4 * clamp((theta - 0.3) / 0.6, 0, 1)), rounded to whole
    subframes and clipped to the standard range [100, 1000]. Below theta = 0.3
    the base interval is kept.
    """
    if not 0.0 <= theta <= 1.0:
        raise ValueError(f"theta = {theta!r} outside [0, 1]")
    load = min(max((theta - 0.3) / 0.6, 0.0), 1.0)
    t_c = int(round(base_t_c * (1.0 + 4.0 * load)))
    return min(max(t_c, 100), 1000)


def resolve_adaptive_t_c(tech: str, scenario: ScenarioConfig,
                         policy=adaptive_cam_rate) -> ScenarioConfig:
    """Apply the rate-control policy until T_C stabilizes.

    Each round solves the fixed point at the current T_C and maps the
    resulting busy ratio through the policy against the base interval.
    A revisited T_C (policy oscillation) stops the loop at the current value.
    Only the 802.11p lane has a busy ratio, so the C-V2X lane is a no-op.
    """
    if not scenario.adaptive_cam or tech != "dot11p":
        return scenario
    base = scenario.traffic.t_c
    t_c = base
    seen = set()
    while t_c not in seen:
        seen.add(t_c)
        rep = solve_coupled(tech, scenario.with_value("t_c", t_c))
        t_c = policy(rep.state.theta, base)
    return scenario.with_value("t_c", t_c)

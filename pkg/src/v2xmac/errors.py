"""Exception types raised by the analytical solvers and the simulator."""


class V2xMacError(Exception):
    """Base class for all package errors."""


class NonStochasticMatrix(V2xMacError):
    """A transition-matrix row does not sum to 1 or has entries outside [0, 1]."""


class NoConvergence(V2xMacError):
    """The steady-state solve failed to reach the required residual."""


class UnknownChainKind(V2xMacError):
    """build_chain received an unrecognized chain identifier."""


class DegenerateTransmitProbability(V2xMacError):
    """P_t = 0 leaves the generator chain with no exit from the blocked states."""


class DegenerateQueue(V2xMacError):
    """The queue can fill but never drain (beta = 0 with alpha1 > 0)."""


class SaturatedQueue(V2xMacError):
    """P_qne = 0 makes the C-V2X closed form undefined."""


class InvalidMass(V2xMacError):
    """An assembled steady-state vector failed normalization or range checks."""


class ChannelSaturated(V2xMacError):
    """theta = 1 makes the 802.11p closed form undefined."""


class NoFixedPoint(V2xMacError):
    """The coupled iteration did not reach tolerance within the iteration budget."""

    def __init__(self, message, residual_trace=None):
        super().__init__(message)
        self.residual_trace = residual_trace or []


class ResourceExhaustion(V2xMacError):
    """More vehicles than candidate resources; the collision formula is invalid."""


class ModelValidityError(V2xMacError):
    """A formula was evaluated outside the region where its terms stay in [0, 1]."""


class NoTransmitter(V2xMacError):
    """Access probability is zero; the collision probability is undefined."""


class EmptySystem(V2xMacError):
    """P_qe = 1; there are no packets, so the average delay is undefined."""


class DegenerateConditional(V2xMacError):
    """The conditioning mass in the 802.11p delay average is zero."""


class InvalidDuration(V2xMacError):
    """Simulation duration or replication count is out of range."""


class ConfigParseError(V2xMacError):
    """A scenario configuration file failed to parse or validate."""

    def __init__(self, message, line=None, field=None):
        detail = message
        if field is not None:
            detail = f"{field}: {detail}"
        if line is not None:
            detail = f"line {line}: {detail}"
        super().__init__(detail)
        self.line = line
        self.field = field

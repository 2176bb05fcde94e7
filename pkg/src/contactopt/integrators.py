"""Splitting integrators for the relativistic contact Hamiltonian.

The Hamiltonian c*sqrt(|P|^2 + (mc)^2) + f(X) + h(t)*S splits into three
pieces whose contact flows are known in closed form:

* phi1 (dissipation, h(t)*S): P and S decay by exp(-h(t) * dtau), with the
  clock frozen during the flow;
* phi2 (potential, f(X)):     gradient kick on P, action drop on S;
* phi3 (kinetic):             relativistic drift of X with speed limit c.

A time-shift operator advances the clock between flows.  The palindromic
arrangement shift/phi1/phi3/phi2/phi3/phi1/shift is a second-order contact
integrator; symmetric compositions of it (triple jump, Suzuki five-stage)
raise the order by two per level.  Every map here is a contact
transformation, which `contact.conformal_factor` can certify numerically.

Steps accept an optional ``clock_dtau`` that decouples the clock advance
from the flow stepsize.  The optimizer family runs on an iteration clock
(one step advances t by 1 while the flows use tau), which is how the
mu^(1 + 1/(k+1/2)) dissipation factors of the discrete algorithms arise.
"""

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .contact import ContactHamiltonian, ContactState, PointMap, Trajectory
from .objectives import Objective

__all__ = [
    "RelativisticParams",
    "SplitFlowPlan",
    "crgd_hamiltonian",
    "flow_phi1",
    "flow_phi2",
    "flow_phi3",
    "time_shift",
    "strang_step",
    "triple_jump_coefficients",
    "compose_step",
    "integrate_split",
    "split_plan",
    "triple_jump_plan",
    "PLAN_NAMES",
    "phi1_map",
    "phi2_map",
    "phi3_map",
    "shift_map",
    "strang_map",
    "compose_map",
]


@dataclass(frozen=True)
class RelativisticParams:
    """Physical constants of the relativistic contact Hamiltonian.

    ``schedule`` picks the dissipation coefficient h(t): "constant" means
    h = gamma, "nag_like" means h = gamma * (1 + 1/t), which needs t > 0.
    """

    m: float = 1.0
    c: float = 1.0
    gamma: float = 0.0
    schedule: str = "nag_like"

    def __post_init__(self):
        if not (self.m > 0):
            raise ValueError(f"mass m must be positive, got {self.m}")
        if not (self.c > 0):
            raise ValueError(f"speed parameter c must be positive, got {self.c}")
        if self.gamma < 0:
            raise ValueError(f"gamma must be non-negative, got {self.gamma}")
        if self.schedule not in ("constant", "nag_like"):
            raise ValueError(
                f"schedule must be 'constant' or 'nag_like', got {self.schedule!r}"
            )

    def h(self, t: float) -> float:
        if self.schedule == "constant":
            return self.gamma
        if t <= 0:
            raise ValueError(
                f"nag_like dissipation h(t) = gamma*(1 + 1/t) needs t > 0, got t = {t}"
            )
        return self.gamma * (1.0 + 1.0 / t)

    def h_prime(self, t: float) -> float:
        if self.schedule == "constant":
            return 0.0
        if t <= 0:
            raise ValueError(
                f"nag_like dissipation h(t) = gamma*(1 + 1/t) needs t > 0, got t = {t}"
            )
        return -self.gamma / (t * t)


def crgd_hamiltonian(obj: Objective, params: RelativisticParams) -> ContactHamiltonian:
    """Assemble c*sqrt(|P|^2 + (mc)^2) + f(X) + h(t)*S with its partials."""
    m, c = params.m, params.c

    def value(x, p, s, t):
        return c * math.sqrt(float(p @ p) + (m * c) ** 2) + obj.eval(x) + params.h(t) * s

    def grad_x(x, p, s, t):
        return obj.grad(x)

    def grad_p(x, p, s, t):
        return c * p / math.sqrt(float(p @ p) + (m * c) ** 2)

    def d_s(x, p, s, t):
        return params.h(t)

    def d_t(x, p, s, t):
        return params.h_prime(t) * s

    return ContactHamiltonian(value=value, grad_X=grad_x, grad_P=grad_p, dS=d_s, dt=d_t)


def flow_phi1(state: ContactState, dtau: float, params: RelativisticParams) -> ContactState:
    """Exact flow of the dissipative piece h(t)*S for a span dtau.

    P and S contract by exp(-h(t) * dtau); the clock is frozen, so h is
    evaluated at the state's own t.
    """
    a = math.exp(-params.h(state.t) * dtau)
    return ContactState(X=state.X, P=a * state.P, S=a * state.S, t=state.t)


def flow_phi2(state: ContactState, dtau: float, obj: Objective) -> ContactState:
    """Exact flow of the potential piece f(X): P -= grad f * dtau, S -= f * dtau."""
    return ContactState(
        X=state.X,
        P=state.P - obj.grad(state.X) * dtau,
        S=state.S - obj.eval(state.X) * dtau,
        t=state.t,
    )


def flow_phi3(state: ContactState, dtau: float, params: RelativisticParams) -> ContactState:
    """Exact flow of the kinetic piece: relativistic drift.

    X moves at most c*|dtau| regardless of P; S decreases by the rest-energy
    rate m^2 c^3 / sqrt(|P|^2 + (mc)^2).
    """
    m, c = params.m, params.c
    r = math.sqrt(float(state.P @ state.P) + (m * c) ** 2)
    return ContactState(
        X=state.X + c * state.P * dtau / r,
        P=state.P,
        S=state.S - m * m * c**3 * dtau / r,
        t=state.t,
    )


def time_shift(state: ContactState, dtau: float) -> ContactState:
    """Advance the clock only; X, P, S are untouched (bit-identical)."""
    return ContactState(X=state.X, P=state.P, S=state.S, t=state.t + dtau)


def strang_step(
    state: ContactState,
    tau: float,
    obj: Objective,
    params: RelativisticParams,
    clock_dtau: Optional[float] = None,
) -> ContactState:
    """One palindromic second-order step of span tau.

    Order: shift, phi1, phi3, phi2, phi3, phi1, shift, with half-spans on the
    outer maps.  Both phi1 factors see the clock frozen at the midpoint.
    ``clock_dtau`` (default tau) is how far the clock advances over the step;
    passing 1.0 runs the iteration clock used by the discrete optimizers.
    Negative tau is legal and gives the exact inverse of the +tau step, which
    symmetric compositions rely on.
    """
    dclock = tau if clock_dtau is None else clock_dtau
    s = time_shift(state, 0.5 * dclock)
    s = flow_phi1(s, 0.5 * tau, params)
    s = flow_phi3(s, 0.5 * tau, params)
    s = flow_phi2(s, tau, obj)
    s = flow_phi3(s, 0.5 * tau, params)
    s = flow_phi1(s, 0.5 * tau, params)
    return time_shift(s, 0.5 * dclock)


def triple_jump_coefficients(n: int) -> Tuple[float, float]:
    """Substep scalings (z0, z1) that promote a symmetric integrator of order
    2n to order 2n+2 via the composition S(z1*tau) S(z0*tau) S(z1*tau)."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    r = 2.0 ** (1.0 / (2 * n + 1))
    z0 = -r / (2.0 - r)
    z1 = 1.0 / (2.0 - r)
    return z0, z1


@dataclass(frozen=True)
class SplitFlowPlan:
    """A palindromic list of Strang-step scalings plus its design order.

    Stage j runs a Strang step of span stage_weights[j] * tau.  Weights must
    read the same forwards and backwards and sum to 1 so the composition
    covers exactly one step.  ``base_order`` is the even convergence order
    the weight pattern is designed to achieve on the second-order base step;
    nesting via :func:`triple_jump_plan` raises it by 2 per level.
    """

    stage_weights: Tuple[float, ...]
    base_order: int = 2
    name: str = ""

    def __post_init__(self):
        w = tuple(float(x) for x in self.stage_weights)
        object.__setattr__(self, "stage_weights", w)
        if len(w) == 0:
            raise ValueError("plan needs at least one stage weight")
        for j in range(len(w)):
            if abs(w[j] - w[-1 - j]) > 1e-15:
                raise ValueError("stage weights must be palindromic")
        if abs(sum(w) - 1.0) > 1e-12:
            raise ValueError(f"stage weights must sum to 1, got {sum(w)!r}")
        if self.base_order < 2 or self.base_order % 2 != 0:
            raise ValueError(
                f"base_order must be a positive even integer, got {self.base_order}"
            )


def compose_step(
    state: ContactState,
    tau: float,
    obj: Objective,
    params: RelativisticParams,
    plan: SplitFlowPlan,
    clock_dtau: Optional[float] = None,
) -> ContactState:
    """Run the plan's Strang stages with spans w_j * tau (clock scaled alike)."""
    dclock = tau if clock_dtau is None else clock_dtau
    for w in plan.stage_weights:
        state = strang_step(state, w * tau, obj, params, clock_dtau=w * dclock)
    return state


def triple_jump_plan(base: SplitFlowPlan) -> SplitFlowPlan:
    """Promote a plan two orders by the triple jump, flattening the nesting
    into a single weight list (each outer stage rescales every base stage)."""
    n = base.base_order // 2
    z0, z1 = triple_jump_coefficients(n)
    weights = tuple(
        u * w for u in (z1, z0, z1) for w in base.stage_weights
    )
    name = f"jump{base.base_order + 2}" if base.name else ""
    return SplitFlowPlan(
        stage_weights=weights, base_order=base.base_order + 2, name=name
    )


def _strang_plan() -> SplitFlowPlan:
    return SplitFlowPlan(stage_weights=(1.0,), base_order=2, name="strang")


def _jump4_plan() -> SplitFlowPlan:
    z0, z1 = triple_jump_coefficients(1)
    return SplitFlowPlan(stage_weights=(z1, z0, z1), base_order=4, name="jump4")


def _suzuki4_plan() -> SplitFlowPlan:
    w1 = 1.0 / (4.0 - 4.0 ** (1.0 / 3.0))
    w0 = 1.0 - 4.0 * w1
    return SplitFlowPlan(
        stage_weights=(w1, w1, w0, w1, w1), base_order=4, name="suzuki4"
    )


PLAN_NAMES = ("strang", "jump4", "suzuki4", "jump6")


def split_plan(name: str) -> SplitFlowPlan:
    """Look a composition plan up by preset name."""
    if name == "strang":
        return _strang_plan()
    if name == "jump4":
        return _jump4_plan()
    if name == "suzuki4":
        return _suzuki4_plan()
    if name == "jump6":
        return triple_jump_plan(_jump4_plan())
    raise ValueError(
        f"unknown plan {name!r}; valid names: {', '.join(PLAN_NAMES)}"
    )


def integrate_split(
    state0: ContactState,
    tau: float,
    n: int,
    obj: Objective,
    params: RelativisticParams,
    plan: Optional[SplitFlowPlan] = None,
    clock_dtau: Optional[float] = None,
) -> Trajectory:
    """Advance n composed steps, truncating with a divergence flag (never an
    exception) when a component stops being finite."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if plan is None:
        plan = _strang_plan()
    states = [state0]
    s = state0
    diverged = False
    with np.errstate(all="ignore"):
        for _ in range(n):
            s = compose_step(s, tau, obj, params, plan, clock_dtau=clock_dtau)
            if not s.is_finite():
                diverged = True
                break
            states.append(s)
    return Trajectory(states, diverged)


# ---------------------------------------------------------------------------
# PointMap wrappers so conformal_factor can certify each map.  phi1 and the
# time shift declare exact Jacobians (diagonal / identity); the rest rely on
# finite differences.
# ---------------------------------------------------------------------------


def phi1_map(dtau: float, params: RelativisticParams) -> PointMap:
    def jac(state: ContactState) -> np.ndarray:
        n = state.dim
        a = math.exp(-params.h(state.t) * dtau)
        d = np.ones(2 * n + 1)
        d[n:] = a
        return np.diag(d)

    return PointMap(
        name=f"phi1(dtau={dtau})",
        func=lambda s: flow_phi1(s, dtau, params),
        jacobian=jac,
    )


def phi2_map(dtau: float, obj: Objective) -> PointMap:
    return PointMap(
        name=f"phi2(dtau={dtau})", func=lambda s: flow_phi2(s, dtau, obj)
    )


def phi3_map(dtau: float, params: RelativisticParams) -> PointMap:
    return PointMap(
        name=f"phi3(dtau={dtau})", func=lambda s: flow_phi3(s, dtau, params)
    )


def shift_map(dtau: float) -> PointMap:
    def jac(state: ContactState) -> np.ndarray:
        return np.eye(2 * state.dim + 1)

    return PointMap(
        name=f"time_shift(dtau={dtau})",
        func=lambda s: time_shift(s, dtau),
        jacobian=jac,
    )


def strang_map(
    tau: float,
    obj: Objective,
    params: RelativisticParams,
    clock_dtau: Optional[float] = None,
) -> PointMap:
    return PointMap(
        name=f"strang(tau={tau})",
        func=lambda s: strang_step(s, tau, obj, params, clock_dtau=clock_dtau),
    )


def compose_map(
    tau: float,
    obj: Objective,
    params: RelativisticParams,
    plan: SplitFlowPlan,
    clock_dtau: Optional[float] = None,
) -> PointMap:
    return PointMap(
        name=f"{plan.name or 'composed'}(tau={tau})",
        func=lambda s: compose_step(s, tau, obj, params, plan, clock_dtau=clock_dtau),
    )

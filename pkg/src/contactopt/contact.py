"""Contact phase space on R^(2n+1): states, 1-forms, Hamiltonian fields.

Coordinates are (X, P, S) plus a clock t.  Two coordinate conventions for the
contact form are supported:

* ``std1``: eta = dS - <P, dX>
* ``std2``: eta = dS - (1/2)<P, dX> + (1/2)<X, dP>

A contact Hamiltonian H(X, P, S, t) generates a flow that dissipates H at
rate dH/dt = -(dH/dS) H + dH/dt|_explicit.  This module provides the vector
fields in both conventions, a hand-rolled RK4 reference integrator used as
the accuracy oracle everywhere else, and the two numerical self-checks the
rest of the package leans on: the dissipation-identity residual and
conformal-factor extraction (is a given discrete map a contact
transformation, and by what scaling factor?).
"""

from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

__all__ = [
    "ContactState",
    "Tangent",
    "ContactHamiltonian",
    "PointMap",
    "Trajectory",
    "DIVERGENCE_LIMIT",
    "eta_std1",
    "eta_std2",
    "map_F",
    "map_F_jacobian",
    "contact_field_std1",
    "contact_field_std2",
    "reference_integrate",
    "dissipation_residual",
    "conformal_factor",
    "check_hamiltonian_gradients",
]

# components beyond this magnitude count as a blown-up trajectory
DIVERGENCE_LIMIT = 1e300


@dataclass(frozen=True)
class ContactState:
    """A point (X, P, S) of contact phase space together with a clock t.

    X and P are vectors of equal length n, S is the action-like scalar
    coordinate.  t is carried along for time-dependent Hamiltonians; flows
    that do not read the clock simply ignore it.
    """

    X: np.ndarray
    P: np.ndarray
    S: float
    t: float = 0.0

    def __post_init__(self):
        x = np.array(self.X, dtype=float, copy=True)
        p = np.array(self.P, dtype=float, copy=True)
        if x.ndim != 1 or p.ndim != 1:
            raise ValueError("X and P must be one-dimensional vectors")
        if x.shape != p.shape:
            raise ValueError(
                f"X and P must have the same length, got {x.shape[0]} and {p.shape[0]}"
            )
        x.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "X", x)
        object.__setattr__(self, "P", p)
        object.__setattr__(self, "S", float(self.S))
        object.__setattr__(self, "t", float(self.t))

    @property
    def dim(self) -> int:
        return self.X.shape[0]

    def coords(self) -> np.ndarray:
        """Flatten (X, P, S) into one vector of length 2n+1 (t excluded)."""
        return np.concatenate([self.X, self.P, [self.S]])

    @staticmethod
    def from_coords(z: np.ndarray, t: float) -> "ContactState":
        n = (len(z) - 1) // 2
        return ContactState(X=z[:n], P=z[n : 2 * n], S=float(z[2 * n]), t=t)

    def is_finite(self) -> bool:
        return bool(
            np.all(np.isfinite(self.X))
            and np.all(np.isfinite(self.P))
            and np.isfinite(self.S)
            and np.all(np.abs(self.X) <= DIVERGENCE_LIMIT)
            and np.all(np.abs(self.P) <= DIVERGENCE_LIMIT)
            and abs(self.S) <= DIVERGENCE_LIMIT
        )


@dataclass(frozen=True)
class Tangent:
    """A tangent vector (dX, dP, dS) at a state; the clock direction is not
    part of the contact geometry and is omitted."""

    dX: np.ndarray
    dP: np.ndarray
    dS: float

    def __post_init__(self):
        object.__setattr__(self, "dX", np.asarray(self.dX, dtype=float))
        object.__setattr__(self, "dP", np.asarray(self.dP, dtype=float))
        object.__setattr__(self, "dS", float(self.dS))
        if self.dX.shape != self.dP.shape:
            raise ValueError("dX and dP must have the same length")


@dataclass(frozen=True)
class ContactHamiltonian:
    """H(X, P, S, t) bundled with its partial derivatives.

    All five callables take (X, P, S, t).  ``grad_X``/``grad_P`` return
    vectors, ``dS``/``dt`` scalars.  Consistency of the derivatives with
    ``value`` can be audited via :func:`check_hamiltonian_gradients`.
    """

    value: Callable[[np.ndarray, np.ndarray, float, float], float]
    grad_X: Callable[[np.ndarray, np.ndarray, float, float], np.ndarray]
    grad_P: Callable[[np.ndarray, np.ndarray, float, float], np.ndarray]
    dS: Callable[[np.ndarray, np.ndarray, float, float], float]
    dt: Callable[[np.ndarray, np.ndarray, float, float], float]

    def at(self, s: ContactState) -> float:
        return float(self.value(s.X, s.P, s.S, s.t))


@dataclass(frozen=True)
class PointMap:
    """A discrete map of contact states, optionally with an exact Jacobian.

    ``jacobian(state)`` must return the (2n+1) x (2n+1) matrix of partial
    derivatives of the mapped (X, P, S) with respect to the source (X, P, S).
    When absent, :func:`conformal_factor` falls back to central differences.
    """

    name: str
    func: Callable[[ContactState], ContactState]
    jacobian: Optional[Callable[[ContactState], np.ndarray]] = None

    def __call__(self, s: ContactState) -> ContactState:
        return self.func(s)


def eta_std1(state: ContactState, v: Tangent) -> float:
    """Evaluate dS - <P, dX> on a tangent vector."""
    if v.dX.shape[0] != state.dim:
        raise ValueError(
            f"tangent dimension {v.dX.shape[0]} does not match state dimension {state.dim}"
        )
    return float(v.dS - state.P @ v.dX)


def eta_std2(state: ContactState, v: Tangent) -> float:
    """Evaluate dS - (1/2)<P, dX> + (1/2)<X, dP> on a tangent vector."""
    if v.dX.shape[0] != state.dim:
        raise ValueError(
            f"tangent dimension {v.dX.shape[0]} does not match state dimension {state.dim}"
        )
    return float(v.dS - 0.5 * (state.P @ v.dX) + 0.5 * (state.X @ v.dP))


def _form_coeffs(form: str, state: ContactState) -> np.ndarray:
    """Covector components of the named form at a state, in (X, P, S) order."""
    n = state.dim
    w = np.zeros(2 * n + 1)
    if form == "std1":
        w[:n] = -state.P
    elif form == "std2":
        w[:n] = -0.5 * state.P
        w[n : 2 * n] = 0.5 * state.X
    else:
        raise ValueError(f"unknown contact form {form!r}; expected 'std1' or 'std2'")
    w[2 * n] = 1.0
    return w


def map_F(state: ContactState) -> ContactState:
    """Coordinate change taking the std1 convention into std2.

    (X, P, S) -> (X + P, (P - X)/2, S - <X, P>/2), clock unchanged.  Pulling
    the std2 form back through this map returns the std1 form on the nose
    (conformal factor 1).
    """
    return ContactState(
        X=state.X + state.P,
        P=0.5 * (state.P - state.X),
        S=state.S - 0.5 * float(state.X @ state.P),
        t=state.t,
    )


def map_F_jacobian(state: ContactState) -> np.ndarray:
    n = state.dim
    j = np.zeros((2 * n + 1, 2 * n + 1))
    eye = np.eye(n)
    j[:n, :n] = eye
    j[:n, n : 2 * n] = eye
    j[n : 2 * n, :n] = -0.5 * eye
    j[n : 2 * n, n : 2 * n] = 0.5 * eye
    j[2 * n, :n] = -0.5 * state.P
    j[2 * n, n : 2 * n] = -0.5 * state.X
    j[2 * n, 2 * n] = 1.0
    return j


def contact_field_std1(H: ContactHamiltonian, state: ContactState) -> Tangent:
    """Vector field of H in std1 coordinates.  The clock always runs at
    rate 1 and is handled by the integrator, not the tangent."""
    x, p, s, t = state.X, state.P, state.S, state.t
    gp = np.asarray(H.grad_P(x, p, s, t), dtype=float)
    gx = np.asarray(H.grad_X(x, p, s, t), dtype=float)
    hs = float(H.dS(x, p, s, t))
    return Tangent(
        dX=gp,
        dP=-gx - p * hs,
        dS=float(gp @ p) - float(H.value(x, p, s, t)),
    )


def contact_field_std2(H: ContactHamiltonian, state: ContactState) -> Tangent:
    """Vector field of H in std2 coordinates."""
    x, p, s, t = state.X, state.P, state.S, state.t
    gp = np.asarray(H.grad_P(x, p, s, t), dtype=float)
    gx = np.asarray(H.grad_X(x, p, s, t), dtype=float)
    hs = float(H.dS(x, p, s, t))
    return Tangent(
        dX=gp - 0.5 * x * hs,
        dP=-gx - 0.5 * p * hs,
        dS=0.5 * (float(x @ gx) + float(p @ gp)) - float(H.value(x, p, s, t)),
    )


_FIELDS = {"std1": contact_field_std1, "std2": contact_field_std2}


class Trajectory(Sequence):
    """An immutable sequence of states plus a divergence flag."""

    def __init__(self, states, diverged: bool = False):
        self._states = tuple(states)
        self.diverged = bool(diverged)

    def __len__(self) -> int:
        return len(self._states)

    def __getitem__(self, i):
        return self._states[i]

    def __iter__(self):
        return iter(self._states)

    @property
    def states(self):
        return self._states


def reference_integrate(
    H: ContactHamiltonian,
    coords: str,
    s0: ContactState,
    dt: float,
    n: int,
) -> Trajectory:
    """Classical RK4 on the contact field; the accuracy oracle.

    Returns n+1 states (including s0) unless the solution blows up, in which
    case the trajectory is truncated at the last finite state and flagged.
    """
    if coords not in _FIELDS:
        raise ValueError(f"unknown coords {coords!r}; expected 'std1' or 'std2'")
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    field = _FIELDS[coords]
    states = [s0]
    s = s0
    diverged = False
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        for _ in range(n):
            z = s.coords()

            def f(zz: np.ndarray, tt: float) -> np.ndarray:
                v = field(H, ContactState.from_coords(zz, tt))
                return np.concatenate([v.dX, v.dP, [v.dS]])

            k1 = f(z, s.t)
            k2 = f(z + 0.5 * dt * k1, s.t + 0.5 * dt)
            k3 = f(z + 0.5 * dt * k2, s.t + 0.5 * dt)
            k4 = f(z + dt * k3, s.t + dt)
            z_new = z + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            s_new = ContactState.from_coords(z_new, s.t + dt)
            if not s_new.is_finite():
                diverged = True
                break
            states.append(s_new)
            s = s_new
    return Trajectory(states, diverged)


def dissipation_residual(H: ContactHamiltonian, traj: Trajectory) -> float:
    """Max relative mismatch of dH/dt = -(dH/dS) H + dH/dt along a trajectory.

    The left side is a centered finite difference of H sampled along the
    trajectory (assumed uniformly spaced); the residual at each interior
    point is normalized by max(1, |H|).
    """
    states = list(traj)
    if len(states) < 3:
        raise ValueError("trajectory too short for a centered difference")
    dt = states[1].t - states[0].t
    h_vals = np.array([H.at(s) for s in states])
    worst = 0.0
    for i in range(1, len(states) - 1):
        s = states[i]
        lhs = (h_vals[i + 1] - h_vals[i - 1]) / (2.0 * dt)
        rhs = -float(H.dS(s.X, s.P, s.S, s.t)) * h_vals[i] + float(
            H.dt(s.X, s.P, s.S, s.t)
        )
        worst = max(worst, abs(lhs - rhs) / max(1.0, abs(h_vals[i])))
    return worst


def _fd_jacobian(func: Callable[[ContactState], ContactState], state: ContactState) -> np.ndarray:
    z = state.coords()
    m = len(z)
    j = np.empty((m, m))
    for col in range(m):
        h = 1e-6 * max(1.0, abs(z[col]))
        zp = z.copy()
        zm = z.copy()
        zp[col] += h
        zm[col] -= h
        fp = func(ContactState.from_coords(zp, state.t)).coords()
        fm = func(ContactState.from_coords(zm, state.t)).coords()
        j[:, col] = (fp - fm) / (2.0 * h)
    return j


def conformal_factor(
    point_map: Union[PointMap, Callable[[ContactState], ContactState]],
    form: str,
    state: ContactState,
    source_form: Optional[str] = None,
) -> tuple:
    """Extract the scalar by which a map rescales a contact form.

    Pulls the named form back through the map's Jacobian (exact when the map
    declares one, else central differences with step 1e-6 * max(1, |coord|))
    and fits pullback = lambda * eta in least squares over all 2n+1 covector
    components.  Returns (lambda, max absolute residual).  ``source_form``
    lets the comparison form at the source differ from the pulled-back one,
    which is how a change of convention such as :func:`map_F` is certified;
    it defaults to ``form``.

    A fitted |lambda| below 1e-10 means the map crushes the contact structure
    and is reported as an error rather than a value.
    """
    if isinstance(point_map, PointMap):
        func = point_map.func
        jac = point_map.jacobian
        name = point_map.name
    else:
        func = point_map
        jac = None
        name = getattr(point_map, "__name__", "map")
    mapped = func(state)
    j = jac(state) if jac is not None else _fd_jacobian(func, state)
    eta_target = _form_coeffs(form, mapped)
    eta_src = _form_coeffs(source_form if source_form is not None else form, state)
    pullback = j.T @ eta_target
    lam = float(pullback @ eta_src) / float(eta_src @ eta_src)
    if abs(lam) < 1e-10:
        raise ValueError(f"map {name!r} is degenerate: conformal factor ~ 0")
    residual = float(np.max(np.abs(pullback - lam * eta_src)))
    return lam, residual


def check_hamiltonian_gradients(
    H: ContactHamiltonian, state: ContactState, h: float = 1e-6
) -> float:
    """Worst relative error of the declared partials vs central differences
    of ``value``, with denominator max(1, |analytic|)."""
    x, p, s, t = state.X, state.P, state.S, state.t
    worst = 0.0

    def rel(fd: float, an: float) -> float:
        return abs(fd - an) / max(1.0, abs(an))

    gx = np.asarray(H.grad_X(x, p, s, t), dtype=float)
    gp = np.asarray(H.grad_P(x, p, s, t), dtype=float)
    for i in range(len(x)):
        e = np.zeros_like(x)
        e[i] = h
        fd = (H.value(x + e, p, s, t) - H.value(x - e, p, s, t)) / (2 * h)
        worst = max(worst, rel(fd, gx[i]))
        fd = (H.value(x, p + e, s, t) - H.value(x, p - e, s, t)) / (2 * h)
        worst = max(worst, rel(fd, gp[i]))
    fd = (H.value(x, p, s + h, t) - H.value(x, p, s - h, t)) / (2 * h)
    worst = max(worst, rel(fd, float(H.dS(x, p, s, t))))
    fd = (H.value(x, p, s, t + h) - H.value(x, p, s, t - h)) / (2 * h)
    worst = max(worst, rel(fd, float(H.dt(x, p, s, t))))
    return worst

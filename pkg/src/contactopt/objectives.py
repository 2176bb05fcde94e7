"""Benchmark objective functions with analytic gradients.

Every objective is a plain value object bundling an evaluation callable, its
gradient, and (when known) the global minimum.  Gradients are analytic; the
only numerical differentiation in this module is :func:`check_gradient`,
which exists to verify them.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

__all__ = [
    "Objective",
    "QuadraticSpec",
    "make_random_quadratic",
    "quartic",
    "camelback",
    "rosenbrock",
    "check_gradient",
    "get_objective",
    "OBJECTIVE_NAMES",
]


@dataclass(frozen=True)
class Objective:
    """A differentiable scalar function with an analytic gradient.

    ``eval`` maps a length-``dim`` vector to a float, ``grad`` to a
    length-``dim`` vector.  ``known_min_value``/``known_minimizer`` are set
    only when the optimum is known in closed form.
    """

    name: str
    dim: int
    eval: Callable[[np.ndarray], float]
    grad: Callable[[np.ndarray], np.ndarray]
    known_min_value: Optional[float] = None
    known_minimizer: Optional[np.ndarray] = None

    def __call__(self, x: np.ndarray) -> float:
        return self.eval(x)


@dataclass(frozen=True)
class QuadraticSpec:
    """The matrix behind a random quadratic objective, kept for inspection."""

    matrix: np.ndarray = field(repr=False)
    seed: int = 0
    eigen_lo: float = 0.0
    eigen_hi: float = 0.0


def make_random_quadratic(
    seed: int, dim: int, eigen_lo: float, eigen_hi: float
) -> Objective:
    """Build f(x) = x'Ax/2 with A symmetric positive definite.

    A = Q diag(lam) Q' where lam_i ~ U(eigen_lo, eigen_hi) and Q is the
    orthogonal factor of the QR decomposition of a seeded standard-Gaussian
    matrix, with the diagonal of R forced positive so the factorization (and
    hence A) is deterministic in the seed.
    """
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    if not (0.0 < eigen_lo <= eigen_hi):
        raise ValueError(
            f"need 0 < eigen_lo <= eigen_hi, got [{eigen_lo}, {eigen_hi}]"
        )
    rng = np.random.default_rng(seed)
    gauss = rng.standard_normal((dim, dim))
    lam = rng.uniform(eigen_lo, eigen_hi, size=dim)
    q, r = np.linalg.qr(gauss)
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    q = q * signs
    a = (q * lam) @ q.T
    a = 0.5 * (a + a.T)  # exact symmetry

    def f(x: np.ndarray) -> float:
        x = np.asarray(x, dtype=float)
        return float(0.5 * x @ (a @ x))

    def g(x: np.ndarray) -> np.ndarray:
        return a @ np.asarray(x, dtype=float)

    obj = Objective(
        name="quadratic",
        dim=dim,
        eval=f,
        grad=g,
        known_min_value=0.0,
        known_minimizer=np.zeros(dim),
    )
    object.__setattr__(
        obj, "spec", QuadraticSpec(matrix=a, seed=seed, eigen_lo=eigen_lo, eigen_hi=eigen_hi)
    )
    return obj


def quartic(dim: int) -> Objective:
    """f(x) = sum_i i * x_i^4 (1-based i), convex with a very flat bowl at 0."""
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    weights = np.arange(1, dim + 1, dtype=float)

    def f(x: np.ndarray) -> float:
        x = np.asarray(x, dtype=float)
        return float(np.sum(weights * x**4))

    def g(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return 4.0 * weights * x**3

    return Objective(
        name="quartic",
        dim=dim,
        eval=f,
        grad=g,
        known_min_value=0.0,
        known_minimizer=np.zeros(dim),
    )


def camelback() -> Objective:
    """Two-dimensional three-hump camelback function.

    f(x1, x2) = 2 x1^2 - 1.05 x1^4 + x1^6/6 + x1 x2 + x2^2.  Global minimum
    f(0, 0) = 0; two symmetric local minima near +-(-1.75, 0.87) with value
    about 0.3.
    """

    def f(x: np.ndarray) -> float:
        x1, x2 = float(x[0]), float(x[1])
        return 2.0 * x1**2 - 1.05 * x1**4 + x1**6 / 6.0 + x1 * x2 + x2**2

    def g(x: np.ndarray) -> np.ndarray:
        x1, x2 = float(x[0]), float(x[1])
        return np.array(
            [4.0 * x1 - 4.2 * x1**3 + x1**5 + x2, x1 + 2.0 * x2]
        )

    return Objective(
        name="camelback",
        dim=2,
        eval=f,
        grad=g,
        known_min_value=0.0,
        known_minimizer=np.zeros(2),
    )


def rosenbrock(dim: int) -> Objective:
    """Chained Rosenbrock, f(x) = sum_{i<n} 100 (x_{i+1} - x_i^2)^2 + (1 - x_i)^2."""
    if dim < 2:
        raise ValueError(f"rosenbrock needs dim >= 2, got {dim}")

    def f(x: np.ndarray) -> float:
        x = np.asarray(x, dtype=float)
        return float(
            np.sum(100.0 * (x[1:] - x[:-1] ** 2) ** 2 + (1.0 - x[:-1]) ** 2)
        )

    def g(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        diff = x[1:] - x[:-1] ** 2
        out[:-1] += -400.0 * x[:-1] * diff - 2.0 * (1.0 - x[:-1])
        out[1:] += 200.0 * diff
        return out

    return Objective(
        name="rosenbrock",
        dim=dim,
        eval=f,
        grad=g,
        known_min_value=0.0,
        known_minimizer=np.ones(dim),
    )


def check_gradient(obj: Objective, x: np.ndarray, h: float = 1e-5) -> float:
    """Worst relative mismatch between obj.grad and central differences.

    The denominator is max(1, |analytic component|) so near-zero components do
    not blow up the ratio.
    """
    if h <= 0:
        raise ValueError(f"step h must be positive, got {h}")
    x = np.asarray(x, dtype=float)
    analytic = np.asarray(obj.grad(x), dtype=float)
    worst = 0.0
    for i in range(x.size):
        step = np.zeros_like(x)
        step[i] = h
        fd = (obj.eval(x + step) - obj.eval(x - step)) / (2.0 * h)
        err = abs(fd - analytic[i]) / max(1.0, abs(analytic[i]))
        worst = max(worst, err)
    return worst


OBJECTIVE_NAMES = ("quadratic", "quartic", "camelback", "rosenbrock")


def get_objective(
    name: str,
    dim: int = 2,
    seed: int = 0,
    eigen_lo: float = 1e-3,
    eigen_hi: float = 1.0,
) -> Objective:
    """Look an objective up by its CLI/config name."""
    if name == "quadratic":
        return make_random_quadratic(seed, dim, eigen_lo, eigen_hi)
    if name == "quartic":
        return quartic(dim)
    if name == "camelback":
        return camelback()
    if name == "rosenbrock":
        return rosenbrock(dim)
    raise ValueError(
        f"unknown objective {name!r}; valid names: {', '.join(OBJECTIVE_NAMES)}"
    )

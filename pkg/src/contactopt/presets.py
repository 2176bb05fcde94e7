"""Canned benchmark experiments.

Four standard setups, each at two scales: "desk" keeps trial counts small
enough for a laptop test run, "paper" uses the full published protocol.
The hyperparameter search intervals are the published ones, reproduced
verbatim per experiment; the tuned RGD variant with an extra interpolation
exponent is not implemented here, so no range is listed for it.

  quadratic   random PSD quadratic, eigenvalues uniform on [1e-3, 1];
              Monte Carlo redraws the matrix per run, start at all-ones
  quartic     f = sum_i i * x_i^4 in 50 dims, start at 2 * ones
  camelback   three-hump camelback started near the spurious local minimum
  rosenbrock  chained Rosenbrock, start alternating (-1.2, 1, -1.2, 1, ...)
"""

from typing import Optional

from .harness import (
    ExperimentSpec,
    InitSpec,
    ObjectiveSpec,
    OptimizerEntry,
    SearchRanges,
)

__all__ = ["PRESET_NAMES", "SCALES", "experiment_preset"]

PRESET_NAMES = ("quadratic", "quartic", "camelback", "rosenbrock")
SCALES = ("desk", "paper")


def _entries(cm_nag: dict, rgd_crgd: dict, nag: Optional[dict] = None):
    return (
        OptimizerEntry(kind="cm", ranges=SearchRanges(**cm_nag)),
        OptimizerEntry(kind="nag", ranges=SearchRanges(**(nag or cm_nag))),
        OptimizerEntry(kind="rgd", ranges=SearchRanges(**rgd_crgd)),
        OptimizerEntry(kind="crgd", ranges=SearchRanges(**rgd_crgd)),
    )


def experiment_preset(
    name: str,
    scale: str = "desk",
    master_seed: int = 0,
    init: Optional[InitSpec] = None,
) -> ExperimentSpec:
    """Build the named experiment at the requested scale.

    ``master_seed`` seeds the whole pipeline; ``init`` overrides the canned
    initialization (useful for probing basins of attraction).
    """
    if scale not in SCALES:
        raise ValueError(f"scale must be one of {', '.join(SCALES)}; got {scale!r}")
    paper = scale == "paper"

    if name == "quadratic":
        # CM and NAG search different step ranges here; the relativistic
        # pair shares one table.
        entries = _entries(
            cm_nag={"tau": (1e-2, 0.8), "mu": (0.8, 0.99)},
            nag={"tau": (1e-3, 0.5), "mu": (0.8, 0.99)},
            rgd_crgd={"epsilon": (0.0, 0.6), "mu": (0.49, 0.95), "delta": (0.0, 20.0)},
        )
        spec = ExperimentSpec(
            objective=ObjectiveSpec(name="quadratic", dim=500 if paper else 50, seed=1),
            init=init or InitSpec(kind="pattern", values=(1.0,)),
            optimizers=entries,
            search_trials=150,
            mc_runs=50 if paper else 10,
            iters=200,
            master_seed=master_seed,
        )
    elif name == "quartic":
        entries = _entries(
            cm_nag={"tau": (1e-5, 1e-1), "mu": (0.8, 0.99)},
            rgd_crgd={"epsilon": (1e-5, 1e-2), "mu": (0.6, 0.99), "delta": (0.0, 30.0)},
        )
        spec = ExperimentSpec(
            objective=ObjectiveSpec(name="quartic", dim=50),
            init=init or InitSpec(kind="pattern", values=(2.0,)),
            optimizers=entries,
            search_trials=1000 if paper else 300,
            mc_runs=1,
            iters=500,
            master_seed=master_seed,
        )
    elif name == "camelback":
        entries = _entries(
            cm_nag={"tau": (1e-5, 1e-3), "mu": (0.8, 0.999)},
            rgd_crgd={"epsilon": (1e-1, 1.0), "mu": (0.1, 0.8), "delta": (0.0, 20.0)},
        )
        spec = ExperimentSpec(
            objective=ObjectiveSpec(name="camelback", dim=2),
            init=init or InitSpec(kind="fixed", values=(1.8, -0.9)),
            optimizers=entries,
            search_trials=1500 if paper else 300,
            mc_runs=1,
            iters=300,
            master_seed=master_seed,
        )
    elif name == "rosenbrock":
        entries = _entries(
            cm_nag={"tau": (2e-4, 4e-4), "mu": (0.94, 0.98)},
            rgd_crgd={"epsilon": (1e-3, 1e-2), "mu": (0.9, 0.99), "delta": (0.0, 20.0)},
        )
        spec = ExperimentSpec(
            objective=ObjectiveSpec(name="rosenbrock", dim=100),
            init=init or InitSpec(kind="pattern", values=(-1.2, 1.0)),
            optimizers=entries,
            search_trials=500 if paper else 100,
            mc_runs=1,
            iters=1200 if paper else 400,
            master_seed=master_seed,
        )
    else:
        raise ValueError(
            f"unknown preset {name!r}; valid names: {', '.join(PRESET_NAMES)}"
        )
    return spec

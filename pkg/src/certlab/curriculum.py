"""Three-state log-linear toy world for curriculum-vs-shortcut training.

The world has one rewarded state (``expert``) and two unrewarded ones: a
``shortcut`` whose features overlap the ``bad`` state, so that boosting
shortcut likelihood necessarily boosts scores orthogonal to the expert.
A log-linear policy scores each state by the inner product of its weight
vector with the state's feature vector.

Two data regimes are contrasted:

* *biased* data: every sample is the shortcut state.  Maximum-likelihood
  fitting pushes the shortcut score upward without limit (capped here by a
  norm ball), so the fitted policy's expert probability stays pinned near
  zero at every sample size: the bias never averages out.
* *curriculum* data: i.i.d. samples from an expert policy.  The fitted
  policy's expert probability converges to the expert's at the usual
  root-n parametric rate (up to log factors).

Fitting is full-batch projected gradient ascent with the exact gradient
``mean(features of data) - E_policy[features]``, so convergence is
certifiable from the final gradient norm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import InvalidInputError
from .seeding import derive_seed, rng_for

EXPERT, SHORTCUT, BAD = 0, 1, 2
STATE_NAMES = ("expert", "shortcut", "bad")

DEFAULT_PARAM_BOUND = 50.0
PROVENANCES = ("biased", "curriculum")


@dataclass(frozen=True)
class ToyWorld:
    """Feature map and valuation for the three states.

    Features (rows, in state order expert/shortcut/bad):
    (1,0,0), (0,1,1), (0,1,0).  The valuation rewards only the expert
    state.  These are fixed; the dataclass exists to carry them explicitly
    through every computation rather than as module globals.
    """

    features: np.ndarray = field(
        default_factory=lambda: np.array(
            [[1.0, 0.0, 0.0], [0.0, 1.0, 1.0], [0.0, 1.0, 0.0]]
        )
    )
    valuation: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0, 0.0]))

    def __post_init__(self) -> None:
        if self.features.shape != (3, 3) or self.valuation.shape != (3,):
            raise InvalidInputError("world is 3 states with 3-d features")
        if not np.array_equal(self.valuation != 0, np.array([True, False, False])):
            raise InvalidInputError("valuation must reward exactly the expert state")

    @property
    def dim(self) -> int:
        return self.features.shape[1]


@dataclass(frozen=True)
class LogLinearPolicy:
    """Weights theta with P(state) proportional to exp(<theta, features>)."""

    theta: np.ndarray
    param_bound: float = DEFAULT_PARAM_BOUND

    def __post_init__(self) -> None:
        t = np.asarray(self.theta, dtype=np.float64)
        if t.shape != (3,) or not np.all(np.isfinite(t)):
            raise InvalidInputError("theta must be a finite 3-vector")
        norm = float(np.linalg.norm(t))
        if norm > self.param_bound + 1e-9:
            raise InvalidInputError(f"|theta| = {norm!r} exceeds bound {self.param_bound!r}")
        object.__setattr__(self, "theta", t)


def state_distribution(world: ToyWorld, theta) -> np.ndarray:
    """Softmax over the three state scores <theta, features>."""
    scores = world.features @ np.asarray(theta, dtype=np.float64)
    z = np.exp(scores - scores.max())
    return z / z.sum()


def success_rate(world: ToyWorld, policy: LogLinearPolicy | np.ndarray) -> float:
    """Probability mass the policy places on the rewarded (expert) state."""
    theta = policy.theta if isinstance(policy, LogLinearPolicy) else policy
    return float(state_distribution(world, theta)[EXPERT])


@dataclass(frozen=True)
class LatentDataset:
    """Sampled states with their provenance tag."""

    samples: np.ndarray  # int array of state indices
    provenance: str

    def __post_init__(self) -> None:
        s = np.asarray(self.samples, dtype=np.int64)
        if s.ndim != 1 or s.size < 1:
            raise InvalidInputError("need at least one sample")
        if np.any((s < 0) | (s > 2)):
            raise InvalidInputError("samples must be state indices 0..2")
        if self.provenance not in PROVENANCES:
            raise InvalidInputError(f"provenance must be one of {PROVENANCES}")
        if self.provenance == "biased" and np.any(s != SHORTCUT):
            raise InvalidInputError("biased datasets contain only the shortcut state")
        object.__setattr__(self, "samples", s)

    @property
    def n(self) -> int:
        return self.samples.size

    def counts(self) -> np.ndarray:
        return np.bincount(self.samples, minlength=3).astype(np.float64)


def generate_dataset(
    world: ToyWorld,
    provenance: str,
    expert_theta,
    n: int,
    seed: int,
) -> LatentDataset:
    """Biased: n copies of the shortcut.  Curriculum: n i.i.d. expert draws."""
    if n < 1:
        raise InvalidInputError(f"need n >= 1, got {n}")
    if provenance == "biased":
        return LatentDataset(samples=np.full(n, SHORTCUT, dtype=np.int64), provenance="biased")
    if provenance != "curriculum":
        raise InvalidInputError(f"provenance must be one of {PROVENANCES}, got {provenance!r}")
    if expert_theta is None:
        raise InvalidInputError("curriculum datasets need an expert theta")
    dist = state_distribution(world, expert_theta)
    rng = rng_for(seed, "dataset", provenance)
    samples = rng.choice(3, size=n, p=dist)
    return LatentDataset(samples=samples.astype(np.int64), provenance="curriculum")


def log_likelihood(world: ToyWorld, theta, counts: np.ndarray) -> float:
    """Mean log-likelihood of the counted samples under theta."""
    t = np.asarray(theta, dtype=np.float64)
    scores = world.features @ t
    log_z = float(scores.max() + np.log(np.sum(np.exp(scores - scores.max()))))
    n = counts.sum()
    return float(counts @ scores / n - log_z)


def log_likelihood_grad(world: ToyWorld, theta, counts: np.ndarray) -> np.ndarray:
    """Exact mean-gradient: empirical feature mean minus the model's."""
    n = counts.sum()
    empirical = counts @ world.features / n
    expected = state_distribution(world, theta) @ world.features
    return empirical - expected


class FitResult(NamedTuple):
    policy: LogLinearPolicy
    final_grad_norm: float
    iterations: int


def mle_fit(
    world: ToyWorld,
    data: LatentDataset,
    iterations: int = 5000,
    step: float = 0.1,
    param_bound: float = DEFAULT_PARAM_BOUND,
) -> FitResult:
    """Projected gradient ascent on the mean log-likelihood from theta = 0.

    After every step the iterate is projected back onto the ball
    ``|theta| <= param_bound``; with interior optima (all states observed)
    the reported final gradient norm certifies convergence, and with
    boundary optima (biased data) the projection is what caps the drift.
    """
    if iterations < 1:
        raise InvalidInputError(f"need iterations >= 1, got {iterations}")
    if step <= 0:
        raise InvalidInputError(f"step must be positive, got {step!r}")
    counts = data.counts()
    theta = np.zeros(world.dim)
    for _ in range(iterations):
        theta = theta + step * log_likelihood_grad(world, theta, counts)
        norm = float(np.linalg.norm(theta))
        if norm > param_bound:
            theta *= param_bound / norm
    grad_norm = float(np.linalg.norm(log_likelihood_grad(world, theta, counts)))
    if not np.all(np.isfinite(theta)):
        raise InvalidInputError("optimizer produced non-finite parameters")
    return FitResult(
        policy=LogLinearPolicy(theta=theta, param_bound=param_bound),
        final_grad_norm=grad_norm,
        iterations=iterations,
    )


def total_variation(p, q) -> float:
    """Half the L1 distance between two distributions on the states."""
    return 0.5 * float(np.abs(np.asarray(p) - np.asarray(q)).sum())


class SweepRow(NamedTuple):
    n: int
    provenance: str
    mean_gap: float
    stddev: float
    slope_so_far: float


class SweepResult(NamedTuple):
    rows: list[SweepRow]
    slope: float


def convergence_sweep(
    world: ToyWorld,
    expert_theta,
    n_grid,
    trials_per_n: int,
    seed: int,
    provenance: str = "curriculum",
    iterations: int = 5000,
    step: float = 0.1,
) -> SweepResult:
    """Mean |fitted success - expert success| per sample size, with log-log slope.

    Trial (n, t) draws its dataset from the stream (seed, n, t); gaps are
    aggregated with compensated summation in trial order so threading the
    trials cannot change the reported means.
    """
    grid = [int(n) for n in n_grid]
    if len(grid) < 2 or any(b <= a for a, b in zip(grid, grid[1:])):
        raise InvalidInputError("n grid must be increasing with >= 2 points")
    if trials_per_n < 2:
        raise InvalidInputError(f"need >= 2 trials per n, got {trials_per_n}")
    expert_success = success_rate(world, np.asarray(expert_theta, dtype=np.float64))
    rows: list[SweepRow] = []
    log_n: list[float] = []
    log_gap: list[float] = []
    for n in grid:
        gaps = []
        for trial in range(trials_per_n):
            data = generate_dataset(
                world, provenance, expert_theta, n, seed=rng_child(seed, n, trial)
            )
            fit = mle_fit(world, data, iterations=iterations, step=step)
            gaps.append(abs(success_rate(world, fit.policy) - expert_success))
        mean_gap = math.fsum(gaps) / len(gaps)
        var = math.fsum((g - mean_gap) ** 2 for g in gaps) / (len(gaps) - 1)
        log_n.append(math.log(n))
        log_gap.append(math.log(max(mean_gap, 1e-300)))
        slope = _ls_slope(log_n, log_gap) if len(log_n) >= 2 else float("nan")
        rows.append(
            SweepRow(
                n=n,
                provenance=provenance,
                mean_gap=mean_gap,
                stddev=math.sqrt(var),
                slope_so_far=slope,
            )
        )
    return SweepResult(rows=rows, slope=_ls_slope(log_n, log_gap))


def rng_child(seed: int, n: int, trial: int) -> int:
    return derive_seed(seed, "sweep", n, trial)


def _ls_slope(xs: list[float], ys: list[float]) -> float:
    x = np.asarray(xs)
    y = np.asarray(ys)
    centered = x - x.mean()
    return float(centered @ (y - y.mean()) / (centered @ centered))

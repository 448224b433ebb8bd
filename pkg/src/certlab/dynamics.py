"""Noise dynamics of discrete vs. continuous sequential computation.

Two simulators and one analytic curve:

* ``simulate_discrete_chain``: a token chain whose step-``k`` logits are a
  deterministic function of the generated prefix.  Additive logit noise is
  constrained to be *sub-decisional* (argmax-preserving), and the argmax at
  each step discards it, so the perturbed chain can never leave the clean
  trajectory; the divergence count is exactly zero.
* ``simulate_latent_chain`` / ``monte_carlo_error``: a continuous state
  chain ``h_k = f(h_{k-1}) + noise`` with no quantization step.  The final
  squared error follows the geometric series
  ``(1 - L^(2M)) / (1 - L^2) * d * sigma^2`` (``M * d * sigma^2`` at L = 1),
  and the provided transition maps have operator norm exactly ``L`` so the
  series is an equality, not just a ceiling.
* ``accuracy_curve``: the probability that projected state noise leaves a
  fixed logit ranking intact: ``Phi(margin / (sqrt(C) * sigma))``, the
  normal-CDF decay from a plateau at 1 to a top-two coin flip at 0.5.

Reproducibility: all samplers consume streams derived from an explicit
seed.  Trial populations are processed in deterministic batches (per-step
prefix groups for the discrete chain, fixed-size blocks for the error
Monte Carlo); batches are independent streams merged in index order, so
results do not depend on execution schedule.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, SamplingExhaustedError
from .seeding import rng_for

REJECTION_CAP = 10**6
MC_BLOCK = 8192

# ---------------------------------------------------------------------------
# Continuous latent chain
# ---------------------------------------------------------------------------

_TRANSITIONS = ("linear_scaling", "rotation_scaling")


@dataclass(frozen=True)
class LatentConfig:
    """Continuous-chain parameters.

    ``lipschitz`` is the operator norm of the transition map; ``sigma_h``
    the per-step noise standard deviation per coordinate.  ``transition``
    picks the map: plain scaling ``h -> L h`` or scaling composed with a
    fixed seeded rotation ``h -> L R h`` (both have norm exactly L).
    """

    dim: int
    steps: int
    lipschitz: float
    sigma_h: float
    transition: str = "linear_scaling"
    rotation_seed: int = 0

    def __post_init__(self) -> None:
        if self.dim < 1 or self.steps < 1:
            raise InvalidInputError(f"dim and steps must be >= 1, got {self.dim}, {self.steps}")
        if not (self.lipschitz > 0):
            raise InvalidInputError(f"lipschitz must be positive, got {self.lipschitz!r}")
        if self.sigma_h < 0:
            raise InvalidInputError(f"sigma_h must be >= 0, got {self.sigma_h!r}")
        if self.transition not in _TRANSITIONS:
            raise InvalidInputError(
                f"transition must be one of {_TRANSITIONS}, got {self.transition!r}"
            )


def transition_matrix(config: LatentConfig) -> np.ndarray:
    """The linear map applied at every step, with operator norm == lipschitz."""
    if config.transition == "linear_scaling" or config.dim == 1:
        return config.lipschitz * np.eye(config.dim)
    rng = rng_for(config.rotation_seed, "rotation", config.dim)
    raw = rng.standard_normal((config.dim, config.dim))
    q, r = np.linalg.qr(raw)
    q = q * np.sign(np.diag(r))  # fix column signs so the factorization is unique
    return config.lipschitz * q


@dataclass(frozen=True)
class TrajectoryPair:
    """Clean and noisy trajectories sharing the initial state (index 0)."""

    clean: np.ndarray  # (steps+1, dim)
    noisy: np.ndarray  # (steps+1, dim)
    final_error_sq: float

    def __post_init__(self) -> None:
        if self.clean.shape != self.noisy.shape:
            raise InvalidInputError("clean and noisy trajectories must share a shape")
        gap = float(np.sum((self.clean[-1] - self.noisy[-1]) ** 2))
        if abs(gap - self.final_error_sq) > 1e-12 * max(1.0, gap):
            raise InvalidInputError("final_error_sq inconsistent with trajectories")


def simulate_latent_chain(config: LatentConfig, h0, seed: int) -> TrajectoryPair:
    """Run the clean chain and a noise-injected twin from a shared start."""
    start = np.asarray(h0, dtype=np.float64)
    if start.shape != (config.dim,) or not np.all(np.isfinite(start)):
        raise InvalidInputError(f"h0 must be a finite vector of length {config.dim}")
    matrix = transition_matrix(config)
    rng = rng_for(seed, "latent-chain")
    clean = np.empty((config.steps + 1, config.dim))
    noisy = np.empty_like(clean)
    clean[0] = noisy[0] = start
    for k in range(1, config.steps + 1):
        clean[k] = matrix @ clean[k - 1]
        noisy[k] = matrix @ noisy[k - 1] + config.sigma_h * rng.standard_normal(config.dim)
    err = float(np.sum((clean[-1] - noisy[-1]) ** 2))
    return TrajectoryPair(clean=clean, noisy=noisy, final_error_sq=err)


def expected_error_closed_form(config: LatentConfig) -> float:
    """Expected final squared error of the noisy chain.

    ``(1 - L^(2M)) / (1 - L^2) * d * sigma^2``; the removable singularity
    at L = 1 is handled by the ``M * d * sigma^2`` branch when
    ``|L - 1| < 1e-9``.
    """
    base = config.dim * config.sigma_h**2
    lf = config.lipschitz
    if abs(lf - 1.0) < 1e-9:
        return config.steps * base
    ratio = lf * lf
    return (1.0 - ratio**config.steps) / (1.0 - ratio) * base


def monte_carlo_error(config: LatentConfig, trials: int, seed: int) -> tuple[float, float]:
    """Sample mean and standard error of the final squared error.

    Simulates the error recursion ``E_k = A E_{k-1} + noise`` directly
    (the clean trajectory cancels), in fixed blocks of ``MC_BLOCK`` trials
    with independent derived streams merged in block order.
    """
    if trials < 100:
        raise InvalidInputError(f"need at least 100 trials, got {trials}")
    matrix = transition_matrix(config)
    plain_scaling = config.transition == "linear_scaling" or config.dim == 1
    sums: list[float] = []
    sq_sums: list[float] = []
    done = 0
    block_index = 0
    while done < trials:
        size = min(MC_BLOCK, trials - done)
        rng = rng_for(seed, "mc-block", block_index)
        err = np.zeros((size, config.dim))
        for _ in range(config.steps):
            if plain_scaling:
                err *= config.lipschitz
            else:
                err = err @ matrix.T
            err += config.sigma_h * rng.standard_normal((size, config.dim))
        final_sq = np.sum(err * err, axis=1)
        sums.append(float(final_sq.sum()))
        sq_sums.append(float(np.sum(final_sq * final_sq)))
        done += size
        block_index += 1
    total = math.fsum(sums)
    total_sq = math.fsum(sq_sums)
    mean = total / trials
    variance = max(0.0, (total_sq - trials * mean * mean) / (trials - 1))
    return mean, math.sqrt(variance / trials)


# ---------------------------------------------------------------------------
# Discrete chain with argmax reset
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DiscreteChainSpec:
    """Token-chain parameters with prefix-determined logits.

    The clean logits at step ``k`` are a deterministic function of the
    generated prefix, realized as a seeded lookup keyed by the prefix
    bytes, with the top logit lifted where needed so every decision has
    margin >= ``min_margin`` (hence a unique argmax).
    """

    steps: int
    n_options: int
    noise_scale: float
    sub_decisional_only: bool = True
    logit_seed: int = 0
    min_margin: float = 1.0

    def __post_init__(self) -> None:
        if self.steps < 1 or self.n_options < 2:
            raise InvalidInputError(
                f"need steps >= 1 and n_options >= 2, got {self.steps}, {self.n_options}"
            )
        if self.noise_scale < 0:
            raise InvalidInputError(f"noise scale must be >= 0, got {self.noise_scale!r}")
        if not (self.min_margin > 0):
            raise InvalidInputError(f"min_margin must be positive, got {self.min_margin!r}")


def prefix_logits(spec: DiscreteChainSpec, prefix: tuple[int, ...]) -> np.ndarray:
    """Clean logits for the next step after ``prefix`` (stable across calls)."""
    digest = hashlib.blake2b(
        repr((spec.logit_seed, spec.n_options, prefix)).encode(), digest_size=8
    ).digest()
    rng = np.random.Generator(np.random.PCG64(int.from_bytes(digest, "little")))
    logits = rng.standard_normal(spec.n_options)
    top = int(np.argmax(logits))
    second = float(np.partition(logits, spec.n_options - 2)[-2])
    if logits[top] - second < spec.min_margin:
        logits[top] = second + spec.min_margin
    return logits


def check_sub_decisional(l_star, eps) -> bool:
    """True iff adding ``eps`` leaves the argmax unchanged (lowest-index ties)."""
    l = np.asarray(l_star, dtype=np.float64)
    e = np.asarray(eps, dtype=np.float64)
    if l.shape != e.shape:
        raise InvalidInputError(f"shape mismatch: {l.shape} vs {e.shape}")
    return int(np.argmax(l + e)) == int(np.argmax(l))


def sample_sub_decisional_noise(
    l_star, scale: float, rng: np.random.Generator, max_attempts: int = REJECTION_CAP
) -> tuple[np.ndarray, int]:
    """Gaussian logit noise conditioned on preserving the argmax.

    Rejection-samples N(0, scale^2 I) until the sub-decisional condition
    holds; returns (noise, rejection count).  Raises SamplingExhaustedError
    past ``max_attempts`` attempts, which signals a noise scale far above
    the decision margin.
    """
    l = np.asarray(l_star, dtype=np.float64)
    if scale < 0:
        raise InvalidInputError(f"scale must be >= 0, got {scale!r}")
    top = int(np.argmax(l))
    runner_up = float(np.partition(l, l.size - 2)[-2])
    if l[top] <= runner_up and np.sum(l == l[top]) > 1:
        raise InvalidInputError("logits must have a unique argmax")
    if scale == 0.0:
        return np.zeros_like(l), 0
    rejections = 0
    while rejections < max_attempts:
        eps = rng.normal(0.0, scale, l.size)
        if int(np.argmax(l + eps)) == top:
            return eps, rejections
        rejections += 1
    raise SamplingExhaustedError(
        f"no sub-decisional draw in {max_attempts} attempts at scale {scale!r}"
    )


def _group_noise(
    l_star: np.ndarray,
    count: int,
    scale: float,
    sub_decisional_only: bool,
    rng: np.random.Generator,
) -> np.ndarray:
    """Noise rows for ``count`` trials sharing the same clean logits."""
    draws = rng.normal(0.0, scale, (count, l_star.size))
    if not sub_decisional_only or scale == 0.0:
        return draws
    top = int(np.argmax(l_star))
    attempts = 1
    pending = np.flatnonzero(np.argmax(l_star + draws, axis=1) != top)
    while pending.size:
        if attempts >= REJECTION_CAP:
            raise SamplingExhaustedError(
                f"{pending.size} trials still rejected after {attempts} rounds"
            )
        redraw = rng.normal(0.0, scale, (pending.size, l_star.size))
        draws[pending] = redraw
        attempts += 1
        pending = pending[np.argmax(l_star + draws[pending], axis=1) != top]
    return draws


def simulate_discrete_chain(spec: DiscreteChainSpec, trials: int, seed: int) -> int:
    """Count trials whose final token differs from the clean chain's.

    Each trial runs the perturbed chain, recomputing step-``k`` logits from
    its *own* generated prefix, with per-step noise (argmax-preserving when
    ``sub_decisional_only``).  Trials sharing a prefix are processed as one
    vectorized group with a stream derived from (seed, step, group rank).
    """
    if trials < 1:
        raise InvalidInputError(f"need trials >= 1, got {trials}")
    # Clean trajectory: argmax of the prefix-keyed logits, no noise.
    clean_prefix: tuple[int, ...] = ()
    for _ in range(spec.steps):
        clean_prefix += (int(np.argmax(prefix_logits(spec, clean_prefix))),)
    clean_final = clean_prefix[-1]

    groups: dict[tuple[int, ...], int] = {(): trials}
    for step in range(spec.steps):
        next_groups: dict[tuple[int, ...], int] = {}
        for rank, prefix in enumerate(sorted(groups)):
            count = groups[prefix]
            l_star = prefix_logits(spec, prefix)
            rng = rng_for(seed, "step", step, "group", rank)
            noise = _group_noise(l_star, count, spec.noise_scale, spec.sub_decisional_only, rng)
            tokens = np.argmax(l_star + noise, axis=1)
            for token, token_count in zip(*np.unique(tokens, return_counts=True)):
                key = prefix + (int(token),)
                next_groups[key] = next_groups.get(key, 0) + int(token_count)
        groups = next_groups
    return sum(count for prefix, count in groups.items() if prefix[-1] != clean_final)


# ---------------------------------------------------------------------------
# Normalized accuracy curve
# ---------------------------------------------------------------------------


def normal_cdf(z: float) -> float:
    """Standard normal CDF via the error function."""
    return 0.5 * (1.0 + math.erf(z / math.sqrt(2.0)))


@dataclass(frozen=True)
class AccuracyCurveSpec:
    """Parameters of the ranking-retention curve.

    ``margin`` is the clean top-two logit gap; ``noise_gain`` the variance
    multiplier mapping injected state noise to the projected logit-gap
    noise; ``sigma_grid`` the strictly increasing positive noise scales to
    evaluate.
    """

    margin: float
    noise_gain: float
    sigma_grid: tuple[float, ...]

    def __post_init__(self) -> None:
        if not (self.margin > 0) or not (self.noise_gain > 0):
            raise InvalidInputError("margin and noise_gain must be positive")
        grid = tuple(float(s) for s in self.sigma_grid)
        if not grid or any(s <= 0 for s in grid):
            raise InvalidInputError("sigma grid must be non-empty and positive")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise InvalidInputError("sigma grid must be strictly increasing")
        object.__setattr__(self, "sigma_grid", grid)


def accuracy_curve(spec: AccuracyCurveSpec) -> list[tuple[float, float]]:
    """(sigma, retention probability) pairs: Phi(margin / (sqrt(gain) * sigma)).

    Monotone non-increasing in sigma, tending to 1 as sigma -> 0 and to
    0.5 (a top-two coin flip) as sigma -> infinity.
    """
    root_gain = math.sqrt(spec.noise_gain)
    return [(s, normal_cdf(spec.margin / (root_gain * s))) for s in spec.sigma_grid]


def empirical_accuracy_sweep(
    dim: int,
    margin: float,
    sigma_grid,
    trials: int,
    seed: int,
) -> dict:
    """Sample the retention rate of a concrete two-row readout under state noise.

    Builds a readout whose row difference has entries +-1 (norm sqrt(dim))
    and a clean logit gap of ``margin``; for each sigma draws isotropic
    state noise, projects it onto the row difference, and counts draws
    whose projected gap stays below the margin.  Returns the inferred
    noise gain (``dim``, one projection step) alongside the rows.
    """
    if trials < 1000:
        raise InvalidInputError(f"need at least 1000 trials, got {trials}")
    if dim < 1 or not (margin > 0):
        raise InvalidInputError("need dim >= 1 and margin > 0")
    row_diff = np.where(np.arange(dim) % 2 == 0, 1.0, -1.0)
    noise_gain = float(row_diff @ row_diff)  # == dim
    spec = AccuracyCurveSpec(margin=margin, noise_gain=noise_gain, sigma_grid=tuple(sigma_grid))
    analytic = accuracy_curve(spec)
    rows = []
    for idx, (sigma, expected) in enumerate(analytic):
        rng = rng_for(seed, "accuracy", idx)
        state_noise = rng.normal(0.0, sigma, (trials, dim))
        projected = state_noise @ row_diff
        retained = float(np.mean(projected < margin))
        std_error = math.sqrt(max(retained * (1.0 - retained), 1e-12) / trials)
        rows.append(
            {
                "sigma": sigma,
                "analytic": expected,
                "empirical": retained,
                "std_error": std_error,
            }
        )
    return {"rows": rows, "row_diff_norm_sq": noise_gain, "noise_gain": noise_gain}

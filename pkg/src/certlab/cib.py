"""Discrete conditional information-bottleneck solver with brute-force oracles.

The object of study is a stochastic compression map ``p(h | s_past)`` for a
small finite joint ``p(x, s_past, s_future)``, scored by the dual objective

    J = I(h; S_past | X) - beta * I(h; S_future | X),

i.e. pay for every nat of the past you keep, earn ``beta`` per nat of
predictive information about the future.  ``solve_cib`` minimizes J by
alternating self-consistent updates (marginal, decoder, encoder rows), the
classic coordinate descent on the bottleneck free energy; each block update
minimizes the free energy exactly, so the objective is non-increasing
across sweeps.  ``brute_force_cib`` enumerates every deterministic encoder
as an independent check, and ``information_frontier`` sweeps ``beta`` to
trace the achievable (I_past, I_future) envelope, which must come out
monotone and concave if the solver is doing its job.

``beta_schedule`` exposes the stage-dependent trade-off weight
``scale * k / (M - k)``: early stages pay nothing for compression, late
stages weight prediction heavily, diverging at the terminal stage.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import EnumerationTooLargeError, InvalidInputError
from .seeding import derive_seed, rng_for

ENUMERATION_CAP = 10**7
SUM_TOL = 1e-12
# Stand-in for log(0) in encoder updates: large enough to zero cells after
# the exponential, finite so that 0 * log(0) products stay exactly 0.
LOG_FLOOR = -1e30
SUPPORT_EPS = 1e-9


@dataclass(frozen=True)
class CibProblem:
    """Joint distribution p(x, s_past, s_future) on finite alphabets."""

    joint: np.ndarray  # shape (n_context, n_past, n_future)

    def __post_init__(self) -> None:
        j = np.asarray(self.joint, dtype=np.float64)
        if j.ndim != 3:
            raise InvalidInputError(f"joint must be 3-d (context, past, future), got {j.shape}")
        if j.shape[0] < 1 or j.shape[1] < 2 or j.shape[2] < 2:
            raise InvalidInputError(f"need >=1 context and >=2 past/future symbols, got {j.shape}")
        if np.any(j < 0) or not np.all(np.isfinite(j)):
            raise InvalidInputError("joint entries must be finite and non-negative")
        if abs(float(j.sum()) - 1.0) > SUM_TOL:
            raise InvalidInputError(f"joint sums to {float(j.sum())!r}, not 1 within {SUM_TOL}")
        object.__setattr__(self, "joint", j)

    @property
    def n_context(self) -> int:
        return self.joint.shape[0]

    @property
    def n_past(self) -> int:
        return self.joint.shape[1]

    @property
    def n_future(self) -> int:
        return self.joint.shape[2]


@dataclass(frozen=True)
class Encoder:
    """Context-independent compression map p(h | s_past), one row per symbol."""

    table: np.ndarray  # shape (n_past, n_latent)

    def __post_init__(self) -> None:
        t = np.asarray(self.table, dtype=np.float64)
        if t.ndim != 2 or t.shape[1] < 1:
            raise InvalidInputError(f"encoder table must be 2-d with >=1 latent, got {t.shape}")
        if np.any(t < 0) or not np.all(np.isfinite(t)):
            raise InvalidInputError("encoder entries must be finite and non-negative")
        if np.any(np.abs(t.sum(axis=1) - 1.0) > SUM_TOL):
            raise InvalidInputError("every encoder row must sum to 1")
        object.__setattr__(self, "table", t)

    @property
    def n_latent(self) -> int:
        return self.table.shape[1]


def constant_encoder(n_past: int, n_latent: int) -> Encoder:
    """All mass on latent 0: carries no information in either direction."""
    t = np.zeros((n_past, n_latent))
    t[:, 0] = 1.0
    return Encoder(table=t)


def identity_encoder(n_past: int) -> Encoder:
    """Lossless deterministic map (n_latent == n_past)."""
    return Encoder(table=np.eye(n_past))


@dataclass(frozen=True)
class InfoPlanePoint:
    """A point on the information plane with its dual objective."""

    i_past: float
    i_future: float
    beta: float
    objective: float
    converged: bool = True

    def __post_init__(self) -> None:
        if self.i_past < -1e-12 or self.i_future < -1e-12:
            raise InvalidInputError("mutual informations must be non-negative")
        if self.i_future > self.i_past + 1e-9:
            raise InvalidInputError(
                f"i_future {self.i_future!r} exceeds i_past {self.i_past!r}: "
                "the latent cannot know more about the future than about the past"
            )


def _masked_xlogy(w: np.ndarray, ratio_num: np.ndarray, ratio_den: np.ndarray) -> float:
    mask = w > 0.0
    return float(np.sum(w[mask] * np.log(ratio_num[mask] / ratio_den[mask])))


def conditional_mutual_information(problem: CibProblem, encoder: Encoder, target: str) -> float:
    """I(h; S_target | X) in nats for the joint induced by encoder o problem.

    Zero-probability cells contribute nothing; the result is non-negative
    up to float rounding.
    """
    if target not in ("past", "future"):
        raise InvalidInputError(f"target must be 'past' or 'future', got {target!r}")
    if encoder.table.shape[0] != problem.n_past:
        raise InvalidInputError(
            f"encoder rows {encoder.table.shape[0]} != past alphabet {problem.n_past}"
        )
    j = problem.joint
    p_x = j.sum(axis=(1, 2))
    total = 0.0
    for x in range(problem.n_context):
        if p_x[x] <= 0.0:
            continue
        p_sf = j[x] / p_x[x]  # (S, F) conditional on this context
        p_s = p_sf.sum(axis=1)
        marginal = p_s @ encoder.table  # p(h | x)
        if target == "past":
            # p(s, h | x) = p(s|x) q(h|s); the ratio collapses to q(h|s)/p(h|x)
            w = p_s[:, None] * encoder.table
            num = np.broadcast_to(encoder.table, w.shape)
            den = np.broadcast_to(marginal[None, :], w.shape)
            total += p_x[x] * _masked_xlogy(w, num, den)
        else:
            p_hf = encoder.table.T @ p_sf  # (H, F) joint with the future
            p_f = p_sf.sum(axis=0)
            w = p_hf
            den = marginal[:, None] * p_f[None, :]
            total += p_x[x] * _masked_xlogy(w, w, den)
    return max(total, 0.0)


def dual_objective(problem: CibProblem, encoder: Encoder, beta: float) -> float:
    """I(h; S_past | X) - beta * I(h; S_future | X)."""
    return conditional_mutual_information(problem, encoder, "past") - beta * (
        conditional_mutual_information(problem, encoder, "future")
    )


def beta_schedule(k: int, total_steps: int, scale: float = 1.0) -> float:
    """Stage weight scale * k / (total_steps - k); diverges at the last stage."""
    if scale <= 0:
        raise InvalidInputError(f"scale must be positive, got {scale!r}")
    if not (0 <= k < total_steps):
        raise InvalidInputError(f"stage k must satisfy 0 <= k < {total_steps}, got {k}")
    return scale * k / (total_steps - k)


def max_decoder_probability(problem: CibProblem, encoder: Encoder) -> float:
    """Largest induced decoder probability max p(s_future | h, x).

    Only (h, x) pairs with p(h | x) above a small support floor are
    considered.  A value strictly below 1 certifies that compression has
    left residual uncertainty about the future everywhere.
    """
    j = problem.joint
    p_x = j.sum(axis=(1, 2))
    best = 0.0
    for x in range(problem.n_context):
        if p_x[x] <= 0.0:
            continue
        p_sf = j[x] / p_x[x]
        marginal = p_sf.sum(axis=1) @ encoder.table
        p_hf = encoder.table.T @ p_sf
        for h in range(encoder.n_latent):
            if marginal[h] > SUPPORT_EPS:
                best = max(best, float(p_hf[h].max() / marginal[h]))
    if best <= 0.0:
        raise InvalidInputError("no latent symbol has support; encoder is degenerate")
    return min(best, 1.0)


# ---------------------------------------------------------------------------
# Alternating minimization
# ---------------------------------------------------------------------------


def _encoder_sweep(
    joint: np.ndarray, table: np.ndarray, beta: float
) -> np.ndarray:
    """One self-consistent sweep: marginals, decoder, then all encoder rows.

    The new row for symbol s is the normalized exponential of

        sum_x p(x|s) log p(h|x)  +  beta * sum_{x,f} p(x,f|s) log p(f|h,x),

    which is the exact minimizer of the free energy in that row given the
    current marginals and decoder.
    """
    n_context, n_past, n_future = joint.shape
    p_x = joint.sum(axis=(1, 2))
    exponent = np.zeros_like(table)
    p_s = joint.sum(axis=(0, 2))  # marginal over contexts
    for x in range(n_context):
        if p_x[x] <= 0.0:
            continue
        p_sf = joint[x] / p_x[x]
        p_s_x = p_sf.sum(axis=1)
        marginal = p_s_x @ table  # p(h | x)
        p_hf = table.T @ p_sf  # (H, F)
        with np.errstate(divide="ignore", invalid="ignore"):
            log_marginal = np.where(marginal > 0.0, np.log(np.maximum(marginal, 1e-300)), LOG_FLOOR)
            decoder = np.where(marginal[:, None] > 0.0, p_hf / np.maximum(marginal[:, None], 1e-300), 0.0)
            log_decoder = np.where(decoder > 0.0, np.log(np.maximum(decoder, 1e-300)), LOG_FLOOR)
        # weights per (s, x): p(x | s); per (s, x, f): p(x, f | s)
        w_x_given_s = np.where(p_s > 0.0, p_x[x] * p_s_x / np.maximum(p_s, 1e-300), 0.0)
        w_xf_given_s = np.where(
            p_s[:, None] > 0.0, p_x[x] * p_sf / np.maximum(p_s[:, None], 1e-300), 0.0
        )
        exponent += w_x_given_s[:, None] * log_marginal[None, :]
        exponent += beta * (w_xf_given_s @ log_decoder.T)
    exponent -= exponent.max(axis=1, keepdims=True)
    new_table = np.exp(exponent)
    return new_table / new_table.sum(axis=1, keepdims=True)


@dataclass(frozen=True)
class CibSolution:
    encoder: Encoder
    point: InfoPlanePoint
    restart_index: int
    iterations: int
    objective_trace: tuple[float, ...]  # winning candidate, one value per sweep


def solve_cib(
    problem: CibProblem,
    beta: float,
    n_latent: int,
    restarts: int = 16,
    tol: float = 1e-10,
    seed: int = 0,
    max_iter: int = 10_000,
) -> CibSolution:
    """Best-of-restarts alternating minimization of the dual objective.

    Candidate 0 is the constant encoder (objective exactly 0, a fixed
    point); candidates 1..restarts start from rows drawn from a symmetric
    Dirichlet.  Each candidate iterates sweeps until the objective change
    drops below ``tol`` or ``max_iter`` sweeps elapse (non-convergence is
    reported via the ``converged`` flag, not an error).  The winner is the
    lowest objective, ties broken toward the lower candidate index.
    """
    if beta < 0:
        raise InvalidInputError(f"beta must be >= 0, got {beta!r}")
    if n_latent < 1:
        raise InvalidInputError(f"need n_latent >= 1, got {n_latent}")
    if restarts < 1:
        raise InvalidInputError(f"need restarts >= 1, got {restarts}")
    if tol <= 0:
        raise InvalidInputError(f"tol must be positive, got {tol!r}")
    if max_iter < 1:
        raise InvalidInputError(f"need max_iter >= 1, got {max_iter}")

    best = None
    for candidate in range(restarts + 1):
        if candidate == 0:
            table = constant_encoder(problem.n_past, n_latent).table
        else:
            rng = rng_for(seed, "cib-restart", candidate)
            table = rng.dirichlet(np.ones(n_latent), size=problem.n_past)
        objective = dual_objective(problem, Encoder(table=table), beta)
        trace = [objective]
        converged = False
        iterations = 0
        for iterations in range(1, max_iter + 1):
            table = _encoder_sweep(problem.joint, table, beta)
            new_objective = dual_objective(problem, Encoder(table=table), beta)
            trace.append(new_objective)
            if abs(new_objective - objective) < tol:
                objective = new_objective
                converged = True
                break
            objective = new_objective
        if best is None or objective < best[0]:
            best = (objective, candidate, Encoder(table=table), converged, iterations, trace)

    objective, candidate, encoder, converged, iterations, trace = best
    point = InfoPlanePoint(
        i_past=conditional_mutual_information(problem, encoder, "past"),
        i_future=conditional_mutual_information(problem, encoder, "future"),
        beta=beta,
        objective=objective,
        converged=converged,
    )
    return CibSolution(
        encoder=encoder,
        point=point,
        restart_index=candidate,
        iterations=iterations,
        objective_trace=tuple(trace),
    )


def brute_force_cib(
    problem: CibProblem, beta: float, n_latent: int
) -> tuple[float, tuple[int, ...]]:
    """Minimum dual objective over every deterministic encoder map.

    Enumerates all ``n_latent ** n_past`` assignments s_past -> h and
    returns (best objective, best map), the first lexicographic map on
    ties.  This is the module's independent oracle; it deliberately knows
    nothing about the iterative solver.
    """
    count = n_latent**problem.n_past
    if count > ENUMERATION_CAP:
        raise EnumerationTooLargeError(f"{count} deterministic encoders exceeds the cap")
    best_obj = math.inf
    best_map: tuple[int, ...] | None = None
    for assignment in itertools.product(range(n_latent), repeat=problem.n_past):
        table = np.zeros((problem.n_past, n_latent))
        table[np.arange(problem.n_past), assignment] = 1.0
        obj = dual_objective(problem, Encoder(table=table), beta)
        if obj < best_obj:
            best_obj = obj
            best_map = assignment
    return best_obj, best_map


# ---------------------------------------------------------------------------
# Frontier
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FrontierResult:
    points: tuple[InfoPlanePoint, ...]  # sorted by i_past
    defects: tuple[str, ...]


def information_frontier(
    problem: CibProblem,
    beta_grid,
    n_latent: int,
    restarts: int = 16,
    seed: int = 0,
    tol: float = 1e-10,
) -> FrontierResult:
    """Solve per beta and audit the resulting (I_past, I_future) envelope.

    Postconditions audited rather than assumed: after sorting by i_past,
    i_future must be non-decreasing within 1e-6 and the envelope concave
    within 1e-6.  Violations are returned as defect strings: they signal
    solver failure and must not be accepted as output.
    """
    grid = [float(b) for b in beta_grid]
    if not grid or any(b < 0 for b in grid):
        raise InvalidInputError("beta grid must be non-empty and non-negative")
    if any(b2 <= b1 for b1, b2 in zip(grid, grid[1:])):
        raise InvalidInputError("beta grid must be strictly ascending")
    points = []
    for idx, beta in enumerate(grid):
        solution = solve_cib(
            problem, beta, n_latent, restarts=restarts, tol=tol,
            seed=derive_seed(seed, "frontier", idx),
        )
        points.append(solution.point)
    points.sort(key=lambda pt: (pt.i_past, pt.i_future))
    defects = []
    for a, b in zip(points, points[1:]):
        if b.i_future < a.i_future - 1e-6:
            defects.append(
                f"i_future drops from {a.i_future:.9f} to {b.i_future:.9f} "
                f"between beta={a.beta} and beta={b.beta}"
            )
    for a, b, c in zip(points, points[1:], points[2:]):
        left = (b.i_future - a.i_future) * (c.i_past - b.i_past)
        right = (c.i_future - b.i_future) * (b.i_past - a.i_past)
        if right > left + 1e-6:
            defects.append(
                f"envelope convex kink at beta={b.beta}: "
                f"slopes increase around i_past={b.i_past:.9f}"
            )
    return FrontierResult(points=tuple(points), defects=tuple(defects))


# ---------------------------------------------------------------------------
# Problem generators and serialization
# ---------------------------------------------------------------------------


def grouped_future_problem() -> CibProblem:
    """Fixed 3x3x1 problem whose future tracks a binary grouping of the past.

    Past symbols 0 and 1 share a future profile, symbol 2 has its own, so a
    two-letter latent alphabet can keep almost all predictive information
    while dropping a third of the past entropy.  Used as the reference
    problem whose brute-force optimum is pinned as a golden value.
    """
    rows = np.array(
        [
            [0.90, 0.05, 0.05],
            [0.90, 0.05, 0.05],
            [0.05, 0.90, 0.05],
        ]
    ) / 3.0
    return CibProblem(joint=rows[None, :, :])


def random_problem(n_past: int, n_future: int, n_context: int, seed: int) -> CibProblem:
    """Dense random joint drawn from a flat Dirichlet over all cells."""
    rng = rng_for(seed, "cib-problem")
    cells = rng.dirichlet(np.ones(n_context * n_past * n_future))
    return CibProblem(joint=cells.reshape(n_context, n_past, n_future))


def random_noisy_problem(
    n_past: int,
    n_future: int,
    n_context: int,
    seed: int,
    max_conditional: float = 0.9,
) -> CibProblem:
    """Random joint whose conditionals p(s_future | s_past, x) are capped.

    Each conditional row is blended toward uniform just enough to keep its
    maximum at or below ``max_conditional``, so no amount of encoding can
    produce a deterministic decoder on such a problem.
    """
    if not (1.0 / n_future < max_conditional < 1.0):
        raise InvalidInputError(f"cap must lie in (1/{n_future}, 1), got {max_conditional!r}")
    rng = rng_for(seed, "cib-noisy-problem")
    p_x = rng.dirichlet(np.ones(n_context))
    joint = np.empty((n_context, n_past, n_future))
    uniform = 1.0 / n_future
    for x in range(n_context):
        p_s = rng.dirichlet(np.ones(n_past))
        for s in range(n_past):
            row = rng.dirichlet(np.ones(n_future))
            top = float(row.max())
            if top > max_conditional:
                blend = (max_conditional - uniform) / (top - uniform)
                row = uniform + blend * (row - uniform)
            joint[x, s] = p_x[x] * p_s[s] * row
    joint /= joint.sum()
    return CibProblem(joint=joint)


def problem_to_rows(problem: CibProblem) -> list[tuple[int, int, int, float]]:
    """Flatten to (x, s_past, s_future, prob) rows for CSV emission."""
    rows = []
    for x in range(problem.n_context):
        for s in range(problem.n_past):
            for f in range(problem.n_future):
                rows.append((x, s, f, float(problem.joint[x, s, f])))
    return rows


def problem_from_rows(rows) -> CibProblem:
    """Rebuild a problem from (x, s_past, s_future, prob) rows."""
    entries = [(int(x), int(s), int(f), float(p)) for x, s, f, p in rows]
    if not entries:
        raise InvalidInputError("no rows")
    nx = max(e[0] for e in entries) + 1
    ns = max(e[1] for e in entries) + 1
    nf = max(e[2] for e in entries) + 1
    joint = np.zeros((nx, ns, nf))
    for x, s, f, p in entries:
        joint[x, s, f] = p
    return CibProblem(joint=joint)

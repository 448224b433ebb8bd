"""Row-vectorized certainty computations for large sampling panels.

Mirrors the scalar operations in ``categorical`` over a matrix of logit
rows.  The experiment harness re-checks random rows against the scalar ops,
so this fast path is continuously audited rather than trusted.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np


class CertaintyPanel(NamedTuple):
    top_prob: np.ndarray
    margin: np.ndarray
    stability_bound: np.ndarray
    reverse_kl: np.ndarray  # D(p || uniform)
    tradeoff_bound: np.ndarray  # even-remainder floor of the reverse divergence
    forward_kl: np.ndarray  # D(uniform || p)
    forward_bound: np.ndarray  # even-remainder floor of the forward divergence


def certainty_panel(logits: np.ndarray) -> CertaintyPanel:
    """All certainty statistics for a (rows, options) matrix of finite logits."""
    l = np.asarray(logits, dtype=np.float64)
    if l.ndim != 2 or l.shape[1] < 2:
        raise ValueError(f"need a (rows, options>=2) matrix, got {l.shape}")
    n_options = l.shape[1]
    z = np.exp(l - l.max(axis=1, keepdims=True))
    p = z / z.sum(axis=1, keepdims=True)
    top = p.max(axis=1)
    part = np.partition(l, n_options - 2, axis=1)
    margin = part[:, -1] - part[:, -2]
    rest = 1.0 - top
    log_b = np.log(n_options)
    log_p = np.log(p)
    return CertaintyPanel(
        top_prob=top,
        margin=margin,
        stability_bound=np.log(top / rest),
        reverse_kl=log_b + np.sum(p * log_p, axis=1),
        tradeoff_bound=log_b + top * np.log(top) + rest * np.log(rest / (n_options - 1)),
        forward_kl=-log_b - log_p.mean(axis=1),
        forward_bound=-log_b
        - (np.log(top) + (n_options - 1) * np.log(rest / (n_options - 1))) / n_options,
    )

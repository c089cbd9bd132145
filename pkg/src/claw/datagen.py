"""Deterministic random data families for tests and experiments.

Two generators: generic piecewise-linear functions with jumps (for solver
and envelope stress suites), and multiscale block data built to satisfy the
concentration condition at a prescribed exponent (level k carries about
``2^((1-alpha)k)`` variation on measure ``2^(-alpha k)``), used by the
decay-rate experiments.
"""

from __future__ import annotations

import numpy as np

from .pwl import PLFunction

__all__ = ["random_pl", "random_palpha_datum"]


def random_pl(
    rng: np.random.Generator,
    n_nodes: int = 10,
    span: tuple = (-1.0, 1.0),
    value_scale: float = 1.0,
    jump_fraction: float = 0.5,
) -> PLFunction:
    """Compactly supported piecewise-linear function with random jumps."""
    lo, hi = span
    xs = np.sort(rng.uniform(lo, hi, n_nodes))
    xs += np.linspace(0.0, 1e-9 * (hi - lo), n_nodes)  # break exact ties
    left = rng.uniform(-value_scale, value_scale, n_nodes)
    right = rng.uniform(-value_scale, value_scale, n_nodes)
    cont = rng.random(n_nodes) >= jump_fraction
    right[cont] = left[cont]
    left[0] = 0.0
    right[-1] = 0.0
    return PLFunction(xs, left, right)


def random_palpha_datum(
    alpha: float,
    rng: np.random.Generator,
    k_max: int = 12,
    mass0: float = 0.04,
    signed: bool = False,
) -> PLFunction:
    """Random multiscale block datum satisfying the concentration condition.

    Level ``k`` holds ``n_k ~ 2^((1-alpha)k)`` triangular blocks of width
    ``ell_k`` with height ``2^k ell_k``, sized so the level's support
    measure is about ``mass0 * 2^(-alpha k)``; blocks are laid out left to
    right with randomized gaps and order inside [0, 1].
    """
    if not (0.0 < alpha < 1.0):
        raise ValueError("alpha must lie in (0, 1)")
    blocks = []  # (ell, h)
    for k in range(1, k_max + 1):
        n_k = max(1, int(round(2.0 ** ((1.0 - alpha) * k) * rng.uniform(0.7, 1.3))))
        m_k = mass0 * 2.0 ** (-alpha * k) * rng.uniform(0.7, 1.3)
        ell = m_k / n_k
        h = 2.0**k * ell
        if h > 1.0:  # keep data bounded by 1
            h = 1.0
            ell = h / 2.0**k
        for _ in range(n_k):
            blocks.append((ell, h))
    order = rng.permutation(len(blocks))
    total_width = sum(b[0] for b in blocks)
    slack = max(1.0 - total_width, 0.1)
    gaps = rng.uniform(0.2, 1.0, len(blocks) + 1)
    gaps = gaps / gaps.sum() * slack
    xs = []
    vals = []
    cursor = 0.0
    for idx, gi in zip(order, gaps[:-1]):
        ell, h = blocks[idx]
        cursor += gi
        sgn = -1.0 if (signed and rng.random() < 0.5) else 1.0
        xs += [cursor, cursor + 0.5 * ell, cursor + ell]
        vals += [0.0, sgn * h, 0.0]
        cursor += ell
    return PLFunction.from_points(np.array(xs), np.array(vals))

"""Concentration certificates: how much variation sits on how small a set.

For a smoothing scale ``lam`` in (0, 1] and an exponent ``alpha``, the
witness machinery looks for an open set V (the *bad set*) and a modified
function equal to the input off V (affine chords across V) such that

    TV{modified} <= C * lam^(alpha-1),     meas(V) <= C * lam^alpha.

The smallest such C over all choices of V is a metric-type distance to zero
at scale ``lam``; its supremum over dyadic scales is the package's
``palpha`` quantity.  The true infimum is a combinatorial optimization, so
the implementation searches one tractable family: maximal *variation cells*
(intervals delimited by zeros of the input) ranked by variation density,
added greedily, with the reported cost certified by direct re-measurement
of the bridged function.  Every reported number is therefore an **upper
bound** of the underlying infimum; reports say so explicitly.

Two diagnostic series accompany the certificates: the L1 distance
``t^-alpha ||S_t u - u||`` and the scaled variation
``t^(1-alpha) TV{S_t u}`` of the exact Burgers evolution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lax import solve_burgers
from .pwl import Interval, PLFunction, merge_intervals, total_measure

__all__ = [
    "PAlphaWitness",
    "PAlphaEstimate",
    "variation_cells",
    "dlambda_upper",
    "palpha_norm_upper",
    "check_Palpha",
    "dalpha_membership",
    "dalpha_tilde_membership",
    "palpha_upper_from_levels",
]


@dataclass(frozen=True)
class PAlphaWitness:
    """One scale's certificate: bad set, bridged function and its cost."""

    lam: float
    alpha: float
    bad_set: tuple
    modified: PLFunction
    cost: float

    def verify(self, u: PLFunction, tol: float = 1e-9) -> bool:
        """Re-check feasibility independently of the search that built it."""
        lam, alpha = self.lam, self.alpha
        scale = max(1.0, u.total_variation())
        if self.modified.total_variation() > self.cost * lam ** (alpha - 1.0) + tol * scale:
            return False
        if total_measure(self.bad_set) > self.cost * lam**alpha + tol:
            return False
        # equality off the bad set, both one-sided limits
        probes = np.union1d(u.xs, self.modified.xs)
        bad = merge_intervals(self.bad_set)
        if bad:
            los = np.array([iv.lo for iv in bad])
            his = np.array([iv.hi for iv in bad])
            idx = np.searchsorted(los, probes, side="right") - 1
            outside = ~((idx >= 0) & (probes <= his[np.clip(idx, 0, None)]))
        else:
            outside = np.ones(len(probes), dtype=bool)
        vtol = 1e-12 * max(1.0, u.linf_norm())
        for side in ("left", "right"):
            du = u.eval_many(probes, side)
            dm = self.modified.eval_many(probes, side)
            if np.any(np.abs(du - dm)[outside] > vtol):
                return False
        return True


@dataclass(frozen=True)
class PAlphaEstimate:
    """Dyadic family of witnesses and the resulting certified upper bound.

    ``norm_upper`` is the max witness cost on the dyadic grid; multiplying
    by ``continuum_factor = 2^max(alpha, 1-alpha)`` extends the certificate
    to every scale in (0, 1] (a scale in [2^-q-1, 2^-q] reuses the 2^-q
    witness at that cost inflation).
    """

    alpha: float
    witnesses: tuple
    norm_upper: float

    @property
    def continuum_factor(self) -> float:
        return 2.0 ** max(self.alpha, 1.0 - self.alpha)

    @property
    def certified_upper(self) -> float:
        return self.norm_upper * self.continuum_factor

    def witness_at(self, q: int) -> PAlphaWitness:
        return self.witnesses[q]

    def to_report(self) -> dict:
        return {
            "alpha": self.alpha,
            "kind": "upper bound over the greedy variation-cell family",
            "norm_upper": self.norm_upper,
            "continuum_factor": self.continuum_factor,
            "certified_upper": self.certified_upper,
            "scales": [
                {
                    "lambda": w.lam,
                    "cost": w.cost,
                    "bad_set_measure": total_measure(w.bad_set),
                    "tv_modified": w.modified.total_variation(),
                }
                for w in self.witnesses
            ],
        }


# ----------------------------------------------------------------------
# variation cells
# ----------------------------------------------------------------------


def variation_cells(u: PLFunction):
    """Intervals delimited by zeros of ``u`` with their removable variation.

    Returns ``[(Interval, weight), ...]`` where ``weight`` is the total
    variation erased by bridging exactly that cell: interior rises and
    jumps, plus the jumps into/out of the zero level at its ends.  Cell
    boundaries sit at nodes where a one-sided limit vanishes and at interior
    zero crossings, so bridging a full cell leaves a zero chord.
    """
    if len(u.xs) == 0:
        return []
    lo, hi, a, b = u._segments()
    cells = []
    cur_lo = None
    cur_w = 0.0

    def close(x):
        nonlocal cur_lo, cur_w
        if cur_lo is not None and x > cur_lo:
            cells.append((Interval(cur_lo, x), cur_w))
        cur_lo, cur_w = None, 0.0

    n = len(u.xs)
    for i in range(n):
        l_i = float(u.left[i])
        r_i = float(u.right[i])
        x_i = float(u.xs[i])
        w_i = abs(r_i - l_i)
        if l_i != 0.0 and r_i != 0.0:
            if cur_lo is None:  # isolated nonzero point pattern; open here
                cur_lo = x_i
            cur_w += w_i
        elif l_i != 0.0 and r_i == 0.0:
            cur_w += w_i  # closing jump belongs to the cell it ends
            close(x_i)
        elif l_i == 0.0 and r_i != 0.0:
            close(x_i)
            cur_lo = x_i
            cur_w = w_i  # opening jump belongs to the cell it starts
        else:
            close(x_i)
        if i == n - 1:
            break
        va, vb = float(a[i]), float(b[i])
        if va == 0.0 and vb == 0.0:
            close(x_i)
            continue
        if cur_lo is None:
            cur_lo = x_i
        if va * vb < 0.0:
            xz = x_i - va * (float(hi[i]) - x_i) / (vb - va)
            cur_w += abs(va)
            close(xz)
            cur_lo = xz
            cur_w = abs(vb)
        else:
            cur_w += abs(vb - va)
    close(float(u.xs[-1]))
    return cells


def dlambda_upper(
    u: PLFunction, lam: float, alpha: float, measure_slack: float = 0.0
) -> PAlphaWitness:
    """Best witness in the greedy family at one scale.

    Cells are sorted by variation density; prefixes of that order are the
    candidate bad sets.  Adjacent selected cells coalesce and their chord is
    re-anchored on the original function, so the running cost is exact.
    The minimum over prefixes (including the empty set) is returned, then
    re-certified on the actually bridged function.

    With ``measure_slack > 0`` the smallest-measure prefix whose cost stays
    within ``(1 + measure_slack)`` of the optimum is preferred; witness
    families feeding the multiscale decomposition use this so their bad
    sets vanish at fine scales and the reconstruction tail closes.
    """
    if not (0.0 < lam <= 1.0):
        raise ValueError("lambda must lie in (0, 1]")
    if not (0.0 < alpha < 1.0):
        raise ValueError("alpha must lie in (0, 1)")
    tv_total = u.total_variation()
    if len(u.xs) == 0:
        return PAlphaWitness(lam, alpha, (), PLFunction.zero(), 0.0)
    cells = variation_cells(u)
    order = sorted(
        range(len(cells)), key=lambda i: cells[i][1] / cells[i][0].length, reverse=True
    )
    pow_tv = lam ** (1.0 - alpha)
    pow_ms = lam ** (-alpha)
    best_cost = tv_total * pow_tv
    best_k = 0
    # chord anchors only ever sit at cell endpoints: evaluate them once
    ends = sorted({iv.lo for iv, _ in cells} | {iv.hi for iv, _ in cells})
    ends_arr = np.array(ends)
    anchor_l = dict(zip(ends, u.eval_many(ends_arr, "left").tolist()))
    anchor_r = dict(zip(ends, u.eval_many(ends_arr, "right").tolist()))
    # incremental merge of selected cells: components keyed by endpoints
    by_lo: dict[float, list] = {}
    by_hi: dict[float, list] = {}
    atoms = 0.0
    chords = 0.0
    meas = 0.0
    prefix_costs = [best_cost]
    for k, ci in enumerate(order, start=1):
        iv, w = cells[ci]
        atoms += w
        meas += iv.length
        A, B = iv.lo, iv.hi
        left_nb = by_hi.pop(A, None)
        right_nb = by_lo.pop(B, None)
        if left_nb is not None:
            chords -= left_nb[2]
            A = left_nb[0]
            by_lo.pop(left_nb[0], None)
        if right_nb is not None:
            chords -= right_nb[2]
            B = right_nb[1]
            by_hi.pop(right_nb[1], None)
        chord = abs(anchor_r[B] - anchor_l[A])
        chords += chord
        comp = [A, B, chord]
        by_lo[A] = comp
        by_hi[B] = comp
        tv_out = tv_total - atoms + chords
        cost = max(tv_out * pow_tv, meas * pow_ms)
        prefix_costs.append(cost)
        if cost < best_cost - 1e-15 * (1.0 + tv_total):
            best_cost = cost
            best_k = k
    if measure_slack > 0.0:
        budget = best_cost * (1.0 + measure_slack)
        for k, cost in enumerate(prefix_costs):
            if cost <= budget:
                best_k = k  # earliest prefix = smallest measure
                break
    chosen = [cells[ci][0] for ci in order[:best_k]]
    bad = tuple(merge_intervals(chosen))
    modified = u.bridge(bad) if bad else u
    # certify on the actual bridged function
    cost = max(
        modified.total_variation() * pow_tv,
        total_measure(bad) * pow_ms,
    )
    return PAlphaWitness(lam, alpha, bad, modified, float(cost))


def palpha_norm_upper(
    u: PLFunction, alpha: float, Q: int, measure_slack: float = 0.0
) -> PAlphaEstimate:
    """Witnesses on the dyadic grid ``lam = 2^-q``, q = 0..Q."""
    if Q < 0:
        raise ValueError("Q must be nonnegative")
    wits = tuple(
        dlambda_upper(u, 2.0**-q, alpha, measure_slack=measure_slack)
        for q in range(Q + 1)
    )
    return PAlphaEstimate(alpha, wits, max((w.cost for w in wits), default=0.0))


def check_Palpha(u: PLFunction, alpha: float, C: float, Q: int = 16) -> bool:
    """Does every dyadic scale admit a witness of cost at most C in the
    implemented family?"""
    if C <= 0.0:
        raise ValueError("C must be positive")
    for q in range(Q + 1):
        w = dlambda_upper(u, 2.0**-q, alpha)
        if w.cost > C * (1.0 + 1e-12):
            return False
    return True


# ----------------------------------------------------------------------
# semigroup diagnostics
# ----------------------------------------------------------------------


def dalpha_membership(u: PLFunction, alpha: float, t_grid):
    """Series ``t^-alpha ||S_t u - u||_L1`` on the grid; returns
    ``(sup, [(t, value)])``."""
    t_grid = list(t_grid)
    if any(not (0.0 < t <= 1.0) for t in t_grid):
        raise ValueError("times must lie in (0, 1]")
    series = []
    for t in t_grid:
        d = (solve_burgers(u, t).solution - u).l1_norm()
        series.append((float(t), float(t**-alpha * d)))
    sup = max((v for _, v in series), default=0.0)
    return sup, series


def dalpha_tilde_membership(u: PLFunction, alpha: float, t_grid):
    """Series ``t^(1-alpha) TV{S_t u}`` on the grid; returns
    ``(sup, [(t, value)])``."""
    t_grid = list(t_grid)
    if any(not (0.0 < t <= 1.0) for t in t_grid):
        raise ValueError("times must lie in (0, 1]")
    series = []
    for t in t_grid:
        tv = solve_burgers(u, t).solution.total_variation()
        series.append((float(t), float(t ** (1.0 - alpha) * tv)))
    sup = max((v for _, v in series), default=0.0)
    return sup, series


# ----------------------------------------------------------------------
# converse direction: a multiscale decomposition certifies the metric
# ----------------------------------------------------------------------


def palpha_upper_from_levels(levels, alpha: float) -> PAlphaEstimate:
    """Certificate built from rate-limited levels summing to the input.

    At scale ``2^-q`` the witness keeps the partial sum of the first q+1
    levels and deletes the rest on the union of their supports.
    """
    levels = list(levels)
    Q = len(levels) - 1
    wits = []
    partial = PLFunction.zero()
    tails: list[PLFunction] = [PLFunction.zero()] * (Q + 1)
    acc = PLFunction.zero()
    for k in range(Q, -1, -1):
        tails[k] = acc = acc + levels[k]
    for q in range(Q + 1):
        partial = partial + levels[q]
        tail = tails[q + 1] if q + 1 <= Q else PLFunction.zero()
        bad = tuple(merge_intervals(tail.nonzero_components()))
        lam = 2.0**-q
        cost = max(
            partial.total_variation() * lam ** (1.0 - alpha),
            total_measure(bad) * lam**-alpha,
        )
        wits.append(PAlphaWitness(lam, alpha, bad, partial, float(cost)))
    return PAlphaEstimate(alpha, tuple(wits), max(w.cost for w in wits))

"""Exact algebra of compactly supported piecewise-linear functions with jumps.

A :class:`PLFunction` is described by a strictly increasing list of node
abscissas; at each node it carries a left limit and a right limit, it is
affine between consecutive nodes, and it vanishes identically outside the
node range.  Jumps are first class: entropy solutions of conservation laws
carry shocks, so a continuous-only representation would not be able to host
them.  All values are double precision floats; "exact" means closed-form
arithmetic on the node data, with stated tolerances where float roundoff
enters.

Every object is immutable after construction and every operation is a pure
function, so values can be shared freely across threads.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "EPS",
    "Interval",
    "PLFunction",
    "PWQuadratic",
    "merge_intervals",
    "total_measure",
]

#: Relative tolerance used for node merging and redundancy detection.
EPS = 1e-12


@dataclass(frozen=True, order=True)
class Interval:
    """Closed-open real interval ``[lo, hi]`` with ``lo <= hi``."""

    lo: float
    hi: float

    def __post_init__(self):
        object.__setattr__(self, "lo", float(self.lo))
        object.__setattr__(self, "hi", float(self.hi))
        if not (self.lo <= self.hi):
            raise ValueError(f"empty interval: ({self.lo}, {self.hi})")

    @property
    def length(self) -> float:
        return self.hi - self.lo

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    def intersects(self, other: "Interval") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi


def merge_intervals(intervals) -> list[Interval]:
    """Union of intervals as a sorted list of disjoint intervals."""
    ivs = sorted(intervals, key=lambda iv: (iv.lo, iv.hi))
    out: list[Interval] = []
    for iv in ivs:
        if out and iv.lo <= out[-1].hi:
            if iv.hi > out[-1].hi:
                out[-1] = Interval(out[-1].lo, iv.hi)
        else:
            out.append(Interval(iv.lo, iv.hi))
    return out


def total_measure(intervals) -> float:
    return float(sum(iv.length for iv in merge_intervals(intervals)))


def _as_float_array(a) -> np.ndarray:
    arr = np.asarray(a, dtype=float)
    if arr.ndim != 1:
        raise ValueError("expected a 1-d array")
    return arr


class PLFunction:
    """Compactly supported piecewise-linear function with jump nodes.

    Parameters
    ----------
    xs : array_like
        Strictly increasing node abscissas.
    left, right : array_like
        One-sided limits at each node.  The left limit of the first node and
        the right limit of the last node must be 0 (the function vanishes on
        both tails).
    """

    __slots__ = ("xs", "left", "right")

    def __init__(self, xs, left, right, _trusted: bool = False):
        xs = _as_float_array(xs)
        left = _as_float_array(left)
        right = _as_float_array(right)
        if not (len(xs) == len(left) == len(right)):
            raise ValueError("xs/left/right length mismatch")
        if not _trusted and len(xs) > 0:
            if not np.all(np.isfinite(xs)):
                raise ValueError("node abscissas must be finite")
            if not np.all(np.isfinite(left)) or not np.all(np.isfinite(right)):
                raise ValueError("node limits must be finite")
            if np.any(np.diff(xs) <= 0.0):
                raise ValueError("node abscissas must be strictly increasing")
            if left[0] != 0.0 or right[-1] != 0.0:
                raise ValueError(
                    "compact support requires left[0] == 0 and right[-1] == 0"
                )
        xs.setflags(write=False)
        left.setflags(write=False)
        right.setflags(write=False)
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)

    def __setattr__(self, *a):  # immutability
        raise AttributeError("PLFunction is immutable")

    # ------------------------------------------------------------------
    # constructors
    # ------------------------------------------------------------------
    @classmethod
    def zero(cls) -> "PLFunction":
        return cls([], [], [], _trusted=True)

    @classmethod
    def from_points(cls, xs, values) -> "PLFunction":
        """Continuous interpolant through ``(xs, values)``, zero outside.

        The first and last value must be 0 for the interpolant to be
        continuous with the zero tails; otherwise boundary jumps are created.
        """
        xs = _as_float_array(xs)
        values = _as_float_array(values)
        left = values.copy()
        right = values.copy()
        if len(xs):
            left[0] = 0.0
            right[-1] = 0.0
        return cls(xs, left, right)

    @classmethod
    def from_nodes(cls, nodes) -> "PLFunction":
        """Build from an iterable of ``(x, left, right)`` triples."""
        if not nodes:
            return cls.zero()
        xs, left, right = zip(*nodes)
        return cls(xs, left, right)

    @classmethod
    def box(cls, lo: float, hi: float, height: float = 1.0) -> "PLFunction":
        return cls([lo, hi], [0.0, height], [height, 0.0])

    # ------------------------------------------------------------------
    # basic queries
    # ------------------------------------------------------------------
    @property
    def n_nodes(self) -> int:
        return len(self.xs)

    def is_zero(self) -> bool:
        return len(self.xs) == 0 or (
            np.all(self.left == 0.0)
            and np.all(self.right == 0.0)
            and self.support_measure() == 0.0
        )

    @property
    def support(self) -> Interval | None:
        if len(self.xs) == 0:
            return None
        return Interval(float(self.xs[0]), float(self.xs[-1]))

    @property
    def width(self) -> float:
        return float(self.xs[-1] - self.xs[0]) if len(self.xs) else 0.0

    def _segments(self):
        """Arrays ``(lo, hi, vlo, vhi)`` for the inner affine pieces."""
        return self.xs[:-1], self.xs[1:], self.right[:-1], self.left[1:]

    # ------------------------------------------------------------------
    # evaluation
    # ------------------------------------------------------------------
    def eval_many(self, x, side: str = "right") -> np.ndarray:
        """One-sided values at the points ``x`` (vectorized).

        ``side`` selects which limit is reported when a query point hits a
        node exactly; between nodes and outside the support both limits
        coincide.
        """
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=float)
        if len(self.xs) == 0:
            return out
        xs = self.xs
        # locate: idx = number of nodes strictly left of x
        idx = np.searchsorted(xs, x, side="left")
        exact = (idx < len(xs)) & (xs[np.minimum(idx, len(xs) - 1)] == x)
        inside = (idx > 0) & (idx < len(xs)) & ~exact
        if np.any(inside):
            i = idx[inside] - 1
            lo = xs[i]
            hi = xs[i + 1]
            vlo = self.right[i]
            vhi = self.left[i + 1]
            tloc = (x[inside] - lo) / (hi - lo)
            out[inside] = vlo + (vhi - vlo) * tloc
        if np.any(exact):
            j = idx[exact]
            out[exact] = self.left[j] if side == "left" else self.right[j]
        return out

    def eval(self, x: float, side: str = "right") -> float:
        return float(self.eval_many(np.array([x]), side=side)[0])

    def __call__(self, x, side: str = "right"):
        if np.isscalar(x):
            return self.eval(float(x), side=side)
        return self.eval_many(x, side=side)

    # ------------------------------------------------------------------
    # scalar functionals
    # ------------------------------------------------------------------
    def total_variation(self, on: Interval | None = None) -> float:
        """Total variation: node jumps plus segment rises.

        With ``on`` given, jumps at nodes in the closed window are counted
        and segment contributions are clipped to the window.
        """
        if len(self.xs) == 0:
            return 0.0
        jumps = np.abs(self.right - self.left)
        lo, hi, vlo, vhi = self._segments()
        rise = np.abs(vhi - vlo)
        if on is None:
            return float(jumps.sum() + rise.sum())
        in_win = (self.xs >= on.lo) & (self.xs <= on.hi)
        olo = np.maximum(lo, on.lo)
        ohi = np.minimum(hi, on.hi)
        frac = np.clip((ohi - olo) / (hi - lo), 0.0, 1.0)
        return float(jumps[in_win].sum() + (rise * frac).sum())

    def positive_variation(self) -> float:
        """Supremum of summed positive increments over partitions."""
        if len(self.xs) == 0:
            return 0.0
        jumps = self.right - self.left
        lo, hi, vlo, vhi = self._segments()
        rise = vhi - vlo
        return float(np.clip(jumps, 0.0, None).sum() + np.clip(rise, 0.0, None).sum())

    def negative_variation(self) -> float:
        return (-self).positive_variation()

    def l1_norm(self) -> float:
        if len(self.xs) == 0:
            return 0.0
        lo, hi, a, b = self._segments()
        length = hi - lo
        same = a * b >= 0.0
        out = np.empty(len(length))
        out[same] = 0.5 * np.abs(a + b)[same] * length[same]
        mixed = ~same
        # affine piece changes sign: split the trapezoid at the zero crossing
        out[mixed] = (
            0.5 * (a[mixed] ** 2 + b[mixed] ** 2) / np.abs(b - a)[mixed] * length[mixed]
        )
        return float(out.sum())

    def integral(self) -> float:
        if len(self.xs) == 0:
            return 0.0
        lo, hi, a, b = self._segments()
        return float((0.5 * (a + b) * (hi - lo)).sum())

    def lp_norm(self, p: float) -> float:
        """Exact L^p norm, p >= 1."""
        if len(self.xs) == 0:
            return 0.0
        lo, hi, a, b = self._segments()
        total = 0.0
        for l, h, va, vb in zip(lo, hi, a, b):
            length = h - l
            if va == vb:
                total += abs(va) ** p * length
                continue
            s = (vb - va) / length
            # antiderivative of |v|^p dv is |v|^(p+1) sign(v) / (p+1)
            big = abs(vb) ** (p + 1) * math.copysign(1.0, vb)
            small = abs(va) ** (p + 1) * math.copysign(1.0, va)
            total += (big - small) / (s * (p + 1))
        return float(total ** (1.0 / p))

    def linf_norm(self) -> float:
        if len(self.xs) == 0:
            return 0.0
        return float(max(np.abs(self.left).max(), np.abs(self.right).max()))

    def support_measure(self) -> float:
        """Lebesgue measure of ``{f != 0}``."""
        if len(self.xs) == 0:
            return 0.0
        lo, hi, a, b = self._segments()
        live = ~((a == 0.0) & (b == 0.0))
        return float(((hi - lo) * live).sum())

    def nonzero_components(self) -> list[Interval]:
        """Maximal open intervals of ``{f != 0}``, left to right.

        A segment crossing zero at an interior point splits there; adjacent
        pieces merge across a node unless both one-sided limits vanish.
        """
        if len(self.xs) == 0:
            return []
        comps: list[list[float]] = []
        lo, hi, a, b = self._segments()

        def push(x0: float, x1: float, glue_left: bool):
            if comps and glue_left and comps[-1][1] == x0:
                comps[-1][1] = x1
            else:
                comps.append([x0, x1])

        for i in range(len(lo)):
            va, vb = a[i], b[i]
            if va == 0.0 and vb == 0.0:
                continue
            glue = not (self.left[i] == 0.0 and self.right[i] == 0.0)
            if va * vb < 0.0:
                xz = lo[i] - va * (hi[i] - lo[i]) / (vb - va)
                push(lo[i], xz, glue)
                push(xz, hi[i], False)
            else:
                push(lo[i], hi[i], glue)
        return [Interval(c[0], c[1]) for c in comps]

    # ------------------------------------------------------------------
    # algebra
    # ------------------------------------------------------------------
    def _union_nodes(self, other: "PLFunction") -> np.ndarray:
        # exact union: merging nearby abscissas here would move one
        # operand's jump across the other's node and corrupt the sum
        return np.union1d(self.xs, other.xs)

    def __add__(self, other: "PLFunction") -> "PLFunction":
        if not isinstance(other, PLFunction):
            return NotImplemented
        if len(self.xs) == 0:
            return other
        if len(other.xs) == 0:
            return self
        xs = self._union_nodes(other)
        left = self.eval_many(xs, "left") + other.eval_many(xs, "left")
        right = self.eval_many(xs, "right") + other.eval_many(xs, "right")
        left[0] = 0.0
        right[-1] = 0.0
        return PLFunction(xs, left, right, _trusted=True).normalize(drop_tol=0.0)

    def __sub__(self, other: "PLFunction") -> "PLFunction":
        return self + (-other)

    def __neg__(self) -> "PLFunction":
        return PLFunction(self.xs, -self.left, -self.right, _trusted=True)

    def scale_values(self, c: float) -> "PLFunction":
        if c == 0.0 or len(self.xs) == 0:
            return PLFunction.zero()
        return PLFunction(self.xs, c * self.left, c * self.right, _trusted=True)

    def __mul__(self, c: float) -> "PLFunction":
        return self.scale_values(float(c))

    __rmul__ = __mul__

    def shift(self, dx: float) -> "PLFunction":
        return PLFunction(self.xs + dx, self.left, self.right, _trusted=True)

    def rescale(self, mu: float, alpha: float) -> "PLFunction":
        """Metric-invariant rescaling ``x -> mu^((1-alpha)/alpha) f(mu x)``."""
        if mu <= 0.0:
            raise ValueError("mu must be positive")
        c = mu ** ((1.0 - alpha) / alpha)
        if len(self.xs) == 0:
            return self
        return PLFunction(self.xs / mu, c * self.left, c * self.right, _trusted=True)

    def reflect(self) -> "PLFunction":
        """The function ``x -> f(-x)``."""
        if len(self.xs) == 0:
            return self
        return PLFunction(
            -self.xs[::-1], self.right[::-1], self.left[::-1], _trusted=True
        )

    def clip_positive(self) -> "PLFunction":
        """Pointwise ``max(f, 0)``, with nodes added at zero crossings."""
        return self._clip(sign=1.0)

    def clip_negative(self) -> "PLFunction":
        """Pointwise ``max(-f, 0)`` (the negative part, returned >= 0)."""
        return (-self)._clip(sign=1.0)

    def _clip(self, sign: float) -> "PLFunction":
        if len(self.xs) == 0:
            return self
        lo, hi, a, b = self._segments()
        extra = []
        mask = a * b < 0.0
        for i in np.nonzero(mask)[0]:
            xz = lo[i] - a[i] * (hi[i] - lo[i]) / (b[i] - a[i])
            extra.append(xz)
        xs = np.union1d(self.xs, np.array(extra))
        left = np.maximum(self.eval_many(xs, "left") * sign, 0.0)
        right = np.maximum(self.eval_many(xs, "right") * sign, 0.0)
        left[0] = 0.0
        right[-1] = 0.0
        return PLFunction(xs, left, right, _trusted=True).normalize(drop_tol=0.0)

    def snap_zeros(self, tol: float) -> "PLFunction":
        """Set limits of magnitude at most ``tol`` to exact zeros."""
        if len(self.xs) == 0 or tol <= 0.0:
            return self
        left = np.where(np.abs(self.left) <= tol, 0.0, self.left)
        right = np.where(np.abs(self.right) <= tol, 0.0, self.right)
        left[0] = 0.0
        right[-1] = 0.0
        return PLFunction(self.xs, left, right, _trusted=True).normalize(drop_tol=0.0)

    def restrict(self, iv: Interval) -> "PLFunction":
        """Restriction to ``[iv.lo, iv.hi]``, zero outside."""
        if len(self.xs) == 0 or iv.length <= 0:
            return PLFunction.zero()
        pts = self.xs[(self.xs > iv.lo) & (self.xs < iv.hi)]
        xs = np.unique(np.concatenate([[iv.lo, iv.hi], pts]))
        left = self.eval_many(xs, "left")
        right = self.eval_many(xs, "right")
        left[0] = 0.0
        right[-1] = 0.0
        return PLFunction(xs, left, right, _trusted=True).normalize(drop_tol=0.0)

    def bridge(self, intervals) -> "PLFunction":
        """Replace the function by affine chords across the given intervals.

        On each interval ``[a, b]`` the output is the straight line joining
        ``(a, f(a-))`` to ``(b, f(b+))``; elsewhere it equals ``f``.  Used to
        erase variation concentrated on a small bad set while keeping the
        function unchanged outside it.
        """
        ivs = [iv for iv in merge_intervals(intervals) if iv.length > 0.0]
        if not ivs or len(self.xs) == 0:
            return self
        los = np.array([iv.lo for iv in ivs])
        his = np.array([iv.hi for iv in ivs])
        idx = np.searchsorted(los, self.xs, side="right") - 1
        covered = (idx >= 0) & (self.xs <= his[np.clip(idx, 0, None)])
        xs = list(self.xs[~covered])
        left = list(self.left[~covered])
        right = list(self.right[~covered])
        va = self.eval_many(los, "left")
        vb = self.eval_many(his, "right")
        for a, b, lo_, hi_ in zip(va, vb, los, his):
            xs += [lo_, hi_]
            left += [a, b]
            right += [a, b]
        order = np.argsort(xs)
        xs = np.asarray(xs, dtype=float)[order]
        left = np.asarray(left, dtype=float)[order]
        right = np.asarray(right, dtype=float)[order]
        left[0] = 0.0
        right[-1] = 0.0
        return PLFunction(xs, left, right, _trusted=True).normalize(drop_tol=0.0)

    # ------------------------------------------------------------------
    # normalization
    # ------------------------------------------------------------------
    def normalize(self, drop_tol: float | None = None) -> "PLFunction":
        """Canonical form: merge near-coincident nodes, drop redundant ones.

        A node is redundant when its limits agree and it is collinear with
        its neighbours.  ``drop_tol`` overrides the default merge tolerance
        of ``EPS * support width`` (pass 0 to merge only exact duplicates).
        Idempotent and eval-preserving.
        """
        if len(self.xs) == 0:
            return self
        xs = self.xs.copy()
        left = self.left.copy()
        right = self.right.copy()
        w = max(self.width, 1.0)
        tol = EPS * w if drop_tol is None else drop_tol
        if len(xs) > 1:
            keep = np.concatenate([[True], np.diff(xs) > tol])
            if not keep.all():
                # merge a run of near nodes: keep first x, left of first,
                # right of last
                idx = np.nonzero(keep)[0]
                new_x = xs[keep]
                new_l = left[keep]
                new_r = np.empty(len(idx))
                stops = np.concatenate([idx[1:], [len(xs)]])
                for j, (s, e) in enumerate(zip(idx, stops)):
                    new_r[j] = right[e - 1]
                xs, left, right = new_x, new_l, new_r
        # drop interior nodes with equal limits, collinear with neighbours
        n = len(xs)
        if n > 2:
            vscale = max(np.abs(left).max(), np.abs(right).max(), 1e-300)
            cut = 1e-12 * vscale
            xs_l = xs.tolist()
            l_l = left.tolist()
            r_l = right.tolist()
            keep = [True] * n
            j = 0  # last kept node
            for i in range(1, n - 1):
                if l_l[i] != r_l[i]:
                    j = i
                    continue
                s_in = (l_l[i] - r_l[j]) / (xs_l[i] - xs_l[j])
                s_out = (l_l[i + 1] - r_l[i]) / (xs_l[i + 1] - xs_l[i])
                if abs(s_in - s_out) * (xs_l[i + 1] - xs_l[j]) <= cut:
                    keep[i] = False
                else:
                    j = i
            mask = np.array(keep)
            xs, left, right = xs[mask], left[mask], right[mask]
        # trim identically-zero boundary nodes
        while len(xs) > 1 and left[0] == 0.0 and right[0] == 0.0 and left[1] == 0.0:
            xs, left, right = xs[1:], left[1:], right[1:]
        while (
            len(xs) > 1
            and left[-1] == 0.0
            and right[-1] == 0.0
            and right[-2] == 0.0
        ):
            xs, left, right = xs[:-1], left[:-1], right[:-1]
        if len(xs) == 1 and left[0] == 0.0 and right[0] == 0.0:
            return PLFunction.zero()
        left[0] = 0.0
        right[-1] = 0.0
        return PLFunction(xs, left, right, _trusted=True)

    # ------------------------------------------------------------------
    # serialization
    # ------------------------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "nodes": [
                {"x": float(x), "left": float(l), "right": float(r)}
                for x, l, r in zip(self.xs, self.left, self.right)
            ]
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PLFunction":
        nodes = d["nodes"]
        return cls(
            [n["x"] for n in nodes],
            [n["left"] for n in nodes],
            [n["right"] for n in nodes],
        )

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_json(cls, s: str) -> "PLFunction":
        return cls.from_dict(json.loads(s))

    def __repr__(self) -> str:
        if len(self.xs) == 0:
            return "PLFunction.zero()"
        return (
            f"PLFunction({self.n_nodes} nodes on "
            f"[{self.xs[0]:.6g}, {self.xs[-1]:.6g}], "
            f"tv={self.total_variation():.6g})"
        )

    def isclose(self, other: "PLFunction", tol: float = 1e-9) -> bool:
        """Pointwise closeness of both one-sided limits on the node union."""
        xs = np.union1d(self.xs, other.xs)
        for side in ("left", "right"):
            if not np.allclose(
                self.eval_many(xs, side), other.eval_many(xs, side), atol=tol, rtol=0
            ):
                return False
        return True


class PWQuadratic:
    """Continuous piecewise-quadratic function, constant on both tails.

    Primarily holds the potential ``U(x) = integral of u up to x`` of a
    piecewise-linear function.  Piece ``i`` on ``[xs[i], xs[i+1]]`` is
    ``c0[i] + c1[i] d + c2[i] d^2`` with ``d = x - xs[i]``.
    """

    __slots__ = ("xs", "c0", "c1", "c2", "left_value", "right_value")

    def __init__(self, xs, c0, c1, c2, left_value: float, right_value: float):
        xs = _as_float_array(xs)
        c0 = _as_float_array(c0)
        c1 = _as_float_array(c1)
        c2 = _as_float_array(c2)
        if len(xs) < 1 or len(c0) != len(xs) - 1:
            raise ValueError("need n nodes and n-1 pieces")
        # continuity across nodes, relative tolerance 1e-12 x scale
        scale = max(np.abs(c0).max(initial=0.0), abs(left_value), abs(right_value), 1.0)
        vals_end = c0 + c1 * np.diff(xs) + c2 * np.diff(xs) ** 2
        nxt = np.concatenate([c0[1:], [right_value]])
        if len(c0) and abs(c0[0] - left_value) > 1e-12 * scale:
            raise ValueError("left tail not continuous")
        if np.any(np.abs(vals_end - nxt) > 1e-12 * scale):
            raise ValueError("pieces not continuous across nodes")
        for name, v in (
            ("xs", xs),
            ("c0", c0),
            ("c1", c1),
            ("c2", c2),
        ):
            v.setflags(write=False)
            object.__setattr__(self, name, v)
        object.__setattr__(self, "left_value", float(left_value))
        object.__setattr__(self, "right_value", float(right_value))

    def __setattr__(self, *a):
        raise AttributeError("PWQuadratic is immutable")

    def eval_many(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.empty(x.shape, dtype=float)
        out.fill(self.left_value)
        if len(self.xs) == 1:
            out[x >= self.xs[0]] = self.right_value
            return out
        idx = np.clip(np.searchsorted(self.xs, x, side="right") - 1, 0, len(self.c0) - 1)
        d = x - self.xs[idx]
        inner = (x >= self.xs[0]) & (x <= self.xs[-1])
        out[inner] = (
            self.c0[idx] + self.c1[idx] * d + self.c2[idx] * d * d
        )[inner]
        out[x > self.xs[-1]] = self.right_value
        return out

    def eval(self, x: float) -> float:
        return float(self.eval_many(np.array([x]))[0])

    def __call__(self, x):
        if np.isscalar(x):
            return self.eval(float(x))
        return self.eval_many(x)

    def node_values(self) -> np.ndarray:
        return self.eval_many(self.xs)

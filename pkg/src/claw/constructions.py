"""Closed-form data families with exact solution formulas.

Four constructions drive the experiments:

* ``sawtooth``: teeth accumulating at the origin, each rising linearly from
  0 to 1 and dropping by a jump; total variation grows with the tooth count
  while the variation concentrates on ever shorter intervals.
* ``Block``: one triangular bump.  After its shock forms at ``t = l/(2h)``
  the solution is a right triangle whose shock position and total variation
  have closed forms; these are the solver's sharpest oracles.
* ``Packet``: ``N`` identical triangular blocks of one scale, spaced just
  far enough that their solutions never interact up to a design time.
  Counts grow like ``k^k``, so packets stay symbolic; materialization is a
  small-k cross-check.
* ``hat_u`` / ``prop33_datum``: stacked packets over a range of scales, and
  the rescaled multi-scale superposition whose scaled total variation blows
  up along a prescribed time schedule.

All quantities that the experiments report (variation, support, metric
certificates) are computed from the symbolic parameters; nothing here
requires solving when the closed forms apply.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .pwl import Interval, PLFunction

__all__ = [
    "Block",
    "Packet",
    "ceil_int",
    "sawtooth",
    "block_pl",
    "block_solution",
    "block_tv_at",
    "make_packet",
    "packet_tv",
    "packet_tv_at",
    "packet_support_measure",
    "packet_materialize",
    "hat_u",
    "hat_u_tv",
    "hat_u_support",
    "hat_u_materialize",
    "packets_palpha_upper",
    "holder_quotient_bound",
    "Prop33Datum",
    "prop33_datum",
    "prop33_scaled_tv_series",
    "prop33_palpha_upper",
]

MATERIALIZE_GUARD = 10**6


def ceil_int(x: float) -> int:
    """Ceiling with a 1e-12 nudge so exact integers survive float noise."""
    return int(math.ceil(x - 1e-12))


# ----------------------------------------------------------------------
# sawtooth
# ----------------------------------------------------------------------


def sawtooth(beta: float, n_max: int) -> PLFunction:
    """Teeth at ``x_n = n^-beta``: linear rise 0 to 1 on each
    ``(x_{n+1}, x_n)`` with a downward jump at ``x_n``; zero outside.

    The printed closed form would exceed 1 at the right end of each
    interval; the constructor follows the intended sawtooth shape (rise to
    exactly 1, then drop).
    """
    if beta <= 0.0:
        raise ValueError("beta must be positive")
    if n_max < 2:
        raise ValueError("need at least two teeth")
    pts = [(n + 1.0) ** (-beta) for n in range(n_max, 0, -1)] + [1.0]
    xs = np.array(pts)
    left = np.ones(len(xs))
    right = np.zeros(len(xs))
    left[0] = 0.0
    return PLFunction(xs, left, right)


# ----------------------------------------------------------------------
# triangular blocks
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class Block:
    """Symmetric triangular bump of width ``ell`` and height ``h`` with its
    left endpoint at ``x0``."""

    ell: float
    h: float
    x0: float = 0.0

    def __post_init__(self):
        if not (self.ell > 0.0 and self.h > 0.0):
            raise ValueError("block width and height must be positive")

    @property
    def shock_time(self) -> float:
        return self.ell / (2.0 * self.h)


def block_pl(b: Block) -> PLFunction:
    return PLFunction.from_points(
        [b.x0, b.x0 + 0.5 * b.ell, b.x0 + b.ell], [0.0, b.h, 0.0]
    )


def block_solution(b: Block, t: float):
    """Post-shock profile, shock offset and total variation in closed form.

    Valid for ``t >= ell/(2h)``: the solution is the right triangle
    ``u = 2hx/(2ht+ell)`` on ``[x0, x0+L]`` with ``L = sqrt(ell(2ht+ell)/2)``
    and total variation ``2p``, ``p = h sqrt(2 ell/(2ht+ell))``.
    Returns ``(profile, L, tv)``.
    """
    if t < b.shock_time:
        raise ValueError("pre-shock regime: use the exact solver instead")
    ell, h = b.ell, b.h
    L = math.sqrt(0.5 * ell * (2.0 * h * t + ell))
    p = h * math.sqrt(2.0 * ell / (2.0 * h * t + ell))
    profile = PLFunction([b.x0, b.x0 + L], [0.0, p], [0.0, 0.0])
    # closed-form internal consistency
    assert p >= math.sqrt(h * ell / (2.0 * t)) - 1e-12
    assert L <= math.sqrt(2.0 * ell * h * t) + 1e-12
    return profile, L, 2.0 * p


def block_tv_at(b: Block, t: float) -> float:
    """Exact total variation of one evolving block at any ``t >= 0``."""
    if t < b.shock_time:
        return 2.0 * b.h
    return 2.0 * b.h * math.sqrt(2.0 * b.ell / (2.0 * b.h * t + b.ell))


# ----------------------------------------------------------------------
# wave packets
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class Packet:
    """``count`` identical blocks (width ``ell``, height ``h = 2^k ell``)
    whose left endpoints are ``spacing`` apart; spacing is chosen so the
    per-block solutions stay disjoint up to ``t_design``."""

    k: int
    ell: float
    h: float
    count: int
    spacing: float
    origin: float
    t_design: float

    def __post_init__(self):
        if self.h > 1.0 + 1e-12:
            raise ValueError("block height must not exceed 1")
        if self.spacing < self.ell - 1e-15:
            raise ValueError("blocks overlap")

    @property
    def shock_time(self) -> float:
        return self.ell / (2.0 * self.h)

    @property
    def span(self) -> float:
        """Length of the interval containing the packet for all t <= t_design."""
        return self.count * self.spacing

    def block(self, j: int) -> Block:
        return Block(self.ell, self.h, self.origin + j * self.spacing)

    def scaled(self, value_scale: float, x_scale: float, new_origin: float) -> "Packet":
        """Packet for data ``value_scale * u(x / x_scale)`` placed at
        ``new_origin`` (both scales applied about the origin)."""
        return Packet(
            self.k,
            self.ell * x_scale,
            self.h * value_scale,
            self.count,
            self.spacing * x_scale,
            new_origin,
            self.t_design,
        )


def make_packet(k: int, t_design: float, origin: float = 0.0) -> Packet:
    """Scale-``k`` packet: ``ell = 2^-1 2^(-k/2) k^-k`` and ``count = k^k``,
    so the initial variation is ``2^(k/2)`` and the support measure is
    ``2^(-1-k/2)``; spacing ``sqrt(2 h ell t_design)``."""
    if k < 1:
        raise ValueError("k must be at least 1")
    ell = 0.5 * 2.0 ** (-k / 2.0) * float(k) ** (-k)
    h = 2.0**k * ell
    if ell / (2.0 * h) > t_design:
        raise ValueError("t_design earlier than the blocks' shock time")
    count = round(float(k) ** k)
    spacing = math.sqrt(2.0 * h * ell * t_design)
    return Packet(k, ell, h, count, spacing, origin, t_design)


def packet_tv(pk: Packet, t: float) -> float:
    """Exact post-shock packet variation ``2 N p(t)``; requires
    ``shock_time <= t <= t_design`` (blocks provably non-interacting)."""
    if not (pk.shock_time <= t <= pk.t_design + 1e-15):
        raise ValueError("t outside the packet's exact regime")
    return pk.count * block_tv_at(Block(pk.ell, pk.h), t)


def packet_tv_at(pk: Packet, t: float) -> float:
    """Exact packet variation for any ``0 <= t <= t_design`` (pre-shock
    blocks still carry their full variation ``2h`` each)."""
    if t > pk.t_design + 1e-15:
        raise ValueError("past the packet's design time: blocks may interact")
    return pk.count * block_tv_at(Block(pk.ell, pk.h), t)


def packet_support_measure(pk: Packet) -> float:
    return pk.count * pk.ell


def packet_materialize(pk: Packet) -> PLFunction:
    """Explicit sum of the packet's blocks; guarded against astronomical
    counts (use the symbolic closed forms there)."""
    if pk.count > MATERIALIZE_GUARD:
        raise ValueError(
            f"packet has {pk.count} blocks; beyond the materialization guard "
            f"({MATERIALIZE_GUARD}), use the symbolic forms packet_tv/"
            "packet_support_measure"
        )
    xs = []
    vals = []
    for j in range(pk.count):
        x0 = pk.origin + j * pk.spacing
        xs += [x0, x0 + 0.5 * pk.ell, x0 + pk.ell]
        vals += [0.0, pk.h, 0.0]
    # consecutive blocks may touch when spacing == ell; merge duplicates
    xs_arr = np.array(xs)
    vals_arr = np.array(vals)
    keep = np.concatenate([[True], np.diff(xs_arr) > 0.0])
    return PLFunction.from_points(xs_arr[keep], vals_arr[keep])


# ----------------------------------------------------------------------
# stacked packets
# ----------------------------------------------------------------------


def hat_u(t: float):
    """Stacked packets over scales ``k1..k2`` designed for time ``t``.

    ``k1 = ceil(log2(1/t))`` makes every block post-shock at ``t``;
    ``k2 = k1 - 2 + ceil(sqrt(2/t))`` packs enough scales that the total
    support stays below 1 while ``TV{S_t} >= 1/(c t)`` for an absolute
    constant ``c``.  Returns ``(packets, k1, k2)``.
    """
    if not (0.0 < t < 1.0):
        raise ValueError("t must lie in (0, 1)")
    k1 = max(ceil_int(math.log2(1.0 / t)), 1)
    k2 = k1 - 2 + ceil_int(math.sqrt(2.0 / t))
    packets = []
    origin = 0.0
    for k in range(k1, k2 + 1):
        pk = make_packet(k, t, origin)
        origin += pk.span
        packets.append(pk)
    return packets, k1, k2


def hat_u_tv(packets, t: float) -> float:
    """Exact variation of the packet stack at time ``t`` (within every
    packet's design horizon)."""
    return float(sum(packet_tv_at(pk, t) for pk in packets))


def hat_u_support(packets) -> float:
    return float(sum(pk.span for pk in packets))


def hat_u_materialize(packets) -> PLFunction:
    total = sum(pk.count for pk in packets)
    if total > MATERIALIZE_GUARD:
        raise ValueError(
            f"{total} blocks exceed the materialization guard; "
            "use the symbolic forms"
        )
    out = PLFunction.zero()
    for pk in packets:
        out = out + packet_materialize(pk)
    return out


def packets_palpha_upper(packets, alpha: float, Q: int = 24) -> float:
    """Symbolic interpolation-metric upper bound for a packet stack.

    For each dyadic level the witness deletes all packets of scale at least
    ``ceil(log2(1/lambda))`` (their supports form the bad set) and keeps the
    coarse scales' variation; the reported constant is the max over levels
    of the larger of the two normalized costs.
    """
    out = 0.0
    for q in range(Q + 1):
        lam = 2.0**-q
        kbar = ceil_int(math.log2(1.0 / lam)) if lam < 1.0 else 0
        meas = sum(packet_support_measure(pk) for pk in packets if pk.k >= kbar)
        tv_out = sum(2.0 * pk.count * pk.h for pk in packets if pk.k < kbar)
        cost = max(tv_out * lam ** (1.0 - alpha), meas * lam ** (-alpha))
        out = max(out, cost)
    return float(out)


def holder_quotient_bound(packets, sigma: float) -> float:
    """Max slope-based Holder quotient over the stack's blocks: each block
    contributes ``h / (ell/2)^sigma``."""
    return float(
        max(pk.h / (0.5 * pk.ell) ** sigma for pk in packets) if packets else 0.0
    )


# ----------------------------------------------------------------------
# multi-scale blow-up datum
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class Prop33Datum:
    """Rescaled packet stacks at dyadic stations: level ``j`` holds the
    design-``t_j`` stack scaled by ``2^-j`` in both axes at ``x_j``."""

    J: int
    t_schedule: tuple
    stations: tuple  # x_j
    levels: tuple  # tuple of packet tuples

    def level_packets(self, j: int):
        return self.levels[j]

    def materializable_prefix(self) -> list[int]:
        out = []
        for j, packs in enumerate(self.levels):
            if sum(pk.count for pk in packs) <= MATERIALIZE_GUARD:
                out.append(j)
        return out

    def materialize_level(self, j: int) -> PLFunction:
        out = PLFunction.zero()
        for pk in self.levels[j]:
            out = out + packet_materialize(pk)
        return out


def prop33_datum(J: int, t_schedule=None) -> Prop33Datum:
    """Multi-scale datum: level ``j`` is the time-``t_j`` packet stack
    compressed by ``2^-j`` and placed at ``x_j = sum_{i<j} 2 * 2^-i``.

    Default schedule ``t_j = exp(-2^(j+1))`` (the time sequence is indexed
    from 1); every ``t_j`` must stay below ``2^-j`` so distinct levels never
    interact before time 1.
    """
    if J < 1:
        raise ValueError("need at least one level")
    if t_schedule is None:
        t_schedule = [math.exp(-(2.0 ** (j + 1))) for j in range(J)]
    t_schedule = [float(t) for t in t_schedule]
    if len(t_schedule) != J:
        raise ValueError("schedule length must equal J")
    levels = []
    stations = []
    x_j = 0.0
    for j, tj in enumerate(t_schedule):
        if tj >= 2.0**-j:
            raise ValueError(f"t_{j} = {tj} too large: levels would interact")
        base, _, _ = hat_u(tj)
        scale = 2.0**-j
        packs = []
        offset = 0.0
        for pk in base:
            packs.append(pk.scaled(scale, scale, x_j + offset * scale))
            offset += pk.span
        levels.append(tuple(packs))
        stations.append(x_j)
        x_j += 2.0 * 2.0**-j
    return Prop33Datum(J, tuple(t_schedule), tuple(stations), tuple(levels))


def prop33_scaled_tv_series(datum: Prop33Datum, beta: float) -> list[float]:
    """The series ``t_j^beta * TV{S_(t_j) u}`` over the schedule.

    For each station time the exact per-level variations are summed over
    the levels whose design horizon covers that time (all ``i <= j``); the
    later levels are past their horizon, so their unknown (smaller)
    contribution is dropped, making each entry a certified lower bound.
    """
    out = []
    for j, tj in enumerate(datum.t_schedule):
        tv = 0.0
        for i in range(j + 1):
            tv += sum(packet_tv_at(pk, tj) for pk in datum.levels[i])
        out.append(tj**beta * tv)
    return out


def prop33_palpha_upper(datum: Prop33Datum, alpha: float, Q: int = 40) -> float:
    """Upper bound on the datum's interpolation metric by the triangle
    inequality over levels: level ``j`` contributes ``2^-j`` times its
    stack's bound (the compression is metric-invariant at alpha = 1/2 and
    only helps below)."""
    if alpha > 0.5 + 1e-12:
        raise ValueError("certificate only valid for alpha <= 1/2")
    total = 0.0
    for j in range(datum.J):
        base = packets_palpha_upper(datum.levels[j], alpha, Q)
        # the level is already scaled; its own bound is what the witness
        # arithmetic reports on the scaled packets
        total += base
    return float(total)

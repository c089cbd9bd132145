"""One-sided rate-limited envelopes of piecewise-linear functions.

``upper_rate_envelope(f, p)`` computes the largest function below ``f``
whose increase rate never exceeds ``p`` (decreases are unconstrained); it is
the inf-convolution of ``f`` with the one-sided cone ``s -> p s`` on
``s >= 0``.  Geometrically this is a sunrise construction: light rays of
slope ``p`` travel rightward under the graph, and the envelope detaches
from ``f`` exactly on the shadowed intervals.  The companion
``lower_rate_envelope`` limits the decrease rate instead and is the mirror
image under ``x -> -x``.

For piecewise-linear input the envelope is computed exactly by one
left-to-right sweep over the nodes; the output has at most one extra node
per input segment (the ray-graph reattachment point) plus one terminal node
when a negative value forces the envelope to climb back to zero beyond the
input support.

Three contracted inequalities relate an envelope to its input (``TV+``
denotes positive variation):

* ``TV+{env} <= TV+{f}``
* ``meas{env < f} <= TV+{f} / p``   (the sunrise bound)
* ``TV+{f - env} <= TV+{f}``

They are enforced by the test suite over randomized inputs and every
dyadic rate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .pwl import PLFunction

__all__ = ["EnvelopeResult", "upper_rate_envelope", "lower_rate_envelope"]


@dataclass(frozen=True)
class EnvelopeResult:
    """Envelope, exact residual ``input - envelope``, and the measure of
    the detachment set ``{envelope < input}``."""

    envelope: PLFunction
    residual: PLFunction
    contact_set_measure: float


def _sweep(f: PLFunction, p: float) -> PLFunction:
    xs, fl, fr = f.xs, f.left, f.right
    n = len(xs)
    out_x: list[float] = []
    out_l: list[float] = []
    out_r: list[float] = []

    def emit(x: float, l: float, r: float):
        out_x.append(x)
        out_l.append(l)
        out_r.append(r)

    vscale = max(float(np.abs(fl).max()), float(np.abs(fr).max()), 1e-300)
    tol = 1e-12 * vscale
    g = 0.0  # envelope value arriving from the left
    for i in range(n):
        g_plus = min(g, float(fr[i]))
        emit(float(xs[i]), g, g_plus)
        if i == n - 1:
            break
        a = float(fr[i])
        b = float(fl[i + 1])
        length = float(xs[i + 1] - xs[i])
        s = (b - a) / length
        if g_plus >= a - tol:
            # attached: follow f while it rises no faster than p
            if s <= p:
                g = b
            else:
                g = a + p * length
        else:
            # detached: climb at rate p, reattach if the graph comes down
            if p > s:
                dx = (a - g_plus) / (p - s)
                if dx < length:
                    xc = float(xs[i]) + dx
                    vc = g_plus + p * dx
                    emit(xc, vc, vc)
                    g = b
                    continue
            g = g_plus + p * length
    # beyond the supports a negative envelope climbs back to zero
    g_end = min(g, 0.0)
    if out_r:
        out_r[-1] = g_end
    if g_end < 0.0:
        emit(float(xs[-1]) + (-g_end) / p, 0.0, 0.0)
    if not out_x:
        return PLFunction.zero()
    out_l[0] = 0.0
    out_r[-1] = 0.0
    env = PLFunction(np.array(out_x), np.array(out_l), np.array(out_r), _trusted=True)
    return env.normalize(drop_tol=0.0)


def upper_rate_envelope(f: PLFunction, p: float) -> EnvelopeResult:
    """Largest minorant of ``f`` with increase rate at most ``p``.

    Raises ``ValueError`` for ``p <= 0``.
    """
    if not (p > 0.0):
        raise ValueError("rate p must be positive")
    if len(f.xs) == 0:
        return EnvelopeResult(PLFunction.zero(), PLFunction.zero(), 0.0)
    env = _sweep(f, p)
    vscale = max(f.linf_norm(), env.linf_norm(), 1e-300)
    residual = (f - env).snap_zeros(1e-12 * vscale)
    return EnvelopeResult(env, residual, residual.support_measure())


def lower_rate_envelope(f: PLFunction, p: float) -> EnvelopeResult:
    """Largest minorant of ``f`` with decrease rate at most ``p``.

    Mirror image of :func:`upper_rate_envelope` under reflection and
    satisfies the same three inequalities with the reflected positive
    variation.
    """
    if not (p > 0.0):
        raise ValueError("rate p must be positive")
    if len(f.xs) == 0:
        return EnvelopeResult(PLFunction.zero(), PLFunction.zero(), 0.0)
    env = _sweep(f.reflect(), p).reflect()
    vscale = max(f.linf_norm(), env.linf_norm(), 1e-300)
    residual = (f - env).snap_zeros(1e-12 * vscale)
    return EnvelopeResult(env, residual, residual.support_measure())

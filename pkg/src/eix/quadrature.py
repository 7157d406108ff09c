"""Adaptive Simpson quadrature over piecewise-smooth integrands."""

from __future__ import annotations

from typing import Callable, Sequence


class QuadratureError(RuntimeError):
    """The adaptive recursion hit its depth limit before meeting the tolerance."""


def adaptive_simpson(f: Callable[[float], float], a: float, b: float, tol: float = 1e-10, max_depth: int = 50) -> float:
    """Integrate ``f`` over ``[a, b]`` to absolute tolerance ``tol``.

    Classic recursive Simpson with the Richardson correction ``(S2 - S1)/15``.
    """
    if a == b:
        return 0.0
    fa, fb, fm = f(a), f(b), f(0.5 * (a + b))
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return _recurse(f, a, b, fa, fm, fb, whole, tol, max_depth)


def _recurse(f, a, b, fa, fm, fb, whole, tol, depth):
    m = 0.5 * (a + b)
    lm, rm = 0.5 * (a + m), 0.5 * (m + b)
    flm, frm = f(lm), f(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    delta = left + right - whole
    if abs(delta) <= 15.0 * tol:
        return left + right + delta / 15.0
    if depth <= 0:
        raise QuadratureError(f"no convergence on [{a}, {b}]")
    return _recurse(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) + _recurse(
        f, m, b, fm, frm, fb, right, tol / 2, depth - 1
    )


def piecewise_simpson(f: Callable[[float], float], breakpoints: Sequence[float], tol: float = 1e-10) -> float:
    """Sum of :func:`adaptive_simpson` over consecutive pieces of ``breakpoints``.

    ``f`` is evaluated strictly inside each piece and at the endpoints from the
    inside, so jumps located exactly at breakpoints do not spoil convergence.
    The tolerance is split evenly over the pieces.
    """
    pts = sorted(set(float(p) for p in breakpoints))
    if len(pts) < 2:
        return 0.0
    per = tol / (len(pts) - 1)
    total = 0.0
    for lo, hi in zip(pts[:-1], pts[1:]):
        total += adaptive_simpson(_inside(f, lo, hi), lo, hi, per)
    return total


def _inside(f, lo, hi):
    # nudge endpoint evaluations into the open piece
    eps = (hi - lo) * 1e-13

    def g(x):
        if x <= lo:
            x = lo + eps
        elif x >= hi:
            x = hi - eps
        return f(x)

    return g

from __future__ import annotations

from ..exceptions import RootNotFoundError


def bracketed_root(f, lo, hi, fprime=None, xtol=1e-12, maxiter=200):
    """Root of ``f`` on ``[lo, hi]`` given a sign change.

    Newton steps from the current midpoint are accepted only when they stay
    inside the shrinking bracket; otherwise the bracket is bisected. Without
    ``fprime`` this is plain bisection. ``xtol`` is relative to the bracket.

    Returns ``(root, iterations)``.
    """
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return lo, 0
    if fhi == 0:
        return hi, 0
    if (flo > 0) == (fhi > 0):
        raise RootNotFoundError(f"no sign change on [{lo!r}, {hi!r}]: f = ({flo!r}, {fhi!r})")
    scale = max(abs(lo), abs(hi))
    x = 0.5 * (lo + hi)
    for it in range(1, maxiter + 1):
        fx = f(x)
        if fx == 0:
            return x, it
        if (fx > 0) == (flo > 0):
            lo, flo = x, fx
        else:
            hi = x
        if hi - lo <= xtol * scale:
            return 0.5 * (lo + hi), it
        nxt = None
        if fprime is not None:
            d = fprime(x)
            if d != 0:
                cand = x - fx / d
                if lo < cand < hi:
                    nxt = cand
        if nxt is None:
            nxt = 0.5 * (lo + hi)
        elif abs(nxt - x) <= 0.25 * xtol * scale:
            return nxt, it
        x = nxt
    return 0.5 * (lo + hi), maxiter

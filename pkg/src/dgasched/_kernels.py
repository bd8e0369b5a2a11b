"""Single-machine delivery-time kernels on integer ticks.

Every kernel takes non-empty parallel arrays ``r, p, q`` (release, processing,
delivery) indexed by job position; position order doubles as the id
tie-break order.  The same source runs two ways:

* compiled with ``numba.njit`` on ``int64`` arrays (default), or
* interpreted on ``object`` arrays of Python ints, which never overflow.

Set ``DGASCHED_DISABLE_NUMBA=1`` to force the interpreted path.  Inputs
whose worst-case delivery does not fit comfortably in ``int64`` take the
interpreted path regardless.
"""

from __future__ import annotations

import os
import types

import numpy as np

_INT64_SAFE = 2**62

try:
    if os.environ.get("DGASCHED_DISABLE_NUMBA", "").strip() not in ("", "0"):
        raise ImportError("disabled by DGASCHED_DISABLE_NUMBA")
    import numba

    NUMBA_ENABLED = True
except ImportError:
    numba = None
    NUMBA_ENABLED = False


def _jit(fn):
    if NUMBA_ENABLED:
        return numba.njit(cache=True)(fn)
    return fn


def simulate(r, p, q, order):
    """Earliest-start schedule for a fixed order: ``(start, finish, delivered_by)``."""
    n = order.shape[0]
    start = np.zeros(n, r.dtype)
    finish = np.zeros(n, r.dtype)
    t = r[0] - r[0]
    best = t
    for k in range(n):
        j = order[k]
        s = t if t > r[j] else r[j]
        t = s + p[j]
        start[j] = s
        finish[j] = t
        if t + q[j] > best:
            best = t + q[j]
    return start, finish, best


def jks_order(r, p, q):
    """Extended Jackson's rule: when free, run the released job with largest q."""
    n = r.shape[0]
    order = np.empty(n, np.int64)
    done = np.zeros(n, np.bool_)
    t = r[0] - r[0]
    for k in range(n):
        pick = -1
        for j in range(n):
            if not done[j] and r[j] <= t:
                if pick < 0 or q[j] > q[pick]:
                    pick = j
        if pick < 0:
            # idle: jump to the next release and choose among those released then
            nxt = -1
            for j in range(n):
                if not done[j] and (nxt < 0 or r[j] < r[nxt]):
                    nxt = j
            t = r[nxt]
            for j in range(n):
                if not done[j] and r[j] <= t:
                    if pick < 0 or q[j] > q[pick]:
                        pick = j
        order[k] = pick
        done[pick] = True
        t = t + p[pick]
    return order


def critical_sequence(r, p, q, order):
    """``(c, a, b)`` job indices for the earliest-start schedule of ``order``.

    ``c`` is the first job in the sequence attaining the maximum delivery,
    ``a`` the first job of the idle-free run ending at ``c`` and ``b`` the
    last job of that run before ``c`` with ``q[b] < q[c]`` (``-1`` if none).
    """
    n = order.shape[0]
    if n == 0:
        return -1, -1, -1
    start, finish, best = simulate(r, p, q, order)
    cpos = 0
    for k in range(n):
        j = order[k]
        if finish[j] + q[j] == best:
            cpos = k
            break
    apos = cpos
    while apos > 0 and start[order[apos]] == finish[order[apos - 1]]:
        apos -= 1
    c = order[cpos]
    b = -1
    for k in range(apos, cpos):
        if q[order[k]] < q[c]:
            b = order[k]
    return c, order[apos], b


def potts_order(r, p, q):
    """Potts' iterative improvement over JKS, at most ``n`` rounds.

    Each round delays the interference job's release to the critical job's
    release in a working copy; candidates are scored by their earliest-start
    schedule under the true releases and the best one wins.
    """
    n = r.shape[0]
    rw = r.copy()
    best_order = jks_order(rw, p, q)
    _, _, best_val = simulate(r, p, q, best_order)
    order = best_order
    for it in range(n):
        if it > 0:
            order = jks_order(rw, p, q)
            _, _, val = simulate(r, p, q, order)
            if val < best_val:
                best_val = val
                best_order = order
        c, a, b = critical_sequence(rw, p, q, order)
        if b < 0:
            break
        rw[b] = rw[c]
    return best_order


def brute_force_order(r, p, q):
    """Lexicographically first permutation minimising the latest delivery.

    Depth-first branch and bound over permutations; a prefix is cut once
    its partial value or its workload bound reaches the incumbent.
    """
    n = r.shape[0]
    best_perm = np.arange(n)
    if n == 0:
        return best_perm
    # upper bound on any permutation's value, plus one
    rmax = r[0]
    qmax = q[0]
    psum = p[0] - p[0]
    for j in range(n):
        if r[j] > rmax:
            rmax = r[j]
        if q[j] > qmax:
            qmax = q[j]
        psum = psum + p[j]
    best = rmax + psum + qmax + 1
    perm = np.zeros(n, np.int64)
    used = np.zeros(n, np.bool_)
    choice = np.zeros(n + 1, np.int64)
    fin = np.zeros(n + 1, r.dtype)
    val = np.zeros(n + 1, r.dtype)
    prem = np.zeros(n + 1, r.dtype)
    prem[0] = psum
    d = 0
    while d >= 0:
        if d == n:
            if val[n] < best:
                best = val[n]
                best_perm[:] = perm
            d -= 1
            used[perm[d]] = False
            continue
        j = choice[d]
        while j < n and used[j]:
            j += 1
        if j == n:
            choice[d] = 0
            d -= 1
            if d >= 0:
                used[perm[d]] = False
            continue
        choice[d] = j + 1
        s = fin[d] if fin[d] > r[j] else r[j]
        f = s + p[j]
        v = val[d] if val[d] > f + q[j] else f + q[j]
        if v >= best:
            continue
        rest = prem[d] - p[j]
        if d + 1 < n:
            # every remaining job finishes by at least f + rest, then delivers
            qmin = -1
            for k in range(n):
                if not used[k] and k != j and (qmin < 0 or q[k] < qmin):
                    qmin = q[k]
            if f + rest + qmin >= best:
                continue
        perm[d] = j
        used[j] = True
        fin[d + 1] = f
        val[d + 1] = v
        prem[d + 1] = rest
        d += 1
    return best_perm


_NAMES = ("simulate", "jks_order", "critical_sequence", "potts_order", "brute_force_order")

# interpreted copies resolve their callees in a private namespace, so they
# stay interpreted even after the module globals are rebound to jitted code
_py_globals = dict(globals())
_SLOW = {
    name: types.FunctionType(globals()[name].__code__, _py_globals, name) for name in _NAMES
}
_py_globals.update(_SLOW)

if NUMBA_ENABLED:
    # jitted kernels call each other as jitted globals; order matters
    for _name in _NAMES:
        globals()[_name] = _jit(globals()[_name])
    _FAST = {name: globals()[name] for name in _NAMES}
else:
    _FAST = _SLOW


def arrays(r, p, q, force_python: bool = False):
    """Pack integer sequences into kernel arrays and pick the kernel table.

    Returns ``(r, p, q, table)``.  ``int64`` plus the compiled table when
    numba is on and values are small; Python-int object arrays otherwise.
    """
    r = [int(x) for x in r]
    p = [int(x) for x in p]
    q = [int(x) for x in q]
    bound = (max(r, default=0) + sum(p) + max(q, default=0) + 1) * 2
    if NUMBA_ENABLED and not force_python and bound < _INT64_SAFE:
        return (np.array(r, np.int64), np.array(p, np.int64), np.array(q, np.int64), _FAST)
    return (np.array(r, object), np.array(p, object), np.array(q, object), _SLOW)

"""Compiled triple-enumeration kernel.

The indicator-weighted triple sum over cell-index candidates is the one
genuinely hot loop in the package (billions of visited pairs at fat window
widths).  When numba is importable the loop runs compiled and in parallel;
callers fall back to the vectorized numpy path otherwise.  Each apex writes
its own slot of the result array, so the reduction order (and hence the
result) does not depend on the thread count.
"""

from __future__ import annotations

import math

import numpy as np

try:
    import numba
    from numba import njit, prange

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*a, **k):
        def wrap(f):
            return f

        return wrap

    prange = range


def set_threads(n: int) -> None:
    if HAVE_NUMBA:
        numba.set_num_threads(max(1, min(n, numba.config.NUMBA_NUM_THREADS)))


@njit(cache=True, parallel=True)
def _triple_indicator(
    pts,
    w,
    ix0,
    iy0,
    nxc,
    nyc,
    h,
    starts,
    atoms,
    lo12sq,
    hi12sq,
    lo13sq,
    hi13sq,
    lo23sq,
    hi23sq,
    glo,
    ghi,
    blo,
    bhi,
    use_band,
    same_legs,
    res,
):
    n = pts.shape[0]
    two_pi = 2.0 * math.pi
    for i in prange(n):
        px = pts[i, 0]
        py = pts[i, 1]
        jx0 = int(math.floor((px - ghi) / h))
        jx1 = int(math.floor((px + ghi) / h))
        jy0 = int(math.floor((py - ghi) / h))
        jy1 = int(math.floor((py + ghi) / h))
        if jx0 < ix0:
            jx0 = ix0
        if jy0 < iy0:
            jy0 = iy0
        if jx1 >= ix0 + nxc:
            jx1 = ix0 + nxc - 1
        if jy1 >= iy0 + nyc:
            jy1 = iy0 + nyc - 1
        # first pass: count candidates in both leg windows
        nj = 0
        nk = 0
        for cxi in range(jx0, jx1 + 1):
            for cyi in range(jy0, jy1 + 1):
                c = (cxi - ix0) * nyc + (cyi - iy0)
                for p in range(starts[c], starts[c + 1]):
                    a = atoms[p]
                    dx = pts[a, 0] - px
                    dy = pts[a, 1] - py
                    d2 = dx * dx + dy * dy
                    if lo12sq <= d2 <= hi12sq:
                        nj += 1
                    if lo13sq <= d2 <= hi13sq:
                        nk += 1
        if nj == 0 or nk == 0:
            res[i] = 0.0
            continue
        xj = np.empty(nj)
        yj = np.empty(nj)
        wj = np.empty(nj)
        tj = np.empty(nj)
        xk = np.empty(nk)
        yk = np.empty(nk)
        wk = np.empty(nk)
        tk = np.empty(nk)
        a_j = 0
        a_k = 0
        for cxi in range(jx0, jx1 + 1):
            for cyi in range(jy0, jy1 + 1):
                c = (cxi - ix0) * nyc + (cyi - iy0)
                for p in range(starts[c], starts[c + 1]):
                    a = atoms[p]
                    dx = pts[a, 0] - px
                    dy = pts[a, 1] - py
                    d2 = dx * dx + dy * dy
                    if lo12sq <= d2 <= hi12sq:
                        xj[a_j] = pts[a, 0]
                        yj[a_j] = pts[a, 1]
                        wj[a_j] = w[a]
                        tj[a_j] = math.atan2(dy, dx) % two_pi
                        a_j += 1
                    if lo13sq <= d2 <= hi13sq:
                        xk[a_k] = pts[a, 0]
                        yk[a_k] = pts[a, 1]
                        wk[a_k] = w[a]
                        tk[a_k] = math.atan2(dy, dx) % two_pi
                        a_k += 1
        acc = 0.0
        if not use_band:
            for jj in range(nj):
                xa = xj[jj]
                ya = yj[jj]
                wa = wj[jj]
                for kk in range(nk):
                    ddx = xa - xk[kk]
                    ddy = ya - yk[kk]
                    d23 = ddx * ddx + ddy * ddy
                    if lo23sq <= d23 <= hi23sq:
                        acc += wa * wk[kk]
            res[i] = w[i] * acc
            continue
        oj = np.argsort(tj, kind="quicksort")
        if same_legs:
            ok_ = oj
        else:
            ok_ = np.argsort(tk, kind="quicksort")
        # tripled sorted k-arrays: wraparound arcs can reach past 4*pi
        xs = np.empty(3 * nk)
        ys = np.empty(3 * nk)
        ws = np.empty(3 * nk)
        ts = np.empty(3 * nk)
        for q in range(nk):
            src = ok_[q]
            for rep in range(3):
                xs[q + rep * nk] = xk[src]
                ys[q + rep * nk] = yk[src]
                ws[q + rep * nk] = wk[src]
                ts[q + rep * nk] = tk[src] + rep * two_pi
        symmetric = same_legs and blo > 0.0 and bhi < math.pi
        narcs = 1 if (symmetric or blo <= 0.0) else 2
        for arc in range(narcs):
            if blo <= 0.0:
                a_lo = two_pi - bhi
                a_hi = two_pi + bhi
                open_lo = False
            elif arc == 0:
                a_lo = blo
                a_hi = bhi
                open_lo = False
            else:
                a_lo = two_pi - bhi
                a_hi = two_pi - blo
                open_lo = bhi >= math.pi
            s = 0
            e = 0
            arc_acc = 0.0
            for q in range(nj):
                jj = oj[q]
                t0 = tj[jj] + a_lo
                t1 = tj[jj] + a_hi
                if open_lo:
                    while s < 3 * nk and ts[s] <= t0:
                        s += 1
                else:
                    while s < 3 * nk and ts[s] < t0:
                        s += 1
                if e < s:
                    e = s
                while e < 3 * nk and ts[e] <= t1:
                    e += 1
                xa = xj[jj]
                ya = yj[jj]
                wa = wj[jj]
                part = 0.0
                for p in range(s, e):
                    ddx = xa - xs[p]
                    ddy = ya - ys[p]
                    d23 = ddx * ddx + ddy * ddy
                    if lo23sq <= d23 <= hi23sq:
                        part += ws[p]
                arc_acc += wa * part
            if symmetric:
                acc += 2.0 * arc_acc
            else:
                acc += arc_acc
        res[i] = w[i] * acc


def triple_indicator_sum(pts, w, index, win12, win13, win23, band, use_band, same_legs) -> float:
    """Compiled indicator-weighted triple sum; apexes write independent slots."""
    sq = lambda v: max(v, 0.0) ** 2
    lo12, hi12 = win12
    lo13, hi13 = win13
    lo23, hi23 = win23
    glo, ghi = min(lo12, lo13), max(hi12, hi13)
    res = np.zeros(len(pts))
    _triple_indicator(
        pts,
        w,
        index.ix0,
        index.iy0,
        index.nx_cells,
        index.ncols,
        index.h,
        index.cell_starts,
        index.order,
        sq(lo12),
        hi12 * hi12,
        sq(lo13),
        hi13 * hi13,
        sq(lo23),
        hi23 * hi23,
        glo,
        ghi,
        band[0],
        band[1],
        use_band,
        same_legs,
        res,
    )
    return float(res.sum())

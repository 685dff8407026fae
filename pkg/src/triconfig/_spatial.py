"""Uniform cell hashing and constrained triple enumeration.

Shared machinery behind the annulus-mass, trilinear-form, and congruence
counting paths: a CSR-packed cell index with conservative annulus queries,
plus an exact-safe angular band that prunes third-point candidates around a
fixed apex.  All prefilters are supersets; exact window checks decide.
"""

from __future__ import annotations

import math

import numpy as np

from . import _kernels, _parallel


class CellIndex:
    """Uniform-cell spatial hash over a fixed point set.

    Atom indices are packed CSR-style by flattened cell key, so membership
    by cell is a pair of searchsorted calls plus a repeat gather.
    """

    def __init__(self, points: np.ndarray, cell_size: float):
        if cell_size <= 0:
            raise ValueError("cell size must be > 0")
        pts = np.ascontiguousarray(np.asarray(points, dtype=float))
        self.points = pts
        self.h = float(cell_size)
        ij = np.floor(pts / self.h).astype(np.int64)
        self.ix0 = int(ij[:, 0].min())
        self.iy0 = int(ij[:, 1].min())
        self.ncols = int(ij[:, 1].max()) - self.iy0 + 1
        key = (ij[:, 0] - self.ix0) * self.ncols + (ij[:, 1] - self.iy0)
        self.order = np.argsort(key, kind="stable")
        self.sorted_keys = key[self.order]
        self.nx_cells = int(ij[:, 0].max()) - self.ix0 + 1
        counts = np.bincount(self.sorted_keys, minlength=self.nx_cells * self.ncols)
        self.cell_starts = np.concatenate([[0], np.cumsum(counts)]).astype(np.int64)

    def _keys_for(self, ix: np.ndarray, iy: np.ndarray) -> np.ndarray:
        inside = (
            (ix >= self.ix0)
            & (ix < self.ix0 + self.nx_cells)
            & (iy >= self.iy0)
            & (iy < self.iy0 + self.ncols)
        )
        ix, iy = ix[inside], iy[inside]
        return (ix - self.ix0) * self.ncols + (iy - self.iy0)

    def gather(self, keys: np.ndarray) -> np.ndarray:
        """Atom indices for an array of cell keys."""
        starts = np.searchsorted(self.sorted_keys, keys, side="left")
        ends = np.searchsorted(self.sorted_keys, keys, side="right")
        counts = ends - starts
        total = int(counts.sum())
        if total == 0:
            return np.empty(0, dtype=np.int64)
        rep = np.repeat(starts, counts)
        off = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
        return self.order[rep + off]

    def query_annulus(self, center, rlo: float, rhi: float) -> tuple[np.ndarray, np.ndarray]:
        """Atom indices and squared distances with rlo <= d <= rhi (closed,
        decided on squared values)."""
        cx, cy = float(center[0]), float(center[1])
        cand = self.query_annulus_rect((cx, cx, cy, cy), rlo, rhi)
        if cand.size == 0:
            return cand, np.empty(0)
        dx = self.points[cand, 0] - cx
        dy = self.points[cand, 1] - cy
        d2 = dx * dx + dy * dy
        keep = (d2 >= max(rlo, 0.0) ** 2) & (d2 <= rhi * rhi)
        return cand[keep], d2[keep]

    def query_annulus_rect(self, rect, rlo: float, rhi: float) -> np.ndarray:
        """Superset of atoms within [rlo, rhi] of any point of the rectangle
        (x0, x1, y0, y1); callers apply exact per-center checks."""
        x0, x1, y0, y1 = rect
        h = self.h
        jx0 = int(math.floor((x0 - rhi) / h))
        jx1 = int(math.floor((x1 + rhi) / h))
        jy0 = int(math.floor((y0 - rhi) / h))
        jy1 = int(math.floor((y1 + rhi) / h))
        ix = np.arange(jx0, jx1 + 1)
        iy = np.arange(jy0, jy1 + 1)
        IX, IY = np.meshgrid(ix, iy, indexing="ij")
        IX, IY = IX.ravel(), IY.ravel()
        lox, hix = IX * h, (IX + 1) * h
        loy, hiy = IY * h, (IY + 1) * h
        # min/max distance between each cell square and the query rectangle
        gx = np.maximum(np.maximum(lox - x1, x0 - hix), 0.0)
        gy = np.maximum(np.maximum(loy - y1, y0 - hiy), 0.0)
        mind = np.hypot(gx, gy)
        fx = np.maximum(hix - x0, x1 - lox)
        fy = np.maximum(hiy - y0, y1 - loy)
        maxd = np.hypot(fx, fy)
        keep = (mind <= rhi) & (maxd >= rlo)
        return self.gather(self._keys_for(IX[keep], IY[keep]))


def angular_band(win12, win13, win23) -> tuple[float, float]:
    """Conservative |angle| interval between the two legs at the apex.

    Given leg lengths in [win12] and [win13] and an opposite side in [win23],
    interval arithmetic on the law of cosines bounds the admissible angle
    between the legs.  Returns (lo, hi) with 0 <= lo <= hi <= pi; (0, pi)
    means no pruning is possible.
    """
    lo12, hi12 = win12
    lo13, hi13 = win13
    lo23, hi23 = win23
    if lo12 <= 0.0 or lo13 <= 0.0:
        return 0.0, math.pi
    den_lo = 2.0 * lo12 * lo13
    den_hi = 2.0 * hi12 * hi13
    n_lo = lo12 * lo12 + lo13 * lo13 - hi23 * hi23
    n_hi = hi12 * hi12 + hi13 * hi13 - lo23 * lo23
    cos_lb = min(n_lo / den_lo, n_lo / den_hi)
    cos_ub = max(n_hi / den_lo, n_hi / den_hi)
    lo = 0.0 if cos_ub >= 1.0 else math.acos(max(-1.0, cos_ub))
    hi = math.pi if cos_lb <= -1.0 else math.acos(min(1.0, cos_lb))
    return lo, hi


def triple_reduce(xy, w, index, win12, win13, win23, profile=None, matrix_cap=40_000, chunk=256):
    """Sum over ordered triples of w1*w2*w3 * (window indicators or profiles).

    Apexes are processed in spatially coherent batches sharing one cell-index
    gather; per apex, leg candidates come from closed squared-distance
    windows, and third-side pairs go through either a dense check or an
    angular-band cut over angle-sorted candidates, whichever touches fewer
    pairs.  Equal leg windows fold the ordered pair sum onto one angular arc
    (each unordered pair counted once, doubled).  profile, when given, maps
    distance arrays to factor values for edges 12, 13, 23.
    """
    lo12, hi12 = win12
    lo13, hi13 = win13
    lo23, hi23 = win23
    sq = lambda v: max(v, 0.0) ** 2
    lo12sq, hi12sq = sq(lo12), hi12 * hi12
    lo13sq, hi13sq = sq(lo13), hi13 * hi13
    lo23sq, hi23sq = sq(lo23), hi23 * hi23
    glo, ghi = min(lo12, lo13), max(hi12, hi13)
    band = angular_band(win12, win13, win23)
    blo, bhi = max(0.0, band[0] - 1e-9), min(math.pi, band[1] + 1e-9)
    use_band = blo > 0.0 or bhi < math.pi
    same_legs = win12 == win13 and (profile is None or profile[0] is profile[1])
    symmetric = same_legs and use_band and blo > 0.0 and bhi < math.pi
    if profile is None and _kernels.HAVE_NUMBA:
        _kernels.set_threads(_parallel.get_max_workers())
        return _kernels.triple_indicator_sum(
            xy, w, index, win12, win13, win23, (blo, bhi), use_band, same_legs
        )
    n = len(xy)
    order = index.order  # spatial order keeps batch gathers tight
    two_pi = 2.0 * math.pi

    def arc_sum(tj, xj, yj, wj, pj, tk, xk, yk, wk, pk, a_lo, a_hi, open_lo, p23):
        """Masked weight sum over pairs with sorted-angle difference in one arc."""
        s = np.searchsorted(tk, tj + a_lo, side="right" if open_lo else "left")
        e = np.searchsorted(tk, tj + a_hi, side="right")
        counts = np.maximum(e - s, 0)
        total = int(counts.sum())
        if total == 0:
            return 0.0
        jj = np.repeat(np.arange(len(tj)), counts)
        pos = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts) + np.repeat(s, counts)
        ddx = xj[jj] - xk[pos]
        ddy = yj[jj] - yk[pos]
        d23sq = ddx * ddx + ddy * ddy
        ok = (d23sq >= lo23sq) & (d23sq <= hi23sq)
        contrib = np.where(ok, wj[jj] * wk[pos], 0.0)
        if p23 is not None:
            contrib = contrib * pj[jj] * pk[pos] * p23(np.sqrt(np.where(ok, d23sq, 1.0)))
        return float(contrib.sum())

    def do_batch(lo: int, hi: int) -> float:
        apexes = order[lo:hi]
        C = xy[apexes]
        rect = (C[:, 0].min(), C[:, 0].max(), C[:, 1].min(), C[:, 1].max())
        cand = index.query_annulus_rect(rect, glo, ghi)
        if cand.size == 0:
            return 0.0
        cx, cy = xy[cand, 0].copy(), xy[cand, 1].copy()
        cw = w[cand]
        dx = cx[None, :] - C[:, 0][:, None]
        dy = cy[None, :] - C[:, 1][:, None]
        D2 = dx * dx + dy * dy
        MJ = (D2 >= lo12sq) & (D2 <= hi12sq)
        MK = (D2 >= lo13sq) & (D2 <= hi13sq)
        acc = 0.0
        for r in range(len(apexes)):
            mj, mk = MJ[r], MK[r]
            nj, nk = int(mj.sum()), int(mk.sum())
            if nj == 0 or nk == 0:
                continue
            wi = w[apexes[r]]
            if use_band and nj * nk > matrix_cap:
                theta = np.mod(np.arctan2(dy[r][mj], dx[r][mj]), two_pi)
                oj = np.argsort(theta, kind="stable")
                tj = theta[oj]
                xj, yj, wj = cx[mj][oj], cy[mj][oj], cw[mj][oj]
                pj = None
                if profile is not None:
                    pj = profile[0](np.sqrt(D2[r][mj][oj]))
                if same_legs:
                    tk, xk, yk, wk, pk = tj, xj, yj, wj, pj
                else:
                    theta_k = np.mod(np.arctan2(dy[r][mk], dx[r][mk]), two_pi)
                    ok_ = np.argsort(theta_k, kind="stable")
                    tk = theta_k[ok_]
                    xk, yk, wk = cx[mk][ok_], cy[mk][ok_], cw[mk][ok_]
                    pk = profile[1](np.sqrt(D2[r][mk][ok_])) if profile is not None else None
                tk3 = np.concatenate([tk, tk + two_pi, tk + 2.0 * two_pi])
                xk3 = np.concatenate([xk, xk, xk])
                yk3 = np.concatenate([yk, yk, yk])
                wk3 = np.concatenate([wk, wk, wk])
                pk3 = np.concatenate([pk, pk, pk]) if pk is not None else None
                p23 = profile[2] if profile is not None else None
                if blo <= 0.0:
                    # one arc through the apex direction (bhi < pi here)
                    acc += wi * arc_sum(
                        tj, xj, yj, wj, pj, tk3, xk3, yk3, wk3, pk3,
                        two_pi - bhi, two_pi + bhi, False, p23,
                    )
                    continue
                plus = arc_sum(tj, xj, yj, wj, pj, tk3, xk3, yk3, wk3, pk3, blo, bhi, False, p23)
                if symmetric:
                    acc += wi * 2.0 * plus
                else:
                    minus = arc_sum(
                        tj, xj, yj, wj, pj, tk3, xk3, yk3, wk3, pk3,
                        two_pi - bhi, two_pi - blo, bhi >= math.pi, p23,
                    )
                    acc += wi * (plus + minus)
                continue
            ddx = cx[mj][:, None] - cx[mk][None, :]
            ddy = cy[mj][:, None] - cy[mk][None, :]
            d23sq = ddx * ddx + ddy * ddy
            mask = (d23sq >= lo23sq) & (d23sq <= hi23sq)
            if profile is None:
                acc += wi * float(cw[mj] @ mask @ cw[mk])
            else:
                p12, p13, p23 = profile
                vals = np.where(mask, p23(np.sqrt(np.where(mask, d23sq, 1.0))), 0.0)
                acc += wi * float((cw[mj] * p12(np.sqrt(D2[r][mj]))) @ vals @ (cw[mk] * p13(np.sqrt(D2[r][mk]))))
        return acc

    parts = _parallel.map_chunks(do_batch, _parallel.chunk_ranges(n, chunk))
    return float(sum(parts))

"""Level-synchronous float engine.

Every rectangle at one depth is independent of its neighbours, so float mode
processes a whole depth at once with numpy. The per-rectangle decisions are
the same as in :func:`risingsun.decompose._divide`; only the evaluation order
of the float sums differs. The tree is materialized into the usual node
objects at the end, in canonical depth-first order.
"""
from __future__ import annotations

import gc
import itertools

import numpy as np

from .geometry import Interval, Rectangle

# node kinds
_PENDING, _SELECTED, _SPLIT, _CUT, _ZERO, _BELOW, _LIMIT = range(7)


class FloatGrid:
    """Vectorized corner-interpolated queries on a float cumulative table."""

    def __init__(self, table, hot: np.ndarray):
        d = table.density
        self.n = d.dim
        self.E = [np.asarray(e, dtype=float) for e in d.edges]
        self.m = [len(e) - 1 for e in d.edges]
        self.F = np.asarray(table.F, dtype=float).ravel()
        self.M = np.asarray(table.M, dtype=float).ravel()
        self.strides = table._strides
        P = hot.astype(np.int64)
        for axis in range(P.ndim):
            P = np.cumsum(P, axis=axis)
        self.P = np.pad(P, [(1, 0)] * P.ndim).ravel()

    def _axis_terms(self, a, lo, hi):
        E, m, stride = self.E[a], self.m[a], self.strides[a]
        terms = []
        for x, sign in ((hi, 1.0), (lo, -1.0)):
            k = np.clip(np.searchsorted(E, x, side="right") - 1, 0, m - 1)
            s = (x - E[k]) / (E[k + 1] - E[k])
            terms.append((k * stride, sign * (1.0 - s)))
            terms.append(((k + 1) * stride, sign * s))
        return terms

    def masses(self, lo: np.ndarray, hi: np.ndarray):
        """Integral of f dmu and mu over each row's rectangle ``[lo, hi)``."""
        per_axis = [self._axis_terms(a, lo[:, a], hi[:, a]) for a in range(self.n)]
        fi = np.zeros(len(lo))
        mu = np.zeros(len(lo))
        for combo in itertools.product(*per_axis):
            off = combo[0][0]
            wt = combo[0][1]
            for o, w in combo[1:]:
                off = off + o
                wt = wt * w
            fi += wt * self.F[off]
            mu += wt * self.M[off]
        return fi, mu

    def hot_any(self, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
        ks = []
        empty = np.zeros(len(lo), dtype=bool)
        for a in range(self.n):
            E, m = self.E[a], self.m[a]
            k0 = np.clip(np.searchsorted(E, lo[:, a], side="right") - 1, 0, m)
            k1 = np.clip(np.searchsorted(E, hi[:, a], side="left"), 0, m)
            empty |= k1 <= k0
            ks.append((k0, k1))
        node_strides = []
        acc = 1
        for m in reversed(self.m):
            node_strides.append(acc)
            acc *= m + 1
        node_strides.reverse()
        count = np.zeros(len(lo), dtype=np.int64)
        for bits in itertools.product((0, 1), repeat=self.n):
            off = 0
            for a, b in enumerate(bits):
                off = off + ks[a][b] * node_strides[a]
            sign = 1 if (self.n - sum(bits)) % 2 == 0 else -1
            count += sign * self.P[off]
        return (count > 0) & ~empty


class _Store:
    """Growable column store for tree nodes."""

    def __init__(self, n):
        self.n = n
        self.created = []   # (ids, lo, hi, mean, depth)
        self.processed = []  # (ids, kind, axis, at, c0, c1)
        self.count = 0

    def new(self, lo, hi, mean, depth):
        ids = np.arange(self.count, self.count + len(lo))
        self.count += len(lo)
        self.created.append((ids, lo, hi, mean, np.full(len(lo), depth)))
        return ids

    def mark(self, ids, kind, axis=None, at=None, c0=None, c1=None):
        k = len(ids)
        self.processed.append((
            ids, np.full(k, kind),
            np.full(k, -1) if axis is None else axis,
            np.full(k, np.nan) if at is None else at,
            np.full(k, -1) if c0 is None else c0,
            np.full(k, -1) if c1 is None else c1,
        ))


def run(grid: FloatGrid, root_rect: Rectangle, root_f: float, root_mu: float, A: float,
        rtol: float, policy, eps: float):
    """Process the tree depth by depth; return ``(root, selected, residual, complete)``."""
    from .decompose import InvariantViolation, PreconditionError

    n = grid.n
    tol_mean = rtol * max(1.0, abs(A))
    tiny_root = 64 * eps * abs(root_mu)
    store = _Store(n)
    lo = np.array([[s.lo for s in root_rect.sides]], dtype=float)
    hi = np.array([[s.hi for s in root_rect.sides]], dtype=float)
    fi = np.array([root_f])
    mu = np.array([root_mu])
    ids = store.new(lo, hi, fi / mu, 0)
    depth = 0
    complete = True
    min_side = float(policy.min_side)

    def classify(f, m, tiny):
        null = m <= tiny
        with np.errstate(divide="ignore", invalid="ignore"):
            d = np.where(null, 0.0, f / m - A)
        c = np.sign(d).astype(int)
        c[np.abs(d) <= tol_mean] = 0
        c[null] = -1
        return c

    while len(ids):
        null = mu <= tiny_root
        store.mark(ids[null], _ZERO)
        rem = ~null
        hot = np.zeros(len(ids), dtype=bool)
        if rem.any():
            hot[rem] = grid.hot_any(lo[rem], hi[rem])
        below = rem & ~hot
        store.mark(ids[below], _BELOW)
        rem &= hot
        exh = np.zeros(len(ids), dtype=bool)
        if policy.max_depth is not None and depth >= policy.max_depth:
            exh[:] = True
        if min_side > 0:
            exh |= (hi - lo).max(axis=1) / 2 < min_side
        limit = rem & exh
        if limit.any():
            complete = False
        store.mark(ids[limit], _LIMIT)
        act = rem & ~exh
        if not act.any():
            break
        L, H, pf, pm, pid = lo[act], hi[act], fi[act], mu[act], ids[act]
        N = len(pid)
        rows = np.arange(N)
        ax = np.argmax(H - L, axis=1)
        mid = (L[rows, ax] + H[rows, ax]) / 2
        lowH = H.copy()
        lowH[rows, ax] = mid
        lf, lm = grid.masses(L, lowH)
        hf, hm = pf - lf, pm - lm
        tiny = 64 * eps * np.abs(pm)
        c_lo = classify(lf, lm, tiny)
        c_hi = classify(hf, hm, tiny)
        if np.any((c_lo > 0) & (c_hi > 0)):
            raise InvariantViolation("both halves have mean above the level")
        eq_lo = c_lo == 0
        eq_hi = ~eq_lo & (c_hi == 0)
        cut_lo = ~eq_lo & ~eq_hi & (c_lo > 0)
        cut_hi = ~eq_lo & ~eq_hi & ~cut_lo & (c_hi > 0)
        split = ~(eq_lo | eq_hi | cut_lo | cut_hi)

        at = mid.copy()
        scale = max(1.0, abs(A)) * pm
        h_far = pf - A * pm
        for grow_lower, mask in ((True, cut_lo), (False, cut_hi)):
            for a in range(n):
                sel = mask & (ax == a)
                if not sel.any():
                    continue
                h_mid = (lf - A * lm)[sel] if grow_lower else (hf - A * hm)[sel]
                at[sel] = _scan(grid, L[sel], H[sel], a, grow_lower, mid[sel], h_mid,
                                h_far[sel], scale[sel], A, rtol, InvariantViolation,
                                PreconditionError)

        next_lo, next_hi, next_f, next_m, next_ids = [], [], [], [], []

        def child_mean(f, m, tny):
            with np.errstate(divide="ignore", invalid="ignore"):
                out = f / m
            out[m <= tny] = np.nan
            return out

        # split both
        if split.any():
            s_L, s_H, s_mid, s_ax = L[split], H[split], mid[split], ax[split]
            r = np.arange(len(s_L))
            a_hi = s_H.copy()
            a_hi[r, s_ax] = s_mid
            b_lo = s_L.copy()
            b_lo[r, s_ax] = s_mid
            t = tiny[split]
            id_lo = store.new(s_L, a_hi, child_mean(lf[split], lm[split], t), depth + 1)
            id_hi = store.new(b_lo, s_H, child_mean(hf[split], hm[split], t), depth + 1)
            store.mark(pid[split], _SPLIT, s_ax, s_mid, id_lo, id_hi)
            next_lo += [s_L, b_lo]
            next_hi += [a_hi, s_H]
            next_f += [lf[split], hf[split]]
            next_m += [lm[split], hm[split]]
            next_ids += [id_lo, id_hi]

        cut = ~split
        if cut.any():
            c_L, c_H, c_at, c_ax = L[cut], H[cut], at[cut], ax[cut]
            r = np.arange(len(c_L))
            below_hi = c_H.copy()
            below_hi[r, c_ax] = c_at
            above_lo = c_L.copy()
            above_lo[r, c_ax] = c_at
            lower_sel = (eq_lo | cut_lo)[cut]
            sel_lo = np.where(lower_sel[:, None], c_L, above_lo)
            sel_hi = np.where(lower_sel[:, None], below_hi, c_H)
            cont_lo = np.where(lower_sel[:, None], above_lo, c_L)
            cont_hi = np.where(lower_sel[:, None], c_H, below_hi)
            sf = np.where(eq_lo[cut], lf[cut], hf[cut])
            sm = np.where(eq_lo[cut], lm[cut], hm[cut])
            need = (cut_lo | cut_hi)[cut]
            if need.any():
                qf, qm = grid.masses(sel_lo[need], sel_hi[need])
                sf[need], sm[need] = qf, qm
            cf, cm = pf[cut] - sf, pm[cut] - sm
            t = tiny[cut]
            id_sel = store.new(sel_lo, sel_hi, child_mean(sf, sm, t), depth + 1)
            id_cont = store.new(cont_lo, cont_hi, child_mean(cf, cm, t), depth + 1)
            store.mark(id_sel, _SELECTED)
            store.mark(pid[cut], _CUT, c_ax, c_at, id_sel, id_cont)
            next_lo.append(cont_lo)
            next_hi.append(cont_hi)
            next_f.append(cf)
            next_m.append(cm)
            next_ids.append(id_cont)

        lo = np.concatenate(next_lo)
        hi = np.concatenate(next_hi)
        fi = np.concatenate(next_f)
        mu = np.concatenate(next_m)
        ids = np.concatenate(next_ids)
        depth += 1

    return _materialize(store) + (complete,)


def _scan(grid: FloatGrid, L, H, a, grow_lower, mid, h_mid, h_far, scale, A, rtol,
          InvariantViolation, PreconditionError):
    """First zero of the piecewise-linear sliding function, per row."""
    E = grid.E[a]
    if np.any((h_mid <= 0) | (np.abs(h_mid) <= rtol * scale)):
        raise PreconditionError("growing half does not have mean above the level")
    if np.any((h_far >= 0) | (np.abs(h_far) <= rtol * scale)):
        raise PreconditionError("rectangle mean is not below the level")
    if grow_lower:
        far = H[:, a]
        j = np.searchsorted(E, mid, side="right")
        jend = np.searchsorted(E, far, side="left")
        step = 1
    else:
        far = L[:, a]
        j = np.searchsorted(E, mid, side="left") - 1
        jend = np.searchsorted(E, far, side="right") - 1
        step = -1
    N = len(mid)
    result = np.empty(N)
    prev = mid.copy()
    hprev = h_mid.copy()
    active = np.arange(N)
    while active.size:
        jj = j[active]
        inner = jj < jend[active] if grow_lower else jj > jend[active]
        s = np.where(inner, E[np.clip(jj, 0, len(E) - 1)], far[active])
        hs = h_far[active].copy()
        if inner.any():
            idx = active[inner]
            plo, phi = L[idx].copy(), H[idx].copy()
            if grow_lower:
                phi[:, a] = s[inner]
            else:
                plo[:, a] = s[inner]
            qf, qm = grid.masses(plo, phi)
            hs[inner] = qf - A * qm
        zero = np.abs(hs) <= rtol * scale[active]
        neg = ~zero & (hs < 0)
        result[active[zero]] = s[zero]
        hp, pv = hprev[active], prev[active]
        with np.errstate(divide="ignore", invalid="ignore"):
            root = pv + hp * (s - pv) / (hp - hs)
        result[active[neg]] = root[neg]
        keep = ~(zero | neg)
        if np.any(keep & ~inner):
            raise InvariantViolation("no sign change of the sliding function")
        moving = active[keep]
        prev[moving] = s[keep]
        hprev[moving] = hs[keep]
        j[moving] += step
        active = moving
    return result


def _materialize(store: _Store):
    # building ~10^5 small objects; cyclic GC passes would dominate the cost
    enabled = gc.isenabled()
    gc.disable()
    try:
        return _build_nodes(store)
    finally:
        if enabled:
            gc.enable()


def _build_nodes(store: _Store):
    from .decompose import (BELOW_LEVEL, RESOLUTION_LIMIT, ZERO_MEASURE, CutSelected,
                            DivisionNode, ResidualLeaf, SelectedWhole, SplitBoth)

    total = store.count
    n = store.n
    lo = np.empty((total, n))
    hi = np.empty((total, n))
    mean = np.empty(total)
    depth = np.empty(total, dtype=np.int64)
    for ids, l, h, m, dp in store.created:
        lo[ids], hi[ids], mean[ids], depth[ids] = l, h, m, dp
    kind = np.zeros(total, dtype=np.int64)
    axis = np.full(total, -1)
    at = np.full(total, np.nan)
    c0 = np.full(total, -1)
    c1 = np.full(total, -1)
    for ids, k, a, t, x, y in store.processed:
        kind[ids], axis[ids], at[ids], c0[ids], c1[ids] = k, a, t, x, y

    lo_l, hi_l = lo.tolist(), hi.tolist()
    mean_l = mean.tolist()
    depth_l = depth.tolist()
    new_tuple = tuple.__new__
    new_rect = object.__new__
    set_sides = Rectangle.sides.__set__
    nodes = []
    append = nodes.append
    for i in range(total):
        rect = new_rect(Rectangle)
        set_sides(rect, tuple([new_tuple(Interval, p) for p in zip(lo_l[i], hi_l[i])]))
        m = mean_l[i]
        append(DivisionNode(rect, None if m != m else m, depth_l[i]))
    reasons = {_ZERO: ZERO_MEASURE, _BELOW: BELOW_LEVEL, _LIMIT: RESOLUTION_LIMIT}
    selected_whole = SelectedWhole()
    kind_l, axis_l, at_l = kind.tolist(), axis.tolist(), at.tolist()
    c0_l, c1_l = c0.tolist(), c1.tolist()
    leaves = {k: ResidualLeaf(r) for k, r in reasons.items()}
    for i, node in enumerate(nodes):
        k = kind_l[i]
        if k == _SELECTED:
            node.outcome = selected_whole
        elif k == _SPLIT:
            node.outcome = SplitBoth(axis_l[i], at_l[i], nodes[c0_l[i]], nodes[c1_l[i]])
        elif k == _CUT:
            node.outcome = CutSelected(axis_l[i], at_l[i], nodes[c0_l[i]], nodes[c1_l[i]])
        elif k in leaves:
            node.outcome = leaves[k]
        else:
            raise AssertionError(f"node {i} left unprocessed")
    # preorder, lower child first, without going through DivisionNode.walk
    selected, residual = [], []
    stack = [0]
    while stack:
        i = stack.pop()
        k = kind_l[i]
        if k == _SELECTED:
            selected.append(nodes[i])
        elif k == _SPLIT or k == _CUT:
            stack.append(c1_l[i])
            stack.append(c0_l[i])
        else:
            residual.append(nodes[i])
    root = nodes[0]
    return root, selected, residual

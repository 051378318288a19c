"""Pure-Python fallback for the RK4 stepping kernel.

Mirrors the arithmetic of the compiled extension operation for operation
so the two backends produce identical trajectories.  Selected by
``impulse_stab._kernel`` when the extension is unavailable or when
``IMPULSE_STAB_BACKEND=python`` is set.

The kernel advances one scalar equation over a fixed mesh with classical
RK4, applying multiplicative impulses exactly at flagged nodes and
resolving delayed arguments against the already-computed part of the
trajectory (cubic Hermite between nodes), the prehistory, or a local
extrapolation when a delayed argument falls inside the step being taken.

Array arguments may carry trailing sentinel entries; the logical extents
are given by the offset arrays and the explicit ``h_n`` / ``f_n`` counts.
"""

from __future__ import annotations

from bisect import bisect_right

C_CONSTANT, C_PIECEWISE, C_TABLE = 0, 1, 2
D_IDENTITY, D_LAG, D_TABLE = 0, 1, 2
H_ZERO, H_CONSTANT, H_TABLE, H_PIECEWISE = 0, 1, 2, 3

_EPS = 2.220446049250313e-16


def integrate_mesh(
    node_t,
    node_imp,
    node_gain,
    x0,
    start,
    m,
    c_kind,
    c_val,
    c_xs,
    c_ys,
    c_xo,
    c_yo,
    d_kind,
    d_par,
    d_xs,
    d_ys,
    d_xo,
    d_yo,
    h_kind,
    h_val,
    h_xs,
    h_ys,
    h_n,
    f_kind,
    f_val,
    f_xs,
    f_ys,
    f_n,
    linear_interp,
    out_val,
    out_der,
    out_lval,
    out_lder,
):
    T = node_t.tolist()
    IMP = node_imp.tolist()
    GAIN = node_gain.tolist()
    ck = c_kind.tolist()
    cv = c_val.tolist()
    cxs = c_xs.tolist()
    cys = c_ys.tolist()
    cxo = c_xo.tolist()
    cyo = c_yo.tolist()
    dk = d_kind.tolist()
    dp = d_par.tolist()
    dxs = d_xs.tolist()
    dys = d_ys.tolist()
    dxo = d_xo.tolist()
    dyo = d_yo.tolist()
    hxs = h_xs.tolist()
    hys = h_ys.tolist()
    fxs = f_xs.tolist()
    fys = f_ys.tolist()

    n = len(T)
    VAL = [0.0] * n
    DER = [0.0] * n
    LVAL = [0.0] * n
    LDER = [0.0] * n

    def shaped(kind, scalar, xs, ys, lo_x, hi_x, lo_y, t, side):
        # constant / right-continuous steps / clamped linear table
        if kind == C_CONSTANT:
            return scalar
        if kind == C_PIECEWISE:
            lo = lo_x
            hi = hi_x
            if side >= 0:
                while lo < hi:
                    mid = (lo + hi) >> 1
                    if xs[mid] <= t:
                        lo = mid + 1
                    else:
                        hi = mid
            else:
                while lo < hi:
                    mid = (lo + hi) >> 1
                    if xs[mid] < t:
                        lo = mid + 1
                    else:
                        hi = mid
            return ys[lo_y + (lo - lo_x)]
        if t <= xs[lo_x]:
            return ys[lo_y]
        if t >= xs[hi_x - 1]:
            return ys[lo_y + (hi_x - 1 - lo_x)]
        lo = lo_x
        hi = hi_x
        while lo < hi:
            mid = (lo + hi) >> 1
            if xs[mid] <= t:
                lo = mid + 1
            else:
                hi = mid
        i = lo - 1
        u = (t - xs[i]) / (xs[i + 1] - xs[i])
        j = lo_y + (i - lo_x)
        return ys[j] + u * (ys[j + 1] - ys[j])

    def coef(k, t, side):
        return shaped(ck[k], cv[k], cxs, cys, cxo[k], cxo[k + 1], cyo[k], t, side)

    def forcing(t, side):
        return shaped(f_kind, f_val, fxs, fys, 0, f_n, 0, t, side)

    def delay_arg(k, t, side):
        # (argument, direction): direction is the sign of the local slope
        # of h, so callers can orient one-sided limits of x(h(t)); at a
        # kink the choice of segment follows the caller's panel side
        kind = dk[k]
        if kind == D_IDENTITY:
            return t, 1
        if kind == D_LAG:
            return t - dp[k], 1
        lo_x = dxo[k]
        hi_x = dxo[k + 1]
        lo_y = dyo[k]
        if t <= dxs[lo_x]:
            return dys[lo_y] - (dxs[lo_x] - t), 1
        if t >= dxs[hi_x - 1]:
            return dys[lo_y + (hi_x - 1 - lo_x)] + (t - dxs[hi_x - 1]), 1
        lo = lo_x
        hi = hi_x
        if side >= 0:
            while lo < hi:
                mid = (lo + hi) >> 1
                if dxs[mid] <= t:
                    lo = mid + 1
                else:
                    hi = mid
        else:
            while lo < hi:
                mid = (lo + hi) >> 1
                if dxs[mid] < t:
                    lo = mid + 1
                else:
                    hi = mid
        i = lo - 1
        u = (t - dxs[i]) / (dxs[i + 1] - dxs[i])
        j = lo_y + (i - lo_x)
        y0 = dys[j]
        y1 = dys[j + 1]
        adir = 1 if y1 > y0 else (-1 if y1 < y0 else 0)
        return y0 + u * (y1 - y0), adir

    def hist(xi):
        if h_kind == H_ZERO:
            return 0.0
        if h_kind == H_CONSTANT:
            return h_val
        if h_kind == H_PIECEWISE:
            lo = 0
            hi = h_n
            while lo < hi:
                mid = (lo + hi) >> 1
                if hxs[mid] <= xi:
                    lo = mid + 1
                else:
                    hi = mid
            return hys[lo]
        if xi <= hxs[0]:
            return hys[0]
        if xi >= hxs[h_n - 1]:
            return hys[h_n - 1]
        lo = 0
        hi = h_n
        while lo < hi:
            mid = (lo + hi) >> 1
            if hxs[mid] <= xi:
                lo = mid + 1
            else:
                hi = mid
        i = lo - 1
        u = (xi - hxs[i]) / (hxs[i + 1] - hxs[i])
        return hys[i] + u * (hys[i + 1] - hys[i])

    def interp_seg(j, arg):
        h = T[j + 1] - T[j]
        u = (arg - T[j]) / h
        y0 = VAL[j]
        y1 = LVAL[j + 1]
        if linear_interp:
            return y0 + u * (y1 - y0)
        d0 = DER[j]
        d1 = LDER[j + 1]
        u2 = u * u
        u3 = u2 * u
        return (
            (2.0 * u3 - 3.0 * u2 + 1.0) * y0
            + (u3 - 2.0 * u2 + u) * (h * d0)
            + (-2.0 * u3 + 3.0 * u2) * y1
            + (u3 - u2) * (h * d1)
        )

    def lookup(arg, c, side):
        # value of the trajectory at a delayed argument, completed nodes 0..c
        if arg < start:
            # snap near-start arguments onto the start node so panels that
            # end exactly where a delayed argument crosses the start read
            # the correct side of the history/solution junction
            a = arg if arg >= 0.0 else -arg
            tol = 4.0 * _EPS * (a if a > 1.0 else 1.0)
            if side >= 0 and start - arg <= tol:
                return VAL[0]
            return hist(arg)
        if arg > T[c]:
            # inside the step being taken: extrapolate the latest segment,
            # or linearly from the last node right after a jump
            if c >= 1 and not IMP[c]:
                return interp_seg(c - 1, arg)
            return VAL[c] + (arg - T[c]) * DER[c]
        j = bisect_right(T, arg, 0, c + 1) - 1
        a = arg if arg >= 0.0 else -arg
        tol = 4.0 * _EPS * (a if a > 1.0 else 1.0)
        if arg - T[j] <= tol:
            if side < 0:
                if j == 0:
                    # left limit at the start comes from the prehistory
                    return hist(start)
                if IMP[j]:
                    return LVAL[j]
            return VAL[j]
        if j + 1 <= c and T[j + 1] - arg <= tol:
            if side < 0 and IMP[j + 1]:
                return LVAL[j + 1]
            return VAL[j + 1]
        return interp_seg(j, arg)

    def rhs(t, y, c, side):
        s = forcing(t, side)
        for k in range(m):
            a = coef(k, t, side)
            if a == 0.0:
                continue
            if dk[k] == D_IDENTITY or (dk[k] == D_LAG and dp[k] == 0.0):
                v = y
            else:
                arg, adir = delay_arg(k, t, side)
                if arg == t:
                    v = y
                else:
                    eff = side * adir if adir != 0 else 1
                    v = lookup(arg, c, eff)
            s += a * v
        return s

    VAL[0] = x0
    LVAL[0] = x0
    d0 = rhs(T[0], x0, 0, 1)
    DER[0] = d0
    LDER[0] = d0

    for i in range(n - 1):
        t = T[i]
        hstep = T[i + 1] - t
        y = VAL[i]
        k1 = DER[i]
        half = 0.5 * hstep
        tm = t + half
        k2 = rhs(tm, y + half * k1, i, 1)
        k3 = rhs(tm, y + half * k2, i, 1)
        tn = T[i + 1]
        k4 = rhs(tn, y + hstep * k3, i, -1)
        ynew = y + hstep * (k1 + 2.0 * (k2 + k3) + k4) / 6.0
        LVAL[i + 1] = ynew
        LDER[i + 1] = rhs(tn, ynew, i, -1)
        if IMP[i + 1]:
            ynew = GAIN[i + 1] * ynew
        VAL[i + 1] = ynew
        DER[i + 1] = rhs(tn, ynew, i + 1, 1)

    out_val[:] = VAL
    out_der[:] = DER
    out_lval[:] = LVAL
    out_lder[:] = LDER

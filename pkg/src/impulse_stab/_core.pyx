# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled RK4 stepping kernel.

Semantics and operation order follow impulse_stab._core_py exactly; the
two backends are expected to agree to the last bit.  The main loop runs
without the GIL so caller-side thread pools scale.
"""


cdef double _EPS = 2.220446049250313e-16


cdef struct KPack:
    const double* T
    const signed char* IMP
    const double* GAIN
    double* VAL
    double* DER
    double* LVAL
    double* LDER
    int n
    double start
    int m
    const int* ck
    const double* cv
    const double* cxs
    const double* cys
    const int* cxo
    const int* cyo
    const int* dk
    const double* dp
    const double* dxs
    const double* dys
    const int* dxo
    const int* dyo
    int hkind
    double hval
    const double* hxs
    const double* hys
    int hn
    int fkind
    double fval
    const double* fxs
    const double* fys
    int fn
    int linear


cdef inline int _upper(const double* xs, int lo, int hi, double t) noexcept nogil:
    cdef int mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if xs[mid] <= t:
            lo = mid + 1
        else:
            hi = mid
    return lo


cdef inline int _lower(const double* xs, int lo, int hi, double t) noexcept nogil:
    cdef int mid
    while lo < hi:
        mid = (lo + hi) >> 1
        if xs[mid] < t:
            lo = mid + 1
        else:
            hi = mid
    return lo


cdef double _shaped(int kind, double scalar, const double* xs, const double* ys,
                    int lo_x, int hi_x, int lo_y, double t, int side) noexcept nogil:
    cdef int lo, i, j
    cdef double u
    if kind == 0:
        return scalar
    if kind == 1:
        if side >= 0:
            lo = _upper(xs, lo_x, hi_x, t)
        else:
            lo = _lower(xs, lo_x, hi_x, t)
        return ys[lo_y + (lo - lo_x)]
    if t <= xs[lo_x]:
        return ys[lo_y]
    if t >= xs[hi_x - 1]:
        return ys[lo_y + (hi_x - 1 - lo_x)]
    lo = _upper(xs, lo_x, hi_x, t)
    i = lo - 1
    u = (t - xs[i]) / (xs[i + 1] - xs[i])
    j = lo_y + (i - lo_x)
    return ys[j] + u * (ys[j + 1] - ys[j])


cdef inline double _coef(KPack* P, int k, double t, int side) noexcept nogil:
    return _shaped(P.ck[k], P.cv[k], P.cxs, P.cys, P.cxo[k], P.cxo[k + 1], P.cyo[k], t, side)


cdef inline double _forcing(KPack* P, double t, int side) noexcept nogil:
    return _shaped(P.fkind, P.fval, P.fxs, P.fys, 0, P.fn, 0, t, side)


cdef double _delay_arg(KPack* P, int k, double t, int side, int* adir) noexcept nogil:
    # argument of the delayed term; *adir receives the sign of the local
    # slope of h so callers can orient one-sided limits of x(h(t)); at a
    # kink the choice of segment follows the caller's panel side
    cdef int kind = P.dk[k]
    cdef int lo_x, hi_x, lo_y, lo, i, j
    cdef double u, y0, y1
    adir[0] = 1
    if kind == 0:
        return t
    if kind == 1:
        return t - P.dp[k]
    lo_x = P.dxo[k]
    hi_x = P.dxo[k + 1]
    lo_y = P.dyo[k]
    if t <= P.dxs[lo_x]:
        return P.dys[lo_y] - (P.dxs[lo_x] - t)
    if t >= P.dxs[hi_x - 1]:
        return P.dys[lo_y + (hi_x - 1 - lo_x)] + (t - P.dxs[hi_x - 1])
    if side >= 0:
        lo = _upper(P.dxs, lo_x, hi_x, t)
    else:
        lo = _lower(P.dxs, lo_x, hi_x, t)
    i = lo - 1
    u = (t - P.dxs[i]) / (P.dxs[i + 1] - P.dxs[i])
    j = lo_y + (i - lo_x)
    y0 = P.dys[j]
    y1 = P.dys[j + 1]
    adir[0] = 1 if y1 > y0 else (-1 if y1 < y0 else 0)
    return y0 + u * (y1 - y0)


cdef double _hist(KPack* P, double xi) noexcept nogil:
    cdef int lo, i
    cdef double u
    if P.hkind == 0:
        return 0.0
    if P.hkind == 1:
        return P.hval
    if P.hkind == 3:
        lo = _upper(P.hxs, 0, P.hn, xi)
        return P.hys[lo]
    if xi <= P.hxs[0]:
        return P.hys[0]
    if xi >= P.hxs[P.hn - 1]:
        return P.hys[P.hn - 1]
    lo = _upper(P.hxs, 0, P.hn, xi)
    i = lo - 1
    u = (xi - P.hxs[i]) / (P.hxs[i + 1] - P.hxs[i])
    return P.hys[i] + u * (P.hys[i + 1] - P.hys[i])


cdef double _interp_seg(KPack* P, int j, double arg) noexcept nogil:
    cdef double h = P.T[j + 1] - P.T[j]
    cdef double u = (arg - P.T[j]) / h
    cdef double y0 = P.VAL[j]
    cdef double y1 = P.LVAL[j + 1]
    cdef double d0, d1, u2, u3
    if P.linear:
        return y0 + u * (y1 - y0)
    d0 = P.DER[j]
    d1 = P.LDER[j + 1]
    u2 = u * u
    u3 = u2 * u
    return ((2.0 * u3 - 3.0 * u2 + 1.0) * y0
            + (u3 - 2.0 * u2 + u) * (h * d0)
            + (-2.0 * u3 + 3.0 * u2) * y1
            + (u3 - u2) * (h * d1))


cdef double _lookup(KPack* P, double arg, int c, int side) noexcept nogil:
    cdef int j
    cdef double a, tol
    if arg < P.start:
        # snap near-start arguments onto the start node so panels that
        # end exactly where a delayed argument crosses the start read
        # the correct side of the history/solution junction
        a = arg if arg >= 0.0 else -arg
        tol = 4.0 * _EPS * (a if a > 1.0 else 1.0)
        if side >= 0 and P.start - arg <= tol:
            return P.VAL[0]
        return _hist(P, arg)
    if arg > P.T[c]:
        if c >= 1 and not P.IMP[c]:
            return _interp_seg(P, c - 1, arg)
        return P.VAL[c] + (arg - P.T[c]) * P.DER[c]
    j = _upper(P.T, 0, c + 1, arg) - 1
    a = arg if arg >= 0.0 else -arg
    tol = 4.0 * _EPS * (a if a > 1.0 else 1.0)
    if arg - P.T[j] <= tol:
        if side < 0:
            if j == 0:
                # left limit at the start comes from the prehistory
                return _hist(P, P.start)
            if P.IMP[j]:
                return P.LVAL[j]
        return P.VAL[j]
    if j + 1 <= c and P.T[j + 1] - arg <= tol:
        if side < 0 and P.IMP[j + 1]:
            return P.LVAL[j + 1]
        return P.VAL[j + 1]
    return _interp_seg(P, j, arg)


cdef double _rhs(KPack* P, double t, double y, int c, int side) noexcept nogil:
    cdef double s = _forcing(P, t, side)
    cdef double a, v, arg
    cdef int k, adir, eff
    for k in range(P.m):
        a = _coef(P, k, t, side)
        if a == 0.0:
            continue
        if P.dk[k] == 0 or (P.dk[k] == 1 and P.dp[k] == 0.0):
            v = y
        else:
            arg = _delay_arg(P, k, t, side, &adir)
            if arg == t:
                v = y
            else:
                eff = side * adir if adir != 0 else 1
                v = _lookup(P, arg, c, eff)
        s += a * v
    return s


def integrate_mesh(double[::1] node_t, signed char[::1] node_imp, double[::1] node_gain,
                   double x0, double start, int m,
                   int[::1] c_kind, double[::1] c_val, double[::1] c_xs, double[::1] c_ys,
                   int[::1] c_xo, int[::1] c_yo,
                   int[::1] d_kind, double[::1] d_par, double[::1] d_xs, double[::1] d_ys,
                   int[::1] d_xo, int[::1] d_yo,
                   int h_kind, double h_val, double[::1] h_xs, double[::1] h_ys, int h_n,
                   int f_kind, double f_val, double[::1] f_xs, double[::1] f_ys, int f_n,
                   int linear_interp,
                   double[::1] out_val, double[::1] out_der,
                   double[::1] out_lval, double[::1] out_lder):
    cdef KPack P
    P.T = &node_t[0]
    P.IMP = &node_imp[0]
    P.GAIN = &node_gain[0]
    P.VAL = &out_val[0]
    P.DER = &out_der[0]
    P.LVAL = &out_lval[0]
    P.LDER = &out_lder[0]
    P.n = node_t.shape[0]
    P.start = start
    P.m = m
    P.ck = &c_kind[0]
    P.cv = &c_val[0]
    P.cxs = &c_xs[0]
    P.cys = &c_ys[0]
    P.cxo = &c_xo[0]
    P.cyo = &c_yo[0]
    P.dk = &d_kind[0]
    P.dp = &d_par[0]
    P.dxs = &d_xs[0]
    P.dys = &d_ys[0]
    P.dxo = &d_xo[0]
    P.dyo = &d_yo[0]
    P.hkind = h_kind
    P.hval = h_val
    P.hxs = &h_xs[0]
    P.hys = &h_ys[0]
    P.hn = h_n
    P.fkind = f_kind
    P.fval = f_val
    P.fxs = &f_xs[0]
    P.fys = &f_ys[0]
    P.fn = f_n
    P.linear = linear_interp

    cdef int i, n = P.n
    cdef double t, hstep, y, k1, k2, k3, k4, half, tm, tn, ynew, d0

    with nogil:
        P.VAL[0] = x0
        P.LVAL[0] = x0
        d0 = _rhs(&P, P.T[0], x0, 0, 1)
        P.DER[0] = d0
        P.LDER[0] = d0

        for i in range(n - 1):
            t = P.T[i]
            hstep = P.T[i + 1] - t
            y = P.VAL[i]
            k1 = P.DER[i]
            half = 0.5 * hstep
            tm = t + half
            k2 = _rhs(&P, tm, y + half * k1, i, 1)
            k3 = _rhs(&P, tm, y + half * k2, i, 1)
            tn = P.T[i + 1]
            k4 = _rhs(&P, tn, y + hstep * k3, i, -1)
            ynew = y + hstep * (k1 + 2.0 * (k2 + k3) + k4) / 6.0
            P.LVAL[i + 1] = ynew
            P.LDER[i + 1] = _rhs(&P, tn, ynew, i, -1)
            if P.IMP[i + 1]:
                ynew = P.GAIN[i + 1] * ynew
            P.VAL[i + 1] = ynew
            P.DER[i + 1] = _rhs(&P, tn, ynew, i + 1, 1)

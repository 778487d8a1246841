"""Inner loops shared by the public modules.

Every function here is scalar Python that numba compiles when enabled (see
:mod:`invcircle._jit`).  They take and return plain floats and float64
arrays; validation and exceptions live in the callers.  Status codes are
returned instead of raised so the compiled and interpreted paths behave
identically.
"""

import math

import numpy as np

from ._jit import njit

# kernel status codes
OK = 0
ESCAPED = 1
DEGENERATE = 2


@njit
def step(B, M1, M2, x, y, z):
    return y, z, B * x + M1 + M2 * y - z * z


@njit
def step_inverse(B, M1, M2, x, y, z):
    return (z - M1 - M2 * x + y * y) / B, x, y


@njit
def iterate(B, M1, M2, seed, n_transient, n_keep, escape_norm):
    """Iterate from ``seed``; keep the ``n_keep`` points after the transient.

    Returns ``(points, escaped_at)`` where ``escaped_at`` is the global
    iterate index at which the norm first exceeded ``escape_norm`` (-1 if
    never).  The seed itself is iterate 0 and is checked too.
    """
    out = np.empty((n_keep, 3))
    x = seed[0]
    y = seed[1]
    z = seed[2]
    esc2 = escape_norm * escape_norm
    if not (x * x + y * y + z * z <= esc2):
        return out, 0
    total = n_transient + n_keep
    for i in range(total):
        if i >= n_transient:
            j = i - n_transient
            out[j, 0] = x
            out[j, 1] = y
            out[j, 2] = z
        x, y, z = y, z, B * x + M1 + M2 * y - z * z
        if not (x * x + y * y + z * z <= esc2):
            if i + 1 < total:
                return out, i + 1
    return out, -1


@njit
def classify_seed(B, M1, M2, seed, n_transient, n_keep, window, p_max,
                  eps, escape_norm):
    """Recurrence class of the attractor reached from ``seed``.

    Returns the minimal period in ``1..p_max``, 0 for aperiodic and -1 for
    escaped.  The test compares the last ``window`` points with their
    ``p``-shifted successors, so ``n_keep`` must be at least
    ``window + p_max``.
    """
    pts, escaped_at = iterate(B, M1, M2, seed, n_transient, n_keep, escape_norm)
    if escaped_at >= 0:
        return -1
    start = n_keep - window - p_max
    eps2 = eps * eps
    for p in range(1, p_max + 1):
        ok = True
        for k in range(start, start + window):
            dx = pts[k + p, 0] - pts[k, 0]
            dy = pts[k + p, 1] - pts[k, 1]
            dz = pts[k + p, 2] - pts[k, 2]
            if not (dx * dx + dy * dy + dz * dz < eps2):
                ok = False
                break
        if ok:
            return p
    return 0


@njit
def weighted_sum(values, n):
    """Neumaier-compensated weighted Birkhoff average of ``values``.

    ``values[k-1]`` carries index ``k`` for ``k = 1..n-1``; the bump weight
    is evaluated on the fly.  Returns ``(average, weight_total)``.
    """
    s = 0.0
    cs = 0.0
    a = 0.0
    ca = 0.0
    for k in range(1, n):
        t = k / n
        d = t * (1.0 - t)
        w = math.exp(-1.0 / d)
        term = w * values[k - 1]
        tmp = s + term
        if abs(s) >= abs(term):
            cs += (s - tmp) + term
        else:
            cs += (term - tmp) + s
        s = tmp
        tmp = a + w
        if abs(a) >= abs(w):
            ca += (a - tmp) + w
        else:
            ca += (w - tmp) + a
        a = tmp
    total = a + ca
    if total == 0.0:
        return 0.0, 0.0
    return (s + cs) / total, total


@njit
def unwrap_chain(raw, neighbor):
    """Integer offsets along a nearest-prior-neighbour chain.

    ``neighbor[k]`` is an index ``< k`` (ignored for ``k = 0``).  Returns
    ``(offsets, bad)``; ``bad`` is the first index whose rounding is a tie
    within 1e-12, or -1.
    """
    n = raw.shape[0]
    offsets = np.zeros(n, dtype=np.int64)
    lifted = np.empty(n)
    if n == 0:
        return offsets, -1
    lifted[0] = raw[0]
    for k in range(1, n):
        diff = lifted[neighbor[k]] - raw[k]
        r = math.floor(diff + 0.5)
        if abs(abs(diff - r) - 0.5) <= 1e-12:
            return offsets, k
        offsets[k] = np.int64(r)
        lifted[k] = raw[k] + r
    return offsets, -1


@njit
def apply_jacobian(B, M2, z, w0, w1, w2):
    return w1, w2, B * w0 + M2 * w1 - 2.0 * z * w2


@njit
def solve_jacobian(B, M2, z, v0, v1, v2):
    # rows (0,1,0), (0,0,1), (B, M2, -2z)
    return (v2 - M2 * v0 + 2.0 * z * v1) / B, v0, v1


@njit
def forward_frames(B, M2, points, u_init, v_init):
    """Forward Gram-Schmidt pair along ``points``.

    ``U[k], V[k]`` sit at ``points[k]``.  Returns ``(U, V, status)``.
    """
    n = points.shape[0]
    U = np.empty((n, 3))
    V = np.empty((n, 3))
    u0, u1, u2 = u_init[0], u_init[1], u_init[2]
    v0, v1, v2 = v_init[0], v_init[1], v_init[2]
    nu = math.sqrt(u0 * u0 + u1 * u1 + u2 * u2)
    u0, u1, u2 = u0 / nu, u1 / nu, u2 / nu
    d = u0 * v0 + u1 * v1 + u2 * v2
    v0, v1, v2 = v0 - d * u0, v1 - d * u1, v2 - d * u2
    nv = math.sqrt(v0 * v0 + v1 * v1 + v2 * v2)
    if not (nv > 1e-300):
        return U, V, DEGENERATE
    v0, v1, v2 = v0 / nv, v1 / nv, v2 / nv
    for k in range(n):
        U[k, 0] = u0
        U[k, 1] = u1
        U[k, 2] = u2
        V[k, 0] = v0
        V[k, 1] = v1
        V[k, 2] = v2
        if k == n - 1:
            break
        z = points[k, 2]
        a0, a1, a2 = u1, u2, B * u0 + M2 * u1 - 2.0 * z * u2
        na = math.sqrt(a0 * a0 + a1 * a1 + a2 * a2)
        if not (na > 1e-300):
            return U, V, DEGENERATE
        u0, u1, u2 = a0 / na, a1 / na, a2 / na
        b0, b1, b2 = v1, v2, B * v0 + M2 * v1 - 2.0 * z * v2
        d = b0 * u0 + b1 * u1 + b2 * u2
        b0, b1, b2 = b0 - d * u0, b1 - d * u1, b2 - d * u2
        nb = math.sqrt(b0 * b0 + b1 * b1 + b2 * b2)
        if not (nb > 1e-300):
            return U, V, DEGENERATE
        v0, v1, v2 = b0 / nb, b1 / nb, b2 / nb
    return U, V, OK


@njit
def backward_frames(B, M2, points, u_init, v_init):
    """Backward Gram-Schmidt pair; ``u_init, v_init`` sit at ``points[-1]``."""
    n = points.shape[0]
    U = np.empty((n, 3))
    V = np.empty((n, 3))
    u0, u1, u2 = u_init[0], u_init[1], u_init[2]
    v0, v1, v2 = v_init[0], v_init[1], v_init[2]
    nu = math.sqrt(u0 * u0 + u1 * u1 + u2 * u2)
    u0, u1, u2 = u0 / nu, u1 / nu, u2 / nu
    d = u0 * v0 + u1 * v1 + u2 * v2
    v0, v1, v2 = v0 - d * u0, v1 - d * u1, v2 - d * u2
    nv = math.sqrt(v0 * v0 + v1 * v1 + v2 * v2)
    if not (nv > 1e-300):
        return U, V, DEGENERATE
    v0, v1, v2 = v0 / nv, v1 / nv, v2 / nv
    for k in range(n - 1, -1, -1):
        U[k, 0] = u0
        U[k, 1] = u1
        U[k, 2] = u2
        V[k, 0] = v0
        V[k, 1] = v1
        V[k, 2] = v2
        if k == 0:
            break
        z = points[k - 1, 2]
        a0, a1, a2 = (u2 - M2 * u0 + 2.0 * z * u1) / B, u0, u1
        na = math.sqrt(a0 * a0 + a1 * a1 + a2 * a2)
        if not (na > 1e-300):
            return U, V, DEGENERATE
        u0, u1, u2 = a0 / na, a1 / na, a2 / na
        b0, b1, b2 = (v2 - M2 * v0 + 2.0 * z * v1) / B, v0, v1
        d = b0 * u0 + b1 * u1 + b2 * u2
        b0, b1, b2 = b0 - d * u0, b1 - d * u1, b2 - d * u2
        nb = math.sqrt(b0 * b0 + b1 * b1 + b2 * b2)
        if not (nb > 1e-300):
            return U, V, DEGENERATE
        v0, v1, v2 = b0 / nb, b1 / nb, b2 / nb
    return U, V, OK


@njit
def log_growth(B, M2, points, sections):
    """``log |DF(x_k) h_k|`` for unit sections ``h_k`` along ``points``."""
    n = points.shape[0]
    out = np.empty(n)
    for k in range(n):
        h0 = sections[k, 0]
        h1 = sections[k, 1]
        h2 = sections[k, 2]
        a2 = B * h0 + M2 * h1 - 2.0 * points[k, 2] * h2
        out[k] = 0.5 * math.log(h1 * h1 + h2 * h2 + a2 * a2)
    return out


@njit
def _cell_hash(ix, iy, mask):
    return ((ix * 73856093) ^ (iy * 19349663)) & mask


@njit
def nearest_prior_grid(X, brute_below):
    """Exact nearest prior row for every row of ``X``.

    Rows are inserted one at a time into a uniform hash grid keyed on the
    first two coordinates; each query walks square rings of cells outward
    and stops once the ring's lower bound on distance exceeds the best
    full-dimensional distance found.  Falls back to a linear scan of the
    prior rows when the ring walk would visit more cells than that.
    """
    n, dim = X.shape
    nb = np.zeros(n, dtype=np.int64)
    dist = np.zeros(n)
    if n < 2:
        return nb, dist
    lo0 = X[0, 0]
    hi0 = X[0, 0]
    lo1 = X[0, 1]
    hi1 = X[0, 1]
    for k in range(n):
        lo0 = min(lo0, X[k, 0])
        hi0 = max(hi0, X[k, 0])
        lo1 = min(lo1, X[k, 1])
        hi1 = max(hi1, X[k, 1])
    diag = math.sqrt((hi0 - lo0) ** 2 + (hi1 - lo1) ** 2)
    h = 8.0 * diag / n
    if not (h > 0.0):
        h = 1.0
    size = 1
    while size < 2 * n:
        size *= 2
    mask = size - 1
    head = np.full(size, -1, dtype=np.int64)
    nxt = np.full(n, -1, dtype=np.int64)
    cx = np.empty(n, dtype=np.int64)
    cy = np.empty(n, dtype=np.int64)
    for k in range(n):
        cx[k] = np.int64(math.floor((X[k, 0] - lo0) / h))
        cy[k] = np.int64(math.floor((X[k, 1] - lo1) / h))
    for k in range(n):
        if k > 0:
            best = np.inf
            bi = -1
            if k < brute_below:
                for j in range(k):
                    d2 = 0.0
                    for c in range(dim):
                        t = X[k, c] - X[j, c]
                        d2 += t * t
                    if d2 < best:
                        best = d2
                        bi = j
            else:
                visited = 0
                r = 0
                while True:
                    for ix in range(cx[k] - r, cx[k] + r + 1):
                        edge_x = ix == cx[k] - r or ix == cx[k] + r
                        step_y = 1 if edge_x else 2 * r
                        iy = cy[k] - r
                        while iy <= cy[k] + r:
                            visited += 1
                            j = head[_cell_hash(ix, iy, mask)]
                            while j >= 0:
                                if cx[j] == ix and cy[j] == iy:
                                    d2 = 0.0
                                    for c in range(dim):
                                        t = X[k, c] - X[j, c]
                                        d2 += t * t
                                    if d2 < best or (d2 == best and j < bi):
                                        best = d2
                                        bi = j
                                j = nxt[j]
                            iy += step_y
                    bound = r * h
                    if bi >= 0 and best <= bound * bound:
                        break
                    if visited > k:
                        # ring walk too wide: scan the prior rows directly
                        best = np.inf
                        bi = -1
                        for j in range(k):
                            d2 = 0.0
                            for c in range(dim):
                                t = X[k, c] - X[j, c]
                                d2 += t * t
                            if d2 < best:
                                best = d2
                                bi = j
                        break
                    r += 1
            nb[k] = bi
            dist[k] = math.sqrt(best)
        slot = _cell_hash(cx[k], cy[k], mask)
        nxt[k] = head[slot]
        head[slot] = k
    return nb, dist

"""Pure-numpy kernels (reference semantics for the numba versions).

Sign vectors are indexed by an integer mask ``m`` in ``[0, 2**(n-1))``:
coordinate 0 is always ``+1`` and coordinate ``j >= 1`` is ``-1`` exactly when
bit ``j-1`` of ``m`` is set.
"""

import numpy as np

_CHUNK = 1 << 15


def _mask_signs(masks, n):
    bits = (masks[:, None] >> np.arange(n - 1, dtype=np.int64)) & 1
    signs = np.ones((masks.size, n), dtype=np.float64)
    signs[:, 1:] -= 2.0 * bits
    return signs


def cut_values(n, eu, ev):
    """Cut size of every sign pattern, as an int64 array indexed by mask."""
    total = 1 << (n - 1)
    out = np.empty(total, dtype=np.int64)
    shifts = np.arange(n - 1, dtype=np.int64)
    for start in range(0, total, _CHUNK):
        masks = np.arange(start, min(total, start + _CHUNK), dtype=np.int64)
        side = np.zeros((masks.size, n), dtype=np.int8)
        side[:, 1:] = (masks[:, None] >> shifts) & 1
        out[start:start + masks.size] = (side[:, eu] != side[:, ev]).sum(axis=1)
    return out


def sign_power_sums(m, p):
    """``sum_i |(M x)_i|**p`` for every sign pattern ``x``, indexed by mask."""
    m = np.ascontiguousarray(m, dtype=np.float64)
    n = m.shape[1]
    total = 1 << (n - 1)
    out = np.empty(total, dtype=np.float64)
    for start in range(0, total, _CHUNK):
        masks = np.arange(start, min(total, start + _CHUNK), dtype=np.int64)
        y = _mask_signs(masks, n) @ m.T
        out[start:start + masks.size] = (np.abs(y) ** p).sum(axis=1)
    return out


def _pnorm_cols(x, p):
    return (np.abs(x) ** p).sum(axis=0) ** (1.0 / p)


def ascent_batch(m, x0, p, tol, max_iters, stall):
    """Nonlinear power iteration for ``max ||Mx||_p / ||x||_p``, one run per column of ``x0``.

    Returns ``(x, values, iters, converged, worst_drop)``; ``worst_drop`` is
    the largest relative decrease of the objective seen in each run.
    """
    m = np.ascontiguousarray(m, dtype=np.float64)
    x = np.array(x0, dtype=np.float64, copy=True)
    runs = x.shape[1]
    q = 1.0 / (p - 1.0)
    x /= _pnorm_cols(x, p)
    val = _pnorm_cols(m @ x, p)
    iters = np.zeros(runs, dtype=np.int64)
    calm = np.zeros(runs, dtype=np.int64)
    worst = np.zeros(runs, dtype=np.float64)
    done = np.zeros(runs, dtype=bool)
    for _ in range(max_iters):
        live = np.flatnonzero(~done)
        if live.size == 0:
            break
        xl = x[:, live]
        y = m @ xl
        z = np.sign(y) * np.abs(y) ** (p - 1.0)
        w = m.T @ z
        dead = ~np.any(w != 0.0, axis=0)
        if dead.any():
            done[live[dead]] = True
            live, w = live[~dead], w[:, ~dead]
            if live.size == 0:
                break
        xn = np.sign(w) * np.abs(w) ** q
        xn /= _pnorm_cols(xn, p)
        new = _pnorm_cols(m @ xn, p)
        old = val[live]
        scale = np.where(old > 0.0, old, 1.0)
        rel = (new - old) / scale
        worst[live] = np.maximum(worst[live], -rel)
        better = new >= old
        upd = live[better]
        x[:, upd] = xn[:, better]
        val[upd] = new[better]
        iters[live] += 1
        calm[live] = np.where(rel < tol, calm[live] + 1, 0)
        done[live[calm[live] >= stall]] = True
    converged = done.copy()
    return x, val, iters, converged, worst


def gadget_values(y, p):
    """Row-wise ``sum_i |y_i - y_{i+1}|**p + |y_i + y_{i+1}|**p`` with wraparound."""
    y = np.asarray(y, dtype=np.float64)
    nxt = np.roll(y, -1, axis=1)
    return (np.abs(y - nxt) ** p + np.abs(y + nxt) ** p).sum(axis=1)

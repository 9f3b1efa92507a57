"""numba versions of the kernels in ``_numpy``; same signatures and semantics."""

import numba as nb
import numpy as np

_RESYNC = 4096


@nb.njit(cache=True)
def _ctz(k):
    b = 0
    while (k & 1) == 0:
        k >>= 1
        b += 1
    return b


@nb.njit(cache=True)
def _cut_values(n, eu, ev):
    total = 1 << (n - 1)
    deg = np.zeros(n, dtype=np.int64)
    for e in range(eu.size):
        deg[eu[e]] += 1
        deg[ev[e]] += 1
    start = np.zeros(n + 1, dtype=np.int64)
    for v in range(n):
        start[v + 1] = start[v] + deg[v]
    fill = start[:-1].copy()
    nbr = np.empty(start[n], dtype=np.int64)
    for e in range(eu.size):
        nbr[fill[eu[e]]] = ev[e]
        fill[eu[e]] += 1
        nbr[fill[ev[e]]] = eu[e]
        fill[ev[e]] += 1
    side = np.zeros(n, dtype=np.int8)
    out = np.empty(total, dtype=np.int64)
    out[0] = 0
    g = 0
    cut = 0
    for k in range(1, total):
        b = _ctz(k)
        v = b + 1
        for t in range(start[v], start[v + 1]):
            if side[nbr[t]] == side[v]:
                cut += 1
            else:
                cut -= 1
        side[v] ^= 1
        g ^= 1 << b
        out[g] = cut
    return out


def cut_values(n, eu, ev):
    return _cut_values(int(n), np.asarray(eu, dtype=np.int64), np.asarray(ev, dtype=np.int64))


@nb.njit(cache=True)
def _power_sum(y, p):
    s = 0.0
    for i in range(y.size):
        s += abs(y[i]) ** p
    return s


@nb.njit(cache=True)
def _sign_power_sums(m, p):
    rows, n = m.shape
    total = 1 << (n - 1)
    out = np.empty(total, dtype=np.float64)
    signs = np.ones(n)
    y = np.zeros(rows)
    for j in range(n):
        for i in range(rows):
            y[i] += m[i, j]
    out[0] = _power_sum(y, p)
    g = 0
    for k in range(1, total):
        b = _ctz(k)
        j = b + 1
        s = signs[j]
        for i in range(rows):
            y[i] -= 2.0 * s * m[i, j]
        signs[j] = -s
        g ^= 1 << b
        if k % _RESYNC == 0:
            for i in range(rows):
                acc = 0.0
                for c in range(n):
                    acc += signs[c] * m[i, c]
                y[i] = acc
        out[g] = _power_sum(y, p)
    return out


def sign_power_sums(m, p):
    return _sign_power_sums(np.ascontiguousarray(m, dtype=np.float64), float(p))


@nb.njit(cache=True)
def _pnorm(v, p):
    return _power_sum(v, p) ** (1.0 / p)


@nb.njit(cache=True)
def _ascent_batch(m, mt, x0, p, tol, max_iters, stall):
    rows, n = m.shape
    runs = x0.shape[1]
    q = 1.0 / (p - 1.0)
    xs = np.empty((n, runs))
    vals = np.empty(runs)
    iters = np.zeros(runs, dtype=np.int64)
    conv = np.zeros(runs, dtype=np.bool_)
    worst = np.zeros(runs)
    x = np.empty(n)
    xn = np.empty(n)
    y = np.empty(rows)
    w = np.empty(n)
    for r in range(runs):
        for j in range(n):
            x[j] = x0[j, r]
        nx = _pnorm(x, p)
        for j in range(n):
            x[j] /= nx
        y[:] = m @ x
        val = _pnorm(y, p)
        calm = 0
        it = 0
        done = False
        while it < max_iters:
            y[:] = m @ x
            for i in range(rows):
                yi = y[i]
                if yi > 0.0:
                    y[i] = yi ** (p - 1.0)
                elif yi < 0.0:
                    y[i] = -((-yi) ** (p - 1.0))
            w[:] = mt @ y
            alive = False
            for j in range(n):
                wj = w[j]
                if wj > 0.0:
                    xn[j] = wj ** q
                    alive = True
                elif wj < 0.0:
                    xn[j] = -((-wj) ** q)
                    alive = True
                else:
                    xn[j] = 0.0
            if not alive:
                done = True
                break
            nx = _pnorm(xn, p)
            for j in range(n):
                xn[j] /= nx
            y[:] = m @ xn
            new = _pnorm(y, p)
            scale = val if val > 0.0 else 1.0
            rel = (new - val) / scale
            if -rel > worst[r]:
                worst[r] = -rel
            if new >= val:
                x[:] = xn
                val = new
            it += 1
            if rel < tol:
                calm += 1
            else:
                calm = 0
            if calm >= stall:
                done = True
                break
        xs[:, r] = x
        vals[r] = val
        iters[r] = it
        conv[r] = done
    return xs, vals, iters, conv, worst


def ascent_batch(m, x0, p, tol, max_iters, stall):
    m = np.ascontiguousarray(m, dtype=np.float64)
    return _ascent_batch(
        m, np.ascontiguousarray(m.T),
        np.ascontiguousarray(x0, dtype=np.float64),
        float(p), float(tol), int(max_iters), int(stall),
    )


@nb.njit(cache=True)
def _gadget_values(y, p):
    s, n = y.shape
    out = np.empty(s)
    for r in range(s):
        acc = 0.0
        for i in range(n):
            a = y[r, i]
            b = y[r, (i + 1) % n]
            acc += abs(a - b) ** p + abs(a + b) ** p
        out[r] = acc
    return out


def gadget_values(y, p):
    return _gadget_values(np.ascontiguousarray(y, dtype=np.float64), float(p))

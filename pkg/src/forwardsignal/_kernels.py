"""
Compiled whole-series loops.

Each loop repeats, expression for expression, the arithmetic of the matching
streaming class so the two paths stay bit-identical. Change both together.
"""
import math

import numpy as np
from numba import njit


@njit(cache=True)
def _ratio_index(up, down):
    if down == 0.0:
        return 50.0 if up == 0.0 else 100.0
    if up == 0.0:
        return 0.0
    return 100.0 * (1.0 - 1.0 / (1.0 + up / down))


@njit(cache=True)
def indicators(high, low, close, volume, rsi_w, mfi_w, fast, slow, signal, bb_w, bb_k):
    n = close.size
    mfi = np.full(n, np.nan)
    rsi = np.full(n, np.nan)
    bb = np.full(n, np.nan)
    macd = np.full(n, np.nan)

    # rsi
    g = 0.0
    l = 0.0
    for t in range(1, n):
        move = close[t] - close[t - 1]
        gain = move if move > 0.0 else 0.0
        loss = -move if move < 0.0 else 0.0
        if t < rsi_w:
            g += gain
            l += loss
            continue
        if t == rsi_w:
            g = (g + gain) / rsi_w
            l = (l + loss) / rsi_w
        else:
            g = (g * (rsi_w - 1) + gain) / rsi_w
            l = (l * (rsi_w - 1) + loss) / rsi_w
        rsi[t] = _ratio_index(g, l)

    # mfi: pos/neg flow of move t lives at index t (index 0 unused)
    pos = np.zeros(n)
    neg = np.zeros(n)
    prev_tp = 0.0
    for t in range(n):
        tp = (high[t] + low[t] + close[t]) / 3.0
        if t > 0:
            flow = tp * volume[t]
            if tp > prev_tp:
                pos[t] = flow
            elif tp < prev_tp:
                neg[t] = flow
            if t >= mfi_w:
                ps = 0.0
                ns = 0.0
                for j in range(t - mfi_w + 1, t + 1):
                    ps += pos[j]
                    ns += neg[j]
                mfi[t] = _ratio_index(ps, ns)
        prev_tp = tp

    # macd
    a_fast = 2.0 / (fast + 1.0)
    a_slow = 2.0 / (slow + 1.0)
    a_sig = 2.0 / (signal + 1.0)
    ef = 0.0
    es = 0.0
    sig = 0.0
    for t in range(n):
        x = close[t]
        if t == 0:
            ef = x
            es = x
        else:
            ef = ef + a_fast * (x - ef)
            es = es + a_slow * (x - es)
        line = ef - es
        if t == 0:
            sig = line
        else:
            sig = sig + a_sig * (line - sig)
        if t + 1 >= slow:
            macd[t] = line - sig

    # bollinger %b
    for t in range(bb_w - 1, n):
        total = 0.0
        for j in range(t - bb_w + 1, t + 1):
            total += close[j]
        mean = total / bb_w
        ss = 0.0
        for j in range(t - bb_w + 1, t + 1):
            ss += (close[j] - mean) * (close[j] - mean)
        sd = math.sqrt(ss / bb_w)
        if sd == 0.0:
            bb[t] = 0.5
        else:
            bb[t] = 0.5 + (close[t] - mean) / (2.0 * bb_k * sd)

    return mfi, rsi, bb, macd


@njit(cache=True)
def _sift_up(heap, i):
    # min-heap on heap[:]
    x = heap[i]
    while i > 0:
        parent = (i - 1) >> 1
        if heap[parent] <= x:
            break
        heap[i] = heap[parent]
        i = parent
    heap[i] = x


@njit(cache=True)
def _sift_down(heap, size):
    x = heap[0]
    i = 0
    while True:
        child = 2 * i + 1
        if child >= size:
            break
        if child + 1 < size and heap[child + 1] < heap[child]:
            child += 1
        if heap[child] >= x:
            break
        heap[i] = heap[child]
        i = child
    heap[i] = x


@njit(cache=True)
def _heap_push(heap, size, x):
    heap[size] = x
    _sift_up(heap, size)
    return size + 1


@njit(cache=True)
def _heap_pop(heap, size):
    top = heap[0]
    size -= 1
    if size > 0:
        heap[0] = heap[size]
        _sift_down(heap, size)
    return top, size


@njit(cache=True)
def expanding_center(values):
    """values[t] - median(values[:t]); 0 at t = 0."""
    n = values.size
    out = np.empty(n)
    lo = np.empty(n // 2 + 2)  # negated max-heap
    hi = np.empty(n // 2 + 2)
    nlo = 0
    nhi = 0
    for t in range(n):
        x = values[t]
        if nlo == 0:
            out[t] = 0.0
        elif nlo > nhi:
            out[t] = x - (-lo[0])
        else:
            out[t] = x - (-lo[0] + hi[0]) / 2.0
        if nlo == 0 or x <= -lo[0]:
            nlo = _heap_push(lo, nlo, -x)
        else:
            nhi = _heap_push(hi, nhi, x)
        if nlo > nhi + 1:
            top, nlo = _heap_pop(lo, nlo)
            nhi = _heap_push(hi, nhi, -top)
        elif nhi > nlo:
            top, nhi = _heap_pop(hi, nhi)
            nlo = _heap_push(lo, nlo, -top)
    return out


@njit(cache=True)
def kalman(z, q, r):
    n = z.size
    out = np.empty(n)
    x = 0.0
    p_var = 0.0
    for t in range(n):
        if t == 0:
            x = z[0]
            p_var = r
        else:
            p = p_var + q
            k = p / (p + r)
            x = x + k * (z[t] - x)
            p_var = (1.0 - k) * p
        out[t] = x
    return out


@njit(cache=True)
def derivative(x, span):
    n = x.size
    out = np.empty(n)
    d = np.zeros(n)
    for t in range(n):
        if t > 0:
            d[t] = x[t] - x[t - 1]
        lo = t - span + 1
        if lo < 0:
            lo = 0
        total = 0.0
        for j in range(lo, t + 1):
            total += d[j]
        out[t] = total / (t + 1 - lo)
    return out


@njit(cache=True)
def forward(f0, df0, gain):
    n = f0.size
    c1 = np.empty(n)
    c2 = np.empty(n)
    f = np.empty(n)
    for t in range(n):
        a = math.tanh(abs(f0[t]))
        b = 1.0 - math.tanh(abs(f0[t] / 2.0))
        c1[t] = a
        c2[t] = b
        f[t] = a * f0[t] + gain * b * df0[t]
    return c1, c2, f


@njit(cache=True)
def pipeline(mfi, rsi, bb, macd, start, a_mfi, a_rsi, a_bb, a_macd, q, r, span, gain, use_raw):
    n = mfi.size
    cm = np.full(n, np.nan)
    cr = np.full(n, np.nan)
    cb = np.full(n, np.nan)
    cd = np.full(n, np.nan)
    f0_raw = np.full(n, np.nan)
    f0 = np.full(n, np.nan)
    df0 = np.full(n, np.nan)
    c1 = np.full(n, np.nan)
    c2 = np.full(n, np.nan)
    f = np.full(n, np.nan)
    if start >= n:
        return cm, cr, cb, cd, f0_raw, f0, df0, c1, c2, f
    cm[start:] = expanding_center(mfi[start:])
    cr[start:] = expanding_center(rsi[start:])
    cb[start:] = expanding_center(bb[start:])
    cd[start:] = expanding_center(macd[start:])
    for t in range(start, n):
        f0_raw[t] = (a_mfi * cm[t] + a_rsi * cr[t] + a_bb * cb[t] + a_macd * cd[t]) / 4.0
    f0[start:] = kalman(f0_raw[start:], q, r)
    base = f0_raw[start:] if use_raw else f0[start:]
    df0[start:] = derivative(base, span)
    a, b, c = forward(base, df0[start:], gain)
    c1[start:] = a
    c2[start:] = b
    f[start:] = c
    return cm, cr, cb, cd, f0_raw, f0, df0, c1, c2, f


@njit(cache=True)
def hysteresis(s, theta, p_init):
    n = s.size
    p = np.empty(n, dtype=np.int8)
    prev = p_init
    for t in range(n):
        x = s[t]
        if prev == 0 and x > theta:
            prev = 1
        elif prev == 1 and x < -theta:
            prev = 0
        p[t] = prev
    return p

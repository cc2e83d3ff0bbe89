"""Slow, loop-based reference implementations used as test oracles.

They share no code with the package and favour plain arithmetic over numpy
vectorisation so that a bug in one is unlikely to be mirrored in the other.
"""

import math


def _window(t, w, lo_valid, hi_valid):
    """Inclusive index range of the centred window, shrunk to [lo_valid, hi_valid]."""
    return max(t - w // 2, lo_valid), min(t + (w - 1) // 2, hi_valid)


def _norm(dx, dy):
    return math.sqrt(dx * dx + dy * dy)


def _windowed(series, n, w, first_index):
    out = []
    last_index = first_index + len(series) - 1
    for t in range(n):
        a, b = _window(t, w, first_index, last_index)
        vals = [series[k - first_index] for k in range(a, b + 1)]
        out.append(sum(vals) / len(vals) if vals else 0.0)
    return out


def displacement_profile(pts, w):
    d = [_norm(pts[k][0] - pts[k - 1][0], pts[k][1] - pts[k - 1][1]) for k in range(1, len(pts))]
    return _windowed(d, len(pts), w, 1)


def velocity_profile(pts, w):
    v = [_norm(pts[k + 1][0] - pts[k][0], pts[k + 1][1] - pts[k][1]) for k in range(len(pts) - 1)]
    return _windowed(v, len(pts), w, 0)


def acceleration_profile(pts, w):
    a = [
        _norm(pts[k + 1][0] - 2 * pts[k][0] + pts[k - 1][0], pts[k + 1][1] - 2 * pts[k][1] + pts[k - 1][1])
        for k in range(1, len(pts) - 1)
    ]
    return _windowed(a, len(pts), w, 1)


def covariance_profile(pts, w):
    n = len(pts)
    out = []
    for t in range(n):
        a, b = _window(t, w, 0, n - 1)
        seg = pts[a:b + 1]
        m = len(seg)
        if m < 2:
            out.append(0.0)
            continue
        mx = sum(p[0] for p in seg) / m
        my = sum(p[1] for p in seg) / m
        sxx = sum((p[0] - mx) ** 2 for p in seg) / (m - 1)
        syy = sum((p[1] - my) ** 2 for p in seg) / (m - 1)
        sxy = sum((p[0] - mx) * (p[1] - my) for p in seg) / (m - 1)
        out.append(math.sqrt(sxx * sxx + syy * syy + 2 * sxy * sxy))
    return out


def _power_variance(seq):
    m = len(seq)
    mean = sum(seq) / m
    win = [0.5 - 0.5 * math.cos(2 * math.pi * k / m) for k in range(m)]
    z = [(seq[k] - mean) * win[k] for k in range(m)]
    power = []
    for f in range(m // 2 + 1):
        re = sum(z[k] * math.cos(2 * math.pi * f * k / m) for k in range(m))
        im = -sum(z[k] * math.sin(2 * math.pi * f * k / m) for k in range(m))
        power.append(re * re + im * im)
    mu = sum(power) / len(power)
    return sum((p - mu) ** 2 for p in power) / len(power)


def frequency_profile(pts, w):
    n = len(pts)
    out = []
    for t in range(n):
        a, b = _window(t, w, 0, n - 1)
        seg = pts[a:b + 1]
        if len(seg) < 2:
            out.append(0.0)
            continue
        out.append(math.sqrt(_power_variance([p[0] for p in seg]) + _power_variance([p[1] for p in seg])))
    return out


PROFILES = {
    "displacement": displacement_profile,
    "velocity": velocity_profile,
    "acceleration": acceleration_profile,
    "covariance": covariance_profile,
    "frequency": frequency_profile,
}


def median_filter(values, lengths):
    """Sort-based centred median with per-sample window lengths."""
    n = len(values)
    out = []
    for t in range(n):
        a, b = _window(t, int(lengths[t]), 0, n - 1)
        s = sorted(values[a:b + 1])
        m = len(s)
        out.append(s[m // 2] if m % 2 else 0.5 * (s[m // 2 - 1] + s[m // 2]))
    return out


def positional_metrics(pred, truth, thresholds):
    n = len(pred)
    hits = {th: 0 for th in thresholds}
    l1, l2, sq = [], [], []
    for (px, py), (tx, ty) in zip(pred, truth):
        dx, dy = px - tx, py - ty
        e = math.sqrt(dx * dx + dy * dy)
        for th in thresholds:
            if e <= th:
                hits[th] += 1
        l2.append(e)
        l1.append(abs(dx) + abs(dy))
        sq.append(dx * dx + dy * dy)
    return {th: hits[th] / n for th in thresholds}, math.fsum(l2) / n, math.fsum(l1) / n, math.fsum(sq) / n


def roi_scan(events, t_lo, t_hi, cx, cy, r):
    return [e for e in events if t_lo <= e[0] < t_hi and abs(e[1] - cx) <= r and abs(e[2] - cy) <= r]


def kl(p, q):
    return sum(a * math.log(a / b) for a, b in zip(p, q))

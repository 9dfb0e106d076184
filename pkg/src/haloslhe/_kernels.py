"""Compiled inner loops.

Every output element is produced by a single sequential accumulation in a
fixed order, so results do not depend on how callers split the work.
"""

import math

import numba
import numpy as np


@numba.njit(cache=True)
def box_sum_rows(a, r):
    """Unnormalized (2r+1)-tap running sum along axis 1, replicate border."""
    h, w = a.shape
    out = np.empty_like(a)
    last = w - 1
    for i in range(h):
        s = 0.0
        for k in range(-r, r + 1):
            s += a[i, min(max(k, 0), last)]
        out[i, 0] = s
        for j in range(1, w):
            s += a[i, min(j + r, last)] - a[i, max(j - r - 1, 0)]
            out[i, j] = s
    return out


@numba.njit(cache=True)
def box_sum_cols(a, r):
    """Unnormalized (2r+1)-tap running sum along axis 0, replicate border."""
    h, w = a.shape
    out = np.empty_like(a)
    last = h - 1
    s = np.zeros(w)
    for k in range(-r, r + 1):
        row = min(max(k, 0), last)
        for j in range(w):
            s[j] += a[row, j]
    for j in range(w):
        out[0, j] = s[j]
    for i in range(1, h):
        add = min(i + r, last)
        sub = max(i - r - 1, 0)
        for j in range(w):
            s[j] += a[add, j] - a[sub, j]
            out[i, j] = s[j]
    return out


@numba.njit(cache=True)
def _window_weight_sum(wy, wx, radius):
    # same association order as reference_rows, with every CDF term equal to 1
    row = wx[radius]
    for dx in range(1, radius + 1):
        row += wx[radius + dx] * 2.0
    total = wy[radius] * row
    for dy in range(1, radius + 1):
        total += wy[radius + dy] * row + wy[radius - dy] * row
    return total


@numba.njit(cache=True)
def reference_rows(padded, inv_scale, wy, wx, radius, row_start, row_stop):
    """Brute-force smoothed local CDF for rows ``row_start:row_stop``.

    ``padded`` holds level values with a replicate border of ``radius``;
    ``inv_scale`` is ``1 / (sigma * sqrt(2))`` per output pixel. Window terms
    are combined in mirror pairs (dx with -dx, then dy with -dy) so the
    rounding is unchanged when the image is flipped.
    """
    width = padded.shape[1] - 2 * radius
    out = np.empty((row_stop - row_start, width))
    norm = _window_weight_sum(wy, wx, radius)
    for i in range(row_start, row_stop):
        ci = i + radius
        for j in range(width):
            cj = j + radius
            center = padded[ci, cj]
            g = -inv_scale[i, j]
            total = 0.0
            for dy in range(radius + 1):
                pair = 0.0
                for sign in range(2):
                    if dy == 0 and sign == 1:
                        break
                    y = ci + dy if sign == 0 else ci - dy
                    row = wx[radius] * 0.5 * math.erfc((center - padded[y, cj]) * g)
                    for dx in range(1, radius + 1):
                        left = 0.5 * math.erfc((center - padded[y, cj - dx]) * g)
                        right = 0.5 * math.erfc((center - padded[y, cj + dx]) * g)
                        row += wx[radius + dx] * (right + left)
                    row = wy[radius + dy] * row
                    pair = row if sign == 0 else pair + row
                total += pair
            out[i - row_start, j] = total / norm
    return out


@numba.njit(cache=True)
def accumulate_bin(out, levels, base, mass, moment, lut, d0, inv_step, lut_row, lut_frac):
    """Add one bin's contribution ``mass * Phi(level - bin_mean)``.

    ``mass`` and ``moment`` are the kernel-filtered indicator of the bin and
    the filtered ``(level - base)`` of its members. ``lut[k, m]`` tabulates
    the tonal CDF for sigma level ``k`` on the difference grid
    ``d0 + m / inv_step``; pixels interpolate linearly in difference and
    between sigma rows ``lut_row`` and ``lut_row + 1``.
    """
    h, w = levels.shape
    for i in range(h):
        for j in range(w):
            c = mass[i, j]
            if c <= 0.0:
                continue
            d = (levels[i, j] - base) - moment[i, j] / c
            out[i, j] += c * _tonal_lookup(lut, lut_row[i, j], lut_frac[i, j], d, d0, inv_step)


@numba.njit(cache=True, inline="always")
def _tonal_lookup(lut, k, t, d, d0, inv_step):
    n_cols = lut.shape[1]
    x = (d - d0) * inv_step
    m = int(math.floor(x))
    if m < 0:
        m = 0
        f = 0.0
    elif m >= n_cols - 1:
        m = n_cols - 2
        f = 1.0
    else:
        f = x - m
    a = lut[k, m]
    v = a + f * (lut[k, m + 1] - a)
    if t > 0.0:
        b = lut[k + 1, m]
        v1 = b + f * (lut[k + 1, m + 1] - b)
        v = v + t * (v1 - v)
    return v


@numba.njit(cache=True)
def sliding_box_equalize(idx, levels, bases, r, lut, d0, inv_step, lut_row, lut_frac):
    """Binned equalizer for a box window using sliding histograms.

    Per-column histograms over the 2r+1 window rows are updated once per
    output row; the window histogram is updated per pixel by adding the
    entering column and removing the leaving one. Each bin keeps a count and
    the sum of ``level - bases[bin]`` of its members. Work per pixel is
    O(bins) with no dependence on ``r`` beyond the row start-up.
    """
    h, w = idx.shape
    nb = bases.shape[0]
    col_n = np.zeros((w, nb))
    col_s = np.zeros((w, nb))
    hn = np.empty(nb)
    hs = np.empty(nb)
    n_cols = lut.shape[1]
    out = np.empty((h, w))
    area = float((2 * r + 1) ** 2)
    last_y = h - 1
    last_x = w - 1
    for y in range(-r, r + 1):
        yy = min(max(y, 0), last_y)
        for x in range(w):
            b = idx[yy, x]
            col_n[x, b] += 1.0
            col_s[x, b] += levels[yy, x] - bases[b]
    for i in range(h):
        if i > 0:
            ya = min(i + r, last_y)
            ys = max(i - r - 1, 0)
            for x in range(w):
                b = idx[ya, x]
                col_n[x, b] += 1.0
                col_s[x, b] += levels[ya, x] - bases[b]
                b = idx[ys, x]
                col_n[x, b] -= 1.0
                col_s[x, b] -= levels[ys, x] - bases[b]
        hn[:] = 0.0
        hs[:] = 0.0
        for x in range(-r, r + 1):
            xx = min(max(x, 0), last_x)
            for b in range(nb):
                hn[b] += col_n[xx, b]
                hs[b] += col_s[xx, b]
        for j in range(w):
            if j > 0:
                xa = min(j + r, last_x)
                xs = max(j - r - 1, 0)
                for b in range(nb):
                    hn[b] += col_n[xa, b] - col_n[xs, b]
                    hs[b] += col_s[xa, b] - col_s[xs, b]
            lv = levels[i, j]
            k = lut_row[i, j]
            t = lut_frac[i, j]
            acc = 0.0
            # every bin is evaluated, empty or not, so the cost per pixel
            # does not depend on how many bins the window happens to hit
            for b in range(nb):
                c = hn[b]
                d = (lv - bases[b]) - (hs[b] / c if c > 0.0 else 0.0)
                x = (d - d0) * inv_step
                m = int(math.floor(x))
                if m < 0:
                    m = 0
                    f = 0.0
                elif m >= n_cols - 1:
                    m = n_cols - 2
                    f = 1.0
                else:
                    f = x - m
                a = lut[k, m]
                v = a + f * (lut[k, m + 1] - a)
                if t > 0.0:
                    a = lut[k + 1, m]
                    v += t * (a + f * (lut[k + 1, m + 1] - a) - v)
                acc += c * v
            out[i, j] = acc / area
    return out

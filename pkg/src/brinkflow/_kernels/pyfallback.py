"""Pure-Python fallback for the compiled kernels.

Same arithmetic, same sweep order as ``_core.pyx``, written with plain
loops.  Orders of magnitude slower; meant for environments without a C
compiler and for cross-checking the extension (see benchmarks/).
"""

import numpy as np

BACKEND_NAME = "python"


def residual(h, c2, u1, u2, p, b1, b2, b3,
             u1l, u1r, u1b, u1t, u2l, u2r, u2b, u2t, r1, r2, r3):
    n = p.shape[0]
    ih = 1.0 / h
    ih2 = ih * ih
    for j in range(n):
        for i in range(n - 1):
            uw = u1[j, i - 1] if i > 0 else u1l[j]
            ue = u1[j, i + 1] if i < n - 2 else u1r[j]
            us = u1[j - 1, i] if j > 0 else 2.0 * u1b[i] - u1[0, i]
            un = u1[j + 1, i] if j < n - 1 else 2.0 * u1t[i] - u1[n - 1, i]
            lap = (uw + ue + us + un - 4.0 * u1[j, i]) * ih2
            r1[j, i] = b1[j, i] - (lap - c2 * u1[j, i] - (p[j, i + 1] - p[j, i]) * ih)
    for j in range(n - 1):
        for i in range(n):
            uw = u2[j, i - 1] if i > 0 else 2.0 * u2l[j] - u2[j, 0]
            ue = u2[j, i + 1] if i < n - 1 else 2.0 * u2r[j] - u2[j, n - 1]
            us = u2[j - 1, i] if j > 0 else u2b[i]
            un = u2[j + 1, i] if j < n - 2 else u2t[i]
            lap = (uw + ue + us + un - 4.0 * u2[j, i]) * ih2
            r2[j, i] = b2[j, i] - (lap - c2 * u2[j, i] - (p[j + 1, i] - p[j, i]) * ih)
    for j in range(n):
        for i in range(n):
            uw = u1[j, i - 1] if i > 0 else u1l[j]
            ue = u1[j, i] if i < n - 1 else u1r[j]
            us = u2[j - 1, i] if j > 0 else u2b[i]
            un = u2[j, i] if j < n - 1 else u2t[i]
            r3[j, i] = b3[j, i] - ((ue - uw) * ih + (un - us) * ih)


def dgs_sweep(h, c2, u1, u2, p, b1, b2, b3,
              u1l, u1r, u1b, u1t, u2l, u2r, u2b, u2t, w2):
    n = p.shape[0]
    ih = 1.0 / h
    ih2 = ih * ih
    for j in range(n):
        for i in range(n - 1):
            uw = u1[j, i - 1] if i > 0 else u1l[j]
            ue = u1[j, i + 1] if i < n - 2 else u1r[j]
            us = u1[j - 1, i] if j > 0 else 2.0 * u1b[i] - u1[0, i]
            un = u1[j + 1, i] if j < n - 1 else 2.0 * u1t[i] - u1[n - 1, i]
            lap = (uw + ue + us + un - 4.0 * u1[j, i]) * ih2
            res = b1[j, i] - (lap - c2 * u1[j, i] - (p[j, i + 1] - p[j, i]) * ih)
            diag = -4.0 * ih2 - c2
            if j == 0:
                diag -= ih2
            if j == n - 1:
                diag -= ih2
            u1[j, i] += res / diag
    for j in range(n - 1):
        for i in range(n):
            uw = u2[j, i - 1] if i > 0 else 2.0 * u2l[j] - u2[j, 0]
            ue = u2[j, i + 1] if i < n - 1 else 2.0 * u2r[j] - u2[j, n - 1]
            us = u2[j - 1, i] if j > 0 else u2b[i]
            un = u2[j + 1, i] if j < n - 2 else u2t[i]
            lap = (uw + ue + us + un - 4.0 * u2[j, i]) * ih2
            res = b2[j, i] - (lap - c2 * u2[j, i] - (p[j + 1, i] - p[j, i]) * ih)
            diag = -4.0 * ih2 - c2
            if i == 0:
                diag -= ih2
            if i == n - 1:
                diag -= ih2
            u2[j, i] += res / diag
    for j in range(n):
        for i in range(n):
            uw = u1[j, i - 1] if i > 0 else u1l[j]
            ue = u1[j, i] if i < n - 1 else u1r[j]
            us = u2[j - 1, i] if j > 0 else u2b[i]
            un = u2[j, i] if j < n - 1 else u2t[i]
            res = b3[j, i] - ((ue - uw) * ih + (un - us) * ih)
            nnb = 4.0
            if i == 0 or i == n - 1:
                nnb -= 1.0
            if j == 0 or j == n - 1:
                nnb -= 1.0
            acc = res
            if i > 0:
                acc += w2[j, i - 1] * ih2
            if j > 0:
                acc += w2[j - 1, i] * ih2
            w2[j, i] = acc / (nnb * ih2)
    for j in range(n):
        for i in range(n - 1):
            u1[j, i] -= (w2[j, i + 1] - w2[j, i]) * ih
    for j in range(n - 1):
        for i in range(n):
            u2[j, i] -= (w2[j + 1, i] - w2[j, i]) * ih
    for j in range(n):
        for i in range(n):
            nnb = 0.0
            acc = 0.0
            if i > 0:
                acc += w2[j, i - 1]
                nnb += 1.0
            if i < n - 1:
                acc += w2[j, i + 1]
                nnb += 1.0
            if j > 0:
                acc += w2[j - 1, i]
                nnb += 1.0
            if j < n - 1:
                acc += w2[j + 1, i]
                nnb += 1.0
            p[j, i] += c2 * w2[j, i] - (acc - nnb * w2[j, i]) * ih2

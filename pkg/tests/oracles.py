"""Reference implementations used only by tests.

Each one is written independently of the package code it checks: no shared
helpers, no numpy linear algebra, no shared DP formulation.
"""
import math

import numba
import numpy as np


def gauss_solve(A, b):
    """Dense Gauss-Jordan elimination with partial pivoting on Python floats."""
    n = len(A)
    M = [list(map(float, row)) + [float(b[i])] for i, row in enumerate(A)]
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(M[r][col]))
        if abs(M[piv][col]) < 1e-300:
            raise ZeroDivisionError("singular")
        M[col], M[piv] = M[piv], M[col]
        p = M[col][col]
        M[col] = [v / p for v in M[col]]
        for r in range(n):
            if r != col and M[r][col] != 0.0:
                f = M[r][col]
                M[r] = [a - f * c for a, c in zip(M[r], M[col])]
    return [M[r][n] for r in range(n)]


def tps_oracle(sources, targets, lam=0.0):
    """Fit TPS parameters by building the bordered system entry by entry.

    Returns (affine 2x3 as nested lists, weights K x 2 as nested lists).
    """
    K = len(sources)

    def phi(r):
        return 0.0 if r == 0 else r * r * math.log(r)

    A = [[0.0] * (K + 3) for _ in range(K + 3)]
    for i in range(K):
        for j in range(K):
            du = sources[i][0] - sources[j][0]
            dv = sources[i][1] - sources[j][1]
            A[i][j] = phi(math.sqrt(du * du + dv * dv)) + (lam if i == j else 0.0)
        A[i][K], A[i][K + 1], A[i][K + 2] = sources[i][0], sources[i][1], 1.0
        A[K][i], A[K + 1][i], A[K + 2][i] = sources[i][0], sources[i][1], 1.0
    cols = []
    for d in range(2):
        rhs = [targets[i][d] for i in range(K)] + [0.0, 0.0, 0.0]
        cols.append(gauss_solve(A, rhs))
    weights = [[cols[0][i], cols[1][i]] for i in range(K)]
    affine = [[cols[d][K], cols[d][K + 1], cols[d][K + 2]] for d in range(2)]
    return affine, weights


def affine_oracle(u, v, wc, hc, box):
    """Box map via the two-point slope form, one axis at a time."""
    x1, y1, x2, y2 = box
    # line through (0, x1) and (wc-1, x2), evaluated at u
    sx = (x2 - x1) / ((wc - 1) - 0)
    sy = (y2 - y1) / ((hc - 1) - 0)
    return x1 + sx * (u - 0), y1 + sy * (v - 0)


def levenshtein_table(a, b):
    n, m = len(a), len(b)
    D = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n + 1):
        D[i][0] = i
    for j in range(m + 1):
        D[0][j] = j
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            D[i][j] = min(D[i - 1][j] + 1, D[i][j - 1] + 1, D[i - 1][j - 1] + (a[i - 1] != b[j - 1]))
    return D


def max_matches_oracle(a, b):
    """Most exact matches over all minimum-cost alignments (two passes)."""
    D = levenshtein_table(a, b)
    n, m = len(a), len(b)
    NEG = -1
    best = [[NEG] * (m + 1) for _ in range(n + 1)]
    best[0][0] = 0
    for i in range(n + 1):
        for j in range(m + 1):
            if best[i][j] == NEG:
                continue
            # every prefix of an optimal alignment is optimal, so tight
            # edges (D[i][j] + step == D[ni][nj]) trace exactly those paths
            for di, dj in ((1, 1), (1, 0), (0, 1)):
                ni, nj = i + di, j + dj
                if ni > n or nj > m:
                    continue
                if di and dj:
                    step = int(a[i] != b[j])
                    gain = 1 - step
                else:
                    step, gain = 1, 0
                if D[i][j] + step != D[ni][nj]:
                    continue
                best[ni][nj] = max(best[ni][nj], best[i][j] + gain)
    return best[n][m]


@numba.njit(cache=True)
def _two_pass(a, b, D, best):
    n, m = a.shape[0], b.shape[0]
    for i in range(n + 1):
        D[i, 0] = i
    for j in range(m + 1):
        D[0, j] = j
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            sub = D[i - 1, j - 1] + (1 if a[i - 1] != b[j - 1] else 0)
            d = min(D[i - 1, j] + 1, D[i, j - 1] + 1)
            D[i, j] = min(sub, d)
    for i in range(n + 1):
        for j in range(m + 1):
            best[i, j] = -1
    best[0, 0] = 0
    for i in range(n + 1):
        for j in range(m + 1):
            if best[i, j] < 0:
                continue
            if i < n and j < m:
                step = 1 if a[i] != b[j] else 0
                if D[i, j] + step == D[i + 1, j + 1]:
                    cand = best[i, j] + 1 - step
                    if cand > best[i + 1, j + 1]:
                        best[i + 1, j + 1] = cand
            if i < n and D[i, j] + 1 == D[i + 1, j]:
                if best[i, j] > best[i + 1, j]:
                    best[i + 1, j] = best[i, j]
            if j < m and D[i, j] + 1 == D[i, j + 1]:
                if best[i, j] > best[i, j + 1]:
                    best[i, j + 1] = best[i, j]
    return best[n, m]


@numba.njit(cache=True)
def exhaustive_matches(n, m, alphabet):
    """Max-match count for every (gt, pred) pair of lengths (n, m).

    Pair index ``p = g * alphabet**m + q`` where ``g`` and ``q`` are the
    base-``alphabet`` digits (most significant first) of gt and pred.
    """
    total_g = alphabet**n
    total_q = alphabet**m
    out = np.empty(total_g * total_q, dtype=np.int64)
    a = np.empty(n, dtype=np.int64)
    b = np.empty(m, dtype=np.int64)
    D = np.empty((n + 1, m + 1), dtype=np.int64)
    best = np.empty((n + 1, m + 1), dtype=np.int64)
    for g in range(total_g):
        x = g
        for k in range(n - 1, -1, -1):
            a[k] = x % alphabet
            x //= alphabet
        for q in range(total_q):
            y = q
            for k in range(m - 1, -1, -1):
                b[k] = y % alphabet
                y //= alphabet
            out[g * total_q + q] = _two_pass(a, b, D, best)
    return out


def all_strings(length, alphabet):
    """All strings of ``length`` as an int array, same order as the oracle."""
    if length == 0:
        return np.zeros((1, 0), dtype=np.int64)
    idx = np.arange(alphabet**length)
    digits = [(idx // alphabet ** (length - 1 - k)) % alphabet for k in range(length)]
    return np.stack(digits, axis=1).astype(np.int64)

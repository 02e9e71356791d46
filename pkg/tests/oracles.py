"""Independent reference computations written directly from the formulas,
with explicit diagonal matrices and loops instead of the library's
vectorised paths."""

from __future__ import annotations

import math

import numpy as np


def D(v):
    return np.diag(np.asarray(v, dtype=float))


def fro2(M):
    return float(sum(M[i, j] ** 2 for i in range(M.shape[0]) for j in range(M.shape[1])))


def op(M):
    return float(np.linalg.svd(np.asarray(M, dtype=float), compute_uv=False)[0])


def pi_fro2(A, pi1, pi2, pi12):
    n = A.shape[0]
    total = 0.0
    for i in range(n):
        for j in range(n):
            w = pi12[i] if i == j else pi1[i] * pi2[j]
            total += w * A[i, j] ** 2
    return total


def noncentered_terms(A, K1, K2, mu1, mu2, pi1, pi2, pi12):
    V1 = max(p * (1 - p) for p in pi1)
    V2 = max(p * (1 - p) for p in pi2)
    e1 = [
        K1**2 * K2**2 * pi_fro2(A, pi1, pi2, pi12),
        V1**2 * V2**2 * fro2(D(mu1) @ A @ D(mu2)),
        V1**2 * K2**2 * fro2(D(np.sqrt(np.asarray(mu1) ** 2)) @ A @ D(np.sqrt(pi2))),
        V2**2 * K1**2 * fro2(D(np.sqrt(pi1)) @ A @ D(np.sqrt(np.asarray(mu2) ** 2))),
        K2**2 * float(np.sum((A.T @ (np.asarray(mu1) * pi1)) ** 2)),
        K1**2 * float(np.sum((A @ (np.asarray(mu2) * pi2)) ** 2)),
        V1**2 * float(np.sum(((A @ (np.asarray(mu2) * pi2)) * mu1) ** 2)),
        V2**2 * float(np.sum(((A.T @ (np.asarray(mu1) * pi1)) * mu2) ** 2)),
    ]
    e2 = [
        K1 * K2 * op(A),
        V1 * V2 * op(D(mu1) @ A @ D(mu2)),
        V1 * K2 * op(D(mu1) @ A),
        V2 * K1 * op(A @ D(mu2)),
    ]
    return e1, e2


def bounded_terms(A, K1, K2, mu1, mu2, B1, B2, u1, u2):
    mu1, mu2, B1, B2, u1, u2 = (np.asarray(x, dtype=float) for x in (mu1, mu2, B1, B2, u1, u2))
    e1 = [
        K1**2 * K2**2 * fro2(D(B1) @ A @ D(B2)),
        max(B1) ** 2 * K2**2 * fro2(D(np.sqrt(mu1 * mu1)) @ A @ D(np.sqrt(B2))),
        max(B2) ** 2 * K1**2 * fro2(D(np.sqrt(B1)) @ A @ D(np.sqrt(mu2 * mu2))),
        K2**2 * float(np.sum(((A.T @ (mu1 * u1)) * B2) ** 2)),
        K1**2 * float(np.sum(((A @ (mu2 * u2)) * B1) ** 2)),
        max(B1) ** 2 * max(B2) ** 2 * fro2(D(mu1) @ A @ D(mu2)),
    ]
    e2 = [
        K1 * K2 * op(A),
        max(B1) * K2 * op(D(mu1) @ A),
        max(B2) * K1 * op(A @ D(mu2)),
    ]
    return e1, e2


def missing_entry(n, KX, KY, mx, my, pkl, px, py):
    first = max(KX**2 * KY**2, KX**2 * my**2, mx**2 * KY**2, mx**2 * my**2) * (
        1 / (n * pkl**2) + 1 / (n * (n - 1) * px**2 * py**2)
    )
    second = max(KX**2 * my**2, mx**2 * KY**2, mx**4, my**4) * (1 / n) * (
        1 / pkl - 1 / (px * py)
    ) ** 2
    e2 = max(KX * KY, KX * abs(my), abs(mx) * KY, abs(mx) * abs(my)) * (
        1 / (n * pkl) + 1 / (n * (n - 1) * px * py)
    )
    return max(first, second), e2


def me_entry(n, KX, KY, mx, my, ukl, ux, uy, bx, by):
    first = max(
        KX**2 * KY**2 * bx**2 * by**2,
        mx**2 * KY**2 * bx**2 * by,
        KX**2 * my**2 * bx * by**2,
        mx**2 * my**2 * bx**2 * by**2,
    ) * (1 / (n * ukl**2) + 1 / (n * (n - 1) * ux**2 * uy**2))
    second = max(KX**2 * my**2 * bx**2 * uy**2, mx**2 * KY**2 * ux**2 * by**2) * (1 / n) * (
        1 / ukl - 1 / (ux * uy)
    ) ** 2
    e2 = max(KX * KY, KX * abs(my) * bx, abs(mx) * KY * by) * (
        1 / (n * ukl) + 1 / (n * (n - 1) * ux * uy)
    )
    return max(first, second), e2


def ipw_entry_loop(xt, yt, pkl, px, py):
    """Direct double sum for one entry of the IPW estimator."""
    n = len(xt)
    same = sum(xt[i] * yt[i] for i in range(n))
    cross = sum(xt[i] * yt[j] for i in range(n) for j in range(n) if i != j)
    return same / (n * pkl) - cross / (n * (n - 1) * px * py)


def normal_abs_moment(p):
    return 2 ** (p / 2) * math.gamma((p + 1) / 2) / math.sqrt(math.pi)

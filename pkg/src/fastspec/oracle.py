"""Independent brute-force references and comparison baselines.

Everything here evaluates objectives densely (grids over angles or shear
coefficients) and exists to validate the closed-form solutions, plus the
truncated-Jacobi and low-rank baselines used in benchmark comparisons.
"""

from typing import NamedTuple

import numpy as np

from .chains import (
    GTransform,
    G_CHAIN,
    REFLECTION,
    ROTATION,
    TransformChain,
)
from .core import DenseMatrix, as_array, as_symmetric_array
from .errors import TooLarge, ValidationError

ORACLE_MAX_N = 10


class BruteGResult(NamedTuple):
    objective: float
    f: int
    i: int
    j: int
    transform: GTransform


class BruteTResult(NamedTuple):
    objective: float
    f: int
    i: int
    j: int
    a: float


def _family_block(f: int, c, s):
    """Blocks for both families, vectorized over angle arrays."""
    if f == 1:
        return c, s, -s, c
    return c, s, s, -c


def _embed(n, i, j, block):
    g = np.eye(n)
    g[np.ix_([i, j], [i, j])] = block
    return g


def dense_g_objective(a, b, i, j, block) -> float:
    """Exact ||A - G B G^T||_F^2 for one embedded 2x2 block."""
    am, bm = as_array(a), as_array(b)
    g = _embed(am.shape[0], i, j, np.asarray(block, dtype=float))
    return float(((am - g @ bm @ g.T) ** 2).sum())


def brute_g_init(s_k, s_bar, angle_step: float = 1e-5) -> BruteGResult:
    """Exhaustive one-transform search for the diagonal-target objective.

    Scans all pairs, both families, and an angle grid of the requested step
    over [0, pi); evaluates || S - G diag(s_bar) G^T ||_F^2 densely using the
    fact that only the (i, j) block differs from diag(s_bar).
    """
    w = as_symmetric_array(s_k)
    sbar = np.asarray(s_bar, dtype=float).reshape(-1)
    n = w.shape[0]
    if n > ORACLE_MAX_N:
        raise TooLarge(f"oracle capped at n = {ORACLE_MAX_N}")
    theta = np.arange(0.0, np.pi, angle_step)
    cos_t, sin_t = np.cos(theta), np.sin(theta)
    base = float(((w - np.diag(sbar)) ** 2).sum())
    best = None
    for i in range(n):
        for j in range(i + 1, n):
            # the rest of rows/cols i, j of G diag G^T vanish identically
            old_block = (w[i, i] - sbar[i]) ** 2 + 2 * w[i, j] ** 2 + (w[j, j] - sbar[j]) ** 2
            const = base - old_block
            for f in (1, 2):
                g00, g01, g10, g11 = _family_block(f, cos_t, sin_t)
                b00 = g00 * sbar[i] * g00 + g01 * sbar[j] * g01
                b01 = g00 * sbar[i] * g10 + g01 * sbar[j] * g11
                b11 = g10 * sbar[i] * g10 + g11 * sbar[j] * g11
                vals = const + (w[i, i] - b00) ** 2 + 2 * (w[i, j] - b01) ** 2 + (w[j, j] - b11) ** 2
                k = int(np.argmin(vals))
                if best is None or vals[k] < best[0]:
                    blk = np.array([[g00[k], g01[k]], [g10[k], g11[k]]])
                    best = (float(vals[k]), f, i, j, blk)
    obj, f, i, j, blk = best
    fam = ROTATION if f == 1 else REFLECTION
    t = GTransform(i=i, j=j, c=float(blk[0, 0]), s=float(blk[0, 1]), family=fam)
    return BruteGResult(obj, f, i, j, t)


def brute_g_update(a, b, angle_step: float = 1e-4) -> BruteGResult:
    """Exhaustive one-transform search for ||A - G B G^T||_F^2, full B.

    Expands the objective into per-angle row, column, and block contributions
    computed from raw matrix entries (independent of any closed form).
    """
    am, bm = as_symmetric_array(a), as_symmetric_array(b)
    n = am.shape[0]
    if n > ORACLE_MAX_N:
        raise TooLarge(f"oracle capped at n = {ORACLE_MAX_N}")
    theta = np.arange(0.0, np.pi, angle_step)
    cos_t, sin_t = np.cos(theta), np.sin(theta)
    total = float(((am - bm) ** 2).sum())
    best = None
    for i in range(n):
        for j in range(i + 1, n):
            mask = np.ones(n, dtype=bool)
            mask[[i, j]] = False
            ai, aj = am[i, mask], am[j, mask]
            bi, bj = bm[i, mask], bm[j, mask]
            # dots for the vectorized row expansion
            bii, bij, bjj = bi @ bi, bi @ bj, bj @ bj
            aibi, aibj = ai @ bi, ai @ bj
            ajbi, ajbj = aj @ bi, aj @ bj
            aii, ajj = ai @ ai, aj @ aj
            const = total - 2 * float(((am[i, mask] - bm[i, mask]) ** 2).sum()
                                      + ((am[j, mask] - bm[j, mask]) ** 2).sum())
            ab = np.array([[am[i, i], am[i, j]], [am[i, j], am[j, j]]])
            bb = np.array([[bm[i, i], bm[i, j]], [bm[i, j], bm[j, j]]])
            const -= float(((ab - bb) ** 2).sum())
            for f in (1, 2):
                g00, g01, g10, g11 = _family_block(f, cos_t, sin_t)
                row_i = (aii - 2 * (g00 * aibi + g01 * aibj)
                         + g00 * g00 * bii + 2 * g00 * g01 * bij + g01 * g01 * bjj)
                row_j = (ajj - 2 * (g10 * ajbi + g11 * ajbj)
                         + g10 * g10 * bii + 2 * g10 * g11 * bij + g11 * g11 * bjj)
                # block of G B G^T
                t00 = g00 * bb[0, 0] + g01 * bb[1, 0]
                t01 = g00 * bb[0, 1] + g01 * bb[1, 1]
                t10 = g10 * bb[0, 0] + g11 * bb[1, 0]
                t11 = g10 * bb[0, 1] + g11 * bb[1, 1]
                n00 = t00 * g00 + t01 * g01
                n01 = t00 * g10 + t01 * g11
                n11 = t10 * g10 + t11 * g11
                block = ((ab[0, 0] - n00) ** 2 + 2 * (ab[0, 1] - n01) ** 2
                         + (ab[1, 1] - n11) ** 2)
                vals = const + 2 * (row_i + row_j) + block
                k = int(np.argmin(vals))
                if best is None or vals[k] < best[0]:
                    blk = np.array([[g00[k], g01[k]], [g10[k], g11[k]]])
                    best = (float(vals[k]), f, i, j, blk)
    obj, f, i, j, blk = best
    fam = ROTATION if f == 1 else REFLECTION
    t = GTransform(i=i, j=j, c=float(blk[0, 0]), s=float(blk[0, 1]), family=fam)
    return BruteGResult(obj, f, i, j, t)


# ---------------------------------------------------------------------------
# T-transform oracles


def _t_block_matrices(n, f, i, j, a):
    t = np.eye(n)
    ti = np.eye(n)
    if f == 1:
        t[i, i] = a
        ti[i, i] = 1.0 / a
    elif f == 2:
        t[i, j] = a
        ti[i, j] = -a
    else:
        t[j, i] = a
        ti[j, i] = -a
    return t, ti


def dense_t_objective(c, b, f, i, j, a, a_mat=None, d=None) -> float:
    """Exact ||C - A T B T^{-1} D||_F^2 with explicit dense factors."""
    cm, bm = as_array(c), as_array(b)
    n = cm.shape[0]
    if f == 1 and abs(a) < 1e-12:
        raise ValidationError("scale candidate below the invertibility floor")
    t, ti = _t_block_matrices(n, f, i, j, a)
    inner = t @ bm @ ti
    if a_mat is not None:
        inner = as_array(a_mat) @ inner @ as_array(d)
    return float(((cm - inner) ** 2).sum())


def brute_t(c, context, mode: str = "init", a_min: float = -10.0,
            a_max: float = 10.0, a_step: float = 1e-4) -> BruteTResult:
    """Grid search over all (family, i, j) and a dense a-grid.

    mode='init' takes context = B and scans ||C - T B T^{-1}||^2;
    mode='update' takes context = (A, B, D) and scans
    ||C - A T B T^{-1} D||^2.  Each (f, i, j) is reduced to an exact
    polynomial in `a` whose coefficients come from explicit dense products;
    the grid then evaluates that polynomial everywhere.
    """
    cm = as_array(c)
    n = cm.shape[0]
    if n > ORACLE_MAX_N:
        raise TooLarge(f"oracle capped at n = {ORACLE_MAX_N}")
    if mode == "init":
        bm = as_array(context)
        am, dm = np.eye(n), np.eye(n)
    elif mode == "update":
        am, bm, dm = (as_array(x) for x in context)
    else:
        raise ValidationError(f"unknown brute_t mode {mode!r}")
    grid = np.arange(a_min, a_max + a_step / 2, a_step)
    e = cm - am @ bm @ dm
    base = float((e * e).sum())
    best = None
    for f in (1, 2, 3):
        pairs = [(i, i) for i in range(n)] if f == 1 else [
            (i, j) for i in range(n) for j in range(i + 1, n)]
        for i, j in pairs:
            if f == 1:
                # T B T^{-1} - B = alpha Eii B + beta B Eii + alpha beta B_ii Eii
                x1 = np.outer(am[:, i], bm[i, :] @ dm)
                x2 = np.outer(am @ bm[:, i], dm[i, :])
                x3 = bm[i, i] * np.outer(am[:, i], dm[i, :])
                ex1, ex2, ex3 = (e * x1).sum(), (e * x2).sum(), (e * x3).sum()
                n1, n2, n3 = (x1 * x1).sum(), (x2 * x2).sum(), (x3 * x3).sum()
                c12, c13, c23 = (x1 * x2).sum(), (x1 * x3).sum(), (x2 * x3).sum()
                a_vals = grid[np.abs(grid) >= a_step / 2]  # drop only the zero point
                al = a_vals - 1.0
                be = 1.0 / a_vals - 1.0
                ab = al * be
                vals = (base - 2 * (al * ex1 + be * ex2 + ab * ex3)
                        + al * al * n1 + be * be * n2 + ab * ab * n3
                        + 2 * (al * be * c12 + al * ab * c13 + be * ab * c23))
            else:
                if f == 2:
                    k1 = np.outer(am[:, i], bm[j, :] @ dm) - np.outer(am @ bm[:, i], dm[j, :])
                    k2 = bm[j, i] * np.outer(am[:, i], dm[j, :])
                else:
                    k1 = np.outer(am[:, j], bm[i, :] @ dm) - np.outer(am @ bm[:, j], dm[i, :])
                    k2 = bm[i, j] * np.outer(am[:, j], dm[i, :])
                ek1, ek2 = (e * k1).sum(), (e * k2).sum()
                n1, n2, c12 = (k1 * k1).sum(), (k2 * k2).sum(), (k1 * k2).sum()
                a_vals = grid
                vals = (base - 2 * (a_vals * ek1 - a_vals ** 2 * ek2)
                        + a_vals ** 2 * n1 - 2 * a_vals ** 3 * c12 + a_vals ** 4 * n2)
            k = int(np.argmin(vals))
            if best is None or vals[k] < best.objective:
                best = BruteTResult(float(vals[k]), f, i, j, float(a_vals[k]))
    return best


# ---------------------------------------------------------------------------
# baselines


def jacobi_truncated(s, g: int) -> TransformChain:
    """Classic Jacobi rotations truncated at g steps, pivot = max |off-diagonal|.

    Each rotation zeroes its pivot exactly; the returned chain carries the
    final working-matrix diagonal as its spectrum.
    """
    w = as_symmetric_array(s).copy()
    n = w.shape[0]
    placed = []
    iu = np.triu_indices(n, 1)
    for _ in range(g):
        off = np.abs(w[iu])
        k = int(np.argmax(off)) if off.size else 0
        if off.size == 0 or off[k] <= 1e-300:  # converged; pad with identities
            placed.append((0, 1 if n > 1 else 0, np.eye(2)))
            continue
        i, j = int(iu[0][k]), int(iu[1][k])
        tau = (w[j, j] - w[i, i]) / (2.0 * w[i, j])
        if tau >= 0:
            t = 1.0 / (tau + np.hypot(1.0, tau))
        else:
            t = 1.0 / (tau - np.hypot(1.0, tau))
        cth = 1.0 / np.hypot(1.0, t)
        sth = t * cth
        v = np.array([[cth, sth], [-sth, cth]])
        placed.append((i, j, v))
        dii = w[i, i] - t * w[i, j]
        djj = w[j, j] + t * w[i, j]
        w[[i, j], :] = v.T @ w[[i, j], :]
        w[:, [i, j]] = w[:, [i, j]] @ v
        w[i, i], w[j, j] = dii, djj
        w[i, j] = w[j, i] = 0.0
    transforms = []
    for i, j, v in placed[::-1]:
        transforms.append(GTransform(i=i, j=j, c=float(v[0, 0]), s=float(v[0, 1]),
                                     family=ROTATION))
    return TransformChain(n=n, kind=G_CHAIN, transforms=tuple(transforms),
                          spectrum=np.diag(w).copy())


def low_rank_baseline(x, r: int) -> DenseMatrix:
    """Best rank-r approximation via orthogonal iteration on X X^T.

    Iterates Q <- orth(X (X^T Q)) until the subspace projector settles to
    1e-10 (or an iteration cap); returns Q Q^T X.  Used purely as an error
    baseline at matched multiplication cost 2 r n.
    """
    xm = as_array(x)
    n = xm.shape[0]
    if r < 0 or r > min(xm.shape):
        raise ValidationError("rank must satisfy 0 <= r <= min(shape)")
    if r == 0:
        return DenseMatrix(np.zeros_like(xm))
    if r == min(xm.shape):
        return DenseMatrix(xm.copy())
    rng = np.random.default_rng(20240211)
    q, _ = np.linalg.qr(rng.standard_normal((n, r)))
    proj = q @ q.T
    for _ in range(10000):
        z = xm @ (xm.T @ q)
        q, _ = np.linalg.qr(z)
        new_proj = q @ q.T
        if np.abs(new_proj - proj).max() <= 1e-10:
            proj = new_proj
            break
        proj = new_proj
    return DenseMatrix(proj @ xm)

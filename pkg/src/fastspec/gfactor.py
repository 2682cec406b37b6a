"""Symmetric branch: greedy initialization, iterative updates, and the driver.

The approximation is S-bar = U diag(s-bar) U^T with U a product of extended
orthonormal Givens transforms.  Initialization places transforms one at a time
by maximizing the exact objective improvement available at each index pair;
iteration re-optimizes single transforms against all others (optionally with
the index pair fixed, the cheap "polishing" mode), and the spectrum is
re-estimated from the conjugated working matrix.
"""

import time
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import chains
from .chains import GTransform, TransformChain, G_CHAIN, ROTATION, REFLECTION
from .core import (
    Sym2x2,
    as_symmetric_array,
    eig2x2_sym,
    quartic_real_roots_batch,
    unit_norm_ls,
)
from .errors import DimensionMismatch, MissingSpectrum, ValidationError
from .report import FactorizationReport

DUPLICATE_JITTER = 1e-9   # relative, times the Frobenius norm of the input
DEFAULT_MAX_SWEEPS = 100

SPECTRUM_ORIGINAL = "original"
SPECTRUM_UPDATE = "update"
MODE_FULL = "full"
MODE_POLISH = "polish"


# ---------------------------------------------------------------------------
# pair scores and the greedy initialization


def gamma(s_ii: float, s_jj: float, s_ij: float) -> float:
    """gamma = (s_ii - s_jj + sqrt((s_ii - s_jj)^2 + 4 s_ij^2)) / 2, always >= 0."""
    return 0.5 * (s_ii - s_jj + np.hypot(s_ii - s_jj, 2.0 * s_ij))


@dataclass(frozen=True)
class GScoreTable:
    """Upper-triangular table of initialization scores A_ij = gamma_ij (sbar_j - sbar_i)."""

    scores: np.ndarray


def _gamma_matrix(w: np.ndarray) -> np.ndarray:
    d = np.diag(w)
    gap = d[:, None] - d[None, :]
    return 0.5 * (gap + np.hypot(gap, 2.0 * w))


def score_table(s_k, s_bar) -> GScoreTable:
    """All pair scores of the greedy selection rule, zero on and below the diagonal."""
    w = as_symmetric_array(s_k)
    sbar = np.asarray(s_bar, dtype=float).reshape(-1)
    if sbar.size != w.shape[0]:
        raise DimensionMismatch("s_bar length must match the matrix dimension")
    table = _gamma_matrix(w) * (sbar[None, :] - sbar[:, None])
    table[np.tril_indices(w.shape[0])] = 0.0
    table.setflags(write=False)
    return GScoreTable(table)


def _selection_scores(w: np.ndarray, sbar: np.ndarray) -> np.ndarray:
    """Exact objective improvement (halved) available at every pair.

    The textbook score gamma_ij (sbar_j - sbar_i) prices only one of the two
    eigenvalue-to-spectrum pairings; the optimal transform may use the other.
    Selecting by the max of both pairings makes the greedy step agree with
    exhaustive search at the selected pair.
    """
    table = _gamma_matrix(w) * (sbar[None, :] - sbar[:, None])
    sel = np.maximum(table, table.T)
    sel[np.tril_indices(w.shape[0])] = -np.inf
    return sel


class GInitStep(NamedTuple):
    i: int
    j: int
    transform: GTransform
    objective_delta: float


def _block_to_transform(i: int, j: int, v: np.ndarray) -> GTransform:
    det = v[0, 0] * v[1, 1] - v[0, 1] * v[1, 0]
    family = ROTATION if det > 0.0 else REFLECTION
    c, s = float(v[0, 0]), float(v[0, 1])
    nrm = np.hypot(c, s)
    return GTransform(i=i, j=j, c=c / nrm, s=s / nrm, family=family)


def _init_block(w: np.ndarray, sbar: np.ndarray, i: int, j: int):
    """Optimal 2x2 block at pair (i, j): eigenvector matrix, columns ordered
    to maximize the trace pairing with (sbar_i, sbar_j).  Returns (V, d)."""
    res = eig2x2_sym(Sym2x2(w[i, i], w[i, j], w[j, j]))
    v = res.v
    d = (res.lambda_hi, res.lambda_lo)
    if d[1] * sbar[i] + d[0] * sbar[j] > d[0] * sbar[i] + d[1] * sbar[j]:
        v = v[:, ::-1]
        d = (d[1], d[0])
    return v, d


def init_g_step(s_k, s_bar) -> GInitStep:
    """One greedy placement: best pair by the selection score, transform from
    the 2x2 eigendecomposition with both column orders tried."""
    w = as_symmetric_array(s_k)
    sbar = np.asarray(s_bar, dtype=float).reshape(-1)
    sel = _selection_scores(w, sbar)
    k = int(np.argmax(sel))
    i, j = divmod(k, w.shape[0])
    v, _ = _init_block(w, sbar, i, j)
    return GInitStep(i, j, _block_to_transform(i, j, v), -2.0 * float(sel[i, j]))


def _conj_gt_w_g(w: np.ndarray, i: int, j: int, v: np.ndarray):
    """w <- G^T w G where G embeds the 2x2 block v at (i, j)."""
    w[[i, j], :] = v.T @ w[[i, j], :]
    w[:, [i, j]] = w[:, [i, j]] @ v


def _conj_g_w_gt(w: np.ndarray, i: int, j: int, v: np.ndarray):
    """w <- G w G^T."""
    w[[i, j], :] = v @ w[[i, j], :]
    w[:, [i, j]] = w[:, [i, j]] @ v.T


def _init_g_storage(w: np.ndarray, sbar: np.ndarray, g: int):
    """Greedy initialization loop on a working copy.

    Returns (storage, final working matrix, per-step objective trace).
    storage lists (i, j, block) in chain order: entry 0 is applied first.
    """
    n = w.shape[0]
    work = w.copy()
    placed = []  # placement order: slot g first (leftmost factor)
    trace = []
    diag_sbar = np.diag(sbar)
    for _ in range(g):
        sel = _selection_scores(work, sbar)
        k = int(np.argmax(sel))
        i, j = divmod(k, n)
        v, d = _init_block(work, sbar, i, j)
        placed.append((i, j, v))
        _conj_gt_w_g(work, i, j, v)
        # the selected block diagonalizes exactly; pin it against roundoff
        work[i, i], work[j, j] = d
        work[i, j] = work[j, i] = 0.0
        trace.append(float(((work - diag_sbar) ** 2).sum()))
    return placed[::-1], work, trace


def init_g_chain(s, s_bar, g: int) -> TransformChain:
    """Place g transforms greedily by exact pair scores; objective never increases."""
    w = as_symmetric_array(s)
    sbar = np.asarray(s_bar, dtype=float).reshape(-1)
    if g < 0:
        raise ValidationError("g must be non-negative")
    storage, _, _ = _init_g_storage(w, sbar, g)
    return _storage_to_chain(w.shape[0], storage, sbar)


def _storage_to_chain(n: int, storage, sbar) -> TransformChain:
    transforms = tuple(_block_to_transform(i, j, v) for (i, j, v) in storage)
    return TransformChain(n=n, kind=G_CHAIN, transforms=transforms, spectrum=sbar)


def _chain_to_storage(chain: TransformChain):
    return [(t.i, t.j, t.block()) for t in chain.transforms]


# ---------------------------------------------------------------------------
# spectrum re-estimation from the conjugated diagonal


def spectrum_update_sym(s, chain: TransformChain) -> np.ndarray:
    """diag(U^T S U) via 2g sparse row/column conjugations; U is never densified."""
    w = as_symmetric_array(s)
    if w.shape[0] != chain.n:
        raise DimensionMismatch("matrix dimension does not match the chain")
    work = w.copy()
    for t in reversed(chain.transforms):
        _conj_gt_w_g(work, t.i, t.j, t.block())
    return np.diag(work).copy()


def _diag_conjugated(w: np.ndarray, storage) -> np.ndarray:
    work = w.copy()
    for i, j, v in reversed(storage):
        _conj_gt_w_g(work, i, j, v)
    return np.diag(work).copy()


# ---------------------------------------------------------------------------
# single-transform update machinery: workspace, batched sphere least squares


@dataclass
class GUpdateWorkspace:
    """Cached products for the update cost: Z = A B, V = A o B, column norms."""

    z: np.ndarray
    v: np.ndarray
    col_norms_a: np.ndarray
    col_norms_b: np.ndarray

    @classmethod
    def from_matrices(cls, a, b) -> "GUpdateWorkspace":
        am, bm = as_symmetric_array(a), as_symmetric_array(b)
        if am.shape != bm.shape:
            raise DimensionMismatch("A and B must share a shape")
        return cls(z=am @ bm, v=am * bm,
                   col_norms_a=(am * am).sum(axis=0),
                   col_norms_b=(bm * bm).sum(axis=0))


class GUpdateStep(NamedTuple):
    f: int
    i: int
    j: int
    transform: GTransform
    objective: float


def _pair_cost_terms(am, bm, ws, i, j):
    """R^(f), g^(f) (f = 1, 2) and ||w||^2 for one pair, straight from the
    explicit entry formulas.

    Works from the cached workspace when given; otherwise recomputes the
    handful of entries it needs in O(n^2) without forming Z = A B.
    """
    if ws is not None:
        z_ii, z_jj = ws.z[i, i], ws.z[j, j]
        z_ij, z_ji = ws.z[i, j], ws.z[j, i]
        wa, wb = ws.col_norms_a, ws.col_norms_b
        sw = wa.sum() + wb.sum()
        sv = ws.v.sum()
        rv_i, rv_j = ws.v[i].sum(), ws.v[j].sum()
    else:
        z_ii = float(am[i] @ bm[i])
        z_jj = float(am[j] @ bm[j])
        z_ij = float(am[i] @ bm[j])
        z_ji = float(am[j] @ bm[i])
        wa = (am * am).sum(axis=0)
        wb = (bm * bm).sum(axis=0)
        sw = float(wa.sum() + wb.sum())
        sv = float((am * bm).sum())
        rv_i = float(am[i] @ bm[i])
        rv_j = float(am[j] @ bm[j])
    v_ii = am[i, i] * bm[i, i]
    v_jj = am[j, j] * bm[j, j]
    v_ij = am[i, j] * bm[i, j]
    wij = wa[i] + wa[j] + wb[i] + wb[j]
    r1 = np.array([
        [wij - 2 * v_ii - 2 * v_jj - 4 * v_ij,
         2 * (am[i, j] * bm[i, i] - am[i, i] * bm[i, j] + am[j, j] * bm[i, j] - am[i, j] * bm[j, j])],
        [0.0,
         wij - 2 * am[i, i] * bm[j, j] - 2 * am[j, j] * bm[i, i] + 4 * v_ij]])
    r1[1, 0] = r1[0, 1]
    g1 = 2 * np.array([
        v_ii + v_jj + 2 * v_ij - z_ii - z_jj,
        am[i, j] * bm[j, j] + am[i, i] * bm[i, j] - am[j, j] * bm[i, j] - am[i, j] * bm[i, i]
        - z_ij + z_ji])
    r2 = np.array([
        [wij - 2 * v_ii - 2 * v_jj + 4 * v_ij,
         2 * (am[i, j] * bm[j, j] - am[i, i] * bm[i, j] + am[j, j] * bm[i, j] - am[i, j] * bm[i, i])],
        [0.0,
         wij - 2 * am[i, i] * bm[j, j] - 2 * am[j, j] * bm[i, i] - 4 * v_ij]])
    r2[1, 0] = r2[0, 1]
    g2 = 2 * np.array([
        v_ii - v_jj - z_ii + z_jj,
        am[i, j] * bm[j, j] + am[i, i] * bm[i, j] + am[j, j] * bm[i, j] + am[i, j] * bm[i, i]
        - z_ij - z_ji])
    w2 = (sw - wij) - 2 * (sv - 2 * rv_i - 2 * rv_j + v_ii + 2 * v_ij + v_jj)
    return (r1, g1), (r2, g2), float(w2)


def _sphere_ls_batch(r11, r12, r22, g1, g2):
    """Vectorized unit-circle minimizer of x^T R x + 2 g^T x.

    Same math as core.unit_norm_ls: minimum real root of
    det((R - lam I)^2 - g g^T) followed by x = -(R - lam I)^{-1} g.
    Returns (x1, x2, ok); rows with ok=False need the scalar fallback.
    """
    b1, c1 = -2.0 * r11, r11 * r11 + r12 * r12 - g1 * g1
    b2, c2 = -2.0 * r22, r22 * r22 + r12 * r12 - g2 * g2
    d1, d0 = -2.0 * r12, r12 * (r11 + r22) - g1 * g2
    coeffs = np.stack([
        c1 * c2 - d0 * d0,
        b1 * c2 + b2 * c1 - 2.0 * d1 * d0,
        c1 + c2 + b1 * b2 - d1 * d1,
        b1 + b2,
        np.ones_like(r11),
    ], axis=-1)
    roots = quartic_real_roots_batch(coeffs)
    lam = np.where(np.isnan(roots), np.inf, roots).min(axis=1)
    ok = np.isfinite(lam)
    lam_safe = np.where(ok, lam, 0.0)
    scale = np.abs(r11) + np.abs(r12) + np.abs(r22) + np.abs(lam_safe) + 1e-300
    for _ in range(2):
        m11, m22 = r11 - lam_safe, r22 - lam_safe
        det = m11 * m22 - r12 * r12
        degenerate = ok & (np.abs(det) < 1e-14 * scale * scale)
        if not degenerate.any():
            break
        lam_safe = np.where(degenerate, lam_safe - 1e-12 * scale, lam_safe)
    with np.errstate(divide="ignore", invalid="ignore"):
        x1 = -(m22 * g1 - r12 * g2) / det
        x2 = -(-r12 * g1 + m11 * g2) / det
        nrm = np.hypot(x1, x2)
        x1, x2 = x1 / nrm, x2 / nrm
    ok = ok & np.isfinite(x1) & np.isfinite(x2)
    return x1, x2, ok


def _batch_update_scores(am, bm, ws):
    """Best family/values for every pair at once.

    Returns (score, x1, x2) arrays of shape (2, n, n); entry [f-1, i, j] is the
    minimized objective (full squared error) using family f at pair (i, j).
    Lower-triangle entries are +inf.
    """
    n = am.shape[0]
    v, z = ws.v, ws.z
    wa, wb = ws.col_norms_a, ws.col_norms_b
    ad, bd = np.diag(am), np.diag(bm)
    vd = np.diag(v)
    w = wa + wb
    wij = w[:, None] + w[None, :]
    vdij = vd[:, None] + vd[None, :]
    cross = ad[:, None] * bd[None, :] + ad[None, :] * bd[:, None]
    r11_1 = wij - 2 * vdij - 4 * v
    r22_1 = wij - 2 * cross + 4 * v
    r12_1 = 2 * (am * (bd[:, None] - bd[None, :]) - bm * (ad[:, None] - ad[None, :]))
    g1_1 = 2 * (vdij + 2 * v - np.diag(z)[:, None] - np.diag(z)[None, :])
    g2_1 = 2 * (am * (bd[None, :] - bd[:, None]) + bm * (ad[:, None] - ad[None, :]) - z + z.T)
    r11_2 = wij - 2 * vdij + 4 * v
    r22_2 = wij - 2 * cross - 4 * v
    r12_2 = 2 * (am * (bd[None, :] - bd[:, None]) - bm * (ad[:, None] - ad[None, :]))
    g1_2 = 2 * (vd[:, None] - vd[None, :] - np.diag(z)[:, None] + np.diag(z)[None, :])
    g2_2 = 2 * (am * (bd[None, :] + bd[:, None]) + bm * (ad[:, None] + ad[None, :]) - z - z.T)
    sw = w.sum()
    sv = v.sum()
    rv = v.sum(axis=1)
    w2 = (sw - wij) - 2 * (sv - 2 * rv[:, None] - 2 * rv[None, :] + vd[:, None] + 2 * v + vd[None, :])

    iu = np.triu_indices(n, 1)
    scores = np.full((2, n, n), np.inf)
    xs1 = np.zeros((2, n, n))
    xs2 = np.zeros((2, n, n))
    for f, (r11, r12, r22, g1, g2) in enumerate(
            [(r11_1, r12_1, r22_1, g1_1, g2_1), (r11_2, r12_2, r22_2, g1_2, g2_2)]):
        fr11, fr12, fr22 = r11[iu], r12[iu], r22[iu]
        fg1, fg2 = g1[iu], g2[iu]
        norm_r = np.sqrt(fr11 ** 2 + 2 * fr12 ** 2 + fr22 ** 2)
        degenerate = np.hypot(fg1, fg2) <= 1e-12 * np.maximum(norm_r, 1e-300)
        x1, x2, ok = _sphere_ls_batch(fr11, fr12, fr22, fg1, fg2)
        # degenerate rows: minimum eigenvector of R
        if degenerate.any():
            lam_min = 0.5 * (fr11 + fr22 - np.hypot(fr11 - fr22, 2 * fr12))
            e1 = np.where(np.abs(fr12) > 0, fr12, 1.0)
            e2 = np.where(np.abs(fr12) > 0, lam_min - fr11, 0.0)
            swap = (fr11 <= fr22) & (np.abs(fr12) == 0)
            e1 = np.where(swap, 1.0, e1)
            e2 = np.where(swap, 0.0, e2)
            alt = (fr11 > fr22) & (np.abs(fr12) == 0)
            e1 = np.where(alt, 0.0, e1)
            e2 = np.where(alt, 1.0, e2)
            nrm = np.hypot(e1, e2)
            x1 = np.where(degenerate, e1 / nrm, x1)
            x2 = np.where(degenerate, e2 / nrm, x2)
            ok = ok | degenerate
        if (~ok).any():
            for idx in np.where(~ok)[0]:
                rr = np.array([[fr11[idx], fr12[idx]], [fr12[idx], fr22[idx]]])
                gg = np.array([fg1[idx], fg2[idx]])
                xx, _ = unit_norm_ls(rr, gg)
                x1[idx], x2[idx] = xx
        val = (fr11 * x1 * x1 + 2 * fr12 * x1 * x2 + fr22 * x2 * x2
               + 2 * (fg1 * x1 + fg2 * x2) + w2[iu])
        scores[f][iu] = val
        xs1[f][iu] = x1
        xs2[f][iu] = x2
    return scores, xs1, xs2


def _make_block(f: int, c: float, s: float) -> np.ndarray:
    if f == 1:
        return np.array([[c, s], [-s, c]])
    return np.array([[c, s], [s, -c]])


def _dense_pair_objective(am, bm, i, j, v) -> float:
    gm = np.eye(am.shape[0])
    gm[np.ix_([i, j], [i, j])] = v
    return float(((am - gm @ bm @ gm.T) ** 2).sum())


def update_g_step(a_k, b_k, ws: GUpdateWorkspace | None = None, scope=None) -> GUpdateStep:
    """Globally optimal single-transform update for ||A - G B G^T||_F^2.

    scope=None searches every pair and both families; scope=(i, j) restricts
    to one pair (both families), which is the polishing step.
    """
    am, bm = as_symmetric_array(a_k), as_symmetric_array(b_k)
    if am.shape != bm.shape:
        raise DimensionMismatch("A and B must share a shape")
    if scope is not None:
        i, j = scope
        (r1, g1), (r2, g2), w2 = _pair_cost_terms(am, bm, ws, i, j)
        best = None
        for f, (r, g) in enumerate([(r1, g1), (r2, g2)], start=1):
            x, val = unit_norm_ls(r, g)
            total = val + w2
            if best is None or total < best[0]:
                best = (total, f, x)
        total, f, x = best
        return GUpdateStep(f, i, j, _block_to_transform(i, j, _make_block(f, x[0], x[1])),
                           total)
    if ws is None:
        ws = GUpdateWorkspace.from_matrices(am, bm)
    scores, xs1, xs2 = _batch_update_scores(am, bm, ws)
    k = int(np.argmin(scores))
    f, rest = divmod(k, am.shape[0] * am.shape[0])
    i, j = divmod(rest, am.shape[0])
    c, s = float(xs1[f, i, j]), float(xs2[f, i, j])
    return GUpdateStep(f + 1, i, j,
                       _block_to_transform(i, j, _make_block(f + 1, c, s)),
                       float(scores[f, i, j]))


# ---------------------------------------------------------------------------
# sweeps and the driver


def _update_sweep(s: np.ndarray, storage, sbar: np.ndarray, fixed_pairs: bool):
    """One update sweep over all transforms (the driver's iteration body).

    fixed_pairs=True keeps every transform at its (i, j) (polishing);
    otherwise each transform may move to the globally best pair.
    Objective never increases: the incumbent transform is kept on ties.
    """
    g = len(storage)
    if g == 0:
        return storage
    a = s.copy()
    for t in range(g - 1, 0, -1):
        i, j, v = storage[t]
        _conj_gt_w_g(a, i, j, v)
    b = np.diag(sbar).astype(float)
    for k in range(g):
        i0, j0, v0 = storage[k]
        if fixed_pairs:
            step = update_g_step(a, b, scope=(i0, j0))
        else:
            step = update_g_step(a, b)
        keep = _dense_pair_objective(a, b, i0, j0, v0)
        if keep <= step.objective:
            i, j, v = i0, j0, v0
        else:
            i, j, v = step.i, step.j, step.transform.block()
        storage[k] = (i, j, v)
        _conj_g_w_gt(b, i, j, v)
        if k + 1 < g:
            i2, j2, v2 = storage[k + 1]
            _conj_g_w_gt(a, i2, j2, v2)
    return storage


def polish_g_chain(s, chain: TransformChain, s_bar) -> TransformChain:
    """One polishing sweep: indices fixed, values re-optimized; monotone."""
    w = as_symmetric_array(s)
    sbar = np.asarray(s_bar, dtype=float).reshape(-1)
    storage = _chain_to_storage(chain)
    storage = _update_sweep(w, storage, sbar, fixed_pairs=True)
    return _storage_to_chain(chain.n, storage, sbar)


def _ensure_distinct(sbar: np.ndarray, scale: float) -> np.ndarray:
    """Deterministic jitter: the k-th duplicate entry gets + k * 1e-9 * scale."""
    out = sbar.copy()
    if scale <= 0.0:
        return out
    counter = 0
    for _ in range(64):
        seen = {}
        dup_positions = []
        for idx, val in enumerate(out):
            if val in seen:
                dup_positions.append(idx)
            else:
                seen[val] = idx
        if not dup_positions:
            return out
        for idx in dup_positions:
            counter += 1
            out[idx] = out[idx] + counter * DUPLICATE_JITTER * scale
    return out


def _objective_from_spectrum(w: np.ndarray, storage, sbar: np.ndarray) -> float:
    """||S - U diag(sbar) U^T||_F^2 = ||S||^2 - 2 sbar . diag(U^T S U) + ||sbar||^2."""
    t = _diag_conjugated(w, storage)
    val = float((w * w).sum() - 2.0 * (sbar @ t) + (sbar @ sbar))
    return max(val, 0.0)  # cancellation can leave a tiny negative residue


def factorize_symmetric(s, g: int, spectrum_rule: str = SPECTRUM_UPDATE,
                        eps: float = 1e-2, mode: str = MODE_POLISH,
                        spectrum=None, max_sweeps: int = DEFAULT_MAX_SWEEPS):
    """Run Setup -> Initialization -> Iterations for a symmetric input.

    spectrum_rule='original' keeps the caller-supplied eigenvalue estimates
    fixed; 'update' seeds them with diag(S) (jittered to be distinct) and
    re-solves after every sweep.  Iterations stop when the objective trace
    changes by less than eps, or after max_sweeps sweeps.

    Returns (TransformChain, FactorizationReport).
    """
    started = time.perf_counter()
    w = as_symmetric_array(s)
    n = w.shape[0]
    if g < 0:
        raise ValidationError("g must be non-negative")
    if eps <= 0.0:
        raise ValidationError("eps must be positive")
    if mode not in (MODE_FULL, MODE_POLISH):
        raise ValidationError(f"unknown mode {mode!r}")
    if spectrum_rule not in (SPECTRUM_ORIGINAL, SPECTRUM_UPDATE):
        raise ValidationError(f"unknown spectrum rule {spectrum_rule!r}")
    norm_sq = float((w * w).sum())
    if spectrum_rule == SPECTRUM_ORIGINAL:
        if spectrum is None:
            raise MissingSpectrum("spectrum_rule='original' needs caller-supplied eigenvalues")
        sbar = np.asarray(spectrum, dtype=float).reshape(-1).copy()
        if sbar.size != n:
            raise DimensionMismatch("supplied spectrum length must equal n")
    else:
        sbar = np.diag(w).copy()
    sbar = _ensure_distinct(sbar, np.sqrt(norm_sq))

    storage, work, init_trace = _init_g_storage(w, sbar, g)
    report = FactorizationReport(kind=G_CHAIN, n=n, budget=g, spectrum_rule=spectrum_rule,
                                 mode=mode, eps=eps, init_trace=init_trace)
    eps_trace = [float(((work - np.diag(sbar)) ** 2).sum())]
    stopped_by = "max_sweeps"
    sweeps = 0
    for _ in range(max_sweeps):
        storage = _update_sweep(w, storage, sbar, fixed_pairs=(mode == MODE_POLISH))
        if spectrum_rule == SPECTRUM_UPDATE:
            sbar = _diag_conjugated(w, storage)
        eps_trace.append(_objective_from_spectrum(w, storage, sbar))
        sweeps += 1
        if abs(eps_trace[-2] - eps_trace[-1]) < eps:
            stopped_by = "eps"
            break
    chain = _storage_to_chain(n, storage, sbar)
    report.sweep_trace = eps_trace
    report.sweeps_run = sweeps
    report.stopped_by = stopped_by
    report.final_error_sq = eps_trace[-1]
    report.final_rel_error_sq = eps_trace[-1] / norm_sq if norm_sq > 0 else 0.0
    report.flops = chains.flop_count(chain).multiply_adds
    report.wall_time_s = time.perf_counter() - started
    return chain, report

"""General-matrix branch: scaling/shear chains around a real spectrum.

The approximation is C-bar = T diag(c-bar) T^{-1} with T a product of
scaling and shear transforms.  Initialization minimizes closed-form cost
polynomials (rational for the scaling family) over each admissible
(family, i, j); iteration re-optimizes single transforms inside the full
conjugation, and the spectrum solves a Khatri-Rao structured least squares.
"""

import time
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import chains
from .chains import (
    SCALE,
    SHEAR_LOWER,
    SHEAR_UPPER,
    T_CHAIN,
    TTransform,
    TransformChain,
    left_apply,
    right_apply_inverse,
)
from .core import (
    as_array,
    cubic_real_roots_batch,
    quartic_real_roots_batch,
)
from .errors import (
    DimensionMismatch,
    MissingSpectrum,
    SingularNormalMatrix,
    ValidationError,
    ZeroScale,
)
from .report import FactorizationReport

SPECTRUM_ORIGINAL = "original"
SPECTRUM_UPDATE = "update"
MODE_FULL = "full"
MODE_POLISH = "polish"
DEFAULT_MAX_SWEEPS = 100

SCALE_EPS = 1e-12          # |a| floor for the scaling family
CANDIDATE_CLAMP = 1e6      # |a| ceiling for any accepted candidate root
CONDITION_LIMIT = 1e12     # normal-matrix conditioning guard

_FAMILY_KIND = {1: SCALE, 2: SHEAR_UPPER, 3: SHEAR_LOWER}


class TStep(NamedTuple):
    f: int
    i: int
    j: int
    a: float
    transform: TTransform
    cost: float


def _identity_step(n: int) -> TStep:
    if n < 2:
        t = TTransform(kind=SCALE, i=0, j=0, a=1.0)
        return TStep(1, 0, 0, 1.0, t, 0.0)
    t = TTransform(kind=SHEAR_UPPER, i=0, j=1, a=0.0)
    return TStep(2, t.i, t.j, 0.0, t, 0.0)


def _make_transform(f: int, i: int, j: int, a: float) -> TTransform:
    if f == 1:
        return TTransform(kind=SCALE, i=i, j=i, a=a)
    return TTransform(kind=_FAMILY_KIND[f], i=i, j=j, a=a)


# ---------------------------------------------------------------------------
# initialization cost polynomials


@dataclass
class TInitWorkspace:
    """Cached products for the initialization costs.

    v = (C - B) B^T, h = (C - B)^T B, j = (C - B) o B (entrywise),
    l[i] = B_ii^2, n_rows[i] = ||B_{i,:}||^2, m_cols[i] = ||B_{:,i}||^2.
    """

    v: np.ndarray
    h: np.ndarray
    j: np.ndarray
    l: np.ndarray
    n_rows: np.ndarray
    m_cols: np.ndarray

    @classmethod
    def from_matrices(cls, c, b) -> "TInitWorkspace":
        cm, bm = as_array(c), as_array(b)
        if cm.shape != bm.shape or cm.shape[0] != cm.shape[1]:
            raise DimensionMismatch("C and B must be square with equal shapes")
        resid = cm - bm
        return cls(v=resid @ bm.T, h=resid.T @ bm, j=resid * bm,
                   l=np.diag(bm) ** 2,
                   n_rows=(bm * bm).sum(axis=1),
                   m_cols=(bm * bm).sum(axis=0))


def t_init_cost(c, b_k, ws: TInitWorkspace, f: int, i: int, j: int, a: float) -> float:
    """Evaluate the exact initialization cost for one candidate transform.

    The value is ||C - T B T^{-1}||_F^2 minus the a-independent constant
    ||C||^2 + ||B||^2 - 2 tr(C^T B); zero at the identity transform.
    """
    cm, bm = as_array(c), as_array(b_k)
    if ws is None:
        ws = TInitWorkspace.from_matrices(cm, bm)
    if f == 1:
        if abs(a) < SCALE_EPS:
            raise ZeroScale("scaling cost undefined below the invertibility floor")
        return float((a - 1.0) ** 2 * ws.n_rows[i]
                     + (1.0 / a - 1.0) ** 2 * ws.m_cols[i]
                     - a ** -2 * (a - 1.0) ** 2 * (a * a + 1.0) * ws.l[i]
                     - 2.0 * (a - 1.0) * ws.v[i, i]
                     - 2.0 * (1.0 / a - 1.0) * ws.h[i, i]
                     + 2.0 / a * (a - 1.0) ** 2 * ws.j[i, i])
    if f == 2:
        return float(a * a * (ws.n_rows[j] - ws.l[j] + ws.m_cols[i] - ws.l[i])
                     + a * a * (bm[j, j] - bm[i, i] - a * bm[j, i]) ** 2
                     - 2.0 * a * ws.v[i, j] + 2.0 * a * ws.h[j, i]
                     + 2.0 * a * a * bm[j, i] * (cm[i, j] - bm[i, j]))
    if f == 3:
        return float(a * a * (ws.n_rows[i] - ws.l[i] + ws.m_cols[j] - ws.l[j])
                     + a * a * (bm[i, i] - bm[j, j] - a * bm[i, j]) ** 2
                     - 2.0 * a * ws.v[j, i] + 2.0 * a * ws.h[i, j]
                     + 2.0 * a * a * bm[i, j] * (cm[j, i] - bm[j, i]))
    raise ValidationError(f"unknown family {f}")


def _scale_family_best(an, am, av, ah):
    """Vectorized scaling-family minimization.

    Cost(a) = an (a-1)^2 + am (1/a-1)^2 - 2 av (a-1) - 2 ah (1/a-1); its
    stationary points (after clearing a^{-2}) are roots of
    q(a) = 2 an a^4 - 2 (an + av) a^3 + 2 (am + ah) a - 2 am.
    Returns (best cost, best a) arrays over candidates, identity included.
    """
    k = an.shape[0]
    coeffs = np.stack([-2 * am, 2 * (am + ah), np.zeros(k), -2 * (an + av), 2 * an], axis=-1)
    roots = quartic_real_roots_batch(coeffs)
    roots = np.concatenate([roots, np.full((k, 1), 1.0),
                            np.full((k, 1), CANDIDATE_CLAMP),
                            np.full((k, 1), -CANDIDATE_CLAMP)], axis=1)
    bad = ~np.isfinite(roots) | (np.abs(roots) < SCALE_EPS) | (np.abs(roots) > CANDIDATE_CLAMP)
    a = np.where(bad, 1.0, roots)
    vals = (an[:, None] * (a - 1.0) ** 2 + am[:, None] * (1.0 / a - 1.0) ** 2
            - 2.0 * av[:, None] * (a - 1.0) - 2.0 * ah[:, None] * (1.0 / a - 1.0))
    vals = np.where(bad, np.inf, vals)
    pick = np.argmin(vals, axis=1)
    rows = np.arange(k)
    return vals[rows, pick], a[rows, pick]


def _shear_family_best(q1, q2, q3, q4):
    """Vectorized quartic minimization for the shear families.

    Cost(a) = q4 a^4 + q3 a^3 + q2 a^2 + q1 a (zero at a = 0); candidates are
    the real roots of the derivative plus the identity and clamp boundaries.
    Inputs/outputs are flat arrays over the candidate pairs.
    """
    k = q1.shape[0]
    roots = cubic_real_roots_batch(4 * q4, 3 * q3, 2 * q2, q1)
    roots = np.concatenate([roots, np.zeros((k, 1)),
                            np.full((k, 1), CANDIDATE_CLAMP),
                            np.full((k, 1), -CANDIDATE_CLAMP)], axis=1)
    bad = ~np.isfinite(roots) | (np.abs(roots) > CANDIDATE_CLAMP)
    a = np.where(bad, 0.0, roots)
    vals = ((((q4[:, None] * a) + q3[:, None]) * a + q2[:, None]) * a + q1[:, None]) * a
    vals = np.where(bad, np.inf, vals)
    pick = np.argmin(vals, axis=1)
    rows = np.arange(k)
    return vals[rows, pick], a[rows, pick]


def init_t_step(c, b_k, ws: TInitWorkspace | None = None) -> TStep:
    """Best single transform to wrap around the current approximation B.

    Searches every admissible (family, i, j); each family minimizes its cost
    polynomial through the real roots of the derivative.  Never worse than
    the identity transform.
    """
    cm, bm = as_array(c), as_array(b_k)
    n = cm.shape[0]
    if ws is None:
        ws = TInitWorkspace.from_matrices(cm, bm)
    best = _identity_step(n)
    if n < 2:
        return best
    best_val, best_key = 0.0, None
    # scaling family
    an = ws.n_rows - ws.l
    am = ws.m_cols - ws.l
    av = np.diag(ws.v) - np.diag(ws.j)
    ah = np.diag(ws.h) - np.diag(ws.j)
    vals, avals = _scale_family_best(an, am, av, ah)
    k = int(np.argmin(vals))
    if vals[k] < best_val:
        best_val, best_key = float(vals[k]), (1, k, k, float(avals[k]))
    # shear families
    iu = np.triu_indices(n, 1)
    bd = np.diag(bm)
    nl = ws.n_rows - ws.l
    ml = ws.m_cols - ws.l
    for f in (2, 3):
        if f == 2:
            q4 = (bm.T ** 2)[iu]
            q3 = (-2.0 * (bd[None, :] - bd[:, None]) * bm.T)[iu]
            q2 = (nl[None, :] + ml[:, None] + (bd[None, :] - bd[:, None]) ** 2
                  + 2.0 * bm.T * (cm - bm))[iu]
            q1 = (-2.0 * ws.v + 2.0 * ws.h.T)[iu]
        else:
            q4 = (bm ** 2)[iu]
            q3 = (-2.0 * (bd[:, None] - bd[None, :]) * bm)[iu]
            q2 = (nl[:, None] + ml[None, :] + (bd[:, None] - bd[None, :]) ** 2
                  + 2.0 * bm * (cm.T - bm.T))[iu]
            q1 = (-2.0 * ws.v.T + 2.0 * ws.h)[iu]
        vals, avals = _shear_family_best(q1, q2, q3, q4)
        k = int(np.argmin(vals))
        if vals[k] < best_val:
            best_val = float(vals[k])
            best_key = (f, int(iu[0][k]), int(iu[1][k]), float(avals[k]))
    if best_key is None:
        return best
    f, i, j, a = best_key
    if f == 1 and abs(a) < SCALE_EPS:
        return best
    return TStep(f, i, j, a, _make_transform(f, i, j, a), best_val)


def _init_t_storage(cm: np.ndarray, cbar: np.ndarray, m: int):
    """Greedy initialization; returns (transform list, working B, objective trace)."""
    b = np.diag(cbar).astype(float)
    placed = []
    trace = []
    for _ in range(m):
        step = init_t_step(cm, b)
        placed.append(step.transform)
        left_apply(step.transform, b)
        right_apply_inverse(step.transform, b)
        trace.append(float(((cm - b) ** 2).sum()))
    return placed, b, trace


def init_t_chain(c, c_bar, m: int) -> TransformChain:
    """Place m transforms greedily; the objective never increases per step."""
    cm = as_array(c)
    cbar = np.asarray(c_bar, dtype=float).reshape(-1)
    if m < 0:
        raise ValidationError("m must be non-negative")
    if cbar.size != cm.shape[0]:
        raise DimensionMismatch("c_bar length must match the matrix dimension")
    placed, _, _ = _init_t_storage(cm, cbar, m)
    return TransformChain(n=cm.shape[0], kind=T_CHAIN, transforms=tuple(placed), spectrum=cbar)


# ---------------------------------------------------------------------------
# least-squares spectrum update


def _kr_forward(chain_transforms, n, cvec):
    """Dense T diag(cvec) T^{-1} through sparse row/column sweeps."""
    m = np.diag(np.asarray(cvec, dtype=float))
    for t in chain_transforms:
        left_apply(t, m)
    for t in chain_transforms:
        right_apply_inverse(t, m)
    return m


def _left_apply_transpose(t: TTransform, m: np.ndarray):
    if t.kind == SCALE:
        m[t.i, :] *= t.a
    elif t.kind == SHEAR_UPPER:
        m[t.j, :] += t.a * m[t.i, :]
    else:
        m[t.i, :] += t.a * m[t.j, :]


def _right_apply_inverse_transpose(t: TTransform, m: np.ndarray):
    if t.kind == SCALE:
        m[:, t.i] /= t.a
    elif t.kind == SHEAR_UPPER:
        m[:, t.i] -= t.a * m[:, t.j]
    else:
        m[:, t.j] -= t.a * m[:, t.i]


def _kr_adjoint(chain_transforms, w: np.ndarray):
    """diag(T^T W T^{-T}) through sparse sweeps."""
    m = w.copy()
    for t in reversed(chain_transforms):
        _left_apply_transpose(t, m)
    for t in reversed(chain_transforms):
        _right_apply_inverse_transpose(t, m)
    return np.diag(m).copy()


def spectrum_update_general(c, chain: TransformChain, solver: str = "dense") -> np.ndarray:
    """Least-squares spectrum for fixed T: argmin ||vec(C) - (T^{-T} * T) cbar||.

    solver='dense' assembles the n x n normal system whose (p, q) entry is the
    product of the Gram matrices of the columns of T^{-T} and T; the n^2 x n
    Khatri-Rao matrix is never materialized.  solver='iterative' runs
    conjugate-gradient iterations on the normal equations with chain-based
    matrix-vector products.
    """
    cm = as_array(c)
    if cm.shape[0] != chain.n:
        raise DimensionMismatch("matrix dimension does not match the chain")
    if solver not in ("dense", "iterative"):
        raise ValidationError(f"unknown solver {solver!r}")
    ts = chain.transforms
    if solver == "dense":
        t = chains.to_dense(chain).data
        ti = chains.to_dense_inverse(chain).data
        gram = (ti @ ti.T) * (t.T @ t)
        rhs = np.einsum("ip,ij,pj->p", t, cm, ti)
        cond = np.linalg.cond(gram)
        if not np.isfinite(cond) or cond > CONDITION_LIMIT:
            raise SingularNormalMatrix(f"normal matrix condition {cond:.3e} beyond 1e12")
        return np.linalg.solve(gram, rhs)
    # CGLS on min ||vec(C) - A cbar|| with A cbar = vec(T diag(cbar) T^{-1})
    n = chain.n
    x = np.zeros(n)
    r = cm - _kr_forward(ts, n, x)
    s = _kr_adjoint(ts, r)
    p = s.copy()
    gamma_old = float(s @ s)
    tol = 1e-24 * max(gamma_old, 1e-300)
    for _ in range(20 * n):
        if gamma_old <= tol:
            break
        q = _kr_forward(ts, n, p)
        denom = float((q * q).sum())
        if denom <= 0.0:
            break
        alpha = gamma_old / denom
        x = x + alpha * p
        r = r - alpha * q
        s = _kr_adjoint(ts, r)
        gamma_new = float(s @ s)
        p = s + (gamma_new / gamma_old) * p
        gamma_old = gamma_new
    return x


# ---------------------------------------------------------------------------
# update cost polynomials inside the full conjugation


@dataclass
class TUpdateWorkspace:
    """Cached products for the update costs at a fixed sweep position.

    v = D D^T, h = A^T A, j = A^T C, plus the residual-derived products the
    coefficient formulas read entrywise.
    """

    v: np.ndarray
    h: np.ndarray
    j: np.ndarray
    k: np.ndarray          # A^T (C - A B D) D^T
    kbt: np.ndarray        # k B^T
    btk: np.ndarray        # B^T k
    hb: np.ndarray
    bthb: np.ndarray
    bv: np.ndarray
    bvbt: np.ndarray

    @classmethod
    def from_matrices(cls, c, a_k, b_k, d_k) -> "TUpdateWorkspace":
        cm, am, bm, dm = (as_array(x) for x in (c, a_k, b_k, d_k))
        h = am.T @ am
        v = dm @ dm.T
        e = cm - am @ (bm @ dm)
        k = am.T @ e @ dm.T
        hb = h @ bm
        bv = bm @ v
        return cls(v=v, h=h, j=am.T @ cm, k=k, kbt=k @ bm.T, btk=bm.T @ k,
                   hb=hb, bthb=bm.T @ hb, bv=bv, bvbt=bv @ bm.T)


def _d_scale_poly(e1, e2, e3, n1, n2, n3, c12, c13, c23, b):
    """Ascending coefficients of P(a) = a^2 * cost(a) for the scaling family."""
    b2 = b * b
    p4 = n1 + b2 * n3 - 2 * b * c13
    p3 = -2 * e1 + 2 * b * e3 - 2 * n1 - 4 * b2 * n3 - 2 * c12 + 6 * b * c13 + 2 * b * c23
    p2 = (2 * e1 + 2 * e2 - 4 * b * e3 + n1 + n2 + 6 * b2 * n3 + 4 * c12
          - 6 * b * c13 - 6 * b * c23)
    p1 = -2 * e2 + 2 * b * e3 - 2 * n2 - 4 * b2 * n3 - 2 * c12 + 2 * b * c13 + 6 * b * c23
    p0 = n2 + b2 * n3 - 2 * b * c23
    return p0, p1, p2, p3, p4


def _scale_poly_best(p0, p1, p2, p3, p4):
    """Minimize P(a)/a^2 over valid a; stationary points solve
    2 p4 a^4 + p3 a^3 - p1 a - 2 p0 = 0."""
    k = p0.shape[0]
    coeffs = np.stack([-2 * p0, -p1, np.zeros(k), p3, 2 * p4], axis=-1)
    roots = quartic_real_roots_batch(coeffs)
    roots = np.concatenate([roots, np.full((k, 1), 1.0),
                            np.full((k, 1), CANDIDATE_CLAMP),
                            np.full((k, 1), -CANDIDATE_CLAMP)], axis=1)
    bad = ~np.isfinite(roots) | (np.abs(roots) < SCALE_EPS) | (np.abs(roots) > CANDIDATE_CLAMP)
    a = np.where(bad, 1.0, roots)
    pa = ((((p4[:, None] * a) + p3[:, None]) * a + p2[:, None]) * a + p1[:, None]) * a + p0[:, None]
    vals = np.where(bad, np.inf, pa / (a * a))
    pick = np.argmin(vals, axis=1)
    rows = np.arange(k)
    return vals[rows, pick], a[rows, pick]


def _d_cost_single(cm, am, bm, dm, f, i, j):
    """Ascending cost-polynomial coefficients for one (f, i, j), O(n^2).

    For shears returns (0, q1, q2, q3, q4) with cost = poly(a).  For the
    scaling family returns P's coefficients with cost = P(a) / a^2.
    All products are matrix-vector chains; no n x n product is formed.
    """
    if f == 2:
        u = am[:, i]
        drow = dm[j, :]
        brd = bm[j, :] @ dm
        h_ii = float(u @ u)
        v_jj = float(drow @ drow)
        bv_jj = float(brd @ drow)
        bvbt_jj = float(brd @ brd)
        p = am @ bm[:, i]
        hb_ii = float(p @ u)
        bthb_ii = float(p @ p)
        cu = u @ cm
        w1 = u @ am
        ddj = dm @ drow
        k_ij = float(cu @ drow) - float(w1 @ (bm @ ddj))
        ddr = dm @ brd
        kbt_ij = float(cu @ brd) - float(w1 @ (bm @ ddr))
        cp = p @ cm
        w2 = p @ am
        btk_ij = float(cp @ drow) - float(w2 @ (bm @ ddj))
        bji = bm[j, i]
        q1 = -2.0 * (kbt_ij - btk_ij)
        q2 = 2.0 * bji * k_ij + h_ii * bvbt_jj + bthb_ii * v_jj - 2.0 * hb_ii * bv_jj
        q3 = -2.0 * bji * (h_ii * bv_jj - hb_ii * v_jj)
        q4 = bji * bji * h_ii * v_jj
        return 0.0, q1, q2, q3, q4
    if f == 3:
        u = am[:, j]
        drow = dm[i, :]
        brd = bm[i, :] @ dm
        h_jj = float(u @ u)
        v_ii = float(drow @ drow)
        bv_ii = float(brd @ drow)
        bvbt_ii = float(brd @ brd)
        p = am @ bm[:, j]
        hb_jj = float(p @ u)
        bthb_jj = float(p @ p)
        cu = u @ cm
        w1 = u @ am
        ddi = dm @ drow
        k_ji = float(cu @ drow) - float(w1 @ (bm @ ddi))
        ddr = dm @ brd
        kbt_ji = float(cu @ brd) - float(w1 @ (bm @ ddr))
        cp = p @ cm
        w2 = p @ am
        btk_ji = float(cp @ drow) - float(w2 @ (bm @ ddi))
        bij = bm[i, j]
        q1 = -2.0 * (kbt_ji - btk_ji)
        q2 = 2.0 * bij * k_ji + h_jj * bvbt_ii + bthb_jj * v_ii - 2.0 * hb_jj * bv_ii
        q3 = -2.0 * bij * (h_jj * bv_ii - hb_jj * v_ii)
        q4 = bij * bij * h_jj * v_ii
        return 0.0, q1, q2, q3, q4
    # scaling at i
    u = am[:, i]
    drow = dm[i, :]
    brd = bm[i, :] @ dm
    h_ii = float(u @ u)
    v_ii = float(drow @ drow)
    bv_ii = float(brd @ drow)
    bvbt_ii = float(brd @ brd)
    p = am @ bm[:, i]
    hb_ii = float(p @ u)
    bthb_ii = float(p @ p)
    cu = u @ cm
    w1 = u @ am
    ddi = dm @ drow
    e3 = float(cu @ drow) - float(w1 @ (bm @ ddi))
    ddr = dm @ brd
    e1 = float(cu @ brd) - float(w1 @ (bm @ ddr))
    cp = p @ cm
    w2 = p @ am
    e2 = float(cp @ drow) - float(w2 @ (bm @ ddi))
    return _d_scale_poly(e1, e2, e3,
                         h_ii * bvbt_ii, bthb_ii * v_ii, h_ii * v_ii,
                         hb_ii * bv_ii, h_ii * bv_ii, hb_ii * v_ii, bm[i, i])


def _best_a_for_coeffs(f, coeffs, extra_candidates=()):
    """Scalar candidate minimization for one cost polynomial."""
    p0, p1, p2, p3, p4 = coeffs
    if f == 1:
        quart = np.array([[-2 * p0, -p1, 0.0, p3, 2 * p4]])
        roots = quartic_real_roots_batch(quart)[0]
        cands = [1.0, CANDIDATE_CLAMP, -CANDIDATE_CLAMP]
        cands += [r for r in roots
                  if np.isfinite(r) and SCALE_EPS <= abs(r) <= CANDIDATE_CLAMP]
        cands += [a for a in extra_candidates if abs(a) >= SCALE_EPS]

        def value(a):
            return float(np.polyval([p4, p3, p2, p1, p0], a) / (a * a))
    else:
        roots = cubic_real_roots_batch(np.array([4 * p4]), np.array([3 * p3]),
                                       np.array([2 * p2]), np.array([p1]))[0]
        cands = [0.0, CANDIDATE_CLAMP, -CANDIDATE_CLAMP]
        cands += [r for r in roots if np.isfinite(r) and abs(r) <= CANDIDATE_CLAMP]
        cands += list(extra_candidates)

        def value(a):
            return float(np.polyval([p4, p3, p2, p1], a) * a)
    best_a, best_v = cands[0], value(cands[0])
    for a in cands[1:]:
        v = value(a)
        if v < best_v:
            best_v, best_a = v, a
    return best_a, best_v


def update_t_step(c, a_k, b_k, d_k, ws: TUpdateWorkspace | None = None,
                  scope=None) -> TStep:
    """Optimal single-transform update of ||C - A T B T^{-1} D||_F^2.

    scope=None searches every (family, i, j); scope=(i, j) fixes the index
    pair; scope=(f, i, j) additionally fixes the family, which is the
    polishing step.  The cost returned excludes the constant ||C - A B D||^2.
    """
    cm, am, bm, dm = (as_array(x) for x in (c, a_k, b_k, d_k))
    n = cm.shape[0]
    if scope is not None:
        if len(scope) == 3:
            f, i, j = scope
            fams = [f]
        else:
            i, j = scope
            fams = [1] if i == j else [2, 3]
        best = None
        for f in fams:
            coeffs = _d_cost_single(cm, am, bm, dm, f, i, j)
            a, v = _best_a_for_coeffs(f, coeffs)
            if best is None or v < best.cost:
                best = TStep(f, i, j, a, _make_transform(f, i, j, a), v)
        return best
    if ws is None:
        ws = TUpdateWorkspace.from_matrices(cm, am, bm, dm)
    hd, vd = np.diag(ws.h), np.diag(ws.v)
    hbd, bthbd = np.diag(ws.hb), np.diag(ws.bthb)
    bvd, bvbtd = np.diag(ws.bv), np.diag(ws.bvbt)
    best_val, best_key = 0.0, None
    # scaling family
    e1, e2, e3 = np.diag(ws.kbt), np.diag(ws.btk), np.diag(ws.k)
    p0, p1, p2, p3, p4 = _d_scale_poly(e1, e2, e3,
                                       hd * bvbtd, bthbd * vd, hd * vd,
                                       hbd * bvd, hd * bvd, hbd * vd, np.diag(bm))
    vals, avals = _scale_poly_best(p0, p1, p2, p3, p4)
    k = int(np.argmin(vals))
    if vals[k] < best_val:
        best_val, best_key = float(vals[k]), (1, k, k, float(avals[k]))
    if n >= 2:
        iu = np.triu_indices(n, 1)
        for f in (2, 3):
            if f == 2:
                q1 = (-2.0 * (ws.kbt - ws.btk))[iu]
                q2 = (2.0 * bm.T * ws.k + np.outer(hd, bvbtd) + np.outer(bthbd, vd)
                      - 2.0 * np.outer(hbd, bvd))[iu]
                q3 = (-2.0 * bm.T * (np.outer(hd, bvd) - np.outer(hbd, vd)))[iu]
                q4 = ((bm.T ** 2) * np.outer(hd, vd))[iu]
            else:
                q1 = (-2.0 * (ws.kbt - ws.btk).T)[iu]
                q2 = (2.0 * bm * ws.k.T + np.outer(bvbtd, hd) + np.outer(vd, bthbd)
                      - 2.0 * np.outer(bvd, hbd))[iu]
                q3 = (-2.0 * bm * (np.outer(bvd, hd) - np.outer(vd, hbd)))[iu]
                q4 = ((bm ** 2) * np.outer(vd, hd))[iu]
            vals, avals = _shear_family_best(q1, q2, q3, q4)
            k = int(np.argmin(vals))
            if vals[k] < best_val:
                best_val = float(vals[k])
                best_key = (f, int(iu[0][k]), int(iu[1][k]), float(avals[k]))
    if best_key is None:
        return _identity_step(n)
    f, i, j, a = best_key
    if f == 1 and abs(a) < SCALE_EPS:
        return _identity_step(n)
    return TStep(f, i, j, a, _make_transform(f, i, j, a), best_val)


# ---------------------------------------------------------------------------
# sweeps and the driver


def _update_sweep_t(cm: np.ndarray, transforms: list, cbar: np.ndarray,
                    fixed: bool, check_inverse: bool = False) -> list:
    """One update sweep.  fixed=True keeps (f, i, j) per slot.

    check_inverse verifies the incrementally tracked D = A^{-1} at every
    position (test hook)."""
    m = len(transforms)
    if m == 0:
        return transforms
    n = cm.shape[0]
    a = np.eye(n)
    for t in transforms[1:]:
        left_apply(t, a)
    d = np.eye(n)
    for t in transforms[1:]:
        right_apply_inverse(t, d)
    b = np.diag(cbar).astype(float)
    for k in range(m):
        if check_inverse:
            drift = np.abs(a @ d - np.eye(n)).max()
            if drift > 1e-10:
                raise AssertionError(f"inverse tracking drifted to {drift:.3e}")
        cur = transforms[k]
        f_cur = {SCALE: 1, SHEAR_UPPER: 2, SHEAR_LOWER: 3}[cur.kind]
        if fixed:
            step = update_t_step(cm, a, b, d, scope=(f_cur, cur.i, cur.j))
        else:
            step = update_t_step(cm, a, b, d)
        # objective never increases: compare against keeping the current value
        cur_coeffs = _d_cost_single(cm, a, b, d, f_cur, cur.i, cur.j)
        if f_cur == 1:
            cur_val = float(np.polyval([cur_coeffs[4], cur_coeffs[3], cur_coeffs[2],
                                        cur_coeffs[1], cur_coeffs[0]], cur.a) / (cur.a ** 2))
        else:
            cur_val = float(np.polyval([cur_coeffs[4], cur_coeffs[3], cur_coeffs[2],
                                        cur_coeffs[1]], cur.a) * cur.a)
        chosen = cur if cur_val <= step.cost else step.transform
        transforms[k] = chosen
        left_apply(chosen, b)
        right_apply_inverse(chosen, b)
        if k + 1 < m:
            nxt = transforms[k + 1]
            right_apply_inverse(nxt, a)
            left_apply(nxt, d)
    return transforms


def polish_t_chain(c, chain: TransformChain, c_bar,
                   check_inverse: bool = False) -> TransformChain:
    """One polishing sweep: every (f, i, j) fixed, each a re-optimized."""
    cm = as_array(c)
    cbar = np.asarray(c_bar, dtype=float).reshape(-1)
    transforms = list(chain.transforms)
    transforms = _update_sweep_t(cm, transforms, cbar, fixed=True,
                                 check_inverse=check_inverse)
    return TransformChain(n=chain.n, kind=T_CHAIN, transforms=tuple(transforms), spectrum=cbar)


def _objective_t(cm: np.ndarray, transforms, cbar: np.ndarray) -> float:
    recon = _kr_forward(transforms, cm.shape[0], cbar)
    return float(((cm - recon) ** 2).sum())


def factorize_general(c, m: int, spectrum_rule: str = SPECTRUM_UPDATE,
                      eps: float = 1e-2, mode: str = MODE_POLISH,
                      spectrum=None, max_sweeps: int = DEFAULT_MAX_SWEEPS,
                      spectrum_solver: str = "dense"):
    """Run Setup -> Initialization -> Iterations for a general square input.

    Returns (TransformChain, FactorizationReport).  The spectrum stays
    real-valued throughout; matrices with strongly complex spectra simply
    approximate worse.
    """
    started = time.perf_counter()
    cm = as_array(c)
    if cm.ndim != 2 or cm.shape[0] != cm.shape[1]:
        raise DimensionMismatch("factorize_general expects a square matrix")
    n = cm.shape[0]
    if m < 0:
        raise ValidationError("m must be non-negative")
    if eps <= 0.0:
        raise ValidationError("eps must be positive")
    if mode not in (MODE_FULL, MODE_POLISH):
        raise ValidationError(f"unknown mode {mode!r}")
    if spectrum_rule not in (SPECTRUM_ORIGINAL, SPECTRUM_UPDATE):
        raise ValidationError(f"unknown spectrum rule {spectrum_rule!r}")
    norm_sq = float((cm * cm).sum())
    if spectrum_rule == SPECTRUM_ORIGINAL:
        if spectrum is None:
            raise MissingSpectrum("spectrum_rule='original' needs caller-supplied eigenvalues")
        cbar = np.asarray(spectrum, dtype=float).reshape(-1).copy()
        if cbar.size != n:
            raise DimensionMismatch("supplied spectrum length must equal n")
    else:
        cbar = np.diag(cm).copy()

    transforms, work, init_trace = _init_t_storage(cm, cbar, m)
    report = FactorizationReport(kind=T_CHAIN, n=n, budget=m, spectrum_rule=spectrum_rule,
                                 mode=mode, eps=eps, init_trace=init_trace)
    eps_trace = [float(((cm - work) ** 2).sum())]
    stopped_by = "max_sweeps"
    sweeps = 0
    for _ in range(max_sweeps):
        transforms = _update_sweep_t(cm, transforms, cbar, fixed=(mode == MODE_POLISH))
        if spectrum_rule == SPECTRUM_UPDATE:
            probe = TransformChain(n=n, kind=T_CHAIN, transforms=tuple(transforms),
                                   spectrum=cbar)
            new_cbar = spectrum_update_general(cm, probe, solver=spectrum_solver)
            if _objective_t(cm, transforms, new_cbar) <= _objective_t(cm, transforms, cbar):
                cbar = new_cbar
        eps_trace.append(_objective_t(cm, transforms, cbar))
        sweeps += 1
        if abs(eps_trace[-2] - eps_trace[-1]) < eps:
            stopped_by = "eps"
            break
    chain = TransformChain(n=n, kind=T_CHAIN, transforms=tuple(transforms), spectrum=cbar)
    report.sweep_trace = eps_trace
    report.sweeps_run = sweeps
    report.stopped_by = stopped_by
    report.final_error_sq = eps_trace[-1]
    report.final_rel_error_sq = eps_trace[-1] / norm_sq if norm_sq > 0 else 0.0
    report.flops = chains.flop_count(chain).multiply_adds
    report.wall_time_s = time.perf_counter() - started
    return chain, report

"""Small dense linear-algebra kernels used by every closed-form solution.

Three primitives carry the whole package: the analytic eigendecomposition of a
2x2 symmetric matrix, the minimization of a 2-variable quadratic over the unit
circle (solved through a 4x4 generalized eigenproblem), and real-root
extraction for low-degree polynomials via companion matrices.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import (
    DimensionMismatch,
    NotSymmetric,
    ValidationError,
    ZeroPolynomial,
)

SYMMETRIC = "symmetric"
GENERAL = "general"

# Relative asymmetry allowed under the symmetric tag.
SYMMETRY_TOL = 1e-12
# Below this (relative to ||r||) the linear term of unit_norm_ls is treated as zero.
DEGENERATE_RHS_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class DenseMatrix:
    """Row-major real matrix with a symmetry tag.

    The underlying array is copied and frozen at construction; instances are
    safe to share across threads.
    """

    data: np.ndarray
    symmetry_tag: str = GENERAL

    def __post_init__(self):
        arr = np.array(self.data, dtype=float, copy=True)
        if arr.ndim != 2:
            raise DimensionMismatch(f"expected a 2-D array, got ndim={arr.ndim}")
        if not np.all(np.isfinite(arr)):
            raise ValidationError("matrix entries must be finite")
        if self.symmetry_tag not in (SYMMETRIC, GENERAL):
            raise ValidationError(f"unknown symmetry tag {self.symmetry_tag!r}")
        if self.symmetry_tag == SYMMETRIC:
            if arr.shape[0] != arr.shape[1]:
                raise NotSymmetric("symmetric tag requires a square matrix")
            scale = np.abs(arr).max() if arr.size else 0.0
            if arr.size and np.abs(arr - arr.T).max() > SYMMETRY_TOL * max(scale, 1e-300):
                raise NotSymmetric("matrix is not symmetric within tolerance")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def n_rows(self) -> int:
        return self.data.shape[0]

    @property
    def n_cols(self) -> int:
        return self.data.shape[1]

    @classmethod
    def symmetric(cls, data) -> "DenseMatrix":
        return cls(data, SYMMETRIC)

    @classmethod
    def general(cls, data) -> "DenseMatrix":
        return cls(data, GENERAL)


def as_array(m) -> np.ndarray:
    """Accept a DenseMatrix or anything array-like; return a float ndarray."""
    if isinstance(m, DenseMatrix):
        return m.data
    return np.asarray(m, dtype=float)


def as_symmetric_array(m) -> np.ndarray:
    """Like as_array but insists on symmetry (tag or numerical check)."""
    if isinstance(m, DenseMatrix):
        if m.symmetry_tag != SYMMETRIC:
            raise NotSymmetric("a symmetric-tagged DenseMatrix is required")
        return m.data
    arr = np.asarray(m, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise NotSymmetric("expected a square matrix")
    scale = np.abs(arr).max() if arr.size else 0.0
    if arr.size and np.abs(arr - arr.T).max() > SYMMETRY_TOL * max(scale, 1e-300):
        raise NotSymmetric("matrix is not symmetric within tolerance")
    return arr


@dataclass(frozen=True)
class Sym2x2:
    """Entries of a symmetric 2x2 block [[s_ii, s_ij], [s_ij, s_jj]]."""

    s_ii: float
    s_ij: float
    s_jj: float

    def __post_init__(self):
        if not (np.isfinite(self.s_ii) and np.isfinite(self.s_ij) and np.isfinite(self.s_jj)):
            raise ValidationError("Sym2x2 entries must be finite")


@dataclass(frozen=True)
class Eig2x2Result:
    """Descending eigenvalues plus an orthonormal eigenvector matrix.

    Column 0 of `v` belongs to lambda_hi, column 1 to lambda_lo.
    """

    lambda_hi: float
    lambda_lo: float
    v: np.ndarray = field(repr=False)


def eig2x2_sym(m: Sym2x2) -> Eig2x2Result:
    """Closed-form eigendecomposition of a symmetric 2x2 matrix.

    lambda_{1,2} = (s_ii + s_jj +/- sqrt((s_ii - s_jj)^2 + 4 s_ij^2)) / 2,
    evaluated with hypot to avoid cancellation for small off-diagonals.
    """
    sii, sij, sjj = float(m.s_ii), float(m.s_ij), float(m.s_jj)
    r = np.hypot(sii - sjj, 2.0 * sij)
    hi = 0.5 * (sii + sjj + r)
    lo = 0.5 * (sii + sjj - r)
    if sij == 0.0:
        v1 = np.array([1.0, 0.0]) if sii >= sjj else np.array([0.0, 1.0])
    else:
        # (S - hi I) v = 0; pick the better-conditioned null-space expression
        v1 = np.array([sij, hi - sii])
        alt = np.array([hi - sjj, sij])
        if alt @ alt > v1 @ v1:
            v1 = alt
        v1 = v1 / np.linalg.norm(v1)
    v = np.column_stack([v1, [-v1[1], v1[0]]])
    v.setflags(write=False)
    return Eig2x2Result(hi, lo, v)


def _pencil_min_real_lambda(r: np.ndarray, g: np.ndarray) -> float | None:
    """Minimum real generalized eigenvalue of the 4x4 (M, N) pencil.

    M = [[R^2 - g g^T, 0], [0, I]],  N = [[2R, -I], [I, 0]].  Its finite
    eigenvalues are the roots of det((R - lambda I)^2 - g g^T) = 0.
    """
    m = np.zeros((4, 4))
    m[:2, :2] = r @ r - np.outer(g, g)
    m[2:, 2:] = np.eye(2)
    n = np.zeros((4, 4))
    n[:2, :2] = 2.0 * r
    n[:2, 2:] = -np.eye(2)
    n[2:, :2] = np.eye(2)
    w = scipy.linalg.eig(m, n, right=False)
    w = w[np.isfinite(w)]
    for tol in (1e-8, 1e-6, 1e-4):
        real = w[np.abs(w.imag) <= tol * (1.0 + np.abs(w.real))].real
        if real.size:
            return float(real.min())
    return None


def _circle_scan(r: np.ndarray, g: np.ndarray, samples: int = 8192):
    th = np.linspace(0.0, 2.0 * np.pi, samples, endpoint=False)
    c, s = np.cos(th), np.sin(th)
    obj = r[0, 0] * c * c + 2.0 * r[0, 1] * c * s + r[1, 1] * s * s + 2.0 * (g[0] * c + g[1] * s)
    k = int(np.argmin(obj))
    return np.array([c[k], s[k]])


def unit_norm_ls(r, g) -> tuple[np.ndarray, float]:
    """Minimize x^T r x + 2 x^T g over unit vectors x in R^2.

    The multiplier is the minimum real generalized eigenvalue `lam` of the
    (M, N) pencil above, and x = -(r - lam I)^{-1} g.  Degenerate right-hand
    sides (||g|| <= 1e-12 ||r||) fall back to the minimum-eigenvalue
    eigenvector of r; this is a documented fallback, not a failure.
    """
    r = np.asarray(r, dtype=float).reshape(2, 2)
    g = np.asarray(g, dtype=float).reshape(2)
    if not (np.all(np.isfinite(r)) and np.all(np.isfinite(g))):
        raise ValidationError("unit_norm_ls requires finite inputs")
    r = 0.5 * (r + r.T)
    norm_r = np.linalg.norm(r)
    if np.linalg.norm(g) <= DEGENERATE_RHS_TOL * max(norm_r, 1e-300):
        res = eig2x2_sym(Sym2x2(r[0, 0], r[0, 1], r[1, 1]))
        x = res.v[:, 1].copy()
        return x, float(x @ r @ x)
    lam = _pencil_min_real_lambda(r, g)
    if lam is None:
        x = _circle_scan(r, g)
    else:
        shifted = r - lam * np.eye(2)
        det = shifted[0, 0] * shifted[1, 1] - shifted[0, 1] * shifted[1, 0]
        scale = norm_r + abs(lam) + 1e-300
        if abs(det) < 1e-14 * scale * scale:
            # repeated generalized eigenvalue; nudge off the singularity
            shifted = shifted + 1e-12 * scale * np.eye(2)
        x = -np.linalg.solve(shifted, g)
        nx = np.linalg.norm(x)
        if not np.isfinite(nx) or nx < 1e-300:
            x = _circle_scan(r, g)
        else:
            x = x / nx
    return x, float(x @ r @ x + 2.0 * x @ g)


@dataclass(frozen=True)
class Polynomial:
    """Real polynomial, coefficients in ascending degree order."""

    coefficients: np.ndarray

    def __post_init__(self):
        arr = np.array(self.coefficients, dtype=float, copy=True).reshape(-1)
        if arr.size == 0:
            raise ValidationError("a polynomial needs at least one coefficient")
        if not np.all(np.isfinite(arr)):
            raise ValidationError("polynomial coefficients must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "coefficients", arr)

    def __call__(self, x):
        return np.polyval(self.coefficients[::-1], x)


def real_roots(p) -> np.ndarray:
    """All real roots of p, sorted ascending, deduplicated within 1e-10.

    Found as companion-matrix eigenvalues, keeping roots with
    |Im| <= 1e-8 (1 + |Re|).  Raises ZeroPolynomial when every coefficient
    vanishes.
    """
    coeffs = p.coefficients if isinstance(p, Polynomial) else np.asarray(p, dtype=float).reshape(-1)
    if coeffs.size == 0 or np.all(coeffs == 0.0):
        raise ZeroPolynomial("all coefficients vanish")
    scale = np.abs(coeffs).max()
    trimmed = np.trim_zeros(np.where(np.abs(coeffs) <= 1e-14 * scale, 0.0, coeffs), "b")
    if trimmed.size <= 1:
        return np.empty(0)
    rts = np.roots(trimmed[::-1])
    real = np.sort(rts[np.abs(rts.imag) <= 1e-8 * (1.0 + np.abs(rts.real))].real)
    if real.size == 0:
        return real
    keep = [real[0]]
    for x in real[1:]:
        if abs(x - keep[-1]) > 1e-10:
            keep.append(x)
    return np.array(keep)


# ---------------------------------------------------------------------------
# dense plumbing


def dense_multiply(a, b) -> DenseMatrix:
    am, bm = as_array(a), as_array(b)
    if am.ndim != 2 or bm.ndim != 2 or am.shape[1] != bm.shape[0]:
        raise DimensionMismatch(f"cannot multiply shapes {am.shape} and {bm.shape}")
    return DenseMatrix(am @ bm, GENERAL)


def dense_transpose(a) -> DenseMatrix:
    am = as_array(a)
    if am.ndim != 2:
        raise DimensionMismatch("dense_transpose expects a matrix")
    tag = a.symmetry_tag if isinstance(a, DenseMatrix) else GENERAL
    return DenseMatrix(am.T, tag)


def frobenius_norm_sq(a) -> float:
    am = as_array(a)
    return float((am * am).sum())


# ---------------------------------------------------------------------------
# batched low-degree root helpers (private; used by the factorization sweeps)


def cubic_real_roots_batch(c3, c2, c1, c0) -> np.ndarray:
    """Real roots of c3 x^3 + c2 x^2 + c1 x + c0, one polynomial per row.

    Returns an (K, 3) array padded with NaN.  Degenerate leading coefficients
    fall through to the quadratic / linear formulas row-wise.
    """
    c3, c2, c1, c0 = (np.asarray(v, dtype=float).reshape(-1) for v in (c3, c2, c1, c0))
    k = c3.shape[0]
    out = np.full((k, 3), np.nan)
    scale = np.maximum.reduce([np.abs(c3), np.abs(c2), np.abs(c1), np.abs(c0)])
    scale = np.maximum(scale, 1e-300)
    is3 = np.abs(c3) > 1e-12 * scale
    idx = np.where(is3)[0]
    if idx.size:
        a, b, c, d = c3[idx], c2[idx], c1[idx], c0[idx]
        p = (3 * a * c - b * b) / (3 * a * a)
        q = (2 * b ** 3 - 9 * a * b * c + 27 * a * a * d) / (27 * a ** 3)
        shift = -b / (3 * a)
        disc = (q / 2) ** 2 + (p / 3) ** 3
        one = disc > 0
        i1 = idx[one]
        if i1.size:
            sq = np.sqrt(disc[one])
            out[i1, 0] = np.cbrt(-q[one] / 2 + sq) + np.cbrt(-q[one] / 2 - sq) + shift[one]
        i3 = idx[~one]
        if i3.size:
            pp, qq, sh = p[~one], q[~one], shift[~one]
            rad = np.sqrt(np.maximum(-(pp ** 3) / 27.0, 0.0))
            safe = rad > 0
            ratio = np.where(safe, -qq / np.maximum(2.0 * rad, 1e-300), 0.0)
            phi = np.arccos(np.clip(ratio, -1.0, 1.0))
            mag = 2.0 * np.cbrt(rad)
            for t in range(3):
                root = np.where(safe, mag * np.cos((phi + 2.0 * np.pi * t) / 3.0), 0.0)
                out[i3, t] = root + sh
    is2 = (~is3) & (np.abs(c2) > 1e-12 * scale)
    idx = np.where(is2)[0]
    if idx.size:
        a, b, c = c2[idx], c1[idx], c0[idx]
        disc = b * b - 4 * a * c
        ok = disc >= 0
        i2 = idx[ok]
        if i2.size:
            sq = np.sqrt(disc[ok])
            out[i2, 0] = (-b[ok] + sq) / (2 * a[ok])
            out[i2, 1] = (-b[ok] - sq) / (2 * a[ok])
    is1 = (~is3) & (~is2) & (np.abs(c1) > 1e-12 * scale)
    idx = np.where(is1)[0]
    if idx.size:
        out[idx, 0] = -c0[idx] / c1[idx]
    return out


def quartic_real_roots_batch(coeffs: np.ndarray) -> np.ndarray:
    """Real roots of degree-4 polynomials, one per row of `coeffs`.

    `coeffs` is (K, 5), ascending order.  Returns (K, 4) padded with NaN.
    Rows whose leading coefficient (relatively) vanishes are delegated to the
    cubic solver.  Uses batched companion-matrix eigenvalues.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    k = coeffs.shape[0]
    out = np.full((k, 4), np.nan)
    scale = np.maximum(np.abs(coeffs).max(axis=1), 1e-300)
    lead = np.abs(coeffs[:, 4]) > 1e-12 * scale
    idx = np.where(lead)[0]
    if idx.size:
        c = coeffs[idx] / coeffs[idx, 4][:, None]
        comp = np.zeros((idx.size, 4, 4))
        comp[:, 1, 0] = 1.0
        comp[:, 2, 1] = 1.0
        comp[:, 3, 2] = 1.0
        comp[:, :, 3] = -c[:, :4]
        ev = np.linalg.eigvals(comp)
        real = np.abs(ev.imag) <= 1e-8 * (1.0 + np.abs(ev.real))
        out[idx] = np.where(real, ev.real, np.nan)
    rest = np.where(~lead)[0]
    if rest.size:
        out[rest, :3] = cubic_real_roots_batch(
            coeffs[rest, 3], coeffs[rest, 2], coeffs[rest, 1], coeffs[rest, 0]
        )
    return out

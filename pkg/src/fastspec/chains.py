"""Transform chains: ordered butterflies plus a spectrum vector.

A g_chain stores extended orthonormal Givens transforms (rotations and
reflections); a t_chain stores scaling and shear transforms.  Transform 1 is
applied first, so the dense matrix of a chain [t1, t2, ..., tk] is
tk @ ... @ t2 @ t1.  Chains are immutable values; application is pure.
"""

import json
from dataclasses import dataclass

import numpy as np

from .core import DenseMatrix, GENERAL, SYMMETRIC
from .errors import (
    DimensionMismatch,
    NonInvertibleScale,
    ParseError,
    ValidationError,
)

ROTATION = "rotation"
REFLECTION = "reflection"
SCALE = "scale"
SHEAR_UPPER = "shear_upper"
SHEAR_LOWER = "shear_lower"

G_CHAIN = "g_chain"
T_CHAIN = "t_chain"

FORWARD = "forward"
TRANSPOSE_OR_INVERSE = "transpose_or_inverse"

UNIT_TOL = 1e-12          # |c^2 + s^2 - 1| allowance
SCALE_FLOOR = 1e-12       # invertibility floor for scaling transforms


@dataclass(frozen=True)
class GTransform:
    """One extended orthonormal Givens transform acting on coordinates (i, j).

    family='rotation' embeds [[c, s], [-s, c]]; family='reflection' embeds
    [[c, s], [s, -c]].
    """

    i: int
    j: int
    c: float
    s: float
    family: str = ROTATION

    def __post_init__(self):
        if not (0 <= self.i < self.j):
            raise ValidationError(f"need 0 <= i < j, got ({self.i}, {self.j})")
        if self.family not in (ROTATION, REFLECTION):
            raise ValidationError(f"unknown G family {self.family!r}")
        if not (np.isfinite(self.c) and np.isfinite(self.s)):
            raise ValidationError("c, s must be finite")
        if abs(self.c * self.c + self.s * self.s - 1.0) > UNIT_TOL:
            raise ValidationError("c^2 + s^2 must equal 1")

    def block(self) -> np.ndarray:
        c, s = self.c, self.s
        if self.family == ROTATION:
            return np.array([[c, s], [-s, c]])
        return np.array([[c, s], [s, -c]])


@dataclass(frozen=True)
class TTransform:
    """One scaling or shear transform.

    kind='scale' multiplies coordinate i by a (convention i == j);
    kind='shear_upper' adds a * x[j] to x[i]; kind='shear_lower' adds
    a * x[i] to x[j].
    """

    kind: str
    i: int
    j: int
    a: float

    def __post_init__(self):
        if self.kind not in (SCALE, SHEAR_UPPER, SHEAR_LOWER):
            raise ValidationError(f"unknown T kind {self.kind!r}")
        if not np.isfinite(self.a):
            raise ValidationError("a must be finite")
        if self.kind == SCALE:
            if self.i != self.j:
                raise ValidationError("scale transforms use the convention i == j")
            if self.i < 0:
                raise ValidationError("negative index")
            if abs(self.a) < SCALE_FLOOR:
                raise NonInvertibleScale(f"|a| = {abs(self.a):g} below the invertibility floor")
        else:
            if not (0 <= self.i < self.j):
                raise ValidationError(f"shears need 0 <= i < j, got ({self.i}, {self.j})")


@dataclass(frozen=True)
class TransformChain:
    """Ordered butterflies plus the spectrum vector (s-bar or c-bar)."""

    n: int
    kind: str
    transforms: tuple
    spectrum: np.ndarray

    def __post_init__(self):
        if self.kind not in (G_CHAIN, T_CHAIN):
            raise ValidationError(f"unknown chain kind {self.kind!r}")
        want = GTransform if self.kind == G_CHAIN else TTransform
        transforms = tuple(self.transforms)
        for t in transforms:
            if not isinstance(t, want):
                raise ValidationError(f"{self.kind} may only hold {want.__name__} members")
            if t.j >= self.n:
                raise ValidationError(f"transform index {t.j} out of range for n={self.n}")
        spec = np.array(self.spectrum, dtype=float, copy=True).reshape(-1)
        if spec.size != self.n:
            raise DimensionMismatch(f"spectrum length {spec.size} != n = {self.n}")
        if not np.all(np.isfinite(spec)):
            raise ValidationError("spectrum entries must be finite")
        spec.setflags(write=False)
        object.__setattr__(self, "transforms", transforms)
        object.__setattr__(self, "spectrum", spec)

    def __len__(self):
        return len(self.transforms)


@dataclass(frozen=True)
class FlopCount:
    """Multiply-add count for one chain-vector product."""

    multiply_adds: int


# ---------------------------------------------------------------------------
# single-transform actions on vectors and matrix rows/columns


def _g_vec(t: GTransform, x: np.ndarray, transpose: bool):
    c, s = t.c, t.s
    xi, xj = x[t.i], x[t.j]
    if t.family == ROTATION:
        if transpose:
            x[t.i] = c * xi - s * xj
            x[t.j] = s * xi + c * xj
        else:
            x[t.i] = c * xi + s * xj
            x[t.j] = -s * xi + c * xj
    else:  # reflection blocks are symmetric
        x[t.i] = c * xi + s * xj
        x[t.j] = s * xi - c * xj


def _t_vec(t: TTransform, x: np.ndarray, inverse: bool):
    if t.kind == SCALE:
        x[t.i] = x[t.i] / t.a if inverse else x[t.i] * t.a
    elif t.kind == SHEAR_UPPER:
        x[t.i] += (-t.a if inverse else t.a) * x[t.j]
    else:
        x[t.j] += (-t.a if inverse else t.a) * x[t.i]


def left_apply(t, m: np.ndarray):
    """m <- T m for one transform (rows change)."""
    if isinstance(t, GTransform):
        blk = t.block()
        m[[t.i, t.j], :] = blk @ m[[t.i, t.j], :]
    elif t.kind == SCALE:
        m[t.i, :] *= t.a
    elif t.kind == SHEAR_UPPER:
        m[t.i, :] += t.a * m[t.j, :]
    else:
        m[t.j, :] += t.a * m[t.i, :]


def right_apply_transpose(t: GTransform, m: np.ndarray):
    """m <- m T^T for one G-transform (columns change)."""
    blk = t.block()
    m[:, [t.i, t.j]] = m[:, [t.i, t.j]] @ blk.T


def right_apply_inverse(t: TTransform, m: np.ndarray):
    """m <- m T^{-1} for one T-transform (columns change)."""
    if t.kind == SCALE:
        if abs(t.a) < SCALE_FLOOR:
            raise NonInvertibleScale("scale not invertible")
        m[:, t.i] /= t.a
    elif t.kind == SHEAR_UPPER:
        m[:, t.j] -= t.a * m[:, t.i]
    else:
        m[:, t.i] -= t.a * m[:, t.j]


# ---------------------------------------------------------------------------
# chain operations


def apply(chain: TransformChain, x, mode: str = FORWARD) -> np.ndarray:
    """Apply the chain (or its transpose/inverse) to a vector in O(budget).

    forward computes (t_k ... t_1) x.  The second mode computes U^T x for
    g_chains and T^{-1} x for t_chains; each touches only the one or two
    coordinates a transform involves.
    """
    if mode not in (FORWARD, TRANSPOSE_OR_INVERSE):
        raise ValidationError(f"unknown apply mode {mode!r}")
    vec = np.array(x, dtype=float, copy=True).reshape(-1)
    if vec.size != chain.n:
        raise DimensionMismatch(f"vector length {vec.size} != chain dimension {chain.n}")
    is_g = chain.kind == G_CHAIN
    if mode == FORWARD:
        for t in chain.transforms:
            _g_vec(t, vec, False) if is_g else _t_vec(t, vec, False)
    else:
        for t in reversed(chain.transforms):
            if is_g:
                _g_vec(t, vec, True)
            else:
                if t.kind == SCALE and abs(t.a) < SCALE_FLOOR:
                    raise NonInvertibleScale("scale not invertible")
                _t_vec(t, vec, True)
    return vec


def to_dense(chain: TransformChain) -> DenseMatrix:
    """Densify the chain product (equivalent to applying it to every basis vector)."""
    m = np.eye(chain.n)
    for t in chain.transforms:
        left_apply(t, m)
    return DenseMatrix(m, GENERAL)


def to_dense_inverse(chain: TransformChain) -> DenseMatrix:
    """Dense U^T (g_chain) or T^{-1} (t_chain)."""
    m = np.eye(chain.n)
    if chain.kind == G_CHAIN:
        return DenseMatrix(to_dense(chain).data.T, GENERAL)
    for t in chain.transforms:
        right_apply_inverse(t, m)
    return DenseMatrix(m, GENERAL)


def reconstruct(chain: TransformChain) -> DenseMatrix:
    """Dense S-bar = U diag(spectrum) U^T or C-bar = T diag(spectrum) T^{-1}."""
    m = np.diag(chain.spectrum).astype(float)
    for t in chain.transforms:
        left_apply(t, m)
    for t in chain.transforms:
        if chain.kind == G_CHAIN:
            right_apply_transpose(t, m)
        else:
            right_apply_inverse(t, m)
    tag = SYMMETRIC if chain.kind == G_CHAIN else GENERAL
    if tag == SYMMETRIC:
        m = 0.5 * (m + m.T)  # exact symmetry despite roundoff in the sweeps
    return DenseMatrix(m, tag)


def flop_count(chain: TransformChain) -> FlopCount:
    """6 per G-transform; 1 per scaling and 2 per shear."""
    if chain.kind == G_CHAIN:
        return FlopCount(6 * len(chain.transforms))
    m1 = sum(1 for t in chain.transforms if t.kind == SCALE)
    m2 = len(chain.transforms) - m1
    return FlopCount(m1 + 2 * m2)


# ---------------------------------------------------------------------------
# serialization: structured text, one JSON document, 17-significant-digit scalars


FORMAT_VERSION = 1


def _fmt(x: float) -> float:
    # round-trips exactly: 17 significant decimal digits identify a double
    return float(f"{float(x):.17g}")


def serialize(chain: TransformChain) -> str:
    records = []
    for t in chain.transforms:
        if chain.kind == G_CHAIN:
            records.append({"i": t.i, "j": t.j, "c": _fmt(t.c), "s": _fmt(t.s),
                            "reflect": t.family == REFLECTION})
        else:
            records.append({"type": t.kind, "i": t.i, "j": t.j, "a": _fmt(t.a)})
    doc = {
        "version": FORMAT_VERSION,
        "kind": chain.kind,
        "n": chain.n,
        "spectrum": [_fmt(v) for v in chain.spectrum],
        "transforms": records,
    }
    return json.dumps(doc, indent=1)


def _field(rec: dict, name: str, types, where: str):
    if name not in rec:
        raise ParseError(f"{where}: missing field {name!r}")
    val = rec[name]
    if types is float:
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            raise ParseError(f"{where}: field {name!r} must be a number")
        return float(val)
    if types is int:
        if isinstance(val, bool) or not isinstance(val, int):
            raise ParseError(f"{where}: field {name!r} must be an integer")
        return val
    if not isinstance(val, types):
        raise ParseError(f"{where}: field {name!r} has the wrong type")
    return val


def deserialize(text: str) -> TransformChain:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object")
    version = _field(doc, "version", int, "document")
    if version != FORMAT_VERSION:
        raise ParseError(f"unsupported format version {version}")
    kind = _field(doc, "kind", str, "document")
    if kind not in (G_CHAIN, T_CHAIN):
        raise ParseError(f"unknown chain kind {kind!r}")
    n = _field(doc, "n", int, "document")
    spectrum = _field(doc, "spectrum", list, "document")
    raw = _field(doc, "transforms", list, "document")
    transforms = []
    for k, rec in enumerate(raw):
        where = f"transforms[{k}]"
        if not isinstance(rec, dict):
            raise ParseError(f"{where}: expected an object")
        try:
            if kind == G_CHAIN:
                for extra in rec:
                    if extra not in ("i", "j", "c", "s", "reflect"):
                        raise ParseError(f"{where}: unknown field {extra!r}")
                transforms.append(GTransform(
                    i=_field(rec, "i", int, where),
                    j=_field(rec, "j", int, where),
                    c=_field(rec, "c", float, where),
                    s=_field(rec, "s", float, where),
                    family=REFLECTION if _field(rec, "reflect", bool, where) else ROTATION,
                ))
            else:
                for extra in rec:
                    if extra not in ("type", "i", "j", "a"):
                        raise ParseError(f"{where}: unknown field {extra!r}")
                transforms.append(TTransform(
                    kind=_field(rec, "type", str, where),
                    i=_field(rec, "i", int, where),
                    j=_field(rec, "j", int, where),
                    a=_field(rec, "a", float, where),
                ))
        except (ValidationError, NonInvertibleScale) as exc:
            raise type(exc)(f"{where}: {exc}") from exc
    try:
        return TransformChain(n=n, kind=kind, transforms=tuple(transforms), spectrum=spectrum)
    except (ValidationError, DimensionMismatch) as exc:
        raise type(exc)(f"document: {exc}") from exc

"""Shared builders for the test suite: random matrices, random chains,
planted factorizations, and dense reference objectives."""

import numpy as np

from fastspec.chains import (
    GTransform,
    REFLECTION,
    ROTATION,
    SCALE,
    SHEAR_LOWER,
    SHEAR_UPPER,
    TTransform,
    T_CHAIN,
    G_CHAIN,
    TransformChain,
)


def random_symmetric(rng, n, scale=1.0):
    x = rng.normal(size=(n, n)) * scale
    return x + x.T


def random_g_transform(rng, n):
    i, j = sorted(rng.choice(n, size=2, replace=False))
    th = rng.uniform(0.0, 2.0 * np.pi)
    fam = ROTATION if rng.random() < 0.5 else REFLECTION
    return GTransform(i=int(i), j=int(j), c=float(np.cos(th)), s=float(np.sin(th)), family=fam)


def random_g_chain(rng, n, g, spectrum=None):
    ts = tuple(random_g_transform(rng, n) for _ in range(g))
    spec = rng.normal(size=n) if spectrum is None else np.asarray(spectrum, dtype=float)
    return TransformChain(n=n, kind=G_CHAIN, transforms=ts, spectrum=spec)


def random_t_transform(rng, n, max_shear=1.2):
    f = int(rng.integers(1, 4))
    if f == 1:
        i = int(rng.integers(0, n))
        a = float(rng.uniform(0.6, 1.8)) * (1.0 if rng.random() < 0.5 else -1.0)
        return TTransform(kind=SCALE, i=i, j=i, a=a)
    i, j = sorted(rng.choice(n, size=2, replace=False))
    a = float(rng.uniform(-max_shear, max_shear))
    kind = SHEAR_UPPER if f == 2 else SHEAR_LOWER
    return TTransform(kind=kind, i=int(i), j=int(j), a=a)


def random_t_chain(rng, n, m, spectrum=None):
    ts = tuple(random_t_transform(rng, n) for _ in range(m))
    spec = rng.normal(size=n) if spectrum is None else np.asarray(spectrum, dtype=float)
    return TransformChain(n=n, kind=T_CHAIN, transforms=ts, spectrum=spec)


def g_transform_dense(t, n):
    m = np.eye(n)
    m[np.ix_([t.i, t.j], [t.i, t.j])] = t.block()
    return m


def t_transform_dense(t, n):
    m = np.eye(n)
    if t.kind == SCALE:
        m[t.i, t.i] = t.a
    elif t.kind == SHEAR_UPPER:
        m[t.i, t.j] = t.a
    else:
        m[t.j, t.i] = t.a
    return m


def chain_dense_naive(chain):
    """Independent densification: explicit per-transform matrices multiplied
    in product order (storage index 1 applied first = rightmost factor)."""
    n = chain.n
    out = np.eye(n)
    for t in chain.transforms:
        mat = g_transform_dense(t, n) if chain.kind == G_CHAIN else t_transform_dense(t, n)
        out = mat @ out
    return out


def naive_multiply(a, b):
    n, k = a.shape
    k2, m = b.shape
    out = np.zeros((n, m))
    for i in range(n):
        for j in range(m):
            acc = 0.0
            for t in range(k):
                acc += a[i, t] * b[t, j]
            out[i, j] = acc
    return out


def planted_symmetric(rng, n, g, spread=3.0):
    """S = U0 diag(d) U0^T for a known random chain; returns (S, chain)."""
    d = np.sort(rng.normal(size=n) * spread)[::-1].copy()
    chain = random_g_chain(rng, n, g, spectrum=d)
    u = chain_dense_naive(chain)
    return u @ np.diag(d) @ u.T, chain


def planted_general(rng, n, m, spread=2.0):
    """C = T0 diag(d) T0^{-1} for a known random chain; returns (C, chain)."""
    d = np.sort(rng.normal(size=n) * spread)[::-1].copy()
    chain = random_t_chain(rng, n, m, spectrum=d)
    t = chain_dense_naive(chain)
    return t @ np.diag(d) @ np.linalg.inv(t), chain

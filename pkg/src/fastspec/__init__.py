"""Numerically efficient approximate eigendecompositions.

Symmetric matrices factor through chains of extended orthonormal Givens
transforms; general matrices through chains of scaling and shear transforms.
Both come with locally optimal closed-form initialization and update steps,
O(budget) application of the learned transforms, and a benchmark harness for
fast graph Fourier transforms.
"""

from .chains import (
    FlopCount,
    GTransform,
    TTransform,
    TransformChain,
    apply,
    deserialize,
    flop_count,
    reconstruct,
    serialize,
    to_dense,
)
from .core import (
    DenseMatrix,
    Eig2x2Result,
    Polynomial,
    Sym2x2,
    dense_multiply,
    dense_transpose,
    eig2x2_sym,
    frobenius_norm_sq,
    real_roots,
    unit_norm_ls,
)
from .gfactor import (
    GScoreTable,
    GUpdateWorkspace,
    factorize_symmetric,
    gamma,
    init_g_chain,
    init_g_step,
    polish_g_chain,
    score_table,
    spectrum_update_sym,
    update_g_step,
)
from .graphio import Graph, erdos_renyi, laplacian, load_edge_list, load_matrix_market
from .oracle import brute_g_init, brute_g_update, brute_t, jacobi_truncated, low_rank_baseline
from .report import FactorizationReport
from .tfactor import (
    TInitWorkspace,
    TUpdateWorkspace,
    factorize_general,
    init_t_chain,
    init_t_step,
    polish_t_chain,
    spectrum_update_general,
    t_init_cost,
    update_t_step,
)

__version__ = "0.1.0"

__all__ = [
    "DenseMatrix", "Sym2x2", "Eig2x2Result", "Polynomial",
    "eig2x2_sym", "unit_norm_ls", "real_roots",
    "dense_multiply", "dense_transpose", "frobenius_norm_sq",
    "GTransform", "TTransform", "TransformChain", "FlopCount",
    "apply", "to_dense", "reconstruct", "flop_count", "serialize", "deserialize",
    "gamma", "score_table", "GScoreTable", "GUpdateWorkspace",
    "init_g_step", "init_g_chain", "update_g_step", "polish_g_chain",
    "spectrum_update_sym", "factorize_symmetric",
    "TInitWorkspace", "TUpdateWorkspace",
    "t_init_cost", "init_t_step", "init_t_chain", "update_t_step",
    "polish_t_chain", "spectrum_update_general", "factorize_general",
    "Graph", "laplacian", "erdos_renyi", "load_edge_list", "load_matrix_market",
    "brute_g_init", "brute_g_update", "brute_t", "jacobi_truncated", "low_rank_baseline",
    "FactorizationReport",
]

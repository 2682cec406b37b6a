"""Graph ingestion, Laplacian construction, and seeded random graphs.

Laplacians follow L = D - A with D the (out-)degree diagonal; for directed
graphs the out-degree convention keeps every row sum at zero.
"""

from dataclasses import dataclass

import numpy as np

from .core import DenseMatrix, GENERAL, SYMMETRIC
from .errors import IndexOutOfRange, ParseError, ValidationError


@dataclass(frozen=True)
class Graph:
    """Vertex count plus weighted edge list; undirected edges stored once with u < v."""

    n: int
    edges: tuple
    directed: bool = False

    def __post_init__(self):
        if self.n < 0:
            raise ValidationError("vertex count must be non-negative")
        normalized = []
        for e in self.edges:
            if len(e) == 2:
                u, v, w = int(e[0]), int(e[1]), 1.0
            else:
                u, v, w = int(e[0]), int(e[1]), float(e[2])
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise IndexOutOfRange(f"edge ({u}, {v}) outside 0..{self.n - 1}")
            if u == v:
                raise ValidationError(f"self-loop at vertex {u}")
            if not self.directed and u > v:
                u, v = v, u
            normalized.append((u, v, w))
        object.__setattr__(self, "edges", tuple(normalized))


def adjacency(g: Graph) -> np.ndarray:
    a = np.zeros((g.n, g.n))
    for u, v, w in g.edges:
        a[u, v] += w
        if not g.directed:
            a[v, u] += w
    return a


def laplacian(g: Graph) -> DenseMatrix:
    """L = D - A; symmetric-tagged for undirected graphs."""
    a = adjacency(g)
    lap = np.diag(a.sum(axis=1)) - a
    return DenseMatrix(lap, GENERAL if g.directed else SYMMETRIC)


def erdos_renyi(n: int, p: float, seed: int, directed: bool = False) -> Graph:
    """G(n, p): each unordered pair present independently with probability p.

    For directed graphs each present edge gets a direction with probability
    one half.  Identical (n, p, seed) always produce identical edge sets.
    """
    if not (0.0 <= p <= 1.0):
        raise ValidationError("p must lie in [0, 1]")
    rng = np.random.default_rng(np.uint64(seed))
    iu, ju = np.triu_indices(n, 1)
    present = rng.random(iu.size) < p
    us, vs = iu[present], ju[present]
    if directed:
        flip = rng.random(us.size) < 0.5
        us, vs = np.where(flip, vs, us), np.where(flip, us, vs)
    edges = tuple((int(u), int(v), 1.0) for u, v in zip(us, vs))
    return Graph(n=n, edges=edges, directed=directed)


# ---------------------------------------------------------------------------
# file formats


def load_edge_list(path) -> Graph:
    """Whitespace-separated "u v [w]" lines after a "n <count> directed|undirected"
    header; '#' starts a comment."""
    header = None
    edges = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if header is None:
                if len(parts) != 3 or parts[0] != "n":
                    raise ParseError(f"line {lineno}: expected header 'n <count> directed|undirected'")
                try:
                    count = int(parts[1])
                except ValueError:
                    raise ParseError(f"line {lineno}: vertex count must be an integer") from None
                if parts[2] not in ("directed", "undirected"):
                    raise ParseError(f"line {lineno}: direction must be 'directed' or 'undirected'")
                header = (count, parts[2] == "directed")
                continue
            if len(parts) not in (2, 3):
                raise ParseError(f"line {lineno}: expected 'u v [w]'")
            try:
                u, v = int(parts[0]), int(parts[1])
                w = float(parts[2]) if len(parts) == 3 else 1.0
            except ValueError:
                raise ParseError(f"line {lineno}: malformed edge record") from None
            n = header[0]
            if not (0 <= u < n and 0 <= v < n):
                raise IndexOutOfRange(f"line {lineno}: vertex id outside 0..{n - 1}")
            if u == v:
                raise ParseError(f"line {lineno}: self-loops are not allowed")
            edges.append((u, v, w))
    if header is None:
        raise ParseError("empty file: missing header")
    return Graph(n=header[0], edges=tuple(edges), directed=header[1])


def load_matrix_market(path) -> DenseMatrix:
    """MatrixMarket coordinate and array formats, general and symmetric qualifiers."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.readlines()
    if not lines:
        raise ParseError("empty file")
    head = lines[0].split()
    if len(head) < 5 or head[0].lower() != "%%matrixmarket" or head[1].lower() != "matrix":
        raise ParseError("line 1: expected '%%MatrixMarket matrix <format> <field> <symmetry>'")
    layout, field, symmetry = head[2].lower(), head[3].lower(), head[4].lower()
    if layout not in ("coordinate", "array"):
        raise ParseError(f"line 1: unsupported format {layout!r}")
    if field not in ("real", "integer"):
        raise ParseError(f"line 1: unsupported field {field!r}")
    if symmetry not in ("general", "symmetric"):
        raise ParseError(f"line 1: unsupported symmetry {symmetry!r}")
    body = [(k + 1, ln.strip()) for k, ln in enumerate(lines)
            if k > 0 and ln.strip() and not ln.lstrip().startswith("%")]
    if not body:
        raise ParseError("missing size line")
    lineno, size_line = body[0]
    parts = size_line.split()
    if layout == "coordinate":
        if len(parts) != 3:
            raise ParseError(f"line {lineno}: coordinate size line needs 'rows cols nnz'")
        try:
            rows, cols, nnz = (int(x) for x in parts)
        except ValueError:
            raise ParseError(f"line {lineno}: malformed size line") from None
        mat = np.zeros((rows, cols))
        entries = body[1:]
        if len(entries) != nnz:
            raise ParseError(f"line {lineno}: expected {nnz} entries, found {len(entries)}")
        for lineno, ln in entries:
            p = ln.split()
            if len(p) != 3:
                raise ParseError(f"line {lineno}: expected 'i j value'")
            try:
                i, j, val = int(p[0]), int(p[1]), float(p[2])
            except ValueError:
                raise ParseError(f"line {lineno}: malformed entry") from None
            if not (1 <= i <= rows and 1 <= j <= cols):
                raise IndexOutOfRange(f"line {lineno}: index ({i}, {j}) outside the declared size")
            mat[i - 1, j - 1] = val
            if symmetry == "symmetric" and i != j:
                mat[j - 1, i - 1] = val
    else:
        if len(parts) != 2:
            raise ParseError(f"line {lineno}: array size line needs 'rows cols'")
        try:
            rows, cols = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(f"line {lineno}: malformed size line") from None
        values = []
        for lineno, ln in body[1:]:
            for tok in ln.split():
                try:
                    values.append(float(tok))
                except ValueError:
                    raise ParseError(f"line {lineno}: malformed value {tok!r}") from None
        if symmetry == "symmetric":
            if rows != cols:
                raise ParseError("symmetric array matrices must be square")
            expect = rows * (rows + 1) // 2
            if len(values) != expect:
                raise ParseError(f"expected {expect} packed values, found {len(values)}")
            mat = np.zeros((rows, cols))
            k = 0
            for j in range(cols):  # column-major lower triangle
                for i in range(j, rows):
                    mat[i, j] = values[k]
                    mat[j, i] = values[k]
                    k += 1
        else:
            if len(values) != rows * cols:
                raise ParseError(f"expected {rows * cols} values, found {len(values)}")
            mat = np.array(values).reshape((cols, rows)).T  # column-major
    tag = SYMMETRIC if symmetry == "symmetric" else GENERAL
    return DenseMatrix(mat, tag)


def save_matrix_market(path, m: DenseMatrix):
    """Array-format writer used by the CLI and tests."""
    arr = m.data
    sym = m.symmetry_tag == SYMMETRIC
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"%%MatrixMarket matrix array real {'symmetric' if sym else 'general'}\n")
        fh.write(f"{arr.shape[0]} {arr.shape[1]}\n")
        if sym:
            for j in range(arr.shape[1]):
                for i in range(j, arr.shape[0]):
                    fh.write(f"{arr[i, j]:.17g}\n")
        else:
            for j in range(arr.shape[1]):
                for i in range(arr.shape[0]):
                    fh.write(f"{arr[i, j]:.17g}\n")

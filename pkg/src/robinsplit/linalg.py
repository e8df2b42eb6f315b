"""Sparse matrices, direct factorization, and block-system assembly.

Thin layer over scipy.sparse: matrices are CSR in canonical form (sorted
column indices, duplicates summed, explicit zeros dropped), factorization is
a sparse LU kept for repeated solves, and block systems are assembled from
named rectangular contributions.  Factorization failures raise
SingularSystemError carrying the failing pivot index when it can be found.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ConfigurationError, SingularSystemError


def finalize_csr(matrix):
    """Return the matrix as canonical CSR (sorted, deduplicated, no zeros)."""
    m = sp.csr_matrix(matrix)
    m.sum_duplicates()
    m.sort_indices()
    m.eliminate_zeros()
    return m


@dataclass
class Factorization:
    """Sparse LU factorization reused across solves."""

    shape: tuple
    _lu: object

    def solve(self, rhs):
        rhs = np.asarray(rhs, dtype=float)
        if rhs.shape != (self.shape[0],):
            raise ValueError(f"rhs has shape {rhs.shape}, expected ({self.shape[0]},)")
        return self._lu.solve(rhs)


def _structural_singular_index(m):
    """Index of the first empty row or column, or None."""
    csr = m.tocsr()
    row_counts = np.diff(csr.indptr)
    empty = np.flatnonzero(row_counts == 0)
    if empty.size:
        return int(empty[0])
    csc = m.tocsc()
    col_counts = np.diff(csc.indptr)
    empty = np.flatnonzero(col_counts == 0)
    if empty.size:
        return int(empty[0])
    return None


def _dense_pivot_index(m):
    """First zero pivot of a dense LU, for small matrices only."""
    import scipy.linalg

    if m.shape[0] > 2048:
        return None
    _, _, u = scipy.linalg.lu(m.toarray())
    diag = np.abs(np.diag(u))
    scale = max(diag.max(), 1.0)
    bad = np.flatnonzero(diag <= 1e-14 * scale)
    return int(bad[0]) if bad.size else None


def factorize(matrix):
    """LU-factorize a square sparse matrix.

    Raises
    ------
    SingularSystemError
        If the matrix is structurally or numerically singular; the error
        carries the failing pivot index when it can be identified.
    """
    m = sp.csc_matrix(matrix)
    if m.shape[0] != m.shape[1]:
        raise ConfigurationError(f"matrix must be square, got shape {m.shape}")
    idx = _structural_singular_index(m)
    if idx is not None:
        raise SingularSystemError("matrix has an empty row or column", pivot_index=idx)
    try:
        lu = spla.splu(m)
    except RuntimeError as exc:
        raise SingularSystemError(
            f"sparse LU factorization failed: {exc}", pivot_index=_dense_pivot_index(m)
        ) from exc
    return Factorization(shape=m.shape, _lu=lu)


def solve(operator, rhs):
    """Solve against a Factorization, or factorize a raw matrix on the fly."""
    fact = operator if isinstance(operator, Factorization) else factorize(operator)
    return fact.solve(rhs)


def eliminate_dirichlet(matrix, mask):
    """Zero rows and columns at masked dofs and put ones on their diagonal.

    Valid for homogeneous boundary values: matching right-hand-side entries
    must be set to zero by the caller.
    """
    mask = np.asarray(mask, dtype=bool)
    free = sp.diags((~mask).astype(float))
    fixed = sp.diags(mask.astype(float))
    return finalize_csr(free @ matrix @ free + fixed)


@dataclass(frozen=True)
class BlockLayout:
    """Named contiguous blocks of a larger vector/matrix."""

    names: tuple
    sizes: tuple
    offsets: dict = field(hash=False, compare=False, default=None)
    dim: int = 0

    @staticmethod
    def create(named_sizes):
        names = tuple(n for n, _ in named_sizes)
        if len(set(names)) != len(names):
            raise ConfigurationError("duplicate block names")
        sizes = tuple(int(s) for _, s in named_sizes)
        offsets = {}
        off = 0
        for n, s in zip(names, sizes):
            offsets[n] = off
            off += s
        return BlockLayout(names=names, sizes=sizes, offsets=offsets, dim=off)

    def slice_of(self, name):
        off = self.offsets[name]
        return slice(off, off + self.sizes[self.names.index(name)])

    def extract(self, name, vector):
        return vector[self.slice_of(name)]


@dataclass
class BlockSystem:
    """Square block matrix plus right-hand side over a BlockLayout."""

    layout: BlockLayout
    matrix: object
    rhs: np.ndarray


def assemble_block_system(layout, contributions, rhs_parts=()):
    """Assemble a block system from named rectangular contributions.

    Parameters
    ----------
    layout : BlockLayout
    contributions : iterable of (row_block, col_block, matrix, scale)
        Matrices addressed by block names; duplicates are summed.  Shapes
        must match the named block sizes.
    rhs_parts : iterable of (block, vector)
        Right-hand-side pieces, summed into the named block.
    """
    size = dict(zip(layout.names, layout.sizes))
    rows, cols, data = [], [], []
    for rb, cb, matrix, scale in contributions:
        coo = sp.coo_matrix(matrix)
        if coo.shape != (size[rb], size[cb]):
            raise ConfigurationError(
                f"contribution ({rb},{cb}) has shape {coo.shape}, "
                f"expected {(size[rb], size[cb])}"
            )
        rows.append(coo.row + layout.offsets[rb])
        cols.append(coo.col + layout.offsets[cb])
        data.append(coo.data * scale)
    matrix = sp.coo_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
        shape=(layout.dim, layout.dim),
    )
    rhs = np.zeros(layout.dim)
    for name, vec in rhs_parts:
        vec = np.asarray(vec, dtype=float)
        if vec.shape != (size[name],):
            raise ConfigurationError(
                f"rhs part {name} has shape {vec.shape}, expected ({size[name]},)"
            )
        rhs[layout.slice_of(name)] += vec
    return BlockSystem(layout=layout, matrix=finalize_csr(matrix), rhs=rhs)

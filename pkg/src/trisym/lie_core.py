"""Structure-constant Lie algebras and their classical invariants.

Conventions: a Lie algebra is stored as a dense tensor ``c`` with
``[b_i, b_j] = sum_k c[i, j, k] b_k``.  Vectors are coordinate arrays in the
labelled basis, subspaces are orthonormal column bases and endomorphisms act
on column vectors (``(D x)_a = sum_b D[a, b] x[b]``).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import partial
from typing import Any, Iterable, Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .config import RANK_THRESHOLD, residual_tol
from .errors import IdealityViolation, InvalidDimension
from .report import Check, Report

# Above this many unknowns a stacked linear system is solved through its
# sparse Gram matrix instead of a dense SVD.
DENSE_UNKNOWN_LIMIT = 400
# Sparse Gram matrices above this size get their low spectrum by
# shift-invert, starting from a window of SPARSE_GRAM_WINDOW eigenpairs.
SPARSE_GRAM_LIMIT = 1500
SPARSE_GRAM_WINDOW = 96

# Singular values below this are zero regardless of the relative threshold,
# so products made purely of rounding noise do not acquire rank.
ABSOLUTE_FLOOR = 1e-12
# working-set bound (array entries) for the blocked Jacobi sum
JACOBI_BLOCK_ENTRIES = 12_000_000


def _cutoff(sigma_max: float, threshold: float) -> float:
    return max(threshold * sigma_max, ABSOLUTE_FLOOR)


# ---------------------------------------------------------------------------
# Subspaces and numerical rank


@dataclass(frozen=True, eq=False)
class Subspace:
    """A subspace of R^n stored as an orthonormal column basis of shape (n, k)."""

    basis: np.ndarray

    def __post_init__(self) -> None:
        basis = np.asarray(self.basis, dtype=float)
        if basis.ndim != 2:
            raise ValueError("subspace basis must be a 2-d array of column vectors")
        object.__setattr__(self, "basis", basis)

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @classmethod
    def zero(cls, n: int) -> "Subspace":
        return cls(np.zeros((n, 0)))

    @classmethod
    def full(cls, n: int) -> "Subspace":
        return cls(np.eye(n))

    @classmethod
    def coordinate(cls, n: int, indices: Iterable[int]) -> "Subspace":
        return cls(np.eye(n)[:, list(indices)])

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.T

    def distance_to(self, vectors: np.ndarray) -> float:
        """Largest norm of the component of the given columns orthogonal to self."""
        vectors = np.atleast_2d(np.asarray(vectors, dtype=float))
        if vectors.shape[0] != self.ambient_dim:
            vectors = vectors.T
        if vectors.size == 0:
            return 0.0
        rest = vectors - self.basis @ (self.basis.T @ vectors)
        return float(np.max(np.linalg.norm(rest, axis=0)))

    def contains(self, vectors: np.ndarray, tol: float = 1e-7) -> bool:
        return self.distance_to(vectors) < tol

    def complement(self) -> "Subspace":
        return orthogonal_complement(self)

    def to_json(self) -> dict[str, Any]:
        return {"dim": self.dim, "basis": self.basis.T.tolist()}


@dataclass(frozen=True)
class BilinearForm:
    """A symmetric bilinear form with its numerically determined signature."""

    matrix: np.ndarray
    signature: tuple[int, int, int] = field(default=(0, 0, 0))

    @classmethod
    def from_matrix(cls, matrix: np.ndarray, threshold: float = RANK_THRESHOLD) -> "BilinearForm":
        matrix = np.asarray(matrix, dtype=float)
        return cls(matrix, signature_of(matrix, threshold))

    @property
    def symmetry_residual(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.T), initial=0.0))

    def __call__(self, x: np.ndarray, y: np.ndarray) -> float:
        return float(x @ self.matrix @ y)

    def restrict(self, space: Subspace | np.ndarray) -> "BilinearForm":
        basis = space.basis if isinstance(space, Subspace) else np.asarray(space)
        return BilinearForm.from_matrix(basis.T @ self.matrix @ basis)


def signature_of(matrix: np.ndarray, threshold: float = RANK_THRESHOLD) -> tuple[int, int, int]:
    """Numbers of positive, negative and zero eigenvalues at the rank threshold."""
    matrix = np.asarray(matrix, dtype=float)
    if matrix.size == 0:
        return (0, 0, 0)
    eigs = np.linalg.eigvalsh(0.5 * (matrix + matrix.T))
    scale = max(float(np.max(np.abs(eigs))), 1e-300)
    small = np.abs(eigs) < threshold * scale
    if float(np.max(np.abs(eigs))) < 1e-12:
        small[:] = True
    return (int(np.sum((eigs > 0) & ~small)), int(np.sum((eigs < 0) & ~small)), int(np.sum(small)))


def numerical_rank(matrix: np.ndarray, threshold: float = RANK_THRESHOLD) -> int:
    matrix = np.asarray(matrix, dtype=float)
    if matrix.size == 0:
        return 0
    s = np.linalg.svd(matrix, compute_uv=False)
    if s.size == 0:
        return 0
    return int(np.sum(s >= _cutoff(s[0], threshold)))


def numerical_nullspace(matrix: np.ndarray, threshold: float = RANK_THRESHOLD) -> Subspace:
    """Right singular directions with singular value below threshold * sigma_max."""
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    n = matrix.shape[1]
    if matrix.shape[0] == 0 or not np.any(matrix):
        return Subspace.full(n)
    # V^T is square either way; only a wide matrix needs the full factorization
    _, s, vt = np.linalg.svd(matrix, full_matrices=matrix.shape[0] < n)
    rank = int(np.sum(s >= _cutoff(s[0], threshold)))
    return Subspace(vt[rank:].T.copy())


def column_span(vectors: np.ndarray, threshold: float = RANK_THRESHOLD, n: int | None = None) -> Subspace:
    """Orthonormal basis of the span of the given columns."""
    vectors = np.asarray(vectors, dtype=float)
    if vectors.ndim == 1:
        vectors = vectors[:, None]
    if vectors.size == 0 or not np.any(vectors):
        return Subspace.zero(vectors.shape[0] if n is None else n)
    u, s, _ = np.linalg.svd(vectors, full_matrices=False)
    rank = int(np.sum(s >= _cutoff(s[0], threshold)))
    return Subspace(u[:, :rank].copy())


def orthogonal_complement(space: Subspace) -> Subspace:
    if space.dim == 0:
        return Subspace.full(space.ambient_dim)
    return numerical_nullspace(space.basis.T)


def intersect(a: Subspace, b: Subspace, threshold: float = RANK_THRESHOLD) -> Subspace:
    """Intersection of two subspaces via the nullspace of [A | -B]."""
    if a.dim == 0 or b.dim == 0:
        return Subspace.zero(a.ambient_dim)
    stacked = np.hstack([a.basis, -b.basis])
    null = numerical_nullspace(stacked, threshold)
    if null.dim == 0:
        return Subspace.zero(a.ambient_dim)
    return column_span(a.basis @ null.basis[: a.dim], threshold)


def subspace_sum(*spaces: Subspace, threshold: float = RANK_THRESHOLD) -> Subspace:
    n = spaces[0].ambient_dim
    return column_span(np.hstack([s.basis for s in spaces]), threshold, n=n)


def principal_angle(a: Subspace, b: Subspace) -> float:
    """Largest principal angle; pi/2 when dimensions differ, 0 for two zero spaces."""
    if a.dim != b.dim:
        return float(np.pi / 2)
    if a.dim == 0:
        return 0.0
    return float(np.max(sla.subspace_angles(a.basis, b.basis)))


def common_nullspace(operators: Sequence[np.ndarray], threshold: float = RANK_THRESHOLD) -> Subspace:
    """Common kernel of a family of matrices sharing a column dimension.

    Small systems are solved by a dense SVD of the stacked matrix.  Large ones
    go through the Gram matrix to find candidate directions, which are then
    refined by an SVD of the operators restricted to the candidates.
    """
    ops = [np.asarray(op, dtype=float) for op in operators]
    n = ops[0].shape[1]
    if n <= DENSE_UNKNOWN_LIMIT:
        return numerical_nullspace(np.vstack(ops), threshold)
    gram = sum(op.T @ op for op in ops)
    return _gram_nullspace(gram, lambda basis: np.vstack([op @ basis for op in ops]), threshold)


def _sparse_low_spectrum(gram: sp.spmatrix, window: int = SPARSE_GRAM_WINDOW,
                         ) -> tuple[np.ndarray, np.ndarray, float] | None:
    """Lowest Gram eigenpairs by shift-invert, widening until the window passes the kernel.

    Returns None when the window would cover a large share of the spectrum,
    so the caller falls back to a dense solve.
    """
    n = gram.shape[0]
    gram = (0.5 * (gram + gram.T)).tocsc()
    top = float(spla.eigsh(gram, k=1, which="LA", return_eigenvectors=False)[0])
    if top <= 0.0:
        return None
    k = max(window, SPARSE_GRAM_WINDOW)
    while k < n // 4:
        eigs, vecs = spla.eigsh(gram, k=k, sigma=-1e-3 * top, which="LM")
        order = np.argsort(eigs)
        eigs, vecs = eigs[order], vecs[:, order]
        if eigs[-1] >= 1e-8 * top:
            return eigs, vecs, top
        k *= 2
    return None


def _gram_nullspace(gram, apply, threshold: float, window: int = SPARSE_GRAM_WINDOW) -> Subspace:
    n = gram.shape[0]
    low = _sparse_low_spectrum(gram, window) if sp.issparse(gram) and n > SPARSE_GRAM_LIMIT else None
    if low is not None:
        eigs, vecs, top = low
    else:
        gram = gram.toarray() if sp.issparse(gram) else np.asarray(gram)
        eigs, vecs = np.linalg.eigh(0.5 * (gram + gram.T))
        top = max(float(eigs[-1]), 0.0)
    if top == 0.0:
        return Subspace.full(n)
    sigma_max = np.sqrt(top)
    # Gram eigenvalues are squared singular values; keep a generous margin
    # and let the refinement SVD make the final decision.
    candidates = vecs[:, eigs < 1e-8 * top]
    if candidates.shape[1] == 0:
        return Subspace.zero(n)
    images = apply(candidates)
    _, s, vt = np.linalg.svd(images, full_matrices=images.shape[0] < images.shape[1])
    s_full = np.zeros(candidates.shape[1])
    s_full[: s.size] = s
    keep = vt[s_full < _cutoff(sigma_max, threshold)].T
    return column_span(candidates @ keep, n=n) if keep.size else Subspace.zero(n)


# ---------------------------------------------------------------------------
# Lie algebras


@dataclass(frozen=True, eq=False)
class LieAlgebra:
    """A real Lie algebra given by structure constants on a labelled basis."""

    structconsts: np.ndarray
    basis_names: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        c = np.asarray(self.structconsts, dtype=float)
        if c.ndim != 3 or c.shape[0] != c.shape[1] or c.shape[1] != c.shape[2]:
            raise InvalidDimension("structure constants must have shape (n, n, n)")
        if c.shape[0] == 0:
            raise InvalidDimension("a Lie algebra must have positive dimension")
        c = c.copy()
        c.setflags(write=False)
        object.__setattr__(self, "structconsts", c)
        names = tuple(self.basis_names) or tuple(f"b{i}" for i in range(c.shape[0]))
        if len(names) != c.shape[0]:
            raise InvalidDimension("basis_names length must equal the dimension")
        object.__setattr__(self, "basis_names", names)

    @property
    def dim(self) -> int:
        return self.structconsts.shape[0]

    @classmethod
    def abelian(cls, n: int) -> "LieAlgebra":
        if n < 1:
            raise InvalidDimension("a Lie algebra must have positive dimension")
        return cls(np.zeros((n, n, n)))

    @classmethod
    def from_brackets(cls, n: int, brackets: dict[tuple[int, int], dict[int, float]],
                      names: Sequence[str] = ()) -> "LieAlgebra":
        """Build from {(i, j): {k: value}}; antisymmetry is filled in."""
        if n < 1:
            raise InvalidDimension("a Lie algebra must have positive dimension")
        c = np.zeros((n, n, n))
        for (i, j), terms in brackets.items():
            for k, value in terms.items():
                c[i, j, k] = value
                c[j, i, k] = -value
        return cls(c, tuple(names))

    @classmethod
    def from_matrices(cls, matrices: Sequence[np.ndarray], names: Sequence[str] = (),
                      tol: float | None = None) -> "LieAlgebra":
        """Structure constants of a matrix Lie algebra with linearly independent basis."""
        mats = np.array([np.asarray(m, dtype=float) for m in matrices])
        if len(mats) == 0:
            raise InvalidDimension("a Lie algebra must have positive dimension")
        flat = mats.reshape(len(mats), -1).T
        comm = np.einsum("iab,jbc->ijac", mats, mats, optimize=True)
        comm = comm - comm.transpose(1, 0, 2, 3)
        rhs = comm.reshape(len(mats) ** 2, -1).T
        coeffs, *_ = np.linalg.lstsq(flat, rhs, rcond=None)
        miss = np.max(np.abs(flat @ coeffs - rhs), initial=0.0)
        if miss > (tol if tol is not None else 1e-8) * max(1.0, np.max(np.abs(rhs), initial=0.0)):
            raise InvalidDimension(f"matrix span is not closed under commutators (miss {miss:.2e})")
        c = coeffs.T.reshape(len(mats), len(mats), len(mats))
        c[np.abs(c) < 1e-13] = 0.0
        return cls(c, tuple(names))

    def bracket(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return np.einsum("i,j,ijk->k", x, y, self.structconsts, optimize=True)

    def ad_matrices(self) -> np.ndarray:
        """ad[i] is the matrix of ad_{b_i}: ad[i][k, j] = c[i, j, k]."""
        return self.structconsts.transpose(0, 2, 1)

    def ad(self, x: np.ndarray) -> np.ndarray:
        return np.einsum("i,ikj->kj", x, self.ad_matrices(), optimize=True)

    def normalized(self) -> "LieAlgebra":
        scale = float(np.max(np.abs(self.structconsts)))
        if scale == 0.0:
            return self
        return LieAlgebra(self.structconsts / scale, self.basis_names)

    def restricted(self, space: Subspace, tol: float = 1e-7) -> "LieAlgebra":
        """Structure constants of a subalgebra in its orthonormal basis."""
        e = space.basis
        products = np.einsum("ia,jb,ijk->abk", e, e, self.structconsts, optimize=True)
        coords = np.einsum("abk,kc->abc", products, e, optimize=True)
        miss = np.max(np.abs(np.einsum("abc,kc->abk", coords, e, optimize=True) - products), initial=0.0)
        if miss > tol * max(1.0, float(np.max(np.abs(self.structconsts)))):
            raise IdealityViolation(f"subspace is not a subalgebra (miss {miss:.2e})")
        return LieAlgebra(coords)

    def to_json(self) -> dict[str, Any]:
        entries = []
        c = self.structconsts
        for i in range(self.dim):
            for j in range(i + 1, self.dim):
                terms = [[int(k), float(c[i, j, k])] for k in np.flatnonzero(c[i, j])]
                if terms:
                    entries.append([i, j, terms])
        return {"dim": self.dim, "basis_names": list(self.basis_names), "brackets": entries}

    @classmethod
    def from_json(cls, data: dict[str, Any] | str) -> "LieAlgebra":
        if isinstance(data, str):
            data = json.loads(data)
        n = int(data["dim"])
        brackets = {(int(i), int(j)): {int(k): float(v) for k, v in terms}
                    for i, j, terms in data["brackets"]}
        return cls.from_brackets(n, brackets, data.get("basis_names", ()))


def jacobi_residual(algebra: LieAlgebra, normalize: bool = False) -> float:
    """Max-norm of [[b_i,b_j],b_k] + cyclic over all basis triples."""
    c = algebra.structconsts
    if normalize:
        scale = float(np.max(np.abs(c)))
        if scale > 0:
            c = c / scale
    # Equivalent form ad_[i,j] - [ad_i, ad_j] = 0, evaluated as large matrix
    # products over blocks of i to bound the working set.
    n = c.shape[0]
    ad = np.ascontiguousarray(c.transpose(0, 2, 1))  # ad[i][k, j] = c[i, j, k]
    wide = ad.transpose(1, 0, 2).reshape(n, n * n)
    tall = ad.reshape(n * n, n)
    flat = ad.reshape(n, n * n)
    step = max(1, JACOBI_BLOCK_ENTRIES // max(1, n ** 3))
    worst = 0.0
    for start in range(0, n, step):
        block = slice(start, min(n, start + step))
        b = block.stop - block.start
        left = (ad[block].reshape(b * n, n) @ wide).reshape(b, n, n, n).transpose(0, 2, 1, 3)
        right = (tall @ ad[block].transpose(1, 0, 2).reshape(n, b * n)).reshape(n, n, b, n).transpose(2, 0, 1, 3)
        linear = (c[block].reshape(b * n, n) @ flat).reshape(b, n, n, n)
        worst = max(worst, float(np.max(np.abs(linear - left + right))))
    return worst


def antisymmetry_residual(algebra: LieAlgebra) -> float:
    c = algebra.structconsts
    return float(np.max(np.abs(c + c.transpose(1, 0, 2))))


def killing_matrix(algebra: LieAlgebra) -> np.ndarray:
    ad = algebra.ad_matrices()
    return np.einsum("iab,jba->ij", ad, ad, optimize=True)


def killing_form(algebra: LieAlgebra) -> BilinearForm:
    return BilinearForm.from_matrix(killing_matrix(algebra))


def invariance_residual(algebra: LieAlgebra, form: np.ndarray) -> float:
    """Max of |B([b_i,b_j],b_l) + B(b_j,[b_i,b_l])| over basis triples."""
    c = algebra.structconsts
    form = np.asarray(form)
    first = np.einsum("ijk,kl->ijl", c, form, optimize=True)
    second = np.einsum("ilk,jk->ijl", c, form, optimize=True)
    return float(np.max(np.abs(first + second), initial=0.0))


def derived_algebra(algebra: LieAlgebra, threshold: float = RANK_THRESHOLD) -> Subspace:
    n = algebra.dim
    return column_span(algebra.structconsts.reshape(n * n, n).T, threshold, n=n)


def center(algebra: LieAlgebra, threshold: float = RANK_THRESHOLD) -> Subspace:
    """Common kernel of all ad_x restricted to basis vectors: rows (j, k), column i."""
    n = algebra.dim
    system = algebra.structconsts.transpose(1, 2, 0).reshape(n * n, n)
    return numerical_nullspace(system, threshold)


def ideal_residual(algebra: LieAlgebra, space: Subspace) -> float:
    """How far [g, space] sticks out of space."""
    if space.dim == 0:
        return 0.0
    products = np.einsum("ia,jik->jak", space.basis, algebra.structconsts, optimize=True)
    products = products.reshape(-1, algebra.dim).T
    return space.distance_to(products)


def bracket_span(algebra: LieAlgebra, a: Subspace, b: Subspace,
                 threshold: float = RANK_THRESHOLD) -> Subspace:
    n = algebra.dim
    if a.dim == 0 or b.dim == 0:
        return Subspace.zero(n)
    products = np.einsum("ip,jq,ijk->pqk", a.basis, b.basis, algebra.structconsts, optimize=True)
    return column_span(products.reshape(-1, n).T, threshold, n=n)


def radical(algebra: LieAlgebra, threshold: float = RANK_THRESHOLD,
            tol: float | None = None) -> Subspace:
    """Orthogonal of the derived algebra under the Killing form."""
    tol = residual_tol() * 1e2 if tol is None else tol
    n = algebra.dim
    killing = killing_matrix(algebra)
    derived = derived_algebra(algebra, threshold)
    if derived.dim == 0:
        return Subspace.full(n)
    system = derived.basis.T @ killing
    if not np.any(np.abs(system) > 1e-12 * max(1.0, float(np.max(np.abs(killing))))):
        result = Subspace.full(n)
    else:
        result = numerical_nullspace(system, threshold)
    scale = max(1.0, float(np.max(np.abs(algebra.structconsts))))
    residual = ideal_residual(algebra, result)
    if residual > max(tol, 1e-7) * scale:
        raise IdealityViolation(f"radical fails the ideal check (residual {residual:.2e})")
    return result


def killing_radical(algebra: LieAlgebra, threshold: float = RANK_THRESHOLD) -> Subspace:
    killing = killing_matrix(algebra)
    if not np.any(np.abs(killing) > 1e-12):
        return Subspace.full(algebra.dim)
    return numerical_nullspace(killing, threshold)


def radical_chain_report(algebra: LieAlgebra, threshold: float = RANK_THRESHOLD) -> Report:
    """Residuals of [r, r] within the Killing radical within the radical."""
    tol = 1e-7
    rad = radical(algebra, threshold)
    krad = killing_radical(algebra, threshold)
    rr = bracket_span(algebra, rad, rad, threshold)
    return Report((
        Check("bracket_of_radical_in_killing_radical", krad.distance_to(rr.basis), tol),
        Check("killing_radical_in_radical", rad.distance_to(krad.basis), tol),
    ), {"radical_dim": rad.dim, "killing_radical_dim": krad.dim})


def derivation_system(algebra: LieAlgebra) -> sp.csr_matrix:
    """Sparse matrix A with A vec(D) = 0 iff D is a derivation (vec row-major).

    Only the independent equations (i < j, not identically zero) are kept.
    """
    c = algebra.structconsts
    n = algebra.dim
    nz = np.argwhere(c != 0.0)
    vals = c[c != 0.0]
    rows, cols, data = [], [], []
    # sum_k c_ijk D_lk at row (i, j, l), column (l, k)
    i, j, k = nz.T
    for l in range(n):
        rows.append((i * n + j) * n + l)
        cols.append(l * n + k)
        data.append(vals)
    # - sum_m D_mi c_mjl at row (i, j, l), column (m, i)  using c[m, j, l]
    m, jj, ll = nz.T
    for ii in range(n):
        rows.append((ii * n + jj) * n + ll)
        cols.append(m * n + ii)
        data.append(-vals)
    # - sum_m D_mj c_iml at row (i, j, l), column (m, j)  using c[i, m, l]
    ii, m, ll = nz.T
    for jj in range(n):
        rows.append((ii * n + jj) * n + ll)
        cols.append(m * n + jj)
        data.append(-vals)
    if not rows:
        return sp.csr_matrix((0, n * n))
    full = sp.csr_matrix((np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
                         shape=(n ** 3, n * n))
    # rows (j, i, l) repeat rows (i, j, l) up to sign; drop them and the empty rows
    index = np.arange(n ** 3)
    keep = (index // (n * n) < (index // n) % n) & (np.diff(full.indptr) > 0)
    return full[keep]


def derivations(algebra: LieAlgebra, threshold: float = RANK_THRESHOLD) -> list[np.ndarray]:
    """Basis of Der(g) as n x n matrices."""
    n = algebra.dim
    system = derivation_system(algebra)
    if system.nnz == 0:
        return [e.reshape(n, n) for e in np.eye(n * n)]
    if n * n <= DENSE_UNKNOWN_LIMIT:
        null = numerical_nullspace(system.toarray(), threshold)
    else:
        # ad(g) already gives about n derivations, so start the window above that
        null = _gram_nullspace((system.T @ system), lambda basis: system @ basis, threshold,
                               window=2 * n)
    return [v.reshape(n, n) for v in null.basis.T]


def derivation_residual(algebra: LieAlgebra, derivation: np.ndarray) -> float:
    c = algebra.structconsts
    lhs = np.einsum("ijk,lk->ijl", c, derivation, optimize=True)
    rhs = np.einsum("mi,mjl->ijl", derivation, c, optimize=True) + np.einsum("mj,iml->ijl", derivation, c, optimize=True)
    return float(np.max(np.abs(lhs - rhs), initial=0.0))


def commutant(matrices: Sequence[np.ndarray], threshold: float = RANK_THRESHOLD) -> list[np.ndarray]:
    """Basis of {f : f M = M f for every given M}."""
    mats = [np.asarray(m, dtype=float) for m in matrices if np.any(m)]
    size = np.asarray(matrices[0]).shape[0]
    eye = np.eye(size)
    if not mats:
        return [v.reshape(size, size) for v in np.eye(size * size)]
    if size * size <= DENSE_UNKNOWN_LIMIT:
        # vec row-major: vec(f M) = (I kron M^T) vec f, vec(M f) = (M kron I) vec f
        ops = [np.kron(eye, m.T) - np.kron(m, eye) for m in mats]
        null = numerical_nullspace(np.vstack(ops), threshold)
    else:
        null = _gram_nullspace(_commutant_gram(mats), partial(_commutator_images, mats), threshold)
    return [v.reshape(size, size) for v in null.basis.T]


def _commutant_gram(mats: Sequence[np.ndarray]) -> np.ndarray:
    """sum_i K_i^T K_i for K_i = I kron M_i^T - M_i kron I, assembled from small products."""
    size = mats[0].shape[0]
    eye = np.eye(size)
    right = sum(m @ m.T for m in mats)
    left = sum(m.T @ m for m in mats)
    gram = np.kron(eye, right) + np.kron(left, eye)
    for m in mats:
        cross = np.kron(m, m)
        gram -= cross + cross.T
    return gram


def _commutator_images(mats: Sequence[np.ndarray], candidates: np.ndarray) -> np.ndarray:
    size = mats[0].shape[0]
    fs = candidates.T.reshape(-1, size, size)
    blocks = [(fs @ m - m @ fs).reshape(fs.shape[0], -1).T for m in mats]
    return np.vstack(blocks)


def centralizer(rep: Any, threshold: float = RANK_THRESHOLD) -> list[np.ndarray]:
    """Commutant of a representation (anything with a ``rho`` list) or a matrix list."""
    matrices = rep.rho if hasattr(rep, "rho") else rep
    return commutant(list(matrices), threshold)


def is_simple(algebra: LieAlgebra, threshold: float = RANK_THRESHOLD) -> bool:
    """Semisimple with an adjoint commutant that is R or C (so no proper ideals)."""
    if algebra.dim < 3 or numerical_rank(killing_matrix(algebra), threshold) < algebra.dim:
        return False
    comm = commutant(list(algebra.ad_matrices()), threshold)
    if len(comm) == 1:
        return True
    if len(comm) != 2:
        return False
    n = algebra.dim
    eye = np.eye(n)
    # the element orthogonal to the identity must square to a negative scalar
    other = [f - np.trace(f) / n * eye for f in comm]
    X = max(other, key=lambda f: float(np.linalg.norm(f)))
    square = X @ X
    scalar = np.trace(square) / n
    return bool(scalar < 0 and np.max(np.abs(square - scalar * eye)) < 1e-8 * abs(scalar))


def commutator_closure_residual(basis: Sequence[np.ndarray]) -> float:
    """How far pairwise commutators leave the span of the given matrices."""
    if not basis:
        return 0.0
    flat = np.array([b.ravel() for b in basis]).T
    span = column_span(flat)
    comms = [a @ b - b @ a for a in basis for b in basis]
    return span.distance_to(np.array([m.ravel() for m in comms]).T)


def representation_residual(algebra: LieAlgebra, rho: Sequence[np.ndarray]) -> float:
    """Max of |rho[b_i,b_j] - [rho b_i, rho b_j]| over basis pairs."""
    mats = np.array(rho)
    image = np.einsum("ijk,kab->ijab", algebra.structconsts, mats, optimize=True)
    comm = np.einsum("iab,jbc->ijac", mats, mats, optimize=True)
    comm = comm - comm.transpose(1, 0, 2, 3)
    return float(np.max(np.abs(image - comm), initial=0.0))

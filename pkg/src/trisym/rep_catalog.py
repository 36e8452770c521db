"""Admissible representations of Hermitian symmetric Lie algebras.

Every catalog Lie algebra is realized as a matrix algebra in a defining
representation with basis ordered as (k, H): first the maximal compact
subalgebra, then its complement.  The centre element ``z`` of ``k`` acts on
``H`` by a complex structure ``J_H``.  A representation carries one matrix per
basis element, a complex structure ``J_V`` on the module and a candidate
background metric ``h_V``.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field, replace
from typing import Any, Sequence

import numpy as np
import scipy.linalg as sla

from .config import Config
from .errors import (
    BackgroundCheckFailed,
    InvalidDimension,
    LambdaNotScalar,
    MismatchedAlgebra,
    NotAdmissible,
    UnknownModelId,
)
from .lie_core import (
    BilinearForm,
    LieAlgebra,
    column_span,
    common_nullspace,
    commutant,
    killing_matrix,
    numerical_nullspace,
    numerical_rank,
    representation_residual,
)
from .report import Check, Report

NONCOMPACT = "noncompact"
COMPACT = "compact"


# ---------------------------------------------------------------------------
# Data types


@dataclass(frozen=True, eq=False)
class CartanData:
    """Splitting L = k + H with centre element z and J_H = ad_z on H."""

    k_indices: tuple[int, ...]
    H_indices: tuple[int, ...]
    z_coords: np.ndarray
    J_H: np.ndarray

    def to_json(self) -> dict[str, Any]:
        return {
            "k_indices": list(self.k_indices),
            "H_indices": list(self.H_indices),
            "z_coords": self.z_coords.tolist(),
            "J_H": self.J_H.tolist(),
        }


@dataclass(frozen=True, eq=False)
class Representation:
    L: LieAlgebra
    rho: tuple[np.ndarray, ...]
    J_V: np.ndarray | None
    cartan: CartanData | None
    type_flag: str
    name: str
    h_V: np.ndarray | None = None
    # block sizes of the irreducible summands when built as a direct sum
    blocks: tuple[int, ...] = field(default=())

    @property
    def dimV(self) -> int:
        return self.rho[0].shape[0]

    @property
    def rho_array(self) -> np.ndarray:
        return np.array(self.rho)

    def rho_of(self, coords: np.ndarray) -> np.ndarray:
        return np.einsum("i,iab->ab", coords, self.rho_array, optimize=True)

    @property
    def rho_z(self) -> np.ndarray:
        return self.rho_of(self.cartan.z_coords)

    @property
    def rho_H(self) -> np.ndarray:
        return self.rho_array[list(self.cartan.H_indices)]

    @property
    def rho_k(self) -> np.ndarray:
        return self.rho_array[list(self.cartan.k_indices)]

    @property
    def is_compact(self) -> bool:
        return self.type_flag == COMPACT

    def to_json(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "type_flag": self.type_flag,
            "L": self.L.to_json(),
            "dimV": self.dimV,
            "rho": [m.tolist() for m in self.rho],
            "J_V": None if self.J_V is None else self.J_V.tolist(),
            "cartan": None if self.cartan is None else self.cartan.to_json(),
            "h_V": None if self.h_V is None else self.h_V.tolist(),
        }


@dataclass(frozen=True)
class AdmissibilityReport:
    faithful: bool
    fixed_vectors_dim: int
    k_preserves_J: float
    H_anticommutes_J: float
    eq_ad_ma: float
    trace_free: float
    representation: float
    jordan: float
    J_squared: float
    tol: float

    @property
    def verdict(self) -> bool:
        residuals = (self.k_preserves_J, self.H_anticommutes_J, self.eq_ad_ma,
                     self.trace_free, self.representation, self.J_squared)
        return self.faithful and self.fixed_vectors_dim == 0 and all(r < self.tol for r in residuals)

    def as_report(self) -> Report:
        t = self.tol
        return Report((
            Check("faithful", 0.0 if self.faithful else 1.0, 0.5),
            Check("fixed_vectors_dim", float(self.fixed_vectors_dim), 0.5),
            Check("k_preserves_J", self.k_preserves_J, t),
            Check("H_anticommutes_J", self.H_anticommutes_J, t),
            Check("eq_ad_ma", self.eq_ad_ma, t),
            Check("trace_free", self.trace_free, t),
            Check("representation", self.representation, t),
            Check("jordan", self.jordan, t),
            Check("J_squared", self.J_squared, t),
        ))


# ---------------------------------------------------------------------------
# Matrix helpers


def complex_structure(n: int) -> np.ndarray:
    """Standard J on R^{2n} with J e_{2k} = e_{2k+1} (0-based)."""
    J = np.zeros((2 * n, 2 * n))
    for k in range(n):
        J[2 * k + 1, 2 * k] = 1.0
        J[2 * k, 2 * k + 1] = -1.0
    return J


def conjugation(n: int) -> np.ndarray:
    """Complex conjugation on C^n = R^{2n}."""
    return np.diag([1.0, -1.0] * n)


def linear_matrix_space(size: int, constraints) -> list[np.ndarray]:
    """Frobenius-orthonormal basis of {A : every constraint(A) vanishes}.

    ``constraints`` is a list of linear maps from size x size matrices to arrays.
    """
    unknowns = size * size
    columns = []
    for idx in range(unknowns):
        unit = np.zeros(unknowns)
        unit[idx] = 1.0
        A = unit.reshape(size, size)
        columns.append(np.concatenate([np.ravel(c(A)) for c in constraints]))
    system = np.array(columns).T
    null = numerical_nullspace(system)
    return [_tidy(v.reshape(size, size)) for v in null.basis.T]


def _tidy(matrix: np.ndarray) -> np.ndarray:
    out = matrix.copy()
    out[np.abs(out) < 1e-14] = 0.0
    return out


def split_by_involution(basis: Sequence[np.ndarray], operator: np.ndarray) -> tuple[list, list]:
    """Split a matrix span into parts commuting and anticommuting with operator."""
    flat = np.array([b.ravel() for b in basis]).T
    comm = np.array([(b @ operator - operator @ b).ravel() for b in basis]).T
    anti = np.array([(b @ operator + operator @ b).ravel() for b in basis]).T
    k_coeff = numerical_nullspace(comm).basis
    H_coeff = numerical_nullspace(anti).basis
    k = _orthonormal_mats(flat @ k_coeff, basis[0].shape)
    H = _orthonormal_mats(flat @ H_coeff, basis[0].shape)
    if len(k) + len(H) != len(basis):
        raise InvalidDimension("involution does not split the algebra")
    return k, H


def _orthonormal_mats(columns: np.ndarray, shape) -> list[np.ndarray]:
    span = column_span(columns)
    return [_tidy(v.reshape(shape)) for v in span.basis.T]


def _coords_in(basis: Sequence[np.ndarray], matrix: np.ndarray) -> np.ndarray:
    flat = np.array([b.ravel() for b in basis]).T
    coeff, *_ = np.linalg.lstsq(flat, matrix.ravel(), rcond=None)
    miss = np.max(np.abs(flat @ coeff - matrix.ravel()))
    if miss > 1e-9 * max(1.0, np.max(np.abs(matrix))):
        raise InvalidDimension(f"matrix is not in the span (miss {miss:.2e})")
    return coeff


def _cartan_from_z(L: LieAlgebra, dim_k: int, z_coords: np.ndarray) -> CartanData:
    n = L.dim
    H_idx = tuple(range(dim_k, n))
    ad_z = L.ad(z_coords)
    J_H = ad_z[np.ix_(H_idx, H_idx)]
    leak = np.max(np.abs(ad_z[:dim_k]), initial=0.0)
    if leak > 1e-9:
        raise InvalidDimension("z is not central in k or moves H out of H")
    return CartanData(tuple(range(dim_k)), H_idx, z_coords, J_H)


def _assemble(k_mats, H_mats, z_matrix, rho, J_V, type_flag, name, h_V=None,
              k_names=None, H_names=None) -> Representation:
    mats = list(k_mats) + list(H_mats)
    names = list(k_names or [f"k{i}" for i in range(len(k_mats))]) + \
        list(H_names or [f"H{i}" for i in range(len(H_mats))])
    L = LieAlgebra.from_matrices(mats, names)
    z_coords = _coords_in(mats, z_matrix)
    cartan = _cartan_from_z(L, len(k_mats), z_coords)
    rho = tuple(_tidy(np.asarray(r, dtype=float)) for r in (mats if rho is None else rho))
    dimV = rho[0].shape[0]
    h = np.eye(dimV) if h_V is None else np.asarray(h_V, dtype=float)
    return Representation(L, rho, np.asarray(J_V, dtype=float), cartan, type_flag, name, h, (dimV,))


def extend_from_H(L: LieAlgebra, dim_k: int, rho_H: Sequence[np.ndarray]) -> list[np.ndarray]:
    """Determine rho on k from rho on H using [H, H] = k."""
    n = L.dim
    H_idx = range(dim_k, n)
    pairs = [(a, b) for a in H_idx for b in H_idx if a < b]
    coeff = np.array([L.structconsts[a, b, :dim_k] for a, b in pairs])
    rhs = np.array([(rho_H[a - dim_k] @ rho_H[b - dim_k] - rho_H[b - dim_k] @ rho_H[a - dim_k]).ravel()
                    for a, b in pairs])
    if numerical_rank(coeff) < dim_k:
        raise InvalidDimension("[H, H] does not span k")
    sol, *_ = np.linalg.lstsq(coeff, rhs, rcond=None)
    size = rho_H[0].shape[0]
    return [s.reshape(size, size) for s in sol]


# ---------------------------------------------------------------------------
# Catalog constructors


def build_sp(m: int) -> Representation:
    """sp(m, R) acting on R^{2m} by matrix multiplication."""
    if m < 1:
        raise InvalidDimension("sp(m) needs m >= 1")
    J = complex_structure(m)
    size = 2 * m
    algebra = linear_matrix_space(size, [lambda A: A.T @ J + J @ A])
    k, H = split_by_involution(algebra, J)
    z = -0.5 * J
    return _assemble(k, H, z, None, J, NONCOMPACT, f"sp:{m}")


def _su_pq_matrices(p: int, q: int):
    size = 2 * (p + q)
    J = complex_structure(p + q)
    G = sla.block_diag(-np.eye(2 * p), np.eye(2 * q))
    J_p = sla.block_diag(complex_structure(p), np.zeros((2 * q, 2 * q)))
    J_q = sla.block_diag(np.zeros((2 * p, 2 * p)), complex_structure(q))
    algebra = linear_matrix_space(size, [
        lambda A: A.T @ G + G @ A,
        lambda A: A @ J - J @ A,
        lambda A: np.array([np.trace(J @ A)]),
    ])
    I_pq = J_p - J_q
    z = (p * J_q - q * J_p) / (p + q)
    return algebra, I_pq, z


def build_su_pq(p: int, q: int) -> Representation:
    """su(p, q) acting on R^{2p+2q}, admissible for J_V = J_p - J_q."""
    if p < 1 or q < 1:
        raise InvalidDimension("su(p,q) needs p, q >= 1")
    algebra, I_pq, z = _su_pq_matrices(p, q)
    k, H = split_by_involution(algebra, I_pq)
    return _assemble(k, H, z, None, I_pq, NONCOMPACT, f"su:{p},{q}")


def build_so_star(m: int) -> Representation:
    """so*(2m) as the elements of su(m, m) commuting with a quaternionic structure.

    The quaternionic structure is (v1, v2) -> (-conj v2, conj v1); it has to be
    conjugate-linear for the commutant to have dimension m(2m-1).
    """
    if m < 2:
        raise InvalidDimension("so*(2m) needs m >= 2")
    algebra, I_mm, z = _su_pq_matrices(m, m)
    half = 2 * m
    swap = np.block([[np.zeros((half, half)), -np.eye(half)], [np.eye(half), np.zeros((half, half))]])
    I1 = swap @ conjugation(2 * m)
    flat = np.array([a.ravel() for a in algebra]).T
    comm = np.array([(a @ I1 - I1 @ a).ravel() for a in algebra]).T
    sub = _orthonormal_mats(flat @ numerical_nullspace(comm).basis, algebra[0].shape)
    if len(sub) != m * (2 * m - 1):
        raise InvalidDimension("so*(2m) realization has the wrong dimension")
    k, H = split_by_involution(sub, I_mm)
    return _assemble(k, H, z, None, I_mm, NONCOMPACT, f"so_star:{m}")


def clifford_generators(n: int) -> tuple[list[np.ndarray], np.ndarray]:
    """n symmetric generators squaring to 1 and one skew J squaring to -1.

    All anticommute.  Built by doubling: each new positive generator is
    1 (x) sigma_1 and the previous ones are tensored with sigma_3.
    """
    if n < 1:
        raise InvalidDimension("need at least one Clifford generator")
    s1 = np.array([[0.0, 1.0], [1.0, 0.0]])
    s3 = np.array([[1.0, 0.0], [0.0, -1.0]])
    gens = [s3.copy()]
    J = np.array([[0.0, -1.0], [1.0, 0.0]])
    for _ in range(n - 1):
        size = gens[0].shape[0]
        gens = [np.kron(g, s3) for g in gens] + [np.kron(np.eye(size), s1)]
        J = np.kron(J, s3)
    return gens, J


def _so2n_matrices(n: int):
    size = n + 2
    k_mats, k_names = [], []
    z = np.zeros((size, size))
    z[1, 0], z[0, 1] = 1.0, -1.0
    k_mats.append(z)
    k_names.append("z")
    for i, j in itertools.combinations(range(n), 2):
        E = np.zeros((size, size))
        E[2 + j, 2 + i], E[2 + i, 2 + j] = 1.0, -1.0
        k_mats.append(E / np.sqrt(2.0))
        k_names.append(f"e{i}^e{j}")

    def X(x: np.ndarray, y: np.ndarray) -> np.ndarray:
        M = np.zeros((size, size))
        M[2:, 0], M[2:, 1] = x, y
        M[0, 2:], M[1, 2:] = x, y
        return M

    eye = np.eye(n)
    H_mats = [X(eye[i], np.zeros(n)) for i in range(n)] + [X(np.zeros(n), eye[i]) for i in range(n)]
    H_names = [f"x{i}" for i in range(n)] + [f"y{i}" for i in range(n)]
    return k_mats, k_names, H_mats, H_names, z


def build_so2n_clifford(n: int) -> Representation:
    """so(2, n) on a Clifford module Sigma.

    rho(x, y) = (rho_n(x) + rho_n(y) J_Sigma) / 2 on H; the k-action follows
    from [H, H] = k and is checked against rho(z) = -J_Sigma / 2.
    """
    if n < 1 or n > 8:
        raise InvalidDimension("so(2,n) catalog entries need 1 <= n <= 8")
    k_mats, k_names, H_mats, H_names, z = _so2n_matrices(n)
    gens, J_sigma = clifford_generators(n)
    rho_H = [0.5 * g for g in gens] + [0.5 * g @ J_sigma for g in gens]
    mats = k_mats + H_mats
    L = LieAlgebra.from_matrices(mats, k_names + H_names)
    rho_k = extend_from_H(L, len(k_mats), rho_H)
    if np.max(np.abs(rho_k[0] + 0.5 * J_sigma)) > 1e-10:
        raise InvalidDimension("Clifford module gives the wrong action of z")
    rho = rho_k + rho_H
    z_coords = _coords_in(mats, z)
    cartan = _cartan_from_z(L, len(k_mats), z_coords)
    dimV = J_sigma.shape[0]
    return Representation(L, tuple(_tidy(r) for r in rho), J_sigma, cartan, NONCOMPACT,
                          f"so2n:{n}", np.eye(dimV), (dimV,))


def _wedge_action(A: np.ndarray, p: int) -> tuple[np.ndarray, list[tuple[int, ...]]]:
    """Derivation action of A on Lambda^p R^N in the monomial basis."""
    N = A.shape[0]
    subsets = list(itertools.combinations(range(N), p))
    index = {s: i for i, s in enumerate(subsets)}
    out = np.zeros((len(subsets), len(subsets)))
    for col, s in enumerate(subsets):
        for slot, i in enumerate(s):
            for j in np.flatnonzero(A[:, i]):
                if j in s and j != i:
                    continue
                new = list(s)
                new[slot] = j
                order = sorted(range(p), key=lambda t: new[t])
                sign = _permutation_sign(order)
                out[index[tuple(sorted(new))], col] += sign * A[j, i]
    return out, subsets


def _permutation_sign(order: list[int]) -> int:
    sign = 1
    seen = [False] * len(order)
    for start in range(len(order)):
        if seen[start]:
            continue
        length = 0
        t = start
        while not seen[t]:
            seen[t] = True
            t = order[t]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def _complex_wedge(indices: Sequence[int], subsets, N: int) -> np.ndarray:
    """zeta_{k1} ^ ... ^ zeta_{kp} with zeta_k = e_{2k} + i e_{2k+1}, as a complex vector."""
    index = {s: i for i, s in enumerate(subsets)}
    out = np.zeros(len(subsets), dtype=complex)
    for picks in itertools.product((0, 1), repeat=len(indices)):
        coords = [2 * k + b for k, b in zip(indices, picks)]
        coeff = 1j ** sum(picks)
        order = sorted(range(len(coords)), key=lambda t: coords[t])
        out[index[tuple(sorted(coords))]] += _permutation_sign(order) * coeff
    return out


def _su1n_matrices(n: int):
    algebra, I_1n, _ = _su_pq_matrices(1, n)
    k, H = split_by_involution(algebra, I_1n)
    J2 = sla.block_diag(complex_structure(1), np.zeros((2 * n, 2 * n)))
    Jn = sla.block_diag(np.zeros((2, 2)), complex_structure(n))
    z = (Jn - n * J2) / (n + 1)
    # H coordinates: the element sending e_1 to v in R^{2n}
    size = 2 * n + 2
    H_std = []
    for i in range(2 * n):
        v = np.zeros(size)
        v[2 + i] = 1.0
        target = np.outer(v, np.eye(size)[0])
        coeff = np.array([np.sum(h * target) for h in H])
        X = np.einsum("i,iab->ab", coeff, np.array(H), optimize=True)
        X = X / X[2 + i, 0]
        H_std.append(_tidy(X))
    return k, H_std, z, I_1n


def build_su1n_wedge(n: int, p: int) -> Representation:
    """su(1, n) on the real (p,0)+(0,p) forms of R^{2n+2}.

    The module basis follows the split into forms on R^{2n} and forms
    e^1 ^ gamma + e^2 ^ J gamma; the second block has squared norm 2.
    """
    if n < 1 or p < 1:
        raise InvalidDimension("su1n wedge needs n >= 1 and p >= 1")
    if p > n:
        raise InvalidDimension("the wedge representation is faithful only for p <= n")
    k, H, z, _ = _su1n_matrices(n)
    N = 2 * n + 2
    _, subsets = _wedge_action(np.zeros((N, N)), p)
    columns = []
    scale_first = 2.0 ** ((p - 1) / 2.0)
    for K in itertools.combinations(range(1, n + 1), p):
        zeta = _complex_wedge(K, subsets, N) / scale_first
        columns += [zeta.real, zeta.imag]
    scale_second = 2.0 ** ((p - 2) / 2.0)
    for K in itertools.combinations(range(1, n + 1), p - 1):
        zeta = _complex_wedge((0,) + K, subsets, N) / scale_second
        columns += [zeta.real, zeta.imag]
    basis = np.array(columns).T
    gram = basis.T @ basis
    proj = np.linalg.solve(gram, basis.T)
    rho = []
    for A in list(k) + list(H):
        action, _ = _wedge_action(A, p)
        image = action @ basis
        restricted = proj @ image
        if np.max(np.abs(basis @ restricted - image)) > 1e-10:
            raise InvalidDimension("wedge subspace is not invariant")
        rho.append(restricted)
    J_V = solve_J_V(rho[len(k):], _J_H_from(k, H, z))
    return _assemble(k, H, z, rho, J_V, NONCOMPACT, f"su1n:{n}:{p}", h_V=gram)


def _J_H_from(k, H, z) -> np.ndarray:
    return np.array([_coords_in(H, z @ h - h @ z) for h in H]).T


def solve_J_V(rho_H: Sequence[np.ndarray], J_H: np.ndarray) -> np.ndarray:
    """The unique M with rho(x) M = rho(J_H x) for every basis vector x of H."""
    size = rho_H[0].shape[0]
    lhs = np.vstack(list(rho_H))
    targets = np.einsum("ba,bij->aij", J_H, np.array(rho_H), optimize=True)
    rhs = np.vstack(list(targets))
    M, *_ = np.linalg.lstsq(lhs, rhs, rcond=None)
    if np.max(np.abs(lhs @ M - rhs)) > 1e-9:
        raise NotAdmissible("no complex structure satisfies rho(J_H x) = rho(x) J_V")
    return _tidy(M.reshape(size, size))


def dualize(rep: Representation) -> Representation:
    """Compact dual: negate brackets on H x H and double the module."""
    if rep.type_flag != NONCOMPACT:
        raise NotAdmissible("only non-compact representations can be dualized")
    if not check_admissible(rep).verdict:
        raise NotAdmissible(f"{rep.name} is not admissible")
    c = np.array(rep.L.structconsts)
    H = list(rep.cartan.H_indices)
    c[np.ix_(H, H)] *= -1.0
    L_dual = LieAlgebra(c, rep.L.basis_names)
    k_set = set(rep.cartan.k_indices)
    rho = []
    zero = np.zeros((rep.dimV, rep.dimV))
    for i, r in enumerate(rep.rho):
        if i in k_set:
            rho.append(np.block([[r, zero], [zero, r]]))
        else:
            rho.append(np.block([[zero, r], [-r, zero]]))
    J_V = sla.block_diag(rep.J_V, rep.J_V)
    h_V = sla.block_diag(rep.h_V, rep.h_V)
    return Representation(L_dual, tuple(rho), J_V, rep.cartan, COMPACT, f"dual:{rep.name}",
                          h_V, (2 * rep.dimV,))


def _same_algebra(a: LieAlgebra, b: LieAlgebra) -> bool:
    return a.dim == b.dim and np.allclose(a.structconsts, b.structconsts, atol=1e-12)


def direct_sum(reps: Sequence[Representation]) -> Representation:
    """Block-diagonal sum of representations of one Lie algebra."""
    reps = list(reps)
    if not reps:
        raise InvalidDimension("direct sum of an empty list")
    first = reps[0]
    for other in reps[1:]:
        if not _same_algebra(first.L, other.L) or other.type_flag != first.type_flag:
            raise MismatchedAlgebra(f"{other.name} does not share the algebra of {first.name}")
    rho = tuple(sla.block_diag(*[r.rho[i] for r in reps]) for i in range(first.L.dim))
    J_V = sla.block_diag(*[r.J_V for r in reps])
    h_V = sla.block_diag(*[r.h_V for r in reps])
    blocks = tuple(b for r in reps for b in r.blocks)
    name = "sum:" + "+".join(r.name for r in reps)
    return Representation(first.L, rho, J_V, first.cartan, first.type_flag, name, h_V, blocks)


def with_J_V(rep: Representation, J_V: np.ndarray) -> Representation:
    return replace(rep, J_V=np.asarray(J_V, dtype=float))


def standard_sl2() -> Representation:
    """sl(2, R) = sp(1, R) on R^2 in the basis (k, H1, H2) with J_V = J_1."""
    return replace(build_sp(1), name="sl2")


# ---------------------------------------------------------------------------
# Checks


def check_admissible(rep: Representation, tol: float = 1e-9) -> AdmissibilityReport:
    rho = rep.rho_array
    n = rep.L.dim
    J = rep.J_V
    size = rep.dimV
    scale = max(1.0, float(np.max(np.abs(rho))))
    flat = rho.reshape(n, -1).T
    faithful = numerical_rank(flat) == n
    fixed = common_nullspace(list(rho)).dim if np.any(rho) else size
    k_idx, H_idx = list(rep.cartan.k_indices), list(rep.cartan.H_indices)
    k_res = max((_mx(r @ J - J @ r) for r in rho[k_idx]), default=0.0) / scale
    H_res = max((_mx(r @ J + J @ r) for r in rho[H_idx]), default=0.0) / scale
    J_H = rep.cartan.J_H
    rho_H = rho[H_idx]
    rotated = np.einsum("ba,bij->aij", J_H, rho_H, optimize=True)
    adma = _mx(rotated - np.einsum("aij,jk->aik", rho_H, J, optimize=True)) / scale
    trace = max(abs(float(np.trace(r))) for r in rho) / scale
    rep_res = representation_residual(rep.L, rho) / scale ** 2
    jordan = jordan_residual(rep) / scale ** 2
    return AdmissibilityReport(faithful, int(fixed), k_res, H_res, adma, trace, rep_res, jordan,
                               _mx(J @ J + np.eye(size)), tol)


def jordan_residual(rep: Representation) -> float:
    """Max of |2 rho(x) rho(y) - J_V rho([J_H x, y]) - rho([x, y])| over H basis pairs."""
    rho = rep.rho_array
    H_idx = list(rep.cartan.H_indices)
    J_H = rep.cartan.J_H
    c = rep.L.structconsts
    worst = 0.0
    for a_pos, a in enumerate(H_idx):
        jx = np.zeros(rep.L.dim)
        jx[H_idx] = J_H[:, a_pos]
        for b in H_idx:
            y = np.eye(rep.L.dim)[b]
            x = np.eye(rep.L.dim)[a]
            bracket_jxy = rep.L.bracket(jx, y)
            bracket_xy = rep.L.bracket(x, y)
            lhs = 2.0 * rho[a] @ rho[b]
            rhs = rep.J_V @ rep.rho_of(bracket_jxy) + rep.rho_of(bracket_xy)
            worst = max(worst, _mx(lhs - rhs))
    del c
    return worst


def _mx(array: np.ndarray) -> float:
    return float(np.max(np.abs(array), initial=0.0))


def background_metric(rep: Representation, tol: float = 1e-9) -> BilinearForm:
    """The candidate background metric, verified branchwise."""
    h = rep.h_V
    report = background_report(rep, h, tol)
    if not report.passed:
        failed = ", ".join(c.name for c in report.failures())
        raise BackgroundCheckFailed(f"{rep.name}: background metric fails {failed}")
    return BilinearForm.from_matrix(h)


def background_report(rep: Representation, h: np.ndarray, tol: float = 1e-9) -> Report:
    rho = rep.rho_array
    scale = max(1.0, float(np.max(np.abs(rho))))
    k_idx, H_idx = list(rep.cartan.k_indices), list(rep.cartan.H_indices)

    def skew(r):
        return _mx(r.T @ h + h @ r)

    def sym(r):
        return _mx(r.T @ h - h @ r)

    H_test = skew if rep.is_compact else sym
    eigs = np.linalg.eigvalsh(0.5 * (h + h.T))
    J = rep.J_V
    return Report((
        Check("symmetric", _mx(h - h.T), tol),
        Check("positive", -float(eigs[0]), 0.0),
        Check("J_compatible", _mx(J.T @ h @ J - h), tol),
        Check("k_skew", max(skew(r) for r in rho[k_idx]) / scale, tol),
        Check("H_skew" if rep.is_compact else "H_symmetric",
              max(H_test(r) for r in rho[H_idx]) / scale, tol),
    ))


def killing_on_H(rep: Representation) -> np.ndarray:
    B = killing_matrix(rep.L)
    H = list(rep.cartan.H_indices)
    return B[np.ix_(H, H)]


def default_g_H(rep: Representation) -> np.ndarray:
    """B^L on H for non-compact algebras and -B^L on H for compact ones."""
    BH = killing_on_H(rep)
    return -BH if rep.is_compact else BH


def killing_scale(rep: Representation, g_H: np.ndarray, tol: float = 1e-9) -> float:
    """Lambda with B^L = Lambda g_H on H."""
    BH = killing_on_H(rep)
    Lam = float(np.sum(BH * g_H) / np.sum(g_H * g_H))
    if _mx(BH - Lam * g_H) > tol * max(1.0, _mx(BH)) * 10:
        raise LambdaNotScalar("Killing form on H is not a multiple of g_H")
    return Lam


def casimir(rep: Representation, g_H: np.ndarray | None = None) -> np.ndarray:
    """Sum of rho(e_k)^2 over a g_H-orthonormal basis of H."""
    g_H = default_g_H(rep) if g_H is None else np.asarray(g_H, dtype=float)
    inv = np.linalg.inv(g_H)
    rho_H = rep.rho_H
    return np.einsum("ab,aij,bjk->ik", inv, rho_H, rho_H, optimize=True)


def casimir_report(rep: Representation, g_H: np.ndarray | None = None, tol: float = 1e-9) -> Report:
    g_H = default_g_H(rep) if g_H is None else np.asarray(g_H, dtype=float)
    C = casimir(rep, g_H)
    Lam = killing_scale(rep, g_H)
    predicted = 0.5 * Lam * rep.J_V @ rep.rho_z
    rz = rep.rho_z
    return Report((
        Check("casimir_identity", _mx(C - predicted), tol),
        Check("casimir_invertible", 1.0 / max(float(np.min(np.abs(np.linalg.eigvals(C)))), 1e-300), 1e8),
        Check("rho_z_invertible", 1.0 / max(float(np.min(np.abs(np.linalg.eigvals(rz)))), 1e-300), 1e8),
    ), {"Lambda": Lam})


def rho_z_spectrum_report(rep: Representation, tol: float = 1e-7) -> Report:
    """Dimension identity for the eigenspaces of J_V rho(z).

    On V_lambda = ker(rho(z) + (1/2 - lambda) J_V) the operator J_V rho(z)
    equals 1/2 - lambda.
    """
    op = rep.J_V @ rep.rho_z
    h = rep.h_V
    sym = sla.sqrtm(h).real
    eigs = np.linalg.eigvalsh(sym @ op @ np.linalg.inv(sym))
    lambdas = _cluster(0.5 - eigs)
    worst = 0.0
    dims = {}
    for lam in lambdas:
        d_plus = _eig_dim(rep, lam)
        d_minus = _eig_dim(rep, -lam)
        dims[round(lam, 9)] = d_plus
        worst = max(worst, abs(2 * lam * (d_plus + d_minus) - (d_plus - d_minus)))
    return Report((Check("rho_z_dimension_identity", worst, tol),), {"eigenspace_dims": dims})


def _eig_dim(rep: Representation, lam: float) -> int:
    op = rep.rho_z + (0.5 - lam) * rep.J_V
    return numerical_nullspace(op, 1e-7).dim if np.any(np.abs(op) > 1e-12) else rep.dimV


def _cluster(values: np.ndarray, tol: float = 1e-7) -> list[float]:
    out: list[float] = []
    for v in sorted(values):
        if not out or abs(v - out[-1]) > tol:
            out.append(float(v))
    return out


def hom_prime_dim(rep: Representation) -> int:
    """Dimension of J-commuting k-intertwiners H -> V."""
    H_idx = list(rep.cartan.H_indices)
    k_idx = list(rep.cartan.k_indices)
    dH, size = len(H_idx), rep.dimV
    ad = rep.L.ad_matrices()
    ops = []
    eye_H, eye_V = np.eye(dH), np.eye(size)
    # f is size x dH, vec row-major; f A - B f with A on H and B on V
    for i in k_idx:
        A = ad[i][np.ix_(H_idx, H_idx)]
        ops.append(np.kron(eye_V, A.T) - np.kron(rep.rho[i], eye_H))
    ops.append(np.kron(eye_V, rep.cartan.J_H.T) - np.kron(rep.J_V, eye_H))
    return common_nullspace(ops).dim


def symplectic_residual(rep: Representation) -> float:
    omega = rep.J_V.T @ rep.h_V
    return max(_mx(r.T @ omega + omega @ r) for r in rep.rho)


# ---------------------------------------------------------------------------
# Centralizer split


@dataclass(frozen=True, eq=False)
class CentralizerSplit:
    c_plus: list[np.ndarray]
    c_minus: list[np.ndarray]
    rep_type: str
    commutes_with_J: float

    @property
    def dim(self) -> int:
        return len(self.c_plus) + len(self.c_minus)


def adjoint(f: np.ndarray, h: np.ndarray) -> np.ndarray:
    """h-adjoint of an endomorphism."""
    return np.linalg.solve(h, f.T @ h)


def centralizer_split(rep: Representation, h_V: np.ndarray | None = None) -> CentralizerSplit:
    h = rep.h_V if h_V is None else np.asarray(h_V, dtype=float)
    basis = commutant(rep.rho)
    sym = [0.5 * (f + adjoint(f, h)) for f in basis]
    skw = [0.5 * (f - adjoint(f, h)) for f in basis]
    c_plus = _matrix_span(sym)
    c_minus = _matrix_span(skw)
    J = rep.J_V
    commute = max((_mx(f @ J - J @ f) for f in basis), default=0.0)
    dim = len(basis)
    if len(c_plus) == 1 and dim in (1, 2, 4):
        rep_type = {1: "real", 2: "complex", 4: "quaternionic"}[dim]
    else:
        rep_type = "reducible"
    return CentralizerSplit(c_plus, c_minus, rep_type, commute)


def _matrix_span(mats: Sequence[np.ndarray], floor: float = 1e-9) -> list[np.ndarray]:
    mats = [m for m in mats if np.max(np.abs(m), initial=0.0) > floor]
    if not mats:
        return []
    shape = mats[0].shape
    span = column_span(np.array([m.ravel() for m in mats]).T)
    return [_tidy(v.reshape(shape)) for v in span.basis.T]


def complex_type_I(rep: Representation, h_V: np.ndarray | None = None) -> np.ndarray:
    """The generator of a one-dimensional c^-, scaled so that I^2 = -1.

    This covers complex-type irreducibles (c = C) and two copies of a real-type
    irreducible (c = gl(2, R), c^- = so(2)).  The sign is fixed so that the first
    nonzero entry of I is positive.
    """
    split = centralizer_split(rep, h_V)
    if len(split.c_minus) != 1:
        raise NotAdmissible(f"{rep.name}: c^- has dimension {len(split.c_minus)}, expected 1")
    I = split.c_minus[0]
    I = I / np.sqrt(abs(np.trace(I @ I)) / rep.dimV)
    if _mx(I @ I + np.eye(rep.dimV)) > 1e-8:
        raise NotAdmissible(f"{rep.name}: the c^- generator does not square to a multiple of -1")
    flat = I.ravel()
    first = flat[np.flatnonzero(np.abs(flat) > 1e-9)[0]]
    return _tidy(I * np.sign(first))


# ---------------------------------------------------------------------------
# Catalog ids


_ID_PATTERNS = [
    (re.compile(r"^sp:(\d+)$"), lambda g: build_sp(int(g[0]))),
    (re.compile(r"^su:(\d+),(\d+)$"), lambda g: build_su_pq(int(g[0]), int(g[1]))),
    (re.compile(r"^su1n:(\d+):(\d+)$"), lambda g: build_su1n_wedge(int(g[0]), int(g[1]))),
    (re.compile(r"^so_star:(\d+)$"), lambda g: build_so_star(int(g[0]))),
    (re.compile(r"^so2n:(\d+)$"), lambda g: build_so2n_clifford(int(g[0]))),
]


def _split_sum(body: str) -> list[str]:
    """Split a sum body on '+' at nesting depth zero (dual: prefixes bind tighter)."""
    return [part for part in body.split("+") if part]


def resolve(catalog_id: str) -> Representation:
    """Build the representation named by a catalog id."""
    cid = catalog_id.strip()
    if cid.startswith("model:"):
        cid = cid[len("model:"):]
    try:
        if cid.startswith("dual:"):
            return dualize(resolve(cid[len("dual:"):]))
        if cid.startswith("sum:"):
            parts = _split_sum(cid[len("sum:"):])
            if len(parts) < 1:
                raise UnknownModelId(f"empty sum in {catalog_id!r}")
            return direct_sum([resolve(p) for p in parts])
        for pattern, build in _ID_PATTERNS:
            match = pattern.match(cid)
            if match:
                return build(match.groups())
    except InvalidDimension as exc:
        raise UnknownModelId(f"{catalog_id!r}: {exc}") from exc
    raise UnknownModelId(f"unknown catalog id {catalog_id!r}")


def catalog_ids(config: Config | None = None, duals: bool = True) -> list[str]:
    """Catalog ids within the configured rank bounds."""
    config = config or Config()
    ids = [f"sp:{m}" for m in range(1, config.max_sp + 1)]
    ids += [f"su:{p},{q}" for p in range(1, config.max_su) for q in range(1, config.max_su)
            if p + q <= config.max_su and p <= q]
    ids += [f"su1n:{n}:{p}" for n in range(1, config.max_su1n + 1) for p in range(1, n + 1)
            if 2 * math.comb(n + 1, p) <= 128]
    ids += [f"so_star:{m}" for m in range(2, config.max_so_star + 1)]
    ids += [f"so2n:{n}" for n in range(1, config.max_so2n + 1) if 2 ** n <= 128]
    if duals:
        ids += [f"dual:{i}" for i in list(ids)]
    return ids


def acceptance_ids(duals: bool = True) -> list[str]:
    """The rank window used by the acceptance suite."""
    ids = [f"sp:{m}" for m in range(1, 4)]
    ids += [f"su:{p},{q}" for p in range(1, 5) for q in range(1, 5) if p + q <= 5 and p <= q]
    ids += [f"su1n:{n}:{p}" for n in range(1, 5) for p in range(1, n + 1)]
    ids += [f"so_star:{m}" for m in range(2, 4)]
    ids += [f"so2n:{n}" for n in range(1, 6)]
    if duals:
        ids += [f"dual:{i}" for i in list(ids)]
    return ids

"""Tolerance-aware dense complex linear algebra and subspace arithmetic.

All rank decisions use a relative singular-value cutoff (``rank_rtol`` times
the largest singular value), so every set-theoretic statement about ranges,
kernels and containments becomes a deterministic, scale-invariant threshold
test.  Subspaces are canonically stored as orthonormal bases; two subspaces
compare equal exactly when all principal angles are at most ``angle_tol``.

Zero-dimensional subspaces and matrices with a zero dimension are first-class
values; every operation accepts them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, InputError


@dataclass(frozen=True)
class ToleranceConfig:
    """Thresholds controlling rank, angle and residual decisions.

    rank_rtol
        Relative singular-value cutoff: singular values below
        ``rank_rtol * sigma_max`` are treated as zero.
    angle_tol
        Maximal principal angle (radians) at which two subspaces are
        considered equal or contained in one another.
    residual_tol
        Bound accepted for linear-solve residuals and semidefiniteness
        margins.
    """

    rank_rtol: float = 1e-10
    angle_tol: float = 1e-8
    residual_tol: float = 1e-9

    def __post_init__(self):
        for name in ("rank_rtol", "angle_tol", "residual_tol"):
            value = getattr(self, name)
            if not (0.0 < value < 1.0):
                raise InputError(f"{name} must lie strictly in (0, 1), got {value!r}")


DEFAULT_TOL = ToleranceConfig()


def as_matrix(a, rows=None, cols=None, name="matrix"):
    """Coerce ``a`` to a 2-d complex ndarray, checking shape and finiteness."""
    m = np.asarray(a, dtype=complex)
    if m.ndim != 2:
        raise InputError(f"{name} must be two-dimensional, got ndim={m.ndim}")
    if rows is not None and m.shape[0] != rows:
        raise DimensionMismatchError(f"{name} must have {rows} rows, got {m.shape[0]}")
    if cols is not None and m.shape[1] != cols:
        raise DimensionMismatchError(f"{name} must have {cols} columns, got {m.shape[1]}")
    if m.size and not (np.all(np.isfinite(m.real)) and np.all(np.isfinite(m.imag))):
        raise InputError(f"{name} contains non-finite entries")
    return m


def op_norm(m):
    """Spectral norm (largest singular value); 0.0 for empty matrices."""
    m = np.asarray(m)
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


@dataclass(frozen=True, eq=False)
class Subspace:
    """A linear subspace of C^ambient_dim, stored as an orthonormal column basis."""

    ambient_dim: int
    basis: np.ndarray  # shape (ambient_dim, dim), orthonormal columns

    def __post_init__(self):
        b = self.basis
        if b.shape[0] != self.ambient_dim:
            raise DimensionMismatchError(
                f"basis has {b.shape[0]} rows but ambient dimension is {self.ambient_dim}"
            )
        if b.shape[1] > self.ambient_dim:
            raise DimensionMismatchError("subspace dimension exceeds ambient dimension")
        if b.size:
            defect = op_norm(b.conj().T @ b - np.eye(b.shape[1]))
            if defect > 1e-6:
                raise InputError(f"basis columns are not orthonormal (defect {defect:.2e})")

    @property
    def dim(self):
        return self.basis.shape[1]

    def projector(self):
        """Orthogonal projector onto the subspace, as a dense matrix."""
        if self.dim == 0:
            return np.zeros((self.ambient_dim, self.ambient_dim), dtype=complex)
        return self.basis @ self.basis.conj().T

    def project(self, x):
        """Orthogonal projection of vectors (columns of ``x``) onto the subspace."""
        x = np.asarray(x, dtype=complex)
        if self.dim == 0:
            return np.zeros_like(x)
        return self.basis @ (self.basis.conj().T @ x)

    def contains_vector(self, x, angle_tol=DEFAULT_TOL.angle_tol):
        x = np.asarray(x, dtype=complex).reshape(self.ambient_dim)
        nx = np.linalg.norm(x)
        if nx == 0.0:
            return True
        return np.linalg.norm(x - self.project(x)) <= angle_tol * nx


def full_space(n):
    return Subspace(n, np.eye(n, dtype=complex))


def zero_space(n):
    return Subspace(n, np.zeros((n, 0), dtype=complex))


def coordinate_subspace(ambient_dim, indices):
    """Span of the given standard basis vectors (0-based indices)."""
    indices = list(indices)
    b = np.zeros((ambient_dim, len(indices)), dtype=complex)
    for k, i in enumerate(indices):
        if not (0 <= i < ambient_dim):
            raise InputError(f"coordinate index {i} out of range for ambient dim {ambient_dim}")
        b[i, k] = 1.0
    return Subspace(ambient_dim, b)


def _svd(m):
    # np.linalg.svd handles (n, 0) and (0, n) shapes; normalize the outputs
    # so callers always get full unitary factors.
    n_rows, n_cols = m.shape
    if n_rows == 0 or n_cols == 0:
        return np.eye(n_rows, dtype=complex), np.zeros(0), np.eye(n_cols, dtype=complex)
    u, s, vh = np.linalg.svd(m, full_matrices=True)
    return u, s, vh


def _numerical_rank(s, rank_rtol):
    if s.size == 0:
        return 0
    cutoff = rank_rtol * s[0]
    return int(np.sum(s > cutoff))


def orthonormal_range(m, tol=DEFAULT_TOL):
    """Orthonormal basis of the column space of ``m`` at the configured rank cutoff."""
    m = as_matrix(m)
    u, s, _ = _svd(m)
    r = _numerical_rank(s, tol.rank_rtol)
    return Subspace(m.shape[0], u[:, :r].copy())


def kernel(m, tol=DEFAULT_TOL):
    """Orthonormal basis of the numerical null space of ``m``.

    dim(kernel) + dim(range) equals the number of columns by construction:
    both come from one SVD and one rank decision.
    """
    m = as_matrix(m)
    _, s, vh = _svd(m)
    r = _numerical_rank(s, tol.rank_rtol)
    return Subspace(m.shape[1], vh[r:, :].conj().T.copy())


def complement(s):
    """Orthogonal complement; dimensions always add up to the ambient dimension."""
    if s.dim == 0:
        return full_space(s.ambient_dim)
    u, _, _ = _svd(s.basis)
    return Subspace(s.ambient_dim, u[:, s.dim:].copy())


def _sum_and_intersection(s1, s2, tol):
    if s1.ambient_dim != s2.ambient_dim:
        raise DimensionMismatchError(
            f"ambient dimensions differ: {s1.ambient_dim} vs {s2.ambient_dim}"
        )
    n = s1.ambient_dim
    k1, k2 = s1.dim, s2.dim
    c = np.hstack([s1.basis, s2.basis])
    u, s, vh = _svd(c)
    r = _numerical_rank(s, tol.rank_rtol)
    sum_space = Subspace(n, u[:, :r].copy())
    # Null vectors (x; y) of [B1 B2] satisfy B1 x = -B2 y, so B1 x spans the
    # intersection.  Columns have norm 1/sqrt(2), hence are well conditioned.
    null = vh[r:, :].conj().T
    inter_dim = k1 + k2 - r
    if inter_dim == 0:
        inter = zero_space(n)
    else:
        vecs = s1.basis @ null[:k1, :]
        q, _, _ = _svd(vecs)
        inter = Subspace(n, q[:, :inter_dim].copy())
    return sum_space, inter


def subspace_sum(s1, s2, tol=DEFAULT_TOL):
    """Span of the union of the two subspaces."""
    return _sum_and_intersection(s1, s2, tol)[0]


def intersect(s1, s2, tol=DEFAULT_TOL):
    """Intersection of the two subspaces.

    The dimension satisfies dim(sum) + dim(intersection) = dim(s1) + dim(s2)
    exactly, because both spaces derive from a single rank decision.
    """
    return _sum_and_intersection(s1, s2, tol)[1]


def preimage(m, s, tol=DEFAULT_TOL):
    """The subspace {u : M u in S}, computed as ker((I - P_S) M).

    Always contains ker(M); a single rank decision is made instead of one
    per solve.
    """
    m = as_matrix(m)
    if s.ambient_dim != m.shape[0]:
        raise DimensionMismatchError(
            f"matrix maps into dimension {m.shape[0]} but subspace lives in {s.ambient_dim}"
        )
    residual_map = m - s.project(m)
    return kernel(residual_map, tol)


@dataclass(frozen=True)
class SubspaceRelation:
    """Containment relation between two subspaces with its angle margin.

    relation is one of ``"equal"``, ``"subset"`` (S1 inside S2),
    ``"superset"`` (S2 inside S1) or ``"incomparable"``.  angle_12 is the
    largest principal angle of S1 against S2 (how far S1 sticks out of S2),
    angle_21 the reverse, and max_principal_angle their maximum.
    """

    relation: str
    angle_12: float
    angle_21: float

    @property
    def max_principal_angle(self):
        return max(self.angle_12, self.angle_21)


def _exit_angle(s_from, s_to):
    """Largest principal angle by which s_from leaves s_to (0 if contained)."""
    if s_from.dim == 0:
        return 0.0
    residual = s_from.basis - s_to.project(s_from.basis)
    sine = min(1.0, op_norm(residual))
    return float(np.arcsin(sine))


def subspace_relation(s1, s2, tol=DEFAULT_TOL):
    """Decide equality or containment of two subspaces at ``angle_tol``."""
    if s1.ambient_dim != s2.ambient_dim:
        raise DimensionMismatchError(
            f"ambient dimensions differ: {s1.ambient_dim} vs {s2.ambient_dim}"
        )
    a12 = _exit_angle(s1, s2)
    a21 = _exit_angle(s2, s1)
    in_12 = a12 <= tol.angle_tol
    in_21 = a21 <= tol.angle_tol
    if in_12 and in_21:
        relation = "equal"
    elif in_12:
        relation = "subset"
    elif in_21:
        relation = "superset"
    else:
        relation = "incomparable"
    return SubspaceRelation(relation, a12, a21)


def direct_sum_basis(s1, s2, tol=DEFAULT_TOL):
    """Orthonormal basis of S1 + S2 assuming the sum is (numerically) direct."""
    total = subspace_sum(s1, s2, tol)
    if total.dim != s1.dim + s2.dim:
        raise InputError("subspaces overlap; direct sum is not defined")
    return total

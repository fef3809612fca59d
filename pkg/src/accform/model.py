"""Problem ingestion and normalization to orthonormal coordinates.

A raw problem consists of a form matrix ``t0`` (the form value is
``a(u, v) = v^* t0 u``, linear in the first argument and conjugate-linear in
the second), a linking map ``j`` from the form space into the Hilbert space,
and optional Gram matrices describing non-standard inner products on either
space.  ``normalize`` absorbs the Gram matrices into a change of basis, so
that downstream modules can treat the adjoint of ``j`` as a plain conjugate
transpose.

A positive semi-definite Gram matrix on the form space is handled by
quotienting out its null directions before rescaling; this is the
finite-dimensional counterpart of completing a semi-normed space.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DimensionMismatchError, InputError
from .numerics import DEFAULT_TOL, ToleranceConfig, as_matrix, op_norm

_PROBLEM_KEYS = {"dim_V", "dim_H", "T0", "J", "gram_V", "gram_H", "tolerances"}
_TOLERANCE_KEYS = {"rank_rtol", "angle_tol", "residual_tol"}


@dataclass(frozen=True, eq=False)
class Certificate:
    """Verdict of a single numerical check, with margin and optional witness.

    ``margin`` is check-specific (its meaning and units are documented by the
    operation that produced the certificate).  A witness vector is attached
    exactly when the verdict is negative.
    """

    holds: bool
    margin: float
    operation: str
    tolerance: float
    witness: np.ndarray | None = None

    def __post_init__(self):
        if self.holds and self.witness is not None:
            raise InputError("a certificate that holds must not carry a witness")

    @property
    def verdict(self):
        return "holds" if self.holds else "fails"


@dataclass(frozen=True, eq=False)
class FormSystem:
    """A form matrix and linking map in orthonormal coordinates.

    ``t0`` is dim_v x dim_v and represents the form, ``j`` is dim_h x dim_v
    and represents the linking map.  Adjoints are plain conjugate transposes
    in these coordinates.
    """

    dim_v: int
    dim_h: int
    t0: np.ndarray
    j: np.ndarray
    tol: ToleranceConfig = field(default_factory=ToleranceConfig)

    def __post_init__(self):
        object.__setattr__(self, "t0", as_matrix(self.t0, self.dim_v, self.dim_v, "t0"))
        object.__setattr__(self, "j", as_matrix(self.j, self.dim_h, self.dim_v, "j"))


@dataclass(frozen=True, eq=False)
class RawProblem:
    """A problem as read from disk, prior to normalization."""

    dim_v: int
    dim_h: int
    t0_raw: np.ndarray
    j_raw: np.ndarray
    gram_v: np.ndarray | None = None
    gram_h: np.ndarray | None = None
    tol: ToleranceConfig = field(default_factory=ToleranceConfig)


def hermitian_part(m):
    m = np.asarray(m, dtype=complex)
    return 0.5 * (m + m.conj().T)


def _check_hermitian(m, name, tol):
    scale = max(1.0, op_norm(m))
    defect = op_norm(m - m.conj().T)
    if defect > tol.residual_tol * scale:
        raise InputError(f"{name} is not Hermitian (defect {defect:.2e})")


def _decode_matrix(obj, rows, cols, name):
    if not isinstance(obj, list) or len(obj) != rows:
        raise DimensionMismatchError(f"{name} must be a list of {rows} rows")
    out = np.zeros((rows, cols), dtype=complex)
    for i, row in enumerate(obj):
        if not isinstance(row, list) or len(row) != cols:
            raise DimensionMismatchError(f"{name} row {i} must have {cols} entries")
        for k, entry in enumerate(row):
            if (
                not isinstance(entry, list)
                or len(entry) != 2
                or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in entry)
            ):
                raise InputError(f"{name}[{i}][{k}] must be a [re, im] pair of numbers")
            out[i, k] = complex(float(entry[0]), float(entry[1]))
    return as_matrix(out, rows, cols, name)


def encode_matrix(m):
    """Encode a complex matrix as nested [re, im] pairs (the file format)."""
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def load_problem(data):
    """Parse the JSON problem format into a dimension-checked RawProblem.

    ``data`` may be bytes, text, or an open binary/text file.  Unknown keys
    are rejected so that typos do not silently change the problem.
    """
    if hasattr(data, "read"):
        data = data.read()
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        obj = json.loads(data)
    except json.JSONDecodeError as exc:
        raise InputError(f"problem file is not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise InputError("problem file must contain a JSON object")
    unknown = set(obj) - _PROBLEM_KEYS
    if unknown:
        raise InputError(f"unknown problem keys: {sorted(unknown)}")
    for key in ("dim_V", "dim_H", "T0", "J"):
        if key not in obj:
            raise InputError(f"problem file is missing required key {key!r}")
    dim_v, dim_h = obj["dim_V"], obj["dim_H"]
    for name, value in (("dim_V", dim_v), ("dim_H", dim_h)):
        if not isinstance(value, int) or isinstance(value, bool) or value < 0:
            raise InputError(f"{name} must be a nonnegative integer")

    tol_obj = obj.get("tolerances", {})
    if not isinstance(tol_obj, dict):
        raise InputError("tolerances must be an object")
    unknown = set(tol_obj) - _TOLERANCE_KEYS
    if unknown:
        raise InputError(f"unknown tolerance keys: {sorted(unknown)}")
    tol = ToleranceConfig(**{k: float(v) for k, v in tol_obj.items()})

    t0 = _decode_matrix(obj["T0"], dim_v, dim_v, "T0")
    j = _decode_matrix(obj["J"], dim_h, dim_v, "J")
    gram_v = gram_h = None
    if "gram_V" in obj:
        gram_v = _decode_matrix(obj["gram_V"], dim_v, dim_v, "gram_V")
        _check_hermitian(gram_v, "gram_V", tol)
        if dim_v:
            w = np.linalg.eigvalsh(hermitian_part(gram_v))
            if w[0] < -tol.residual_tol * max(1.0, w[-1] if w.size else 1.0):
                raise InputError(f"gram_V has a negative eigenvalue ({w[0]:.2e})")
    if "gram_H" in obj:
        gram_h = _decode_matrix(obj["gram_H"], dim_h, dim_h, "gram_H")
        _check_hermitian(gram_h, "gram_H", tol)
    return RawProblem(dim_v, dim_h, t0, j, gram_v, gram_h, tol)


def problem_to_json(p: RawProblem):
    """Inverse of load_problem, as a plain dict in the file schema."""
    obj = {
        "dim_V": p.dim_v,
        "dim_H": p.dim_h,
        "T0": encode_matrix(p.t0_raw),
        "J": encode_matrix(p.j_raw),
    }
    if p.gram_v is not None:
        obj["gram_V"] = encode_matrix(p.gram_v)
    if p.gram_h is not None:
        obj["gram_H"] = encode_matrix(p.gram_h)
    return obj


def _gram_factor_h(gram_h, dim_h, tol):
    """Factor gram_H = L L^* and return L^H (the coordinate map on H)."""
    if gram_h is None:
        return np.eye(dim_h, dtype=complex)
    g = hermitian_part(gram_h)
    if dim_h:
        s = np.linalg.svd(g, compute_uv=False)
        if s[-1] <= tol.rank_rtol * s[0]:
            raise InputError("gram_H is numerically singular")
    try:
        length = np.linalg.cholesky(g)
    except np.linalg.LinAlgError as exc:
        raise InputError("gram_H is not positive definite") from exc
    return length.conj().T


def normalize(p: RawProblem):
    """Rewrite a raw problem in orthonormal coordinates.

    Returns the normalized FormSystem together with the change-of-basis
    matrix mapping raw form-space coordinates to normalized ones.  Null
    directions of a semi-definite gram_V are quotiented out; the form and the
    linking map are required to vanish on those directions (otherwise they do
    not descend to the quotient and the input is rejected).

    Form values are preserved: for raw vectors u, v the value v^* t0_raw u
    equals the normalized form value of the mapped vectors.
    """
    tol = p.tol
    t0_raw = as_matrix(p.t0_raw, p.dim_v, p.dim_v, "T0")
    j_raw = as_matrix(p.j_raw, p.dim_h, p.dim_v, "J")

    mh = _gram_factor_h(p.gram_h, p.dim_h, tol)  # x' = mh @ x
    j_h = mh @ j_raw

    if p.gram_v is None:
        fs = FormSystem(p.dim_v, p.dim_h, t0_raw, j_h, tol)
        return fs, np.eye(p.dim_v, dtype=complex)

    g = hermitian_part(p.gram_v)
    w, u = np.linalg.eigh(g)
    w = np.clip(w, 0.0, None)
    w_max = w[-1] if w.size else 0.0
    keep = w > tol.rank_rtol * w_max if w.size else np.zeros(0, dtype=bool)
    u_keep = u[:, keep]
    s_keep = np.sqrt(w[keep])
    u_null = u[:, ~keep]

    if u_null.shape[1]:
        scale_t = max(1.0, op_norm(t0_raw))
        scale_j = max(1.0, op_norm(j_h))
        descent = max(
            op_norm(t0_raw @ u_null) / scale_t,
            op_norm(t0_raw.conj().T @ u_null) / scale_t,
            op_norm(j_h @ u_null) / scale_j,
        )
        if descent > 10 * tol.residual_tol:
            raise InputError(
                "form or linking map does not vanish on the null space of gram_V "
                f"(relative defect {descent:.2e}); the quotient is not defined"
            )

    phi = s_keep[:, None] * u_keep.conj().T  # raw -> normalized
    phi_pinv = u_keep * (1.0 / s_keep)[None, :]
    t0 = phi_pinv.conj().T @ t0_raw @ phi_pinv
    j = j_h @ phi_pinv
    fs = FormSystem(int(np.sum(keep)), p.dim_h, t0, j, tol)
    return fs, phi


def t_matrix(fs: FormSystem):
    """Matrix of the completed form b(u, v) = a(u, v) + <j u, j v>_H."""
    return fs.t0 + fs.j.conj().T @ fs.j


def j_adjoint(fs: FormSystem):
    """Adjoint of the linking map; the conjugate transpose in these coordinates."""
    return fs.j.conj().T


def check_accretive(fs: FormSystem):
    """Certify Re a(u, u) >= 0 via the smallest eigenvalue of the Hermitian part.

    Margin is that eigenvalue; tiny negative values within residual_tol are
    accepted as rounding.
    """
    if fs.dim_v == 0:
        return Certificate(True, 0.0, "check_accretive", fs.tol.residual_tol)
    h = hermitian_part(fs.t0)
    w, vecs = np.linalg.eigh(h)
    lam = float(w[0])
    holds = lam >= -fs.tol.residual_tol
    witness = None if holds else vecs[:, 0]
    return Certificate(holds, lam, "check_accretive", fs.tol.residual_tol, witness)


def check_surjective_link(fs: FormSystem):
    """Certify that the linking map has full range (dense = surjective here).

    Margin is the dim_h-th singular value of j (0 when it does not exist).
    """
    if fs.dim_h == 0:
        return Certificate(True, 0.0, "check_surjective_link", fs.tol.rank_rtol)
    s = np.linalg.svd(fs.j, compute_uv=False) if fs.j.size else np.zeros(0)
    cutoff = fs.tol.rank_rtol * (float(s[0]) if s.size else 0.0)
    rank = int(np.sum(s > cutoff)) if s.size else 0
    holds = rank == fs.dim_h
    margin = float(s[fs.dim_h - 1]) if s.size >= fs.dim_h else 0.0
    witness = None
    if not holds:
        # A direction of H not reached by the link.
        if fs.j.size:
            u, _, _ = np.linalg.svd(fs.j)
            witness = u[:, rank]
        else:
            witness = np.eye(fs.dim_h, dtype=complex)[:, 0]
    return Certificate(holds, margin, "check_surjective_link", fs.tol.rank_rtol, witness)


def validate_conditions(fs: FormSystem):
    """Both standing conditions (accretive form, full-range link) as certificates."""
    return check_accretive(fs), check_surjective_link(fs)


def form_value(fs: FormSystem, u, v):
    """Form value a(u, v) = v^* t0 u for explicit vectors."""
    u = np.asarray(u, dtype=complex).reshape(fs.dim_v)
    v = np.asarray(v, dtype=complex).reshape(fs.dim_v)
    return complex(v.conj() @ (fs.t0 @ u))


def with_tolerances(fs: FormSystem, tol: ToleranceConfig):
    return FormSystem(fs.dim_v, fs.dim_h, fs.t0, fs.j, tol)


def dual_system(fs: FormSystem):
    """System of the dual form a*(u, v) = conj(a(v, u)); the link is unchanged."""
    return FormSystem(fs.dim_v, fs.dim_h, fs.t0.conj().T.copy(), fs.j, fs.tol)


def raw_from_system(fs: FormSystem):
    """Wrap an already-normalized system as a RawProblem (no Gram matrices)."""
    return RawProblem(fs.dim_v, fs.dim_h, fs.t0, fs.j, None, None, fs.tol)


def replace_t0(fs: FormSystem, t0):
    return replace(fs, t0=as_matrix(t0, fs.dim_v, fs.dim_v, "t0"))

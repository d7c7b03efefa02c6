"""Dense linear algebra helpers and bipartite structure over R and C.

All vectors in K^n (x) K^m use the row-major ``vec`` convention:
component ``i*m + j`` of ``vec(A)`` is ``A[i, j]``.  A bipartite operator on
K^n (x) K^m is therefore an (nm) x (nm) matrix whose (i, j) block of size
m x m is the coefficient of E_ij on the left factor.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Any

import numpy as np

from realmaps.errors import DimensionError, NotHermitianError, RankExceededError

__all__ = [
    "Field",
    "BipartiteOperator",
    "vec",
    "unvec",
    "kron",
    "partial_transpose_left",
    "partial_transpose_right",
    "swap_operator",
    "sym_eig",
    "svd",
    "schmidt_rank",
    "schmidt_factorize",
    "operator_norm",
    "hermitian_defect",
    "matrix_to_json",
    "matrix_from_json",
    "bipartite_to_json",
    "bipartite_from_json",
]

DEFAULT_TOL = 1e-9


class Field(enum.Enum):
    REAL = "R"
    COMPLEX = "C"

    @classmethod
    def parse(cls, value: "Field | str") -> "Field":
        if isinstance(value, Field):
            return value
        key = str(value).strip().upper()
        if key in ("R", "REAL"):
            return cls.REAL
        if key in ("C", "COMPLEX"):
            return cls.COMPLEX
        raise ValueError(f"unknown field {value!r}")

    @property
    def dtype(self):
        return np.float64 if self is Field.REAL else np.complex128


def _field_of(a: np.ndarray) -> Field:
    return Field.COMPLEX if np.iscomplexobj(a) else Field.REAL


def _as_field_array(a: Any, field: Field) -> np.ndarray:
    arr = np.asarray(a)
    if field is Field.REAL:
        if np.iscomplexobj(arr):
            if np.any(arr.imag != 0):
                raise ValueError("REAL field operator has a nonzero imaginary part")
            arr = arr.real
        return np.array(arr, dtype=np.float64)
    return np.array(arr, dtype=np.complex128)


@dataclass(frozen=True, eq=False)
class BipartiteOperator:
    """A square matrix on K^n (x) K^m with its factor dimensions and field."""

    dim_left: int
    dim_right: int
    field: Field
    matrix: np.ndarray

    def __post_init__(self):
        if self.dim_left < 1 or self.dim_right < 1:
            raise DimensionError("factor dimensions must be positive")
        field = Field.parse(self.field)
        mat = _as_field_array(self.matrix, field)
        size = self.dim_left * self.dim_right
        if mat.shape != (size, size):
            raise DimensionError(
                f"expected a {size}x{size} matrix for dims "
                f"({self.dim_left},{self.dim_right}), got {mat.shape}"
            )
        if not np.all(np.isfinite(mat)):
            raise ValueError("matrix entries must be finite")
        mat.setflags(write=False)
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "matrix", mat)

    @classmethod
    def from_matrix(cls, matrix, dim_left: int, dim_right: int, field=None) -> "BipartiteOperator":
        arr = np.asarray(matrix)
        if field is None:
            field = _field_of(arr)
        return cls(dim_left, dim_right, Field.parse(field), arr)

    @property
    def shape4(self) -> np.ndarray:
        """View indexed ``[i, k, j, l]``: entry (k, l) of block (i, j)."""
        n, m = self.dim_left, self.dim_right
        return self.matrix.reshape(n, m, n, m)

    @property
    def size(self) -> int:
        return self.dim_left * self.dim_right

    def block(self, i: int, j: int) -> np.ndarray:
        return self.shape4[i, :, j, :]

    def with_matrix(self, matrix) -> "BipartiteOperator":
        arr = np.asarray(matrix)
        field = Field.COMPLEX if (self.field is Field.COMPLEX or np.iscomplexobj(arr)) else Field.REAL
        return BipartiteOperator(self.dim_left, self.dim_right, field, arr)

    def as_complex(self) -> "BipartiteOperator":
        return BipartiteOperator(self.dim_left, self.dim_right, Field.COMPLEX, self.matrix)

    def __repr__(self) -> str:
        return (
            f"BipartiteOperator(dim_left={self.dim_left}, dim_right={self.dim_right}, "
            f"field={self.field.value})"
        )


def vec(a) -> np.ndarray:
    """Row-major vectorization, ``vec(A)[i*m + j] = A[i, j]``."""
    a = np.asarray(a)
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    if a.ndim != 2:
        raise DimensionError("vec expects a matrix")
    return a.reshape(-1).copy()


def unvec(v, n: int, m: int) -> np.ndarray:
    v = np.asarray(v).reshape(-1)
    if v.size != n * m:
        raise DimensionError(f"vector of length {v.size} cannot be reshaped to {n}x{m}")
    return v.reshape(n, m).copy()


def kron(a, b) -> np.ndarray:
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    if b.ndim == 1:
        b = b.reshape(-1, 1)
    return np.kron(a, b)


def partial_transpose_left(p: BipartiteOperator) -> BipartiteOperator:
    """Transpose on the left factor: block (i, j) becomes block (j, i)."""
    n, m = p.dim_left, p.dim_right
    out = p.shape4.transpose(2, 1, 0, 3).reshape(n * m, n * m)
    return BipartiteOperator(n, m, p.field, out)


def partial_transpose_right(p: BipartiteOperator) -> BipartiteOperator:
    n, m = p.dim_left, p.dim_right
    out = p.shape4.transpose(0, 3, 2, 1).reshape(n * m, n * m)
    return BipartiteOperator(n, m, p.field, out)


def swap_operator(n: int, m: int) -> np.ndarray:
    """The operator S: K^m (x) K^n -> K^n (x) K^m with S(w (x) v) = v (x) w."""
    if n < 1 or m < 1:
        raise DimensionError("dimensions must be positive")
    s = np.zeros((n * m, n * m))
    for i in range(n):
        for j in range(m):
            s[i * m + j, j * n + i] = 1.0
    return s


def hermitian_defect(a) -> float:
    a = np.asarray(a)
    return float(np.linalg.norm(a - a.conj().T))


def sym_eig(a, tol: float = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.

    Raises:
        NotHermitianError: if ``||A - A*||_F > tol * (1 + ||A||_F)``.
    """
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError("sym_eig expects a square matrix")
    defect = hermitian_defect(a)
    if defect > tol * (1.0 + np.linalg.norm(a)):
        raise NotHermitianError(f"matrix is not Hermitian (defect {defect:.3e})")
    h = 0.5 * (a + a.conj().T)
    if not np.iscomplexobj(h):
        h = h.real
    w, v = np.linalg.eigh(h)
    return w, v


def svd(a) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Thin SVD ``A = U diag(s) V*`` with ``s`` descending; returns (U, s, V)."""
    u, s, vh = np.linalg.svd(np.asarray(a), full_matrices=False)
    return u, s, vh.conj().T


def schmidt_rank(v, n: int, m: int, tol: float = DEFAULT_TOL) -> int:
    s = np.linalg.svd(unvec(v, n, m), compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > tol * s[0]))


def schmidt_factorize(v, n: int, m: int, p: int, tol: float = DEFAULT_TOL):
    """Write ``v = (I_n (x) S) w`` with ``w`` in K^n (x) K^p and ``S*S = I_p``.

    Returns:
        ``(w, S)`` where ``S`` is m x p with orthonormal columns.
    """
    if p > m:
        raise DimensionError(f"an m x p isometry needs p <= m (p={p}, m={m})")
    rank = schmidt_rank(v, n, m, tol)
    if rank > p:
        raise RankExceededError(f"Schmidt rank {rank} exceeds {p}")
    a = unvec(v, n, m)
    u, s, vh = np.linalg.svd(a, full_matrices=True)
    s_iso = vh.conj().T[:, :p].conj()
    wmat = np.zeros((n, p), dtype=np.result_type(a, u))
    for k in range(min(n, p, s.size)):
        wmat[:, k] = u[:, k] * s[k]
    # fix phases: largest entry of each column of S real and positive
    for k in range(p):
        idx = int(np.argmax(np.abs(s_iso[:, k])))
        phase = s_iso[idx, k] / abs(s_iso[idx, k])
        s_iso[:, k] = s_iso[:, k] / phase
        wmat[:, k] = wmat[:, k] * phase
    if not np.iscomplexobj(a):
        s_iso = s_iso.real
        wmat = wmat.real
    return vec(wmat), s_iso


def operator_norm(a) -> float:
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


# -- JSON ----------------------------------------------------------------------


def matrix_to_json(a) -> dict:
    a = np.asarray(a)
    if a.ndim == 1:
        a = a.reshape(-1, 1)
    out = {"rows": int(a.shape[0]), "cols": int(a.shape[1])}
    if np.iscomplexobj(a):
        out["field"] = "C"
        out["re"] = a.real.tolist()
        out["im"] = a.imag.tolist()
    else:
        out["field"] = "R"
        out["re"] = np.asarray(a, dtype=float).tolist()
    return out


def matrix_from_json(obj: dict) -> np.ndarray:
    try:
        rows, cols = int(obj["rows"]), int(obj["cols"])
        field = Field.parse(obj.get("field", "R"))
        re = np.array(obj["re"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed matrix JSON: {exc}") from exc
    if re.shape != (rows, cols):
        raise DimensionError(f"'re' has shape {re.shape}, declared {rows}x{cols}")
    if field is Field.COMPLEX:
        if "im" not in obj:
            raise ValueError("complex matrix JSON requires 'im'")
        im = np.array(obj["im"], dtype=float)
        if im.shape != re.shape:
            raise DimensionError("'re' and 'im' shapes differ")
        return re + 1j * im
    if "im" in obj and np.any(np.asarray(obj["im"], dtype=float) != 0):
        raise ValueError("real matrix JSON carries a nonzero 'im'")
    return re


def bipartite_to_json(p: BipartiteOperator) -> dict:
    out = matrix_to_json(p.matrix)
    out["field"] = p.field.value
    if p.field is Field.COMPLEX and "im" not in out:
        out["im"] = np.zeros_like(p.matrix.real).tolist()
    out["dimLeft"] = p.dim_left
    out["dimRight"] = p.dim_right
    return out


def bipartite_from_json(obj: dict) -> BipartiteOperator:
    mat = matrix_from_json(obj)
    try:
        n, m = int(obj["dimLeft"]), int(obj["dimRight"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"bipartite JSON needs dimLeft/dimRight: {exc}") from exc
    return BipartiteOperator(n, m, Field.parse(obj.get("field", "R")), mat)

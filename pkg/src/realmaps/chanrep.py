"""Linear maps M_n(K) -> M_m(K) stored by their Choi matrix.

The Choi matrix is ``C = sum_ij E_ij (x) Phi(E_ij)``, so block (i, j) of ``C``
is the image of the matrix unit ``E_ij``.  A Kraus list, when present, is a
certificate attached to the map and never the source of truth.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field as dc_field
from typing import Optional, Sequence

import numpy as np

from realmaps.errors import AlreadyComplexError, DimensionError
from realmaps.matkit import (
    BipartiteOperator,
    Field,
    bipartite_from_json,
    bipartite_to_json,
    hermitian_defect,
    matrix_from_json,
    matrix_to_json,
    partial_transpose_left,
    swap_operator,
    vec,
)

__all__ = [
    "Side",
    "LinearMapRep",
    "MapDiagnostics",
    "from_basis_images",
    "from_choi",
    "from_kraus",
    "from_function",
    "apply",
    "basis_images",
    "compose",
    "adjoint_map",
    "complexify",
    "tensor_with_identity",
    "iterate",
    "diagnostics",
    "identity_map",
    "transpose_map",
    "map_to_json",
    "map_from_json",
]


class Side(enum.Enum):
    LEFT = "left"
    RIGHT = "right"


@dataclass(frozen=True, eq=False)
class LinearMapRep:
    dim_in: int
    dim_out: int
    field: Field
    choi: BipartiteOperator
    kraus: Optional[tuple] = dc_field(default=None)

    def __post_init__(self):
        if self.choi.dim_left != self.dim_in or self.choi.dim_right != self.dim_out:
            raise DimensionError("Choi dimensions do not match the map dimensions")
        object.__setattr__(self, "field", Field.parse(self.field))
        if self.field is Field.COMPLEX and self.choi.field is Field.REAL:
            object.__setattr__(self, "choi", self.choi.as_complex())
        if self.field is Field.REAL and self.choi.field is Field.COMPLEX:
            raise ValueError("a REAL map needs a real Choi matrix")

    @property
    def choi_matrix(self) -> np.ndarray:
        return self.choi.matrix

    def __call__(self, x) -> np.ndarray:
        return apply(self, x)

    def __repr__(self) -> str:
        return f"LinearMapRep({self.dim_in}->{self.dim_out}, field={self.field.value})"


@dataclass
class MapDiagnostics:
    hermitian_choi_defect: float
    ipt_defect: float
    ppt_min_eigenvalue: float
    unital_defect: float
    trace_defect: float

    def to_json(self) -> dict:
        return {
            "hermitianChoiDefect": self.hermitian_choi_defect,
            "iptDefect": self.ipt_defect,
            "pptMinEigenvalue": None if np.isnan(self.ppt_min_eigenvalue) else self.ppt_min_eigenvalue,
            "unitalDefect": self.unital_defect,
            "traceDefect": self.trace_defect,
        }


def _infer_field(arrays, field) -> Field:
    if field is not None:
        return Field.parse(field)
    return Field.COMPLEX if any(np.iscomplexobj(a) for a in arrays) else Field.REAL


def from_choi(choi, dim_in: int, dim_out: int, field=None, kraus=None) -> LinearMapRep:
    arr = np.asarray(choi)
    f = _infer_field([arr], field)
    op = BipartiteOperator(dim_in, dim_out, f, arr)
    return LinearMapRep(dim_in, dim_out, f, op, None if kraus is None else tuple(kraus))


def from_basis_images(images, field=None) -> LinearMapRep:
    """Build a map from ``images[i][j] = Phi(E_ij)``."""
    imgs = np.asarray(images)
    if imgs.ndim != 4 or imgs.shape[0] != imgs.shape[1] or imgs.shape[2] != imgs.shape[3]:
        raise DimensionError("images must be an n x n array of m x m matrices")
    n, m = imgs.shape[0], imgs.shape[2]
    choi = imgs.transpose(0, 2, 1, 3).reshape(n * m, n * m)
    return from_choi(choi, n, m, _infer_field([imgs], field))


def from_kraus(kraus: Sequence, field=None) -> LinearMapRep:
    """The map ``X -> sum_i C_i X C_i*`` for m x n operators ``C_i``."""
    ops = [np.asarray(c) for c in kraus]
    if not ops:
        raise ValueError("Kraus list is empty")
    shape = ops[0].shape
    if len(shape) != 2 or any(c.shape != shape for c in ops):
        raise DimensionError("Kraus operators must share one m x n shape")
    m, n = shape
    f = _infer_field(ops, field)
    dtype = f.dtype
    choi = np.zeros((n * m, n * m), dtype=dtype)
    for c in ops:
        v = vec(c.T).astype(dtype)
        choi += np.outer(v, v.conj())
    return from_choi(choi, n, m, f, kraus=[c.astype(dtype) for c in ops])


def from_function(fn, dim_in: int, field=Field.REAL) -> LinearMapRep:
    """Tabulate a linear callable on the matrix units of M_n."""
    f = Field.parse(field)
    imgs = []
    for i in range(dim_in):
        row = []
        for j in range(dim_in):
            e = np.zeros((dim_in, dim_in), dtype=f.dtype)
            e[i, j] = 1
            row.append(np.atleast_2d(np.asarray(fn(e))))
        imgs.append(row)
    return from_basis_images(np.array(imgs), f)


def apply(phi: LinearMapRep, x) -> np.ndarray:
    x = np.asarray(x)
    if x.shape != (phi.dim_in, phi.dim_in):
        raise DimensionError(f"input must be {phi.dim_in}x{phi.dim_in}, got {x.shape}")
    if phi.field is Field.REAL and np.iscomplexobj(x) and np.any(x.imag != 0):
        raise ValueError("complex input to a REAL map; complexify it first")
    return np.einsum("ij,ikjl->kl", x, phi.choi.shape4)


def basis_images(phi: LinearMapRep) -> np.ndarray:
    """Array ``out[i, j] = Phi(E_ij)``."""
    return phi.choi.shape4.transpose(0, 2, 1, 3).copy()


def compose(phi: LinearMapRep, psi: LinearMapRep) -> LinearMapRep:
    """``phi o psi``: apply ``phi`` to every basis image of ``psi``."""
    if psi.dim_out != phi.dim_in:
        raise DimensionError("psi output dimension must equal phi input dimension")
    field = Field.COMPLEX if Field.COMPLEX in (phi.field, psi.field) else Field.REAL
    imgs = basis_images(psi)
    out = np.einsum("abkl,kxly->abxy", imgs, phi.choi.shape4)
    return from_basis_images(out, field)


def adjoint_map(phi: LinearMapRep) -> LinearMapRep:
    """The dual map with ``Tr(Phi(A) B) = Tr(A Phi*(B))``, via ``C* = S^t C^t S``."""
    n, m = phi.dim_in, phi.dim_out
    s = swap_operator(n, m)
    choi = s.T @ phi.choi.matrix.T @ s
    kraus = None
    if phi.kraus is not None:
        kraus = [c.conj().T for c in phi.kraus]
    return from_choi(choi, m, n, phi.field, kraus=kraus)


def complexify(phi: LinearMapRep) -> LinearMapRep:
    if phi.field is Field.COMPLEX:
        raise AlreadyComplexError("map is already complex")
    kraus = None if phi.kraus is None else [np.asarray(c, dtype=complex) for c in phi.kraus]
    return from_choi(phi.choi.matrix.astype(complex), phi.dim_in, phi.dim_out, Field.COMPLEX, kraus=kraus)


def tensor_with_identity(phi: LinearMapRep, r: int, side: Side | str = Side.RIGHT) -> LinearMapRep:
    """``Phi (x) id_r`` (side RIGHT) or ``id_r (x) Phi`` (side LEFT)."""
    if r < 1:
        raise DimensionError("r must be positive")
    side = Side(side) if not isinstance(side, Side) else side
    n, m = phi.dim_in, phi.dim_out
    imgs = basis_images(phi)  # [i, j, k, l]
    eye = np.eye(r)
    if side is Side.RIGHT:
        # image of E_ij (x) E_ab is Phi(E_ij) (x) E_ab
        out = np.einsum("ijkl,ac,bd->iajbkcld", imgs, eye, eye)
        out = out.reshape(n * r, n * r, m * r, m * r)
    else:
        out = np.einsum("ijkl,ac,bd->aibjckdl", imgs, eye, eye)
        out = out.reshape(n * r, n * r, m * r, m * r)
    return from_basis_images(out, phi.field)


def iterate(phi: LinearMapRep, k: int) -> LinearMapRep:
    if phi.dim_in != phi.dim_out:
        raise DimensionError("only maps M_n -> M_n can be iterated")
    if k < 1:
        raise ValueError("k must be >= 1")
    out = phi
    for _ in range(k - 1):
        out = compose(phi, out)
    return out


def identity_map(n: int, field=Field.REAL) -> LinearMapRep:
    return from_kraus([np.eye(n)], field)


def transpose_map(n: int, field=Field.REAL) -> LinearMapRep:
    f = Field.parse(field)
    imgs = np.zeros((n, n, n, n), dtype=f.dtype)
    for i in range(n):
        for j in range(n):
            imgs[i, j, j, i] = 1
    return from_basis_images(imgs, f)


def diagnostics(phi: LinearMapRep) -> MapDiagnostics:
    c = phi.choi
    herm = hermitian_defect(c.matrix)
    pt = partial_transpose_left(c).matrix
    ipt = float(np.linalg.norm(c.matrix - pt))
    if hermitian_defect(pt) <= 1e-12 * (1.0 + np.linalg.norm(pt)):
        ppt_min = float(np.linalg.eigvalsh(0.5 * (pt + pt.conj().T))[0])
    else:
        ppt_min = float("nan")
    unital = float("nan")
    if phi.dim_in == phi.dim_out:
        unital = float(np.linalg.norm(apply(phi, np.eye(phi.dim_in)) - np.eye(phi.dim_out)))
    traces = np.einsum("ikjk->ij", c.shape4)
    trace_defect = float(np.max(np.abs(traces - np.eye(phi.dim_in))))
    return MapDiagnostics(herm, ipt, ppt_min, unital, trace_defect)


# -- JSON ----------------------------------------------------------------------


def map_to_json(phi: LinearMapRep) -> dict:
    out = {
        "dimIn": phi.dim_in,
        "dimOut": phi.dim_out,
        "field": phi.field.value,
        "choi": bipartite_to_json(phi.choi),
    }
    if phi.kraus is not None:
        out["kraus"] = [matrix_to_json(c) for c in phi.kraus]
    return out


def map_from_json(obj: dict) -> LinearMapRep:
    try:
        n, m = int(obj["dimIn"]), int(obj["dimOut"])
        field = Field.parse(obj.get("field", "R"))
        choi_obj = obj["choi"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed map JSON: {exc}") from exc
    choi = bipartite_from_json(choi_obj)
    if (choi.dim_left, choi.dim_right) != (n, m):
        raise DimensionError("Choi factor dimensions disagree with dimIn/dimOut")
    kraus = None
    if obj.get("kraus"):
        kraus = [matrix_from_json(k) for k in obj["kraus"]]
        if any(k.shape != (m, n) for k in kraus):
            raise DimensionError("Kraus operators must be dimOut x dimIn")
    return from_choi(choi.matrix, n, m, field, kraus=kraus)

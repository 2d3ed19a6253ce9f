"""Frame sequences and frame-theoretic operations.

A :class:`FrameSeq` is an ordered, immutable sequence of equal-dimension
vectors over one scalar field.  Order matters everywhere in this package:
the generalized Gram-Schmidt pass processes vectors strictly in sequence,
so no operation here ever reorders.

All span-sensitive operations (``is_parseval``, ``canonical_parseval``,
``dependency_profile``) are *span-relative*: a Parseval frame for a proper
subspace passes verification against the projection onto its own span, not
against the ambient identity.  Inputs that do not span the ambient space
are therefore first-class citizens.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DimensionMismatchError, NonFiniteError
from .linalg import as_field_array

DEP_TOL = 1e-10       # relative residual below which a vector counts as dependent
ZERO_REL_TOL = 1e-12  # relative norm below which a vector counts as zero


@dataclass(frozen=True, eq=False)
class FrameSeq:
    """Ordered sequence of n vectors of dimension d, stored as the rows of
    an immutable (n, d) array."""

    vectors: np.ndarray

    def __post_init__(self):
        arr = as_field_array(self.vectors, "vectors")
        if arr.ndim != 2:
            raise DimensionMismatchError(
                f"vectors: expected a 2-d array of shape (n, dim), got shape {arr.shape}"
            )
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise DimensionMismatchError(f"vectors: empty axis in shape {arr.shape}")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "vectors", arr)

    @property
    def n_vectors(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    @property
    def field(self) -> str:
        return "complex" if np.iscomplexobj(self.vectors) else "real"

    def __len__(self) -> int:
        return self.n_vectors

    def __getitem__(self, i: int) -> np.ndarray:
        return self.vectors[i].copy()

    def __repr__(self) -> str:
        return f"FrameSeq(n={self.n_vectors}, dim={self.dim}, field='{self.field}')"

    def norms(self) -> np.ndarray:
        with np.errstate(over="ignore"):  # huge rows report inf, callers check
            return np.linalg.norm(self.vectors, axis=1)

    def to_dict(self) -> dict:
        """JSON-ready dict; complex entries become [re, im] pairs."""
        if self.field == "complex":
            vecs = [[[z.real, z.imag] for z in row] for row in self.vectors]
        else:
            vecs = [[float(x) for x in row] for row in self.vectors]
        return {"dim": self.dim, "field": self.field, "vectors": vecs}

    @classmethod
    def from_dict(cls, data: dict) -> "FrameSeq":
        """Parse the frame JSON schema: keys dim, field, vectors."""
        try:
            dim = int(data["dim"])
            field = data["field"]
            raw = data["vectors"]
        except (KeyError, TypeError) as exc:
            raise ValueError(f"frame dict missing or malformed key: {exc}") from exc
        if field == "complex":
            rows = [[complex(entry[0], entry[1]) for entry in row] for row in raw]
            arr = np.asarray(rows, dtype=np.complex128)
        elif field == "real":
            arr = np.asarray(raw, dtype=np.float64)
        else:
            raise ValueError(f"unknown field {field!r}; expected 'real' or 'complex'")
        if arr.ndim != 2 or arr.shape[1] != dim:
            raise ValueError(
                f"vectors shape {arr.shape} inconsistent with dim={dim}"
            )
        return cls(arr)


class FrameBounds(NamedTuple):
    """Optimal frame bounds: extreme eigenvalues of the frame operator."""

    lower: float
    upper: float


@dataclass(frozen=True)
class ParsevalCheck:
    ok: bool
    residual: float

    def __bool__(self) -> bool:
        return self.ok


def _check_member(frame: FrameSeq, f, name="f"):
    """Validate a vector against a frame's dimension and field; a real
    vector may enter a complex frame's space."""
    arr = as_field_array(f, name)
    if arr.ndim != 1 or arr.shape[0] != frame.dim:
        raise DimensionMismatchError(
            f"{name}: expected shape ({frame.dim},), got {arr.shape}"
        )
    if frame.field == "complex":
        arr = arr.astype(np.complex128, copy=False)
    elif np.iscomplexobj(arr):
        raise DimensionMismatchError(f"{name}: complex vector against a real frame")
    return arr


def frame_operator(frame: FrameSeq) -> np.ndarray:
    """The positive operator S = sum_i f_i f_i* as a (d, d) matrix."""
    V = frame.vectors
    return V.T @ V.conj()


def frame_bounds(frame: FrameSeq) -> FrameBounds:
    """Optimal bounds (A, B): smallest and largest eigenvalue of the frame
    operator.  A == 0 signals a sequence that does not span the ambient
    space."""
    from .linalg import hermitian_eigen

    w, _ = hermitian_eigen(frame_operator(frame))
    return FrameBounds(lower=max(float(w[0]), 0.0), upper=float(w[-1]))


def zero_indices(frame: FrameSeq, rel_tol: float = ZERO_REL_TOL) -> tuple[int, ...]:
    """1-based indices of vectors with norm at most ``rel_tol`` times the
    largest vector norm in the sequence (or 1 when all vectors vanish)."""
    norms = frame.norms()
    scale = norms.max()
    thresh = rel_tol * (scale if scale > 0.0 else 1.0)
    return tuple(int(i + 1) for i in np.flatnonzero(norms <= thresh))


def _span_basis(V: np.ndarray, dep_tol: float):
    """Sequential Gram-Schmidt factorization of the rows of ``V``.

    Returns ``(Q, dependent, zeros)`` where the rows of Q are an
    orthonormal basis of the row span, ``dependent`` lists the 1-based
    indices of nonzero rows falling within relative distance ``dep_tol``
    of the span of their predecessors, and ``zeros`` lists the (near-)zero
    rows.  One re-orthogonalization pass keeps Q orthonormal to roundoff.
    """
    n, d = V.shape
    with np.errstate(over="ignore"):
        norms = np.linalg.norm(V, axis=1)
    scale = norms.max()
    if not np.isfinite(scale):
        raise NonFiniteError("vector norm overflows")
    zthresh = ZERO_REL_TOL * (scale if scale > 0.0 else 1.0)
    Q = np.zeros((min(n, d), d), dtype=V.dtype)
    rank = 0
    dependent = []
    zeros = []
    for k in range(n):
        nf = norms[k]
        if nf <= zthresh:
            zeros.append(k + 1)
            continue
        f = V[k]
        if rank:
            B = Q[:rank]
            r = f - (B.conj() @ f) @ B
            r = r - (B.conj() @ r) @ B
        else:
            r = f.copy()
        rn = np.linalg.norm(r)
        if rn <= dep_tol * max(1.0, nf):
            dependent.append(k + 1)
        else:
            Q[rank] = r / rn
            rank += 1
    return Q[:rank], dependent, zeros


def dependency_profile(frame: FrameSeq, tol: float = DEP_TOL) -> tuple[int, ...]:
    """1-based indices of nonzero vectors lying (within relative residual
    ``tol``) in the span of their predecessors.  Zero vectors are not
    dependent; query them with :func:`zero_indices`."""
    _, dependent, _ = _span_basis(frame.vectors, tol)
    return tuple(dependent)


def span_projection(frame: FrameSeq, dep_tol: float = DEP_TOL) -> np.ndarray:
    """Orthogonal projection onto the span of the frame, as a (d, d)
    matrix."""
    Q, _, _ = _span_basis(frame.vectors, dep_tol)
    return Q.T @ Q.conj()


def is_parseval(frame: FrameSeq, tol: float = 1e-10, dep_tol: float = DEP_TOL) -> ParsevalCheck:
    """Whether the frame operator equals the projection onto the frame's
    own span within Frobenius distance ``tol``.

    Span-relative on purpose: a Parseval frame for a proper subspace
    verifies as Parseval.
    """
    S = frame_operator(frame)
    P = span_projection(frame, dep_tol)
    residual = float(np.linalg.norm(S - P))
    return ParsevalCheck(ok=residual <= tol, residual=residual)


def canonical_parseval(
    frame: FrameSeq, dep_tol: float = DEP_TOL, restrict_to_span: bool = True
) -> FrameSeq:
    """Map each vector through the inverse square root of the frame
    operator, yielding a Parseval frame with order preserved and zero
    vectors kept at zero.

    With ``restrict_to_span`` (the default) the operator is inverted on
    the span of the frame, so non-spanning inputs work; with it disabled,
    the ambient operator is inverted and a non-spanning input raises
    :class:`~framegs.errors.RankDeficientError`.
    """
    from .linalg import inv_sqrt

    V = frame.vectors
    if restrict_to_span:
        Q, _, _ = _span_basis(V, dep_tol)
        rank = Q.shape[0]
        if rank == 0:
            return FrameSeq(V)  # all-zero sequence maps to itself
        coords = V @ Q.conj().T                  # (n, rank)
        S = coords.T @ coords.conj()             # operator on span coordinates
        R = inv_sqrt(S)
        return FrameSeq((coords @ R.conj()) @ Q)
    R = inv_sqrt(frame_operator(frame))
    return FrameSeq(V @ R.conj())


def reconstruct(frame: FrameSeq, f) -> np.ndarray:
    """Analysis-then-synthesis sum ``sum_i <f, f_i> f_i``, i.e. the frame
    operator applied to ``f``.  Recovers ``f`` itself exactly when the
    frame is Parseval for a space containing ``f``."""
    arr = _check_member(frame, f)
    return frame_operator(frame) @ arr


def l2_distance(a: FrameSeq, b: FrameSeq) -> float:
    """Distance sqrt(sum_i ||a_i - b_i||^2) between two equal-shape frame
    sequences."""
    if a.vectors.shape != b.vectors.shape:
        raise DimensionMismatchError(
            f"frame shapes differ: {a.vectors.shape} vs {b.vectors.shape}"
        )
    return float(np.linalg.norm(a.vectors - b.vectors))

"""One pass of the generalized Gram-Schmidt procedure.

The pass walks the input vectors in order.  A vector independent of its
predecessors is orthogonalized and normalized exactly as in classical
Gram-Schmidt.  A dependent vector f is not discarded: every previously
produced vector g_i receives the rank-one correction

    g_i  +=  (1/||f||^2) * (1/sqrt(1 + ||f||^2) - 1) * <g_i, f> * f

and f itself enters the output as f / sqrt(1 + ||f||^2).  Zero vectors
pass through as zero.  The output is always a Parseval frame for the span
of the input.

Inner products are linear in the first argument and conjugate-linear in
the second.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatchError, NonFiniteError
from .frames import DEP_TOL, ZERO_REL_TOL, FrameSeq, _check_member
from .linalg import as_field_array

KIND_ZERO = "zero"
KIND_INDEPENDENT = "independent"
KIND_DEPENDENT = "dependent"


@dataclass(frozen=True)
class DependentUpdateRecord:
    """Effect of one dependent-vector correction on one earlier output
    vector: its norm before and after, the magnitude of its inner product
    with the dependent vector f, and ||f|| itself."""

    index: int          # 1-based position of the updated vector
    norm_before: float
    norm_after: float
    inner_abs: float    # |<g_i, f>| prior to the update
    carrier_norm: float  # ||f|| for the dependent vector driving the update


@dataclass(frozen=True)
class StepTrace:
    """State after processing one input vector.

    ``snapshot`` holds the first ``step`` output vectors; ``updates`` is
    nonempty only for dependent steps.
    """

    step: int           # 1-based
    kind: str           # KIND_ZERO | KIND_INDEPENDENT | KIND_DEPENDENT
    snapshot: FrameSeq
    updates: tuple[DependentUpdateRecord, ...] = field(default_factory=tuple)


def _apply_dependent_update(G: np.ndarray, k: int, f: np.ndarray, nf: float):
    """In-place dependent-branch update of rows G[:k] followed by the
    assignment of row k.  Returns the coefficients <g_i, f>."""
    nf2 = nf * nf
    shrink = 1.0 / math.sqrt(1.0 + nf2)
    cfac = (shrink - 1.0) / nf2
    w = (G[:k].conj() @ f).conj()          # w[i] = <g_i, f>
    G[:k] += (cfac * w)[:, None] * f[None, :]
    G[k] = shrink * f
    return w


def _pass_array(V: np.ndarray, dep_tol: float, on_step=None) -> np.ndarray:
    """Array-level pass kernel.  ``on_step(k0, kind, G, w, before)`` is
    called after each step when given; ``w``/``before`` are set only on
    dependent steps."""
    n, _ = V.shape
    G = np.zeros_like(V)
    with np.errstate(over="ignore"):  # overflow is caught explicitly below
        in_norms = np.linalg.norm(V, axis=1)
    scale = in_norms.max()
    if not math.isfinite(scale):
        bad = int(np.flatnonzero(~np.isfinite(in_norms))[0]) + 1
        raise NonFiniteError(f"step {bad}: input vector norm is not finite")
    zthresh = ZERO_REL_TOL * (scale if scale > 0.0 else 1.0)
    for k in range(n):
        f = V[k]
        nf = in_norms[k]
        if nf <= zthresh:
            if on_step is not None:
                on_step(k, KIND_ZERO, G, None, None)
            continue
        prefix = G[:k]
        coeffs = prefix.conj() @ f          # coeffs[j] = <f, g_j>
        g = f - coeffs @ prefix
        rn = np.linalg.norm(g)
        if not math.isfinite(rn):
            raise NonFiniteError(f"step {k + 1}: residual norm is not finite")
        if rn > dep_tol * max(1.0, nf):
            G[k] = g / rn
            if on_step is not None:
                on_step(k, KIND_INDEPENDENT, G, None, None)
        else:
            if not math.isfinite(nf * nf):
                raise NonFiniteError(f"step {k + 1}: squared norm overflows")
            before = np.linalg.norm(prefix, axis=1) if on_step is not None else None
            w = _apply_dependent_update(G, k, f, nf)
            if on_step is not None:
                on_step(k, KIND_DEPENDENT, G, w, before)
    return G


def ggs_pass(
    frame: FrameSeq, dep_tol: float = DEP_TOL, trace: bool = False
) -> tuple[FrameSeq, tuple[StepTrace, ...]]:
    """Run one full pass over ``frame``.

    Parameters
    ----------
    frame : FrameSeq
        Input vectors, processed in order.
    dep_tol : float
        A nonzero vector whose residual against the span of the previous
        outputs is at most ``dep_tol * max(1, ||f_k||)`` takes the
        dependent branch.  At exactly the threshold the branch is
        dependent.
    trace : bool
        When true, record a :class:`StepTrace` per input vector; the cost
        is one prefix copy per step.

    Returns
    -------
    (FrameSeq, tuple[StepTrace, ...])
        The output frame (same shape and field as the input) and the
        per-step traces (empty tuple unless ``trace``).
    """
    if not isinstance(frame, FrameSeq):
        frame = FrameSeq(frame)
    if not (0.0 <= dep_tol < 1.0):
        raise ValueError(f"dep_tol must lie in [0, 1), got {dep_tol}")
    traces: list[StepTrace] = []
    on_step = None
    if trace:
        def on_step(k, kind, G, w, before):
            updates = ()
            if kind == KIND_DEPENDENT:
                after = np.linalg.norm(G[:k], axis=1)
                nf = float(np.linalg.norm(frame.vectors[k]))
                updates = tuple(
                    DependentUpdateRecord(
                        index=j + 1,
                        norm_before=float(before[j]),
                        norm_after=float(after[j]),
                        inner_abs=float(abs(w[j])),
                        carrier_norm=nf,
                    )
                    for j in range(k)
                )
            traces.append(
                StepTrace(step=k + 1, kind=kind, snapshot=FrameSeq(G[: k + 1]), updates=updates)
            )

    G = _pass_array(frame.vectors, dep_tol, on_step)
    return FrameSeq(G), tuple(traces)


def dependent_update(prefix: FrameSeq, f) -> FrameSeq:
    """Apply the dependent-branch correction for vector ``f`` to every
    vector of ``prefix``, then append f / sqrt(1 + ||f||^2).

    ``f`` must be nonzero; callers route zero vectors to the zero branch
    themselves.  Whether f actually lies in the span of ``prefix`` is not
    checked here: the formula is defined regardless, the pass only
    *applies* it in the dependent case.
    """
    arr = _check_member(prefix, f)
    nf = float(np.linalg.norm(arr))
    scale = max(float(prefix.norms().max()), nf)
    if nf <= ZERO_REL_TOL * (scale if scale > 0.0 else 1.0):
        raise ValueError("dependent_update requires a nonzero vector f")
    if not math.isfinite(nf * nf):
        raise NonFiniteError("dependent_update: squared norm overflows")
    k = len(prefix)
    G = np.zeros((k + 1, prefix.dim), dtype=np.promote_types(prefix.vectors.dtype, arr.dtype))
    G[:k] = prefix.vectors
    _apply_dependent_update(G, k, arr.astype(G.dtype, copy=False), nf)
    return FrameSeq(G)


def norm_drop(g, f) -> float:
    """Squared norm of g after a dependent update driven by f:

        ||g||^2 - |<g, f>|^2 / (1 + ||f||^2)

    evaluated without forming the updated vector.
    """
    g = as_field_array(g, "g")
    f = as_field_array(f, "f")
    if g.shape != f.shape or g.ndim != 1:
        raise DimensionMismatchError(
            f"g and f must be vectors of equal dimension, got {g.shape} and {f.shape}"
        )
    nf2 = float(np.linalg.norm(f)) ** 2
    ip = complex(np.dot(g, f.conj()))
    return float(np.linalg.norm(g)) ** 2 - abs(ip) ** 2 / (1.0 + nf2)

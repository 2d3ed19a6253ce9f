"""Iteration of the pass map and validation of its decay laws.

Repeatedly applying the pass, G_{m+1} = Phi(G_m), drives every vector
that was dependent in the initial frame toward zero at a Theta(1/sqrt(m))
rate while the independent ones settle into an orthonormal set.  The
driver here records norms every iteration (they are cheap and feed all
the validators) and full snapshots on a configurable stride.

Stopping is purely empirical: iteration halts when the l2 step distance
falls below a threshold.  That is reported as stationarity, not as
convergence of the full sequence, which this machinery does not claim.
"""

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import NonFiniteError
from .frames import (
    DEP_TOL,
    FrameSeq,
    dependency_profile,
    l2_distance,
    zero_indices,
)
from .ggs import KIND_DEPENDENT, KIND_ZERO, StepTrace, _pass_array, ggs_pass
from .linalg import as_field_array


@dataclass(frozen=True)
class IterationTrace:
    """Record of a run G_0 -> G_1 -> ... -> G_M.

    ``norms`` has shape (M+1, n): row m holds the vector norms of G_m.
    ``snapshots`` maps iteration number to the frame at that point;
    0 and M are always present, intermediate iterations appear on the
    snapshot stride.  ``step_traces`` (present only when requested) maps
    iteration number m >= 1 to the per-step traces of the pass that
    produced G_m.
    """

    initial: FrameSeq
    norms: np.ndarray
    deltas: np.ndarray
    snapshots: dict[int, FrameSeq]
    step_traces: dict[int, tuple[StepTrace, ...]] | None
    dependent_indices: tuple[int, ...]
    input_zero_indices: tuple[int, ...]
    iterations_run: int
    stationary: bool
    eps_delta: float
    dep_tol: float

    @property
    def final(self) -> FrameSeq:
        return self.snapshots[self.iterations_run]

    @property
    def stopped_early(self) -> bool:
        return bool(self.deltas.size) and self.deltas[-1] <= self.eps_delta

    @cached_property
    def n_vectors(self) -> int:
        return self.initial.n_vectors


@dataclass(frozen=True)
class StabilizationCheck:
    """Outcome of the last-vector stabilization test.  ``applicable`` is
    False when the last input vector is zero or dependent, in which case
    the other fields are None."""

    applicable: bool
    ok: bool | None = None
    residual: float | None = None


@dataclass(frozen=True)
class RecurrenceReport:
    """Maximum violations of the per-step norm laws over a traced run.

    Floors and the ceiling report signed violations (positive means the
    bound failed by that much); the update identity reports an absolute
    error.  Fields are 0.0 when the corresponding check had nothing to
    measure.
    """

    update_identity: float
    single_step_floor: float
    accumulated_floor: float
    shrink_ceiling: float
    tail_floor: float
    iterations_checked: int
    pattern_consistent: bool

    @property
    def max_violation(self) -> float:
        return max(
            self.update_identity,
            self.single_step_floor,
            self.accumulated_floor,
            self.shrink_ceiling,
            self.tail_floor,
        )


@dataclass(frozen=True)
class LimitReport:
    """Classification of an iteration endpoint as a zero-extended
    orthonormal basis.  ``converged`` means the surviving vectors are
    orthonormal within ``delta_onb``; it is an empirical statement about
    the final iterate only."""

    converged: bool
    iterations_run: int
    zero_indices: tuple[int, ...]
    surviving_indices: tuple[int, ...]
    onb_residual: float
    prediction_match: bool
    delta_zero: float
    delta_onb: float


def iterate(
    frame: FrameSeq,
    max_iter: int = 1000,
    eps_delta: float = 1e-12,
    snapshot_stride: int = 1,
    dep_tol: float = DEP_TOL,
    trace_steps: bool = False,
) -> IterationTrace:
    """Apply the pass repeatedly, stopping at ``max_iter`` or as soon as
    the l2 distance between consecutive frames is at most ``eps_delta``.

    Norms are recorded every iteration; full snapshots every
    ``snapshot_stride`` iterations (plus iteration 0 and the final one).
    ``trace_steps`` additionally stores per-step traces for every
    iteration, as required by :func:`validate_recurrences`.
    """
    if not isinstance(frame, FrameSeq):
        frame = FrameSeq(frame)
    if max_iter < 1:
        raise ValueError(f"max_iter must be >= 1, got {max_iter}")
    if snapshot_stride < 1:
        raise ValueError(f"snapshot_stride must be >= 1, got {snapshot_stride}")
    if eps_delta < 0.0:
        raise ValueError(f"eps_delta must be >= 0, got {eps_delta}")

    try:
        deps = dependency_profile(frame, dep_tol)
    except NonFiniteError as exc:
        raise NonFiniteError(f"input frame: {exc}") from exc
    zeros = zero_indices(frame)
    norms = [frame.norms()]
    deltas: list[float] = []
    snapshots: dict[int, FrameSeq] = {0: frame}
    step_traces: dict[int, tuple[StepTrace, ...]] | None = {} if trace_steps else None

    prev = frame.vectors
    m = 0
    stationary = False
    for m in range(1, max_iter + 1):
        if trace_steps:
            cur_frame, traces = ggs_pass(FrameSeq(prev), dep_tol, trace=True)
            step_traces[m] = traces
            cur = cur_frame.vectors
        else:
            try:
                cur = _pass_array(prev, dep_tol)
            except NonFiniteError as exc:
                raise NonFiniteError(f"iteration {m}: {exc}") from exc
        delta = float(np.linalg.norm(cur - prev))
        if not math.isfinite(delta):
            raise NonFiniteError(f"iteration {m}: non-finite state")
        norms.append(np.linalg.norm(cur, axis=1))
        deltas.append(delta)
        if m % snapshot_stride == 0:
            snapshots[m] = FrameSeq(cur)
        prev = cur
        if delta <= eps_delta:
            stationary = True
            break
    if m not in snapshots:
        snapshots[m] = FrameSeq(prev)

    return IterationTrace(
        initial=frame,
        norms=np.asarray(norms),
        deltas=np.asarray(deltas),
        snapshots=snapshots,
        step_traces=step_traces,
        dependent_indices=deps,
        input_zero_indices=zeros,
        iterations_run=m,
        stationary=stationary,
        eps_delta=eps_delta,
        dep_tol=dep_tol,
    )


def closed_form_last_dependent(f, m: int) -> np.ndarray:
    """Predicted m-th iterate of the LAST dependent vector:
    f / sqrt(1 + m * ||f||^2).  Valid only at that index; earlier
    dependent vectors also receive corrections from later steps and do
    not follow this formula."""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    arr = as_field_array(f, "f")
    nf2 = float(np.linalg.norm(arr)) ** 2
    if nf2 == 0.0:
        raise ValueError("closed_form_last_dependent requires a nonzero vector")
    return arr / math.sqrt(1.0 + m * nf2)


def check_stabilized_last(
    frame: FrameSeq, trace: IterationTrace, tol: float = 1e-10
) -> StabilizationCheck:
    """When the last input vector is independent of its predecessors,
    verify that its iterates never move: g_n^{(m)} equals g_n^{(1)} for
    every recorded m >= 1, and both equal the normalized component of f_n
    orthogonal to span{f_1, ..., f_{n-1}}."""
    from .frames import _span_basis

    n = len(frame)
    if n in trace.dependent_indices or n in trace.input_zero_indices:
        return StabilizationCheck(applicable=False)

    f_n = frame.vectors[n - 1]
    if n == 1:
        r = f_n.copy()
    else:
        Q, _, _ = _span_basis(frame.vectors[: n - 1], trace.dep_tol)
        r = f_n - (Q.conj() @ f_n) @ Q
        r = r - (Q.conj() @ r) @ Q
    expected = r / np.linalg.norm(r)

    recorded = sorted(m for m in trace.snapshots if m >= 1)
    residual = 0.0
    baseline = None
    for m in recorded:
        g = trace.snapshots[m].vectors[n - 1]
        if baseline is None:
            baseline = g
        residual = max(
            residual,
            float(np.linalg.norm(g - expected)),
            float(np.linalg.norm(g - baseline)),
        )
    return StabilizationCheck(applicable=True, ok=residual <= tol, residual=residual)


def _record_for(step: StepTrace, index: int):
    # updates cover every earlier row in order, so row `index` sits at
    # position index - 1
    return step.updates[index - 1]


def validate_recurrences(trace: IterationTrace) -> RecurrenceReport:
    """Check the norm evolution laws on a per-step traced run.

    For each iteration m with previous-iterate norms x_l = ||g_{k_l}^{(m-1)}||^2
    at the dependent indices k_1 < ... < k_s:

    * update identity: after the dependent step at k_r updates row i,
      new_norm^2 == old_norm^2 - |<g_i, f>|^2 / (1 + ||f||^2) exactly;
    * single-step floor: after step k_{l+1}, row k_l retains at least
      [x_l/(1+x_l)] / (1+x_{l+1});
    * accumulated floor: at the end of the pass, row k_l retains at least
      [x_l/(1+x_l)] * prod_{r>l} 1/(1+x_r);
    * shrink ceiling: at the end of the pass, row k_l holds at most
      x_l/(1+x_l) (equality at l = s);
    * tail floor: the accumulated floor specialized to l = s-1, where the
      product collapses to the single factor 1/(1+x_s).

    Returns the maximum violation seen for each law.
    """
    if trace.step_traces is None or not trace.step_traces:
        raise ValueError("validate_recurrences requires a trace with per-step data")

    deps = trace.dependent_indices
    zeros = set(trace.input_zero_indices)
    s = len(deps)
    upd_err: list[float] = []
    single: list[float] = []
    accum: list[float] = []
    ceil: list[float] = []
    tail: list[float] = []
    pattern_consistent = True

    for m, steps in sorted(trace.step_traces.items()):
        prev = trace.norms[m - 1]
        cur = trace.norms[m]
        kinds = {st.step: st.kind for st in steps}
        expected_dep = set(deps)
        actual_dep = {k for k, kd in kinds.items() if kd == KIND_DEPENDENT}
        actual_zero = {k for k, kd in kinds.items() if kd == KIND_ZERO}
        if actual_dep != expected_dep or actual_zero != zeros:
            pattern_consistent = False
            continue

        for st in steps:
            if st.kind != KIND_DEPENDENT:
                continue
            nf2 = prev[st.step - 1] ** 2
            for rec in st.updates:
                predicted = rec.norm_before**2 - rec.inner_abs**2 / (1.0 + nf2)
                upd_err.append(abs(rec.norm_after**2 - predicted))

        x = [prev[k - 1] ** 2 for k in deps]
        for l in range(s):
            floor_l = x[l] / (1.0 + x[l])
            measured_end = cur[deps[l] - 1] ** 2
            ceil.append(measured_end - floor_l)
            bound = floor_l
            for r in range(l + 1, s):
                bound /= 1.0 + x[r]
            accum.append(bound - measured_end)
            if l + 1 < s:
                st_next = steps[deps[l + 1] - 1]
                after_next = _record_for(st_next, deps[l]).norm_after ** 2
                single.append(floor_l / (1.0 + x[l + 1]) - after_next)
            if l == s - 2:
                eps_val = x[s - 1]
                tail.append(floor_l / (1.0 + eps_val) - measured_end)

    def top(vals: list[float]) -> float:
        return max(vals) if vals else 0.0

    return RecurrenceReport(
        update_identity=top(upd_err),
        single_step_floor=top(single),
        accumulated_floor=top(accum),
        shrink_ceiling=top(ceil),
        tail_floor=top(tail),
        iterations_checked=len(trace.step_traces),
        pattern_consistent=pattern_consistent,
    )


def classify_limit(
    trace: IterationTrace,
    delta_zero: float | None = None,
    delta_onb: float = 1e-2,
) -> LimitReport:
    """Classify the final iterate as a zero-extended orthonormal basis.

    ``delta_zero`` defaults to 2/sqrt(M): the vanishing indices decay
    like 1/sqrt(m), so any iteration-count-blind threshold would
    misclassify at small M.  The default is capped at 1/2 because a run
    that goes stationary after very few iterations sits at a fixed point
    whose norms cluster at 0 and 1; without the cap every vector of an
    orthonormal input would count as zero.  ``prediction_match`` compares
    the observed zero set against the dependent indices of the initial
    frame together with its zero vectors.
    """
    M = trace.iterations_run
    if delta_zero is None:
        delta_zero = min(2.0 / math.sqrt(M), 0.5)
    final = trace.final
    final_norms = trace.norms[M]
    zero_idx = tuple(int(i + 1) for i in np.flatnonzero(final_norms <= delta_zero))
    zero_set = set(zero_idx)
    surviving = tuple(k for k in range(1, final_norms.shape[0] + 1) if k not in zero_set)
    if surviving:
        Gs = final.vectors[[k - 1 for k in surviving]]
        gram = Gs @ Gs.conj().T
        onb_residual = float(np.max(np.abs(gram - np.eye(len(surviving)))))
    else:
        onb_residual = 0.0
    predicted = tuple(sorted(set(trace.dependent_indices) | set(trace.input_zero_indices)))
    return LimitReport(
        converged=onb_residual <= delta_onb,
        iterations_run=M,
        zero_indices=zero_idx,
        surviving_indices=surviving,
        onb_residual=onb_residual,
        prediction_match=zero_idx == predicted,
        delta_zero=delta_zero,
        delta_onb=delta_onb,
    )


def is_fixed_point(frame: FrameSeq, tol: float = 1e-10, dep_tol: float = DEP_TOL) -> bool:
    """Whether one pass moves the frame by at most ``tol`` in l2 distance.
    The fixed points are exactly the zero-extended orthonormal bases."""
    out, _ = ggs_pass(frame, dep_tol)
    return l2_distance(out, frame) <= tol


def trace_to_dict(trace: IterationTrace) -> dict:
    """JSON-ready summary of a run: metadata, per-iteration norms and
    deltas, and the recorded snapshots keyed by iteration number."""
    initial = trace.initial
    return {
        "n_vectors": initial.n_vectors,
        "dim": initial.dim,
        "field": initial.field,
        "iterations_run": trace.iterations_run,
        "stationary": trace.stationary,
        "eps_delta": trace.eps_delta,
        "dep_tol": trace.dep_tol,
        "dependent_indices": list(trace.dependent_indices),
        "input_zero_indices": list(trace.input_zero_indices),
        "deltas": [float(d) for d in trace.deltas],
        "norms": [[float(x) for x in row] for row in trace.norms],
        "snapshots": {
            str(m): trace.snapshots[m].to_dict()["vectors"]
            for m in sorted(trace.snapshots)
        },
    }


def trace_csv_rows(trace: IterationTrace) -> tuple[list[str], list[list]]:
    """Tabular view of a run: one row per (iteration, vector).

    Columns: iteration, vector_index, norm, then coordinates.  Real
    frames get coord_1..coord_d; complex frames get coord_j_re/coord_j_im
    pairs.  Coordinate cells are empty for iterations without a recorded
    snapshot.
    """
    d = trace.initial.dim
    complex_field = trace.initial.field == "complex"
    if complex_field:
        coord_cols = [f"coord_{j}_{part}" for j in range(1, d + 1) for part in ("re", "im")]
    else:
        coord_cols = [f"coord_{j}" for j in range(1, d + 1)]
    header = ["iteration", "vector_index", "norm", *coord_cols]
    rows: list[list] = []
    n = trace.initial.n_vectors
    for m in range(trace.iterations_run + 1):
        snap = trace.snapshots.get(m)
        for i in range(n):
            row: list = [m, i + 1, float(trace.norms[m][i])]
            if snap is None:
                row.extend([""] * len(coord_cols))
            elif complex_field:
                for z in snap.vectors[i]:
                    row.extend([z.real, z.imag])
            else:
                row.extend(float(x) for x in snap.vectors[i])
            rows.append(row)
    return header, rows

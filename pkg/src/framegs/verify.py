"""Self-contained verification battery behind the ``verify`` CLI command.

Each check is independent, seeded, and reports the worst measured value
against its threshold.  The battery exercises the pass, the iteration
driver, and the validators against each other and against independent
constructions (classical Gram-Schmidt, the canonical Parseval map,
closed-form decay).
"""

import math
from dataclasses import dataclass

import numpy as np

from .frames import (
    FrameSeq,
    canonical_parseval,
    dependency_profile,
    is_parseval,
    l2_distance,
    zero_indices,
)
from .generate import (
    example_frame,
    random_frame_corpus,
    random_independent_frame,
    random_onb_frame,
)
from .ggs import KIND_DEPENDENT, ggs_pass
from .iteration import (
    check_stabilized_last,
    classify_limit,
    iterate,
    validate_recurrences,
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float
    threshold: float
    op: str  # "<=" or ">"
    ok: bool
    detail: str = ""


def _result(name, value, threshold, op="<=", extra_ok=True, detail="") -> CheckResult:
    if op == "<=":
        ok = value <= threshold
    elif op == ">":
        ok = value > threshold
    else:
        raise ValueError(f"unknown op {op!r}")
    return CheckResult(name, float(value), threshold, op, ok and extra_ok, detail)


def _classical_gram_schmidt(V: np.ndarray) -> np.ndarray:
    # plain sequential orthonormalization; all rows assumed independent
    G = np.zeros_like(V)
    for k in range(V.shape[0]):
        r = V[k] - (G[:k].conj() @ V[k]) @ G[:k]
        G[k] = r / np.linalg.norm(r)
    return G


def _near_dependence_frames(seed) -> list[tuple[FrameSeq, tuple[int, ...]]]:
    """Frames with one vector a small but resolvable distance (1e-3 to
    1e-5) outside the span of its predecessors, plus one exactly
    dependent vector.  The designed profile is (4,); any coarser
    dependence tolerance misroutes vector 3 and breaks both the profile
    and the Parseval property of the pass output."""
    rng = np.random.default_rng(seed)
    out = []
    for gap in (1e-3, 1e-4, 1e-5):
        Q, _ = np.linalg.qr(rng.standard_normal((4, 4)))
        q0, q1, q2 = Q[:, 0], Q[:, 1], Q[:, 2]
        v = (q0 + q1) / math.sqrt(2.0) + gap * q2
        u = 0.7 * q0 - 0.2 * q1
        out.append((FrameSeq(np.stack([q0, q1, v, u])), (4,)))
    return out


def check_single_pass_parseval(seed, n_frames, dep_tol) -> CheckResult:
    worst = 0.0
    for F in random_frame_corpus(seed, n_frames):
        G, _ = ggs_pass(F, dep_tol)
        worst = max(worst, is_parseval(G, dep_tol=dep_tol).residual)
    return _result("single_pass_parseval", worst, 1e-10, detail=f"{n_frames} frames")


def check_prefix_parseval(seed, n_frames, dep_tol) -> CheckResult:
    worst = 0.0
    for F in random_frame_corpus(seed + 1, n_frames):
        _, traces = ggs_pass(F, dep_tol, trace=True)
        for st in traces:
            worst = max(worst, is_parseval(st.snapshot, dep_tol=dep_tol).residual)
    return _result("prefix_parseval", worst, 1e-10, detail=f"{n_frames} frames, all steps")


def check_dependent_oracle(seed, n_frames, dep_tol) -> CheckResult:
    # every dependent step must equal the canonical Parseval map applied
    # to (previous outputs + the incoming vector)
    worst = 0.0
    steps = 0
    for F in random_frame_corpus(seed + 2, n_frames, dependent_fraction=0.8):
        _, traces = ggs_pass(F, dep_tol, trace=True)
        for st in traces:
            if st.kind != KIND_DEPENDENT:
                continue
            k = st.step
            prev = traces[k - 2].snapshot.vectors if k >= 2 else np.zeros((0, F.dim))
            ext = FrameSeq(np.vstack([prev, F.vectors[k - 1][None, :]]))
            oracle = canonical_parseval(ext, dep_tol=dep_tol)
            diff = np.linalg.norm(st.snapshot.vectors - oracle.vectors, axis=1)
            worst = max(worst, float(diff.max()))
            steps += 1
    return _result("dependent_oracle_match", worst, 1e-10, detail=f"{steps} dependent steps")


def check_onb_fixed_points(seed, n_frames, dep_tol) -> CheckResult:
    rng = np.random.default_rng(seed + 3)
    worst = 0.0
    for _ in range(n_frames):
        d = int(rng.integers(2, 9))
        F = random_onb_frame(rng, d, n_zeros=int(rng.integers(0, 4)),
                             field="complex" if rng.random() < 0.5 else "real")
        G, _ = ggs_pass(F, dep_tol)
        worst = max(worst, l2_distance(G, F))
    return _result("onb_fixed_points", worst, 1e-12, detail=f"{n_frames} zero-extended ONBs")


def check_non_onb_movement(seed, n_frames, dep_tol) -> CheckResult:
    least = math.inf
    for F in random_frame_corpus(seed + 4, n_frames):
        G, _ = ggs_pass(F, dep_tol)
        least = min(least, l2_distance(G, F))
    return _result("non_onb_movement", least, 1e-6, op=">", detail=f"{n_frames} generic frames")


def check_last_vector_stabilization(seed, n_frames, dep_tol) -> CheckResult:
    # frames whose predecessors live in a proper subspace while the last
    # vector has a guaranteed component outside it
    rng = np.random.default_rng(seed + 5)
    worst = 0.0
    bad = 0
    for _ in range(n_frames):
        d = int(rng.integers(2, 7))
        n = int(rng.integers(2, 12))
        Q, _ = np.linalg.qr(rng.standard_normal((d, d)))
        sub = Q[:, : d - 1]
        V = rng.standard_normal((n, d - 1)) @ sub.T
        last = rng.standard_normal(d - 1) @ sub.T + (0.5 + rng.random()) * Q[:, d - 1]
        F = FrameSeq(np.vstack([V, last[None, :]]))
        tr = iterate(F, max_iter=20, eps_delta=0.0, dep_tol=dep_tol)
        chk = check_stabilized_last(F, tr)
        if not chk.applicable:
            bad += 1
            continue
        worst = max(worst, chk.residual)
    return _result(
        "last_vector_stabilization",
        worst,
        1e-10,
        extra_ok=bad == 0,
        detail=f"{n_frames} frames, 20 iterations" + (f", {bad} inapplicable" if bad else ""),
    )


def check_closed_form_decay(max_iter=1000) -> CheckResult:
    tr = iterate(example_frame("fig1"), max_iter=max_iter, eps_delta=0.0, snapshot_stride=max_iter)
    worst = max(
        abs(tr.norms[m][2] * math.sqrt(1.0 + m) - 1.0) for m in range(1, tr.iterations_run + 1)
    )
    return _result("closed_form_decay", worst, 1e-8, detail=f"fig1, {max_iter} iterations")


def check_recurrences() -> CheckResult:
    worst = 0.0
    consistent = True
    for name in ("fig1", "fig3"):
        tr = iterate(example_frame(name), max_iter=50, eps_delta=0.0, trace_steps=True)
        rep = validate_recurrences(tr)
        worst = max(worst, rep.max_violation)
        consistent = consistent and rep.pattern_consistent
    return _result(
        "recurrence_battery", worst, 1e-12, extra_ok=consistent,
        detail="fig1 + fig3, 50 iterations each",
    )


def check_limit_classification(max_iter, delta_onb, dep_tol) -> CheckResult:
    worst_resid = 0.0
    worst_l2 = 0.0
    mismatches = []
    for name in ("fig1", "fig2", "fig3"):
        tr = iterate(example_frame(name), max_iter=max_iter, eps_delta=0.0,
                     snapshot_stride=max_iter, dep_tol=dep_tol)
        rep = classify_limit(tr, delta_onb=delta_onb)
        if not rep.prediction_match:
            mismatches.append(name)
        worst_resid = max(worst_resid, rep.onb_residual)
        sums = (tr.norms[1:] ** 2).sum(axis=1)
        worst_l2 = max(worst_l2, float(np.max(np.abs(sums - 2.0))))
    ok = not mismatches and worst_l2 <= 1e-9
    detail = f"fig1 fig2 fig3 at M={max_iter}; l2 identity off by {worst_l2:.2e}"
    if mismatches:
        detail += f"; zero-pattern mismatch: {','.join(mismatches)}"
    return _result("limit_classification", worst_resid, delta_onb, extra_ok=ok, detail=detail)


def check_gram_schmidt_degeneration(seed, n_frames, dep_tol) -> CheckResult:
    rng = np.random.default_rng(seed + 6)
    worst = 0.0
    for _ in range(n_frames):
        d = int(rng.integers(2, 9))
        n = int(rng.integers(1, d + 1))
        F = random_independent_frame(rng, d, n, "complex" if rng.random() < 0.5 else "real")
        G, _ = ggs_pass(F, dep_tol)
        worst = max(worst, float(np.linalg.norm(G.vectors - _classical_gram_schmidt(F.vectors))))
    return _result(
        "gram_schmidt_degeneration", worst, 1e-12, detail=f"{n_frames} independent sequences"
    )


def check_zero_pattern_prediction(seed, n_frames, max_iter, dep_tol) -> CheckResult:
    mismatches = 0
    for F in random_frame_corpus(seed + 7, n_frames, dependent_fraction=1.0):
        tr = iterate(F, max_iter=max_iter, eps_delta=0.0, snapshot_stride=max_iter, dep_tol=dep_tol)
        if not classify_limit(tr).prediction_match:
            mismatches += 1
    return _result(
        "zero_pattern_prediction", float(mismatches), 0.0,
        detail=f"{n_frames} frames with forced dependencies, M={max_iter}",
    )


def check_near_dependence_routing(seed, dep_tol) -> CheckResult:
    worst = 0.0
    misrouted = []
    for F, designed in _near_dependence_frames(seed + 8):
        prof = dependency_profile(F, dep_tol)
        if prof != designed:
            misrouted.append(f"{designed}->{prof}")
        G, _ = ggs_pass(F, dep_tol)
        worst = max(worst, is_parseval(G, dep_tol=dep_tol).residual)
    detail = "gap vectors at 1e-3..1e-5"
    if misrouted:
        detail += f"; profile misrouted: {' '.join(misrouted)}"
    return _result("near_dependence_routing", worst, 1e-10, extra_ok=not misrouted, detail=detail)


def check_l2_identity(seed, n_frames, dep_tol) -> CheckResult:
    # Parseval output must carry total energy equal to the span dimension
    worst = 0.0
    for F in random_frame_corpus(seed + 9, n_frames):
        rank = F.n_vectors - len(dependency_profile(F, dep_tol)) - len(zero_indices(F))
        G, _ = ggs_pass(F, dep_tol)
        worst = max(worst, abs(float((G.norms() ** 2).sum()) - rank))
    return _result("l2_energy_identity", worst, 1e-10, detail=f"{n_frames} frames")


def run_battery(
    seed: int = 0,
    n_frames: int = 50,
    dep_tol: float = 1e-10,
    max_iter: int = 1000,
    delta_onb: float = 1e-2,
) -> list[CheckResult]:
    return [
        check_single_pass_parseval(seed, n_frames, dep_tol),
        check_prefix_parseval(seed, n_frames, dep_tol),
        check_dependent_oracle(seed, n_frames, dep_tol),
        check_onb_fixed_points(seed, n_frames, dep_tol),
        check_non_onb_movement(seed, n_frames, dep_tol),
        check_last_vector_stabilization(seed, n_frames, dep_tol),
        check_closed_form_decay(),
        check_recurrences(),
        check_limit_classification(max_iter, delta_onb, dep_tol),
        check_gram_schmidt_degeneration(seed, n_frames, dep_tol),
        check_zero_pattern_prediction(seed, n_frames, max_iter, dep_tol),
        check_near_dependence_routing(seed, dep_tol),
        check_l2_identity(seed, n_frames, dep_tol),
    ]

import math

import numpy as np
import pytest

from framegs.errors import NonFiniteError
from framegs.frames import FrameSeq, is_parseval, l2_distance, zero_indices
from framegs.generate import (
    example_frame,
    random_frame,
    random_frame_corpus,
    random_onb_frame,
)
from framegs.iteration import (
    check_stabilized_last,
    classify_limit,
    closed_form_last_dependent,
    is_fixed_point,
    iterate,
    trace_csv_rows,
    trace_to_dict,
    validate_recurrences,
)

RT2 = math.sqrt(2.0)
FIG1 = example_frame("fig1")
FIG2 = example_frame("fig2")
FIG3 = example_frame("fig3")


class TestIterate:
    def test_onb_stops_after_one_iteration(self):
        F = random_onb_frame(41, 4, n_zeros=2)
        tr = iterate(F, max_iter=500)
        assert tr.iterations_run == 1
        assert tr.stationary and tr.stopped_early
        assert tr.deltas[0] <= 1e-12  # QR-built ONB carries roundoff

    def test_exact_onb_stops_with_delta_exactly_zero(self):
        F = FrameSeq(np.array([[1.0, 0.0], [0.0, 0.0], [0.0, 1.0]]))
        tr = iterate(F, max_iter=500)
        assert tr.iterations_run == 1
        assert tr.deltas[0] == 0.0

    def test_fig1_thousandth_norm(self):
        tr = iterate(FIG1, max_iter=1000, eps_delta=0.0, snapshot_stride=1000)
        assert tr.iterations_run == 1000
        assert tr.norms[1000][2] == pytest.approx(1 / math.sqrt(1001), abs=1e-12)

    def test_norms_recorded_every_iteration_despite_stride(self):
        tr = iterate(FIG3, max_iter=40, eps_delta=0.0, snapshot_stride=15)
        assert tr.norms.shape == (41, 10)
        assert sorted(tr.snapshots) == [0, 15, 30, 40]

    def test_validation_of_arguments(self):
        with pytest.raises(ValueError):
            iterate(FIG1, max_iter=0)
        with pytest.raises(ValueError):
            iterate(FIG1, snapshot_stride=0)
        with pytest.raises(ValueError):
            iterate(FIG1, eps_delta=-1.0)

    def test_non_finite_input_rejected_up_front(self):
        # entries this large overflow the very first norm computation, so
        # the error surfaces before any pass runs
        F = FrameSeq(np.array([[1e200, 0.0], [1e200, 0.0]]))
        with pytest.raises(NonFiniteError, match="input frame"):
            iterate(F, max_iter=5)

    def test_dependent_indices_and_zeros_recorded(self):
        F = FrameSeq(np.array([[1.0, 0.0], [0.0, 0.0], [2.0, 0.0], [0.0, 1.0]]))
        tr = iterate(F, max_iter=3, eps_delta=0.0)
        assert tr.dependent_indices == (3,)
        assert tr.input_zero_indices == (2,)

    def test_parseval_preserved_across_iterations(self):
        for F in random_frame_corpus(42, 10, dependent_fraction=0.7):
            tr = iterate(F, max_iter=200, eps_delta=0.0, snapshot_stride=40)
            for m, snap in tr.snapshots.items():
                if m >= 1:
                    assert is_parseval(snap, tol=1e-9), m

    def test_monotone_decay_at_dependent_indices(self):
        for F in random_frame_corpus(43, 10, dependent_fraction=1.0):
            tr = iterate(F, max_iter=100, eps_delta=0.0, snapshot_stride=100)
            for k in tr.dependent_indices:
                col = tr.norms[1:, k - 1]
                assert np.all(np.diff(col) < 1e-13), k

    def test_zero_pattern_never_changes(self):
        F = FrameSeq(np.array([[0.0, 0.0], [1.0, 2.0], [2.0, 4.0], [1.0, 0.0]]))
        tr = iterate(F, max_iter=50, eps_delta=0.0, snapshot_stride=10)
        for snap in tr.snapshots.values():
            assert zero_indices(snap) == (1,)


class TestClosedForm:
    def test_m1_halves_the_diagonal(self):
        f = np.array([1 / RT2, 1 / RT2])
        np.testing.assert_allclose(closed_form_last_dependent(f, 1), [0.5, 0.5], atol=1e-15)

    def test_m2_value(self):
        f = np.array([1 / RT2, 1 / RT2])
        out = closed_form_last_dependent(f, 2)
        np.testing.assert_allclose(out, f / math.sqrt(3.0), atol=1e-15)
        assert out[0] == pytest.approx(0.408248, abs=1e-6)

    def test_direction_preserved(self):
        rng = np.random.default_rng(44)
        f = rng.normal(size=5)
        out = closed_form_last_dependent(f, 17)
        cos = float(out @ f) / (np.linalg.norm(out) * np.linalg.norm(f))
        assert cos == pytest.approx(1.0, abs=1e-14)

    def test_agreement_with_trace_drift_aware(self):
        tr = iterate(FIG1, max_iter=1000, eps_delta=0.0)
        f3 = FIG1.vectors[2]
        for m in range(1, 1001):
            err = np.linalg.norm(tr.snapshots[m].vectors[2] - closed_form_last_dependent(f3, m))
            assert err <= 1e-10 * (1 + m * 1e-3), m

    def test_decay_identity_fig1(self):
        tr = iterate(FIG1, max_iter=1000, eps_delta=0.0, snapshot_stride=1000)
        worst = max(
            abs(tr.norms[m][2] * math.sqrt(1 + m) - 1.0) for m in range(1, 1001)
        )
        assert worst <= 1e-8

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            closed_form_last_dependent(np.array([1.0, 0.0]), 0)
        with pytest.raises(ValueError):
            closed_form_last_dependent(np.zeros(2), 3)


class TestStabilizedLast:
    def test_two_vector_frame(self):
        F = FrameSeq(np.array([[2.0, 0.0], [1.0, 1.0]]))
        tr = iterate(F, max_iter=20, eps_delta=0.0)
        chk = check_stabilized_last(F, tr)
        assert chk.applicable and chk.ok
        assert chk.residual <= 1e-10
        np.testing.assert_allclose(tr.final.vectors[1], [0.0, 1.0], atol=1e-12)

    def test_orthonormal_pair(self):
        F = FrameSeq(np.eye(2))
        tr = iterate(F, max_iter=5)
        chk = check_stabilized_last(F, tr)
        assert chk.applicable and chk.ok and chk.residual <= 1e-12

    def test_fig1_inapplicable(self):
        tr = iterate(FIG1, max_iter=5, eps_delta=0.0)
        chk = check_stabilized_last(FIG1, tr)
        assert not chk.applicable
        assert chk.ok is None and chk.residual is None

    def test_single_vector_frame(self):
        F = FrameSeq(np.array([[3.0, 4.0]]))
        tr = iterate(F, max_iter=10)
        chk = check_stabilized_last(F, tr)
        assert chk.applicable and chk.ok
        np.testing.assert_allclose(tr.final.vectors[0], [0.6, 0.8], atol=1e-14)

    def test_random_frames_with_independent_last(self):
        rng = np.random.default_rng(45)
        for _ in range(20):
            d = int(rng.integers(2, 7))
            n = int(rng.integers(2, 10))
            Q, _ = np.linalg.qr(rng.standard_normal((d, d)))
            body = rng.standard_normal((n, d - 1)) @ Q[:, : d - 1].T
            last = rng.standard_normal(d - 1) @ Q[:, : d - 1].T + 1.5 * Q[:, d - 1]
            F = FrameSeq(np.vstack([body, last[None, :]]))
            tr = iterate(F, max_iter=20, eps_delta=0.0)
            chk = check_stabilized_last(F, tr)
            assert chk.applicable and chk.ok and chk.residual <= 1e-10


class TestValidateRecurrences:
    @pytest.mark.parametrize("name", ["fig1", "fig3"])
    def test_examples_pass(self, name):
        tr = iterate(example_frame(name), max_iter=50, eps_delta=0.0, trace_steps=True)
        rep = validate_recurrences(tr)
        assert rep.pattern_consistent
        assert rep.iterations_checked == 50
        assert rep.update_identity <= 1e-12
        assert rep.single_step_floor <= 1e-12
        assert rep.accumulated_floor <= 1e-12
        assert rep.shrink_ceiling <= 1e-12
        assert rep.tail_floor <= 1e-12

    def test_single_dependent_index_vacuous_pairs(self):
        # fig1 has s = 1: no k_l < k_r pairs, floors measured only at l = s
        tr = iterate(FIG1, max_iter=10, eps_delta=0.0, trace_steps=True)
        rep = validate_recurrences(tr)
        assert rep.single_step_floor == 0.0
        assert rep.tail_floor == 0.0
        assert rep.max_violation <= 1e-12

    def test_random_frames(self):
        for F in random_frame_corpus(46, 8, dependent_fraction=1.0):
            tr = iterate(F, max_iter=30, eps_delta=0.0, trace_steps=True)
            rep = validate_recurrences(tr)
            assert rep.pattern_consistent
            assert rep.max_violation <= 1e-12

    def test_requires_step_traces(self):
        tr = iterate(FIG1, max_iter=5, eps_delta=0.0)
        with pytest.raises(ValueError):
            validate_recurrences(tr)


class TestClassifyLimit:
    def test_fig1(self):
        tr = iterate(FIG1, max_iter=1000, eps_delta=0.0, snapshot_stride=1000)
        rep = classify_limit(tr)
        assert rep.zero_indices == (3,)
        assert rep.surviving_indices == (1, 2)
        assert rep.onb_residual <= 1e-2
        assert rep.converged and rep.prediction_match
        assert rep.delta_zero == pytest.approx(2 / math.sqrt(1000))

    def test_fig3_two_survivors(self):
        tr = iterate(FIG3, max_iter=1000, eps_delta=0.0, snapshot_stride=1000)
        rep = classify_limit(tr)
        assert rep.zero_indices == tuple(range(3, 11))
        assert len(rep.surviving_indices) == 2
        assert rep.prediction_match

    def test_zero_extended_onb(self):
        F = random_onb_frame(47, 5, n_zeros=2)
        tr = iterate(F, max_iter=10)
        rep = classify_limit(tr)
        assert rep.zero_indices == zero_indices(F)
        assert rep.onb_residual <= 1e-14
        assert rep.prediction_match

    def test_partition_invariant(self):
        for F in random_frame_corpus(48, 10, dependent_fraction=0.5):
            tr = iterate(F, max_iter=50, eps_delta=0.0, snapshot_stride=50)
            rep = classify_limit(tr)
            assert set(rep.zero_indices) | set(rep.surviving_indices) == set(
                range(1, F.n_vectors + 1)
            )
            assert set(rep.zero_indices) & set(rep.surviving_indices) == set()

    def test_explicit_delta_zero(self):
        tr = iterate(FIG1, max_iter=10, eps_delta=0.0)
        rep = classify_limit(tr, delta_zero=1e-12)
        # nothing has decayed below 1e-12 after 10 iterations
        assert rep.zero_indices == ()
        assert not rep.prediction_match


class TestIsFixedPoint:
    def test_zero_extended_onb_true(self):
        assert is_fixed_point(FrameSeq(np.array([[1.0, 0.0], [0.0, 0.0], [0.0, 1.0]])))

    def test_fig1_false(self):
        assert not is_fixed_point(FIG1)

    def test_unnormalized_single_vector_false(self):
        assert not is_fixed_point(FrameSeq(np.array([[1 / RT2, 0.0]])))

    def test_structural_equivalence(self):
        # moving by <= tol iff the nonzero rows are orthonormal within tol
        rng = np.random.default_rng(49)
        cases = []
        for i in range(15):
            cases.append(random_onb_frame(rng, int(rng.integers(2, 7)), n_zeros=1))
        for F in random_frame_corpus(50, 15):
            cases.append(F)
        for i in range(10):
            onb = random_onb_frame(rng, 4)
            bump = 1e-8 if i % 2 == 0 else 1e-12
            cases.append(FrameSeq(onb.vectors + bump * rng.standard_normal((4, 4))))
        for F in cases:
            nz = [i for i in range(F.n_vectors) if i + 1 not in zero_indices(F)]
            V = F.vectors[nz]
            gram = V @ V.conj().T
            structural = (
                float(np.max(np.abs(gram - np.eye(len(nz))))) <= 1e-10 if nz else True
            )
            assert is_fixed_point(F, tol=1e-10) == structural


class TestExports:
    def test_dict_round_trips_through_json(self):
        import json

        tr = iterate(FIG2, max_iter=8, eps_delta=0.0)
        doc = json.loads(json.dumps(trace_to_dict(tr)))
        assert doc["iterations_run"] == 8
        assert doc["dependent_indices"] == [3]
        assert len(doc["norms"]) == 9
        assert set(doc["snapshots"]) == {str(m) for m in range(9)}
        first = doc["snapshots"]["0"]
        np.testing.assert_allclose(first, FIG2.vectors)

    def test_csv_layout_real(self):
        tr = iterate(FIG1, max_iter=4, eps_delta=0.0, snapshot_stride=2)
        header, rows = trace_csv_rows(tr)
        assert header == ["iteration", "vector_index", "norm", "coord_1", "coord_2"]
        assert len(rows) == 5 * 3
        by_iter = {m: [r for r in rows if r[0] == m] for m in range(5)}
        assert all(r[3] == "" for r in by_iter[1])
        assert all(r[3] != "" for r in by_iter[2])
        assert all(r[3] != "" for r in by_iter[0])

    def test_csv_layout_complex(self):
        F = FrameSeq(FIG1.vectors.astype(complex))
        tr = iterate(F, max_iter=2, eps_delta=0.0)
        header, _ = trace_csv_rows(tr)
        assert header[3:] == ["coord_1_re", "coord_1_im", "coord_2_re", "coord_2_im"]

    def test_norm_column_matches_snapshots(self):
        tr = iterate(FIG3, max_iter=6, eps_delta=0.0)
        _, rows = trace_csv_rows(tr)
        for r in rows:
            m, i, nrm = r[0], r[1], r[2]
            assert nrm == pytest.approx(
                float(np.linalg.norm(tr.snapshots[m].vectors[i - 1])), abs=1e-14
            )


def test_independent_indices_return_to_unit_norm_each_pass():
    # every independent vector is normalized during its step, then only
    # shrunk by later dependent steps; at the limit it approaches norm 1
    F = random_frame(51, 3, 8, n_dependent=3)
    tr = iterate(F, max_iter=2000, eps_delta=0.0, snapshot_stride=2000)
    dep = set(tr.dependent_indices)
    final = tr.norms[-1]
    for k in range(1, 9):
        if k in dep:
            assert final[k - 1] <= 1 / math.sqrt(2000) + 1e-12
        else:
            assert final[k - 1] == pytest.approx(1.0, abs=0.02)

import numpy as np
import pytest

from wiretap_cc.capacity import (
    OptimizerOptions,
    SingleAuxJoint,
    expected_cost_of,
    objective_single_aux,
    objective_two_aux,
)
from wiretap_cc.errors import GapNotEstablishedError
from wiretap_cc.probability import JointPmf, conditional_mutual_information
from wiretap_cc import timed_link
from wiretap_cc.timed_link import (
    SINGLE_AUX_BEST_KNOWN,
    GapReport,
    build_channel,
    equality_condition_slacks,
    gap_report_to_dict,
    verify_gap,
    witness_distribution,
)

from conftest import sample_feasible_single_aux


class TestChannel:
    def test_kernel_rows_pinned(self, gated_channel):
        expected = np.array([
            [0.5, 0.0, 0.5, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.5, 0.0, 0.5, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ])
        np.testing.assert_array_equal(gated_channel.kernel.rows, expected)
        np.testing.assert_array_equal(gated_channel.cost, [0.0, 1.0, 0.0, 1.0])
        assert gated_channel.budget == 0.5
        assert gated_channel.min_cost == 0.0

    def test_eavesdropper_sees_exactly_the_gate(self, gated_channel):
        kern = gated_channel.kernel_tensor()
        for x in range(4):
            gate = x % 2
            assert kern[x, :, 1 - gate].sum() == 0.0

    def test_open_gate_is_transparent_closed_gate_is_noise(self, gated_channel):
        kern = gated_channel.kernel_tensor()
        for x in range(4):
            bit, gate = x // 2, x % 2
            p_y = kern[x].sum(axis=1)
            if gate == 1:
                assert p_y[bit] == 1.0
            else:
                np.testing.assert_array_equal(p_y, [0.5, 0.5])


class TestWitness:
    def test_shape_and_marginals(self, gated_channel):
        w = witness_distribution()
        assert (w.u_size, w.v_size, w.x_size) == (2, 4, 4)
        np.testing.assert_allclose(w.p_u().probs, [0.5, 0.5], atol=1e-15)
        np.testing.assert_allclose(w.p_x().probs, np.full(4, 0.25), atol=1e-15)
        # the outer layer is exactly the gate: u determines x mod 2
        theta = w.p_uv.probs
        for u in range(2):
            for v in range(4):
                if v % 2 != u:
                    assert theta[u, v] == 0.0

    def test_value_and_cost(self, gated_channel):
        w = witness_distribution()
        assert objective_two_aux(w, gated_channel) == pytest.approx(0.5, abs=1e-12)
        assert expected_cost_of(w, gated_channel) == pytest.approx(0.5, abs=1e-15)

    def test_no_leakage_within_a_layer(self, gated_channel):
        # Z equals the gate equals U, so I(V;Z|U) vanishes identically
        w = witness_distribution()
        kern = gated_channel.kernel_tensor()
        p_uvx = w.p_uv.probs[:, :, None] * w.p_x_given_v.rows[None, :, :]
        p_uvz = np.einsum("uvx,xz->uvz", p_uvx, kern.sum(axis=1))
        i_vz_u = conditional_mutual_information(JointPmf(p_uvz, ("u", "v", "z")), given="u")
        assert i_vz_u == pytest.approx(0.0, abs=1e-12)

    def test_receiver_output_independent_of_gate(self, gated_channel):
        # under the witness input, both gate states leave Y a fair coin
        w = witness_distribution()
        kern = gated_channel.kernel_tensor()
        p_yz = np.einsum("x,xyz->yz", w.p_x().probs, kern)
        for z in range(2):
            cond = p_yz[:, z] / p_yz[:, z].sum()
            np.testing.assert_allclose(cond, [0.5, 0.5], atol=1e-12)


class TestSingleLayerCeiling:
    def test_random_feasible_samples_stay_below_half(self, gated_channel):
        rng = np.random.default_rng(31)
        for s in sample_feasible_single_aux(rng, gated_channel, 400):
            d = SingleAuxJoint.from_arrays(s)
            assert objective_single_aux(d, gated_channel) <= 0.5 + 1e-9

    def test_best_known_family_point(self, gated_channel):
        # half the mass silent, half carrying one of two opposite letters
        p_vx = np.array([
            [0.25, 0.25, 0.0, 0.0],
            [0.25, 0.0, 0.0, 0.25],
        ])
        d = SingleAuxJoint.from_arrays(p_vx)
        assert objective_single_aux(d, gated_channel) == pytest.approx(
            SINGLE_AUX_BEST_KNOWN, abs=1e-12
        )
        assert expected_cost_of(d, gated_channel) == pytest.approx(0.5, abs=1e-15)


class TestEqualityConditions:
    def test_witness_as_single_layer_leaks_the_gate(self, gated_channel):
        slacks = equality_condition_slacks(
            SingleAuxJoint.from_arrays(np.diag([0.25] * 4)), gated_channel
        )
        assert slacks["gate_half"] == pytest.approx(0.0, abs=1e-12)
        assert slacks["open_bit_full"] == pytest.approx(0.0, abs=1e-12)
        assert slacks["bit_blocked"] == pytest.approx(0.0, abs=1e-12)
        assert slacks["no_gate_leak"] == pytest.approx(1.0, abs=1e-12)

    def test_best_family_point_pays_with_gate_leak(self, gated_channel):
        p_vx = np.array([
            [0.25, 0.25, 0.0, 0.0],
            [0.25, 0.0, 0.0, 0.25],
        ])
        slacks = equality_condition_slacks(SingleAuxJoint.from_arrays(p_vx), gated_channel)
        assert slacks["gate_half"] == pytest.approx(0.0, abs=1e-12)
        assert slacks["open_bit_full"] == pytest.approx(0.0, abs=1e-12)
        assert slacks["bit_blocked"] == pytest.approx(0.0, abs=1e-12)
        # the remaining condition absorbs the entire distance to 0.5
        assert slacks["no_gate_leak"] == pytest.approx(
            0.5 - SINGLE_AUX_BEST_KNOWN, abs=1e-12
        )

    def test_near_half_values_must_violate_a_condition(self, gated_channel):
        # the four equalities are jointly unsatisfiable, so any distribution
        # close to value 0.5 has to break at least one of them
        rng = np.random.default_rng(32)
        for s in sample_feasible_single_aux(rng, gated_channel, 300):
            d = SingleAuxJoint.from_arrays(s)
            slacks = equality_condition_slacks(d, gated_channel)
            if objective_single_aux(d, gated_channel) > 0.5 - 1e-6:
                assert max(slacks.values()) > 1e-6
            # empirically the floor is above 0.15; assert a conservative gap
            assert max(slacks.values()) > 1e-4

    def test_optimizer_best_iterate_respects_the_implication(self, gated_channel):
        from wiretap_cc.capacity import maximize_single_aux

        res = maximize_single_aux(gated_channel, OptimizerOptions(starts=6, seed=7))
        slacks = equality_condition_slacks(res.argmax, gated_channel)
        if res.value > 0.5 - 1e-6:
            assert max(slacks.values()) > 1e-6
        assert res.value <= 0.5

    def test_slacks_on_all_cheap_input(self, gated_channel):
        # gate never opens: coin output, no leak, but the gate is never half
        s = SingleAuxJoint.from_arrays(np.array([[0.5, 0.0, 0.5, 0.0]]))
        slacks = equality_condition_slacks(s, gated_channel)
        assert slacks["gate_half"] == pytest.approx(0.5, abs=1e-12)
        assert slacks["open_bit_full"] == 1.0
        assert slacks["bit_blocked"] == pytest.approx(0.0, abs=1e-12)
        assert slacks["no_gate_leak"] == pytest.approx(0.0, abs=1e-12)


class TestVerifyGap:
    def test_report_fields(self):
        opts = OptimizerOptions(starts=6, max_iters=400, seed=0)
        rep = verify_gap(opts)
        assert isinstance(rep, GapReport)
        assert rep.witness_value == pytest.approx(0.5, abs=1e-12)
        assert rep.two_aux_lb >= rep.witness_value - 1e-9
        assert rep.single_aux_best <= 0.5
        assert rep.single_aux_best == pytest.approx(SINGLE_AUX_BEST_KNOWN, abs=1e-4)
        assert rep.single_aux_best <= SINGLE_AUX_BEST_KNOWN + 1e-6
        assert rep.gap == pytest.approx(rep.two_aux_lb - rep.single_aux_best, abs=1e-15)
        assert rep.gap > 0.3

    def test_report_serialization(self):
        rep = GapReport(0.5, 0.18, 0.32, 0.5)
        d = gap_report_to_dict(rep)
        assert set(d) == {"two_aux_lb", "single_aux_best", "gap", "witness_value"}

    def test_failed_separation_raises(self, monkeypatch):
        from wiretap_cc.capacity import CapacityResult

        def fake_single(ch, opts):
            s = SingleAuxJoint.from_arrays(np.array([[0.5, 0.0, 0.5, 0.0]]))
            return CapacityResult(
                value=0.75, argmax=s, starts_run=1, best_start_index=0,
                converged=True, iterations=1, final_gradient_norm=0.0,
            )

        monkeypatch.setattr(timed_link, "maximize_single_aux", fake_single)
        with pytest.raises(GapNotEstablishedError):
            verify_gap(OptimizerOptions(starts=2, max_iters=50, seed=0))

import json

import numpy as np
import pytest

from wiretap_cc import (
    BudgetBelowMinCostError,
    CondPmf,
    JointPmf,
    MalformedChannelFileError,
    Pmf,
    ValidationError,
    mutual_information,
)
from wiretap_cc.channel import (
    WiretapChannel,
    channel_from_dict,
    channel_to_dict,
    check_less_noisy,
    expected_cost,
    load_channel,
    marginal_kernels,
    save_channel,
)

from conftest import bsc, cascade_channel


def toy_channel(budget=0.5):
    # two clean bits to (y, z): y = x, z = x
    kernel = np.zeros((2, 4))
    kernel[0, 0] = 1.0
    kernel[1, 3] = 1.0
    return WiretapChannel(
        x_size=2, y_size=2, z_size=2,
        kernel=CondPmf(kernel), cost=np.array([0.0, 1.0]), budget=budget,
    )


class TestConstruction:
    def test_kernel_shape_must_match(self):
        with pytest.raises(ValidationError):
            WiretapChannel(
                x_size=2, y_size=2, z_size=2,
                kernel=CondPmf(np.full((2, 2), 0.5)),
                cost=np.zeros(2), budget=0.0,
            )

    def test_cost_must_be_nonnegative(self):
        kernel = CondPmf(np.full((2, 4), 0.25))
        with pytest.raises(ValidationError):
            WiretapChannel(2, 2, 2, kernel, np.array([-1.0, 0.0]), 0.0)

    def test_budget_below_min_cost_rejected(self):
        kernel = CondPmf(np.full((2, 4), 0.25))
        with pytest.raises(BudgetBelowMinCostError):
            WiretapChannel(2, 2, 2, kernel, np.array([0.5, 1.0]), 0.25)

    def test_budget_at_min_cost_allowed(self):
        kernel = CondPmf(np.full((2, 4), 0.25))
        ch = WiretapChannel(2, 2, 2, kernel, np.array([0.5, 1.0]), 0.5)
        assert ch.min_cost == 0.5

    def test_with_budget_revalidates(self):
        ch = toy_channel()
        assert ch.with_budget(0.9).budget == 0.9
        with pytest.raises(BudgetBelowMinCostError):
            ch.with_budget(-0.1)


class TestQueries:
    def test_marginals_of_cascade(self, degraded_channel):
        w_y, w_z = marginal_kernels(degraded_channel)
        np.testing.assert_allclose(w_y.rows, bsc(0.1), atol=1e-12)
        # cascade crossover: 0.1 * 0.85 + 0.9 * 0.15
        np.testing.assert_allclose(w_z.rows, bsc(0.22), atol=1e-12)

    def test_expected_cost_uniform(self):
        ch = toy_channel()
        assert expected_cost(ch, Pmf.uniform(2)) == 0.5

    def test_expected_cost_is_linear(self):
        ch = toy_channel()
        rng = np.random.default_rng(7)
        for _ in range(50):
            p = rng.dirichlet(np.ones(2))
            q = rng.dirichlet(np.ones(2))
            lam = rng.uniform()
            mix = Pmf(lam * p + (1 - lam) * q)
            direct = expected_cost(ch, mix)
            parts = lam * expected_cost(ch, Pmf(p)) + (1 - lam) * expected_cost(ch, Pmf(q))
            assert direct == pytest.approx(parts, abs=1e-12)


class TestLessNoisy:
    def test_degraded_claim_holds(self, degraded_channel):
        report = check_less_noisy(degraded_channel, "y_less_noisy", starts=40, seed=3)
        assert report.holds
        assert report.counterexample is None

    def test_degraded_reverse_claim_fails(self, degraded_channel):
        report = check_less_noisy(degraded_channel, "z_less_noisy", starts=40, seed=3)
        assert not report.holds
        assert report.gap > 1e-9
        assert report.counterexample.shape == (2, 2)

    def test_counterexample_gap_reproducible_from_first_principles(self, degraded_channel):
        report = check_less_noisy(degraded_channel, "z_less_noisy", starts=40, seed=3)
        s = report.counterexample
        w_y, w_z = marginal_kernels(degraded_channel)
        i_y = mutual_information(JointPmf(s @ w_y.rows, ("u", "y")))
        i_z = mutual_information(JointPmf(s @ w_z.rows, ("u", "z")))
        assert i_y - i_z == pytest.approx(report.gap, abs=1e-12)

    def test_reversed_channel_orders_swap(self, reversed_channel):
        assert not check_less_noisy(reversed_channel, "y_less_noisy", starts=40, seed=5).holds
        assert check_less_noisy(reversed_channel, "z_less_noisy", starts=40, seed=5).holds

    def test_unknown_direction_rejected(self, degraded_channel):
        with pytest.raises(ValidationError):
            check_less_noisy(degraded_channel, "sideways")

    def test_deterministic_given_seed(self, degraded_channel):
        a = check_less_noisy(degraded_channel, "z_less_noisy", starts=25, seed=11)
        b = check_less_noisy(degraded_channel, "z_less_noisy", starts=25, seed=11)
        assert a.gap == b.gap
        np.testing.assert_array_equal(a.counterexample, b.counterexample)


class TestSerialization:
    def test_round_trip_dict(self):
        ch = cascade_channel(0.1, 0.15)
        back = channel_from_dict(channel_to_dict(ch))
        np.testing.assert_allclose(back.kernel.rows, ch.kernel.rows, atol=1e-15)
        np.testing.assert_array_equal(back.cost, ch.cost)
        assert back.budget == ch.budget

    def test_round_trip_file(self, tmp_path):
        ch = toy_channel()
        path = tmp_path / "ch.json"
        save_channel(ch, str(path))
        back = load_channel(str(path))
        np.testing.assert_allclose(back.kernel.rows, ch.kernel.rows)
        assert back.budget == ch.budget

    def test_missing_key(self):
        data = channel_to_dict(toy_channel())
        del data["cost"]
        with pytest.raises(MalformedChannelFileError):
            channel_from_dict(data)

    def test_bad_row_sum(self):
        data = channel_to_dict(toy_channel())
        data["kernel"][0][0] = 0.5
        with pytest.raises(MalformedChannelFileError):
            channel_from_dict(data)

    def test_wrong_kernel_shape(self):
        data = channel_to_dict(toy_channel())
        data["kernel"] = [[0.5, 0.5], [0.5, 0.5]]
        with pytest.raises(MalformedChannelFileError):
            channel_from_dict(data)

    def test_non_numeric_kernel(self):
        data = channel_to_dict(toy_channel())
        data["kernel"][0][0] = "lots"
        with pytest.raises(MalformedChannelFileError):
            channel_from_dict(data)

    def test_budget_below_min_cost_is_distinct_error(self):
        data = channel_to_dict(toy_channel())
        data["cost"] = [1.0, 2.0]
        data["budget"] = 0.5
        with pytest.raises(BudgetBelowMinCostError):
            channel_from_dict(data)

    def test_invalid_json_text(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(MalformedChannelFileError):
            load_channel(str(path))

    def test_negative_cost_in_file(self):
        data = channel_to_dict(toy_channel())
        data["cost"] = [-0.5, 1.0]
        with pytest.raises(MalformedChannelFileError):
            channel_from_dict(data)

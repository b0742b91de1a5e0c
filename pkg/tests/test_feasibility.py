import pytest

from usagekit.errors import ContractViolation
from usagekit.feasibility import (
    BASE_TRAINING_FLOPS,
    FeasibilityModel,
    break_even,
    flops_per_token,
    format_table,
    llm_request_cost,
    reference_table,
    total_training_cost,
)

# frozen reference rows: (per-request estimate, training total, break-even)
REFERENCE_ROWS = [
    (1.93e12, 17.5e15, 10_185),
    (3.85e12, 21.4e15, 5_862),
    (7.71e12, 29.1e15, 3_878),
    (15.4e12, 44.5e15, 2_927),
    (3080e12, 6180e15, 2_005),
]


class TestFlopsPerToken:
    def test_175b_model(self):
        assert flops_per_token(175e9) == 0.35e12

    def test_unit(self):
        assert flops_per_token(1) == 2

    def test_70b_model(self):
        assert flops_per_token(70e9) == 0.14e12

    def test_rejects_nonpositive(self):
        with pytest.raises(ContractViolation):
            flops_per_token(0)


class TestRequestCost:
    def test_base_estimate(self):
        model = FeasibilityModel(llm_flops_per_token=0.35e12)
        assert llm_request_cost(model) == pytest.approx(1.9273e12, rel=1e-3)

    def test_leaked_estimate_matches_reference_row(self):
        model = FeasibilityModel(llm_flops_per_token=560e12)
        assert llm_request_cost(model) == pytest.approx(3080e12, rel=2e-3)

    def test_model_validation(self):
        with pytest.raises(ContractViolation):
            FeasibilityModel(llm_flops_per_token=0.35e12, tokens_per_request=0)


class TestTrainingCost:
    def test_row_one_total(self):
        model = FeasibilityModel(llm_flops_per_token=0.35e12)
        assert total_training_cost(model) == pytest.approx(17.5e15, rel=1e-2)

    def test_row_difference_identity(self):
        row1 = FeasibilityModel(llm_flops_per_token=0.35e12)
        row4 = FeasibilityModel(llm_flops_per_token=2.8e12)
        diff = total_training_cost(row4) - total_training_cost(row1)
        assert diff == pytest.approx(2000 * (15.4e12 - 1.93e12), rel=1e-2)
        assert diff == pytest.approx(44.5e15 - 17.5e15, rel=1e-2)

    def test_single_annotation_request_adds_one_request_cost(self):
        model = FeasibilityModel(llm_flops_per_token=0.35e12, n_annotation_requests=1)
        assert total_training_cost(model) - llm_request_cost(model) == pytest.approx(
            BASE_TRAINING_FLOPS, rel=1e-12
        )


class TestBreakEven:
    @pytest.mark.parametrize("row, reference", list(zip(reference_table(), REFERENCE_ROWS)))
    def test_reference_rows_within_one_percent(self, row, reference):
        llm_cost, training, expected_break_even = reference
        assert row.llm_request_flops == pytest.approx(llm_cost, rel=0.01)
        assert row.training_flops == pytest.approx(training, rel=0.01)
        assert row.break_even_requests == pytest.approx(expected_break_even, rel=0.01)

    def test_never_breaks_even(self):
        model = FeasibilityModel(
            llm_flops_per_token=0.01e12, small_model_flops_per_request=0.206e12
        )
        assert llm_request_cost(model) < model.small_model_flops_per_request
        assert break_even(model) is None

    def test_equal_costs_never_break_even(self):
        model = FeasibilityModel(llm_flops_per_token=1.0)
        model.small_model_flops_per_request = llm_request_cost(model)
        assert break_even(model) is None

    def test_monotone_and_asymptotic_in_llm_cost(self):
        previous = None
        for flops in [0.1e12, 0.35e12, 1e12, 10e12, 1e15, 1e18, 1e21]:
            model = FeasibilityModel(llm_flops_per_token=flops)
            be = break_even(model)
            if be is None:
                continue
            if previous is not None:
                assert be <= previous
            previous = be
        # as the LLM estimate explodes, break-even approaches the number of
        # annotated training examples
        assert previous == 2001  # ceil just above n_annotation_requests


class TestTable:
    def test_format_contains_every_break_even(self):
        rows = reference_table()
        text = format_table(rows)
        assert "break-even" in text
        for row in rows:
            assert f"{row.break_even_requests:,}" in text

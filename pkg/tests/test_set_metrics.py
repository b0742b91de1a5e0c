import random

import numpy as np
import pytest

from oracles import brute_ms4, brute_s4, random_option_sets
from usagekit.errors import ContractViolation
from usagekit.set_metrics import (
    ms4,
    option_set,
    s4,
    s4_precision,
    weight,
    weighted_precision,
)

A, B, C = "a", "b", "c"


def test_option_set_normalizes():
    assert option_set(["  a ", "b", "a", "", "  "]) == ("a", "b")
    assert option_set([]) == ()


def test_option_set_rejects_bare_strings():
    with pytest.raises(ContractViolation):
        option_set("not a list")
    with pytest.raises(ContractViolation):
        option_set(["fine", 3])


class TestWeight:
    def test_singleton_weight_is_zero(self, exact_sim):
        assert weight(A, (A,), exact_sim) == 0.0

    def test_two_distinct_members(self, exact_sim):
        # (1/2) * ((1-1) + (1-0)) = 0.5 for both members
        assert weight(A, (A, B), exact_sim) == 0.5
        assert weight(B, (A, B), exact_sim) == 0.5

    def test_three_distinct_members(self, exact_sim):
        for member in (A, B, C):
            assert weight(member, (A, B, C), exact_sim) == pytest.approx(2 / 3, abs=1e-15)

    def test_membership_required(self, exact_sim):
        with pytest.raises(ContractViolation):
            weight("zz", (A, B), exact_sim)

    def test_self_term_flag_is_observationally_inert(self, det_sim):
        # sim(x, x) = 1 zeroes the self term, so only the convention differs
        members = ("one", "two", "three")
        for m in members:
            with_self = weight(m, members, det_sim, include_self=True)
            without = weight(m, members, det_sim, include_self=False)
            assert with_self == pytest.approx(without, abs=1e-15)


class TestPrecision:
    def test_identical_singletons(self, exact_sim):
        assert s4_precision((A,), (A,), exact_sim) == 1.0

    def test_two_vs_one(self, exact_sim):
        # weights (0.5, 0.5); maxes (1, 0)
        assert s4_precision((A, B), (A,), exact_sim) == 0.5

    def test_three_vs_two(self, exact_sim):
        # uniform effective weights 2/3 each; (1 + 1 + 0) / 3
        assert s4_precision((A, B, C), (A, B), exact_sim) == pytest.approx(2 / 3, abs=1e-15)

    def test_empty_inputs_rejected(self, exact_sim):
        with pytest.raises(ContractViolation):
            s4_precision((), (A,), exact_sim)
        with pytest.raises(ContractViolation):
            s4_precision((A,), (), exact_sim)

    def test_weight_scale_invariance(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            n = int(rng.integers(1, 6))
            maxes = rng.random(n)
            weights = rng.random(n) + 0.05
            base = weighted_precision(maxes, weights)
            for scale in (0.3, 2.0, 1e6):
                assert weighted_precision(maxes, weights * scale) == pytest.approx(base, rel=1e-12)


class TestS4:
    def test_both_empty(self, exact_sim):
        assert s4((), (), exact_sim) == 1.0

    def test_exactly_one_empty(self, exact_sim):
        assert s4(("x",), (), exact_sim) == 0.0
        assert s4((), ("x",), exact_sim) == 0.0

    def test_hand_computed_example(self, exact_sim):
        # harmonic-mean(0.5, 1.0) = 2/3
        assert s4((A, B), (A,), exact_sim) == pytest.approx(2 / 3, abs=1e-15)

    def test_equal_sets_score_one(self, exact_sim):
        assert s4((A, B, C), (C, A, B), exact_sim) == 1.0

    def test_disjoint_sets_score_zero(self, exact_sim):
        assert s4((A, B), ("x", "y"), exact_sim) == 0.0

    def test_symmetry_random_pairs(self, exact_sim, det_sim):
        rng = np.random.default_rng(13)
        vocab = ["red", "green", "blue", "cyan", "teal", "pink"]
        for sim in (exact_sim, det_sim):
            for _ in range(60):
                pred = random_option_sets(rng, vocab)
                ref = random_option_sets(rng, vocab)
                assert s4(pred, ref, sim) == pytest.approx(s4(ref, pred, sim), abs=1e-12)

    def test_member_order_invariance(self, det_sim):
        pred = ("one", "two", "three")
        ref = ("four", "five")
        base = s4(pred, ref, det_sim)
        rng = random.Random(2)
        for _ in range(10):
            p = list(pred)
            r = list(ref)
            rng.shuffle(p)
            rng.shuffle(r)
            assert s4(tuple(p), tuple(r), det_sim) == pytest.approx(base, abs=1e-12)

    def test_matches_brute_force_oracle(self, exact_sim, det_sim):
        rng = np.random.default_rng(17)
        vocab = ["ant", "bee", "cat", "dog", "elk", "fox", "gnu"]
        for sim in (exact_sim, det_sim):
            for _ in range(100):
                pred = random_option_sets(rng, vocab)
                ref = random_option_sets(rng, vocab)
                assert s4(pred, ref, sim) == pytest.approx(brute_s4(pred, ref, sim), abs=1e-12)

    def test_matches_oracle_on_larger_sets(self, det_sim):
        # the acceptance oracle caps at 4 options; make sure nothing breaks
        # at larger sizes either
        rng = np.random.default_rng(71)
        vocab = [f"phrase number {i}" for i in range(12)]
        for _ in range(30):
            pred = random_option_sets(rng, vocab, max_size=8)
            ref = random_option_sets(rng, vocab, max_size=8)
            assert s4(pred, ref, det_sim) == pytest.approx(
                brute_s4(pred, ref, det_sim), abs=1e-12
            )

    def test_near_duplicates_are_down_weighted(self, det_sim):
        # appending a near-duplicate of a correct option hurts the score less
        # than appending an unrelated one, because intra-set weights discount
        # members that are similar to the rest of their set
        anchor = "portable power bank"
        near = "portable power banks"
        far = "ceiling fan remote"
        assert det_sim(anchor, near) > 0.9
        assert det_sim(anchor, far) < 0.3
        ref = (anchor,)
        with_near = s4((anchor, near), ref, det_sim)
        with_far = s4((anchor, far), ref, det_sim)
        assert with_near > with_far


class TestMs4:
    def test_single_empty_reference(self, exact_sim):
        assert ms4((), ((),), exact_sim) == 1.0

    def test_max_over_references(self, exact_sim):
        assert ms4((A,), ((), (A,)), exact_sim) == 1.0

    def test_empty_pred_nonempty_ref(self, exact_sim):
        assert ms4((), ((B,),), exact_sim) == 0.0

    def test_requires_references(self, exact_sim):
        with pytest.raises(ContractViolation):
            ms4((A,), (), exact_sim)

    def test_dominance_over_each_reference(self, det_sim):
        rng = np.random.default_rng(23)
        vocab = ["u", "v", "w", "x", "y", "z"]
        for _ in range(50):
            pred = random_option_sets(rng, vocab)
            refs = tuple(random_option_sets(rng, vocab) for _ in range(int(rng.integers(1, 4))))
            score = ms4(pred, refs, det_sim)
            per_ref = [s4(pred, ref, det_sim) for ref in refs]
            for value in per_ref:
                assert score >= value - 1e-15
            assert any(abs(score - value) <= 1e-15 for value in per_ref)

    def test_reference_order_invariance(self, det_sim):
        refs = (("p", "q"), ("r",), ())
        pred = ("p",)
        base = ms4(pred, refs, det_sim)
        assert ms4(pred, refs[::-1], det_sim) == base

    def test_matches_brute_force_oracle(self, exact_sim):
        rng = np.random.default_rng(29)
        vocab = ["ant", "bee", "cat", "dog", "elk"]
        for _ in range(80):
            pred = random_option_sets(rng, vocab)
            refs = tuple(random_option_sets(rng, vocab) for _ in range(int(rng.integers(1, 4))))
            assert ms4(pred, refs, exact_sim) == pytest.approx(
                brute_ms4(pred, refs, exact_sim), abs=1e-12
            )

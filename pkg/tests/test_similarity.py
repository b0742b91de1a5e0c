import math
import random

import numpy as np
import pytest

from oracles import quad_beta_cdf
from usagekit.errors import ContractViolation
from usagekit.similarity import (
    BetaParams,
    Similarity,
    SimilarityConfig,
    beta_cdf,
    clipped_cosine,
)

PAPER_STAGE1 = BetaParams(1.35, 1.65)
PAPER_STAGE2 = BetaParams(14.72, 3.39)


class TestClippedCosine:
    def test_identical_unit_vectors(self):
        v = np.array([0.6, 0.8])
        assert clipped_cosine(v, v) == 1.0

    def test_orthogonal(self):
        assert clipped_cosine(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 0.0

    def test_antipodal_clips_to_zero(self):
        v = np.array([0.6, 0.8])
        assert clipped_cosine(v, -v) == 0.0

    def test_zero_vector_conventions(self):
        zero = np.zeros(3)
        other = np.array([1.0, 0.0, 0.0])
        assert clipped_cosine(zero, zero) == 1.0
        assert clipped_cosine(zero, other) == 0.0
        assert clipped_cosine(other, zero) == 0.0

    def test_dimension_mismatch(self):
        with pytest.raises(ContractViolation):
            clipped_cosine(np.zeros(2), np.zeros(3))

    def test_unnormalized_inputs(self):
        a = np.array([2.0, 0.0])
        b = np.array([3.0, 3.0])
        assert clipped_cosine(a, b) == pytest.approx(math.sqrt(0.5), abs=1e-15)


class TestBetaCdf:
    def test_uniform_midpoint(self):
        assert beta_cdf(0.5, BetaParams(1.0, 1.0)) == pytest.approx(0.5, abs=1e-12)

    def test_endpoints_exact(self):
        for params in (PAPER_STAGE1, PAPER_STAGE2, BetaParams(1.0, 1.0)):
            assert beta_cdf(0.0, params) == 0.0
            assert beta_cdf(1.0, params) == 1.0

    def test_symmetric_density_midpoint(self):
        assert beta_cdf(0.5, BetaParams(2.0, 2.0)) == pytest.approx(0.5, abs=1e-12)

    def test_frozen_quadrature_value(self):
        # expected value computed with the adaptive-quadrature oracle
        assert beta_cdf(0.3, PAPER_STAGE1) == pytest.approx(0.32113844662449964, abs=1e-10)

    def test_against_quadrature_grid(self):
        for params in (PAPER_STAGE1, PAPER_STAGE2):
            for x in np.linspace(0.0, 1.0, 41):
                expected = quad_beta_cdf(float(x), params.alpha, params.beta)
                assert beta_cdf(float(x), params) == pytest.approx(expected, abs=1e-8)

    def test_domain_violation(self):
        with pytest.raises(ContractViolation):
            beta_cdf(-0.1, PAPER_STAGE1)
        with pytest.raises(ContractViolation):
            beta_cdf(1.1, PAPER_STAGE1)

    def test_invalid_params(self):
        with pytest.raises(ContractViolation):
            BetaParams(0.0, 1.0)
        with pytest.raises(ContractViolation):
            BetaParams(1.0, -2.0)

    def test_monotone_in_x(self):
        # spec property: 1,000 random (x1, x2, params) triples
        rng = random.Random(7)
        for _ in range(1000):
            a = rng.uniform(0.05, 25.0)
            b = rng.uniform(0.05, 25.0)
            x1, x2 = sorted((rng.random(), rng.random()))
            params = BetaParams(a, b)
            assert beta_cdf(x1, params) <= beta_cdf(x2, params) + 1e-12

    def test_complement_identity_exact(self):
        for params in (PAPER_STAGE1, PAPER_STAGE2):
            mirrored = BetaParams(params.beta, params.alpha)
            for k in range(65):
                x = k / 64.0
                assert beta_cdf(x, params) + beta_cdf(1.0 - x, mirrored) == 1.0


class TestSim:
    def test_self_similarity_is_one(self, det_sim):
        for text in ["x", "portable power bank", "Mixed Case!"]:
            assert det_sim(text, text) == 1.0

    def test_orthogonal_strings_score_zero(self, det_sim):
        # single characters hash to disjoint buckets (verified fixture)
        assert det_sim("a", "b") == 0.0

    def test_frozen_transform_chain(self, det_sim):
        # beta_cdf(beta_cdf(0.7, stage1), stage2), both via the quad oracle
        assert det_sim.transform(0.7) == pytest.approx(0.42675559681430336, abs=1e-10)

    def test_symmetry_and_bounds_random_pairs(self, det_sim, exact_sim):
        rng = random.Random(11)
        words = ["alpha", "beta", "gamma", "delta", "grill", "smoke", "power bank", ""]
        for sim in (det_sim, exact_sim):
            for _ in range(200):
                a, b = rng.choice(words), rng.choice(words)
                ab, ba = sim(a, b), sim(b, a)
                assert ab == ba
                assert 0.0 <= ab <= 1.0

    def test_identity_transform_degrades_to_cosine(self):
        config = SimilarityConfig(stage1=BetaParams(1.0, 1.0), stage2=BetaParams(1.0, 1.0))
        sim = Similarity(config)
        backend = sim.backend
        rng = random.Random(3)
        words = ["one", "two", "three", "four five", "six"]
        for _ in range(50):
            a, b = rng.choice(words), rng.choice(words)
            raw = clipped_cosine(backend.embed(a), backend.embed(b))
            assert sim(a, b) == pytest.approx(raw, abs=1e-12)

    def test_exact_match_backend_bypasses_vectors(self, exact_sim):
        assert exact_sim("a", "a") == 1.0
        assert exact_sim("a", "b") == 0.0
        assert exact_sim("  padded  ", "padded") == 1.0

    def test_matrix_matches_scalar_calls(self, det_sim):
        xs = ["one", "two"]
        ys = ["three", "one"]
        m = det_sim.matrix(xs, ys)
        for i, x in enumerate(xs):
            for j, y in enumerate(ys):
                assert m[i, j] == det_sim(x, y)

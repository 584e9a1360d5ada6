import itertools
import math

import numpy as np
import pytest

from qsum.errors import DomainError
from qsum.model import MeanInstance, derive_angles, random_instances
from qsum.distribution import (
    OutputDistribution,
    collapse_outputs,
    outcome_distribution,
)
from qsum.error_analysis import local_avg_error, local_sup_error
from qsum.repetitions import (
    check_repetition_theorem,
    median_distribution,
    repetition_error,
)
from qsum.sweep import default_grid


def brute_force_median(alphas, rhos, n):
    """Enumerate all (2n+1)-tuples of atoms and bin the median's mass."""
    masses = {float(a): 0.0 for a in alphas}
    for combo in itertools.product(range(len(alphas)), repeat=2 * n + 1):
        prob = 1.0
        for i in combo:
            prob *= rhos[i]
        med = sorted(alphas[i] for i in combo)[n]
        masses[float(med)] += prob
    return masses


def synthetic_base(alphas, rhos):
    inst = MeanInstance(1, 3, 4)  # any nonintegral-sigma carrier
    ang = derive_angles(inst)
    alphas = np.asarray(alphas, dtype=float)
    rhos = np.asarray(rhos, dtype=float)
    below = np.concatenate(([0.0], np.cumsum(rhos)[:-1]))
    return OutputDistribution(alphas, rhos, below, inst, ang)


class TestMedianDistribution:
    def test_n0_identity(self):
        base = collapse_outputs(outcome_distribution(MeanInstance(8, 8, 3)))
        med = median_distribution(base, 0)
        np.testing.assert_allclose(med.rhos, base.rhos, atol=1e-15)
        np.testing.assert_array_equal(med.alphas, base.alphas)

    def test_single_atom(self):
        base = collapse_outputs(outcome_distribution(MeanInstance(4, 8, 4)))
        med = median_distribution(base, 5)
        assert med.atoms == [(0.5, 1.0)]

    def test_symmetric_two_atoms_fixed_point(self):
        base = synthetic_base([0.0, 1.0], [0.5, 0.5])
        med = median_distribution(base, 1)
        np.testing.assert_allclose(med.rhos, [0.5, 0.5], atol=1e-15)

    def test_full_mean_M3_hand_value(self):
        # median of three draws lands at 0 iff at least two of 3 do:
        # 3 (1/9)^2 (8/9) + (1/9)^3 = 25/729
        base = collapse_outputs(outcome_distribution(MeanInstance(8, 8, 3)))
        med = median_distribution(base, 1)
        assert med.rhos[0] == pytest.approx(25 / 729, abs=1e-14)
        assert med.rhos[1] == pytest.approx(704 / 729, abs=1e-14)

    def test_mass_conservation(self):
        rng = np.random.default_rng(41)
        for inst in random_instances(rng, 40, m_range=(3, 256)):
            base = collapse_outputs(outcome_distribution(inst))
            for n in (1, 4, 10):
                med = median_distribution(base, n)
                assert abs(med.rhos.sum() - 1.0) <= 1e-10
                assert med.rhos.min() >= -1e-15

    def test_majority_amplification(self):
        # an atom holding > 1/2 mass only gains from repetitions
        base = synthetic_base([0.0, 0.4, 1.0], [0.2, 0.7, 0.1])
        prev = 0.0
        for n in range(7):
            med = median_distribution(base, n)
            assert med.rhos[1] >= prev - 1e-15
            prev = med.rhos[1]

    def test_brute_force_equivalence_small(self):
        rng = np.random.default_rng(42)
        for inst in random_instances(rng, 12, m_range=(3, 5), n_max=2**8):
            base = collapse_outputs(outcome_distribution(inst))
            for n in (0, 1, 2):
                med = median_distribution(base, n)
                want = brute_force_median(base.alphas, base.rhos, n)
                for a, r in med.atoms:
                    assert r == pytest.approx(want[a], abs=1e-12)

    def test_validation(self):
        base = collapse_outputs(outcome_distribution(MeanInstance(8, 8, 3)))
        with pytest.raises(DomainError):
            median_distribution(base, -1)
        with pytest.raises(DomainError):
            median_distribution(base, 65)
        with pytest.raises(DomainError):
            median_distribution(base, 1.5)


class TestRepetitionError:
    def test_n0_matches_local_error(self):
        rng = np.random.default_rng(43)
        for inst in random_instances(rng, 30, m_range=(3, 128)):
            for q in (1.0, 2.0, 3.5):
                assert repetition_error(inst, q, 0) == pytest.approx(
                    local_avg_error(inst, q), abs=1e-12
                )

    def test_integral_sigma_zero(self):
        assert repetition_error(MeanInstance(4, 8, 4), 2.0, 3) == 0.0

    def test_full_mean_M3_brute_force(self):
        # enumerate all 27 outcome triples with product probabilities
        inst = MeanInstance(8, 8, 3)
        d = outcome_distribution(inst)
        outputs = [0.0, 0.75, 0.75]
        acc = 0.0
        for combo in itertools.product(range(3), repeat=3):
            prob = d.p[combo[0]] * d.p[combo[1]] * d.p[combo[2]]
            med = sorted(outputs[j] for j in combo)[1]
            acc += prob * abs(1.0 - med)
        assert acc == pytest.approx(67 / 243, abs=1e-14)
        assert repetition_error(inst, 1.0, 1) == pytest.approx(67 / 243, abs=1e-13)

    def test_never_exceeds_sup_error(self):
        rng = np.random.default_rng(44)
        for inst in random_instances(rng, 30, m_range=(3, 128)):
            sup = local_sup_error(inst)
            for n in (0, 2, 5):
                assert repetition_error(inst, 2.0, n) <= sup + 1e-12

    def test_domain(self):
        with pytest.raises(DomainError):
            repetition_error(MeanInstance(8, 8, 3), 0.5, 1)
        with pytest.raises(DomainError):
            repetition_error(MeanInstance(8, 8, 3), math.inf, 1)


class TestRepetitionTheorem:
    def test_table_shape_and_n(self):
        rows = check_repetition_theorem(2.0, [6, 22], default_grid(count=100))
        assert [r.M for r in rows] == [6, 22]
        assert all(r.n == 3 for r in rows)
        assert all(r.rep_error_times_m == pytest.approx(r.worst_rep_error * r.M) for r in rows)

    def test_boosted_error_below_base(self):
        rows = check_repetition_theorem(2.0, [22, 86], default_grid(count=200))
        for r in rows:
            assert r.worst_rep_error <= r.worst_base_error + 1e-12

    def test_validation(self):
        with pytest.raises(DomainError):
            check_repetition_theorem(2.0, [])
        with pytest.raises(DomainError):
            check_repetition_theorem(2.0, [6, 5])
        with pytest.raises(DomainError):
            check_repetition_theorem(math.inf, [6])

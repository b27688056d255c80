from fractions import Fraction

import numpy as np
import pytest

from multfun import (
    FiniteSystem,
    InputError,
    PolynomialFamily,
    TorusRotation,
    convergence_average,
    intersection_measure,
    level_set,
    recurrence_average,
)


def test_intersection_cyclic_multiples_of_period():
    sys4 = FiniteSystem(4)
    assert intersection_measure(sys4, [0], (4, 8)) == Fraction(1, 4)


def test_intersection_cyclic_misaligned_shift():
    sys4 = FiniteSystem(4)
    assert intersection_measure(sys4, [0], (2,)) == 0


def test_intersection_torus_identity_shift():
    tor = TorusRotation(0.41421356, ((0.0, 0.1),))
    assert intersection_measure(tor, None, (0,)) == pytest.approx(0.1, abs=1e-12)


def test_intersection_torus_quarter_shift():
    tor = TorusRotation(0.25, ((0.0, 0.5),))
    assert intersection_measure(tor, None, (1,)) == pytest.approx(0.25, abs=1e-12)


def test_measure_preservation_exact():
    rng = np.random.default_rng(3)
    sys12 = FiniteSystem(12)
    for _ in range(100):
        size = int(rng.integers(1, 12))
        A = rng.choice(12, size=size, replace=False).tolist()
        a = int(rng.integers(-30, 30))
        shifted = sys12.shift_set(sys12.normalize_set(A), a)
        assert len(shifted) == len(sys12.normalize_set(A))


def test_monotone_bound():
    rng = np.random.default_rng(5)
    sys10 = FiniteSystem(10)
    for _ in range(50):
        A = rng.choice(10, size=int(rng.integers(1, 9)), replace=False).tolist()
        shifts = tuple(int(x) for x in rng.integers(0, 25, size=3))
        inter = intersection_measure(sys10, A, shifts)
        singles = [intersection_measure(sys10, A, (a,)) for a in shifts]
        assert all(inter <= s for s in singles)


def test_shift_zero_identity():
    sys7 = FiniteSystem(7)
    A = [0, 2, 5]
    assert intersection_measure(sys7, A, (0, 0, 0)) == Fraction(3, 7)


def test_product_system():
    prod = FiniteSystem((2, 3))
    A = [(0, 0)]
    assert prod.total == 6
    assert intersection_measure(prod, A, (6,)) == Fraction(1, 6)
    assert intersection_measure(prod, A, (2,)) == 0


def test_polynomials_require_zero_constant_term():
    with pytest.raises(InputError):
        PolynomialFamily(((1, 1),))
    pf = PolynomialFamily(((0, 1), (0, 0, 1)))
    assert pf.evaluate(3) == (3, 9)
    assert pf.describe() == ["n", "n^2"]


def test_recurrence_along_shifted_squarefree_is_exactly_zero(mu2):
    Q = level_set(mu2, 1, 2 * 10 ** 5)
    E = Q.members[Q.members > 4] - 4
    rep = recurrence_average(FiniteSystem(4), [0], PolynomialFamily(((0, 1),)), E, 10 ** 5)
    assert rep.exact_zero
    assert rep.positivity == "zero_exact"
    assert all(v == 0.0 for _, v in rep.running)


def test_recurrence_along_squarefree_minus_one(mu2):
    Q = level_set(mu2, 1, 2 * 10 ** 5)
    E = Q.members[Q.members > 1] - 1
    rep = recurrence_average(FiniteSystem(4), [0], PolynomialFamily(((0, 1),)), E, 10 ** 5)
    assert rep.positivity == "positive_evidence"
    assert abs(rep.limit_estimate - 1 / 12) < 5e-3
    assert not rep.truncated


def test_recurrence_two_polynomials_exact_quarter():
    E = np.arange(1, 10 ** 4 + 1)
    rep = recurrence_average(FiniteSystem(2), [0], PolynomialFamily(((0, 1), (0, 2))),
                             E, 10 ** 4)
    even = [(j, v) for j, v in rep.running if j % 2 == 0]
    assert even
    for j, v in even:
        assert v == 0.25, j


def test_recurrence_empty_sequence_rejected():
    with pytest.raises(InputError):
        recurrence_average(FiniteSystem(2), [0], PolynomialFamily(((0, 1),)),
                           np.array([], dtype=np.int64), 100)


def test_recurrence_flags_truncation():
    rep = recurrence_average(FiniteSystem(2), [0], PolynomialFamily(((0, 1),)),
                             np.arange(1, 50), 1000)
    assert rep.truncated


def test_harness_matches_closed_form_cesaro():
    sys4 = FiniteSystem(4)
    A = [0, 1]
    pf = PolynomialFamily(((0, 1),))
    table = [float(intersection_measure(sys4, A, (rho,))) for rho in range(4)]
    J = 10 ** 4
    rep = recurrence_average(sys4, A, pf, np.arange(1, J + 1), J)
    closed = sum(table[n % 4] for n in range(1, J + 1)) / J
    assert rep.limit_estimate == pytest.approx(closed, abs=1e-12)


def test_convergence_periodic_oscillation_decays():
    rep = convergence_average(FiniteSystem(3), [0], PolynomialFamily(((0, 1),)),
                              np.arange(1, 10 ** 5 + 1), 10 ** 5)
    assert rep.oscillation < 10 / (10 ** 4)


def test_convergence_squarefree_quadratic(mu2):
    Q = level_set(mu2, 1, 2 * 10 ** 5)
    rep = convergence_average(FiniteSystem(3), [0], PolynomialFamily(((0, 0, 1),)),
                              Q.members, 10 ** 5)
    assert rep.oscillation < 1e-2


def test_convergence_liouville_level_set(lam):
    E = level_set(lam, 1, 2 * 10 ** 5)
    rep = convergence_average(FiniteSystem(2), [0], PolynomialFamily(((0, 1),)),
                              E.members, 10 ** 5)
    assert abs(rep.limit_estimate - 0.25) < 1e-2


def test_convergence_custom_observable():
    sys3 = FiniteSystem(3)
    obs = {(0,): 1.0, (1,): 0.5, (2,): 0.0}
    rep = convergence_average(sys3, [0], PolynomialFamily(((0, 1),)),
                              np.arange(1, 3001), 3000, observable=obs)
    # integrand at rho: mean over x of obs(x) obs(x + rho)
    t0 = (1 * 1 + 0.5 * 0.5 + 0) / 3
    t1 = (1 * 0.5 + 0.5 * 0 + 0 * 1) / 3
    t2 = (1 * 0 + 0.5 * 1 + 0 * 0.5) / 3
    expected = (1000 * (t0 + t1 + t2)) / 3000
    assert rep.limit_estimate == pytest.approx(expected, abs=1e-12)


def test_convergence_torus_rejects_observable():
    tor = TorusRotation(0.3, ((0.0, 0.25),))
    with pytest.raises(InputError):
        convergence_average(tor, None, PolynomialFamily(((0, 1),)),
                            np.arange(1, 100), 100, observable={0: 1.0})


def test_torus_sweep_matches_grid_integration():
    tor = TorusRotation(0.1234567, ((0.0, 0.3), (0.5, 0.6)))
    shifts = (1, 2, 5)
    got = intersection_measure(tor, None, shifts)
    # dense-grid oracle
    xs = (np.arange(10 ** 6) + 0.5) / 10 ** 6
    inside = np.ones_like(xs, dtype=bool)
    for a in (0,) + shifts:
        y = (xs + a * tor.alpha) % 1.0
        inside &= ((y >= 0.0) & (y < 0.3)) | ((y >= 0.5) & (y < 0.6))
    assert got == pytest.approx(inside.mean(), abs=1e-3)


def test_torus_recurrence_runs():
    tor = TorusRotation(0.41421356, ((0.0, 0.2),))
    rep = recurrence_average(tor, None, PolynomialFamily(((0, 1),)),
                             np.arange(1, 2001), 2000)
    assert 0 <= rep.limit_estimate <= 0.2


def test_report_csv_header():
    rep = recurrence_average(FiniteSystem(2), [0], PolynomialFamily(((0, 1),)),
                             np.arange(1, 100), 100)
    assert rep.to_csv().splitlines()[0] == "J,average"

import math
from itertools import product

import numpy as np
import pytest

from multfun import (
    ap_mean,
    aperiodicity_test,
    builtin,
    euler_product_mean,
    halasz_classify,
    pretentious_distance,
    rap_test,
    sieve_range,
)
from multfun.mf_core import MultiplicativeFunction, PrimePowerSpec
from multfun.pretentious import unit_function

from conftest import catalog_functions


def local_prime_sum(P):
    """Independent Mertens-sum oracle: sum of 1/p by a plain sieve."""
    sieve = bytearray([1]) * (P + 1)
    sieve[0:2] = b"\x00\x00"
    for i in range(2, int(P ** 0.5) + 1):
        if sieve[i]:
            sieve[i * i :: i] = b"\x00" * len(sieve[i * i :: i])
    return sum(1.0 / p for p in range(2, P + 1) if sieve[p])


UNIMODULAR = [
    builtin("liouville"),
    builtin("lambda_xi", {"xi": "1/3"}),
    builtin("kappa_xi", {"xi": "2/5"}),
]


# --------------------------------------------------------------------------
# Distance

def test_self_distance_vanishes_for_unimodular():
    for f in UNIMODULAR:
        prof = pretentious_distance(f, f, 10 ** 4)
        assert all(abs(v) < 1e-12 for v in prof.partial)


def test_liouville_distance_to_one_matches_mertens(lam):
    prof = pretentious_distance(lam, unit_function(), 10 ** 6)
    oracle = 2.0 * local_prime_sum(10 ** 6)
    assert prof.final == pytest.approx(oracle, abs=1e-9)
    assert abs(prof.final - 5.77) < 0.1
    assert prof.trend == "mertens_divergence"


def test_mu_squared_distance_to_one_is_zero(mu2):
    prof = pretentious_distance(mu2, unit_function(), 10 ** 5)
    assert all(v == 0.0 for v in prof.partial)
    assert prof.trend == "plateau"


def test_distance_symmetry():
    fs = catalog_functions()
    for f, g in [(fs[0], fs[4]), (fs[4], fs[7]), (fs[2], fs[3])]:
        a = pretentious_distance(f, g, 10 ** 4)
        b = pretentious_distance(g, f, 10 ** 4)
        assert a.partial == b.partial


def test_triangle_inequality_on_catalog_triples():
    fs = catalog_functions()
    rng = np.random.default_rng(13)
    for _ in range(50):
        f, g, h = (fs[i] for i in rng.integers(0, len(fs), 3))
        dfg = math.sqrt(pretentious_distance(f, g, 10 ** 4).final)
        dfh = math.sqrt(pretentious_distance(f, h, 10 ** 4).final)
        dhg = math.sqrt(pretentious_distance(h, g, 10 ** 4).final)
        assert dfg <= dfh + dhg + 1e-9


def test_power_inequality():
    one = unit_function()
    for f in UNIMODULAR:
        for g in (one, UNIMODULAR[1]):
            d1 = math.sqrt(pretentious_distance(f, g, 10 ** 4).final)
            for m in range(2, 6):
                dm = math.sqrt(pretentious_distance(f ** m, g ** m, 10 ** 4).final)
                assert m * d1 >= dm - 1e-9, (f.label, g.label, m)


def test_distance_partial_sums_nondecreasing(lam, chi4):
    prof = pretentious_distance(lam, chi4, 10 ** 5)
    assert all(b >= a for a, b in zip(prof.partial, prof.partial[1:]))
    assert prof.to_csv().splitlines()[0] == "P,partial_sum"


def test_twisted_distance_uses_archimedean_factor(lam):
    p0 = pretentious_distance(lam, unit_function(), 10 ** 4, t=0.0)
    p1 = pretentious_distance(lam, unit_function(), 10 ** 4, t=2.0)
    assert p0.final != p1.final


def test_distance_profiles_nonnegative_nondecreasing():
    fs = catalog_functions()
    rng = np.random.default_rng(41)
    for _ in range(10):
        f, g = (fs[i] for i in rng.integers(0, len(fs), 2))
        t = float(rng.uniform(-5, 5))
        prof = pretentious_distance(f, g, 10 ** 4, t=t)
        assert prof.partial[0] >= 0.0
        assert all(b >= a for a, b in zip(prof.partial, prof.partial[1:]))


# --------------------------------------------------------------------------
# Mean values

def test_euler_product_mu_squared(mu2):
    ep = euler_product_mean(mu2, 10 ** 5)
    assert abs(ep.value - 6 / math.pi ** 2) < 1e-4
    assert abs(ep.value - 0.60793) < 1e-4
    assert not ep.flagged


def test_euler_product_constant_one():
    ep = euler_product_mean(unit_function(), 10 ** 4)
    assert abs(ep.value - 1.0) < 1e-10


def test_euler_product_phi_over_n(phi):
    ep = euler_product_mean(phi, 10 ** 5)
    assert abs(ep.value - 0.6079) < 1e-4


def test_ap_mean_constant_function():
    one = unit_function()
    for q, r in [(1, 0), (3, 2), (7, 0), (10, 9)]:
        rep = ap_mean(one, q, r, 10 ** 4)
        assert rep.direct == pytest.approx(1.0, abs=1e-12)


def test_ap_mean_character_progression(chi4):
    rep = ap_mean(chi4, 4, 3, 10 ** 5)
    assert rep.direct == pytest.approx(-1.0, abs=1e-12)
    assert rep.decomposition == pytest.approx(-1.0, abs=1e-12)


def test_ap_mean_lambda_third_identity_and_decay(l13):
    rep = ap_mean(l13, 5, 2, 10 ** 6)
    assert rep.agreement < 1e-12
    # progression means of lambda_{1/3} decay only like (log N)^{-3/2},
    # about 0.05 at this truncation
    assert abs(rep.direct) < 0.1
    assert abs(rep.decomposition) < 0.1


def test_ap_mean_identity_on_random_inputs():
    fs = catalog_functions()
    rng = np.random.default_rng(19)
    done = 0
    while done < 20:
        f = fs[int(rng.integers(0, len(fs)))]
        q = int(rng.integers(1, 20))
        r = int(rng.integers(0, q)) if q > 1 else 0
        if math.gcd(q, r if r else q) != 1:
            continue
        rep = ap_mean(f, q, r, 10 ** 5)
        assert rep.decomposition is not None
        assert rep.agreement < 1e-12, (f.label, q, r)
        done += 1


def test_ap_mean_validates_residue(mu):
    from multfun import InputError

    with pytest.raises(InputError):
        ap_mean(mu, 4, 4, 10 ** 4)


# --------------------------------------------------------------------------
# Halasz classification

def test_halasz_mu_squared_case_i(mu2):
    rep = halasz_classify(mu2, P=10 ** 5, N=10 ** 6)
    assert rep.halasz_case == "case_i"
    assert abs(rep.euler[-1][1] - 6 / math.pi ** 2) < 1e-3
    assert abs(rep.empirical[-1][1] - 6 / math.pi ** 2) < 1e-3
    assert rep.euler[-1][1] != 0


def test_halasz_liouville_case_iv(lam):
    rep = halasz_classify(lam, P=10 ** 6, N=10 ** 7)
    assert rep.halasz_case == "case_iv"
    assert abs(rep.empirical[-1][1]) < 0.01


def test_halasz_dyadic_case_iii():
    f = MultiplicativeFunction(
        "dyadic_flip", PrimePowerSpec(lambda p, k: -1.0 if p == 2 else 1.0)
    )
    rep = halasz_classify(f, P=10 ** 5, N=10 ** 5)
    assert rep.halasz_case == "case_iii"
    assert rep.evidence["t_star"] == pytest.approx(0.0, abs=1e-9)
    assert abs(rep.empirical[-1][1]) < 0.01
    # the Euler factor at p = 2 vanishes: (1/2)(1 - sum 2^-m) = 0
    assert abs(rep.euler[-1][1]) < 1e-12


# --------------------------------------------------------------------------
# Aperiodicity and rational almost periodicity

def test_aperiodicity_liouville(lam):
    rep = aperiodicity_test(lam, Q_max=30, P=10 ** 6, ap_check_N=10 ** 7)
    assert rep.verdict == "aperiodic_evidence"
    assert rep.heuristic
    means = rep.evidence["ap_means"]
    for q in range(1, 7):
        for r in range(q):
            assert abs(means[f"{q},{r}"]) < 0.01, (q, r)


def test_aperiodicity_character_detected(chi4):
    rep = aperiodicity_test(chi4, Q_max=20, P=10 ** 5)
    assert rep.verdict == "periodic_structure"
    assert rep.chi == (4, 1)
    assert rep.t == pytest.approx(0.0)
    assert rep.evidence["min_tail_increment"] == pytest.approx(0.0, abs=1e-12)


def test_aperiodicity_mu_squared_pretends_trivial(mu2):
    rep = aperiodicity_test(mu2, Q_max=20, P=10 ** 5)
    assert rep.verdict == "periodic_structure"
    assert rep.chi == (1, 0)


def test_rap_trivial_when_prime_values_vanish():
    f = MultiplicativeFunction("prime_killer", PrimePowerSpec(lambda p, k: 0.0))
    assert rap_test(f, Q_max=5, P=10 ** 4).verdict == "rap_trivial"


def test_rap_mu_squared_pretends_principal(mu2):
    rep = rap_test(mu2, Q_max=20, P=10 ** 5)
    assert rep.verdict == "rap_pretends"
    assert rep.chi == (1, 0)


def test_rap_liouville_not_besicovitch(lam):
    rep = rap_test(lam, Q_max=20, P=10 ** 6)
    assert rep.verdict == "not_besicovitch"


def test_rap_phi_over_n_pretends(phi):
    rep = rap_test(phi, Q_max=10, P=10 ** 5)
    assert rep.verdict == "rap_pretends"
    assert rep.chi == (1, 0)


# --------------------------------------------------------------------------
# Cross-checks between empirical and Euler-product means

@pytest.mark.parametrize("name", ["mu_squared", "phi_over_n"])
def test_mean_consistency(name):
    f = builtin(name, {})
    emp = complex(sieve_range(f, 10 ** 7).values[1:].mean())
    ep = euler_product_mean(f, 10 ** 5)
    assert abs(emp - ep.value) < 2e-3

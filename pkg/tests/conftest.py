import pytest

from multfun import builtin


@pytest.fixture(scope="session")
def lam():
    return builtin("liouville")


@pytest.fixture(scope="session")
def mu():
    return builtin("moebius")


@pytest.fixture(scope="session")
def mu2():
    return builtin("mu_squared")


@pytest.fixture(scope="session")
def l13():
    return builtin("lambda_xi", {"xi": "1/3"})


@pytest.fixture(scope="session")
def phi():
    return builtin("phi_over_n")


@pytest.fixture(scope="session")
def chi4():
    return builtin("dirichlet_character", {"modulus": 4, "index": 1})


def trial_factor(n):
    """Independent factorization oracle: plain trial division."""
    out = []
    d = 2
    while d * d <= n:
        k = 0
        while n % d == 0:
            n //= d
            k += 1
        if k:
            out.append((d, k))
        d += 1
    if n > 1:
        out.append((n, 1))
    return out


def oracle_eval(rule, n, completely_multiplicative=False):
    """Evaluate a prime-power rule at n by trial division."""
    v = 1 + 0j
    for p, k in trial_factor(n):
        v *= complex(rule(p, 1)) ** k if completely_multiplicative else complex(rule(p, k))
    return v


def squarefree_count_oracle(N):
    """Inclusion-exclusion count of squarefree n <= N, independent of sieves."""
    import math

    total = 0
    for d in range(1, math.isqrt(N) + 1):
        facs = trial_factor(d)
        if any(k > 1 for _, k in facs):
            continue
        mu_d = (-1) ** len(facs)
        total += mu_d * (N // (d * d))
    return total


def catalog_functions():
    """The full builtin catalog with concrete parameters, for sweep tests."""
    return [
        builtin("liouville"),
        builtin("moebius"),
        builtin("mu_squared"),
        builtin("phi_over_n"),
        builtin("lambda_xi", {"xi": "1/3"}),
        builtin("mu_xi", {"xi": "1/4"}),
        builtin("kappa_xi", {"xi": "2/5"}),
        builtin("dirichlet_character", {"modulus": 5, "index": 1}),
        builtin("chi_of_tau", {"modulus": 3}),
    ]

"""Exactly computable measure-preserving systems and averaging harnesses.

Two system families are supported, both with closed-form intersection
measures so positivity verdicts are never contaminated by sampling error:
cyclic rotations on finitely many points (and products of such), where
measures are exact rationals, and circle rotations acting on finite unions
of half-open arcs, where measures are computed by an endpoint sweep.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .arith import geometric_grid
from .errors import InputError, ResourceError

__all__ = [
    "FiniteSystem",
    "TorusRotation",
    "PolynomialFamily",
    "intersection_measure",
    "RecurrenceReport",
    "recurrence_average",
    "convergence_average",
]


@dataclass(frozen=True)
class FiniteSystem:
    """Product of cyclic rotations: x -> x + (1, ..., 1) on Z_{m_1} x ... ."""

    sizes: tuple

    def __post_init__(self):
        sizes = self.sizes
        if isinstance(sizes, int):
            sizes = (sizes,)
        sizes = tuple(int(m) for m in sizes)
        if not sizes or any(m < 1 for m in sizes):
            raise InputError(f"cyclic factors must be positive, got {sizes}")
        object.__setattr__(self, "sizes", sizes)

    @property
    def total(self) -> int:
        return math.prod(self.sizes)

    @property
    def period(self) -> int:
        return math.lcm(*self.sizes)

    def points(self):
        return itertools.product(*(range(m) for m in self.sizes))

    def normalize_set(self, A) -> frozenset:
        out = set()
        for x in A:
            if isinstance(x, (int, np.integer)):
                x = (int(x),) * len(self.sizes)
            x = tuple(int(c) % m for c, m in zip(x, self.sizes))
            if len(x) != len(self.sizes):
                raise InputError(f"point {x} does not match system arity {len(self.sizes)}")
            out.add(x)
        return frozenset(out)

    def shift_set(self, A: frozenset, a: int) -> frozenset:
        """T^{-a} A = A - a (componentwise, mod each factor)."""
        return frozenset(tuple((c - a) % m for c, m in zip(x, self.sizes)) for x in A)


@dataclass(frozen=True)
class TorusRotation:
    """Rotation x -> x + alpha on [0, 1) with a union of half-open arcs."""

    alpha: float
    arcs: tuple                   # ((start, end), ...) each 0 <= start < end <= 1

    def __post_init__(self):
        arcs = tuple((float(a), float(b)) for a, b in self.arcs)
        for a, b in arcs:
            if not (0.0 <= a < b <= 1.0):
                raise InputError(f"arc [{a}, {b}) must satisfy 0 <= a < b <= 1")
        for (a1, b1), (a2, b2) in itertools.combinations(arcs, 2):
            if a1 < b2 and a2 < b1:
                raise InputError(f"arcs [{a1},{b1}) and [{a2},{b2}) overlap")
        object.__setattr__(self, "arcs", arcs)

    def measure(self) -> float:
        return sum(b - a for a, b in self.arcs)

    def shifted_arcs(self, a: int) -> list:
        """Arcs of T^{-a} A = A - a*alpha (mod 1), split at the wraparound."""
        shift = (-a * self.alpha) % 1.0
        out = []
        for lo, hi in self.arcs:
            lo2, hi2 = lo + shift, hi + shift
            if hi2 <= 1.0:
                out.append((lo2, hi2))
            elif lo2 >= 1.0:
                out.append((lo2 - 1.0, hi2 - 1.0))
            else:
                out.append((lo2, 1.0))
                out.append((0.0, hi2 - 1.0))
        return out


def _arcs_contain(arcs: list, x: float) -> bool:
    return any(a <= x < b for a, b in arcs)


def intersection_measure(system, A, shifts) -> Fraction | float:
    """mu(A ∩ T^{-a_1}A ∩ ... ∩ T^{-a_l}A) with the unshifted A included.

    Exact rational for FiniteSystem, float (endpoint sweep) for TorusRotation.
    """
    shifts = tuple(int(a) for a in shifts)
    if isinstance(system, FiniteSystem):
        base = system.normalize_set(A)
        inter = set(base)
        for a in shifts:
            inter &= system.shift_set(base, a)
            if not inter:
                break
        return Fraction(len(inter), system.total)
    if isinstance(system, TorusRotation):
        if A is not None:
            system = TorusRotation(system.alpha, tuple(A))
        arc_sets = [list(system.arcs)] + [system.shifted_arcs(a) for a in shifts]
        points = sorted({p for arcs in arc_sets for ab in arcs for p in ab} | {0.0, 1.0})
        total = 0.0
        for lo, hi in zip(points, points[1:]):
            mid = (lo + hi) / 2
            if all(_arcs_contain(arcs, mid) for arcs in arc_sets):
                total += hi - lo
        return total
    raise InputError(f"unsupported system {type(system).__name__}")


@dataclass(frozen=True)
class PolynomialFamily:
    """Integer-coefficient polynomials p_i with p_i(0) = 0 enforced."""

    coeffs: tuple                 # tuple of ascending-coefficient tuples

    def __post_init__(self):
        polys = tuple(tuple(int(c) for c in p) for p in self.coeffs)
        if not polys:
            raise InputError("need at least one polynomial")
        for p in polys:
            if not p or p[0] != 0:
                raise InputError(f"polynomial {p} must have zero constant term")
        object.__setattr__(self, "coeffs", polys)

    def __len__(self):
        return len(self.coeffs)

    def evaluate(self, n: int) -> tuple:
        out = []
        for p in self.coeffs:
            acc = 0
            for c in reversed(p):
                acc = acc * n + c
            out.append(acc)
        return tuple(out)

    def describe(self) -> list:
        names = []
        for p in self.coeffs:
            terms = []
            for k, c in enumerate(p):
                if c == 0:
                    continue
                base = "n" if k == 1 else f"n^{k}"
                terms.append(base if c == 1 else f"{c}{base}" if k else str(c))
            names.append(" + ".join(terms) if terms else "0")
        return names


@dataclass
class RecurrenceReport:
    running: list                  # (J, average) pairs on a geometric J-grid
    limit_estimate: float
    positivity: str                # positive_evidence | zero_exact | below_floor
    floor: float
    exact_zero: bool
    truncated: bool
    oscillation: float | None = None
    inputs: dict = field(default_factory=dict)
    certificate: dict | None = None

    def to_csv(self) -> str:
        lines = ["J,average"]
        lines += [f"{j},{v:.12g}" for j, v in self.running]
        return "\n".join(lines) + "\n"


def _members(E) -> np.ndarray:
    if hasattr(E, "members"):
        return np.asarray(E.members, dtype=np.int64)
    return np.asarray(E, dtype=np.int64)


def _finite_integrand_table(system: FiniteSystem, A, polys: PolynomialFamily):
    """Integrand depends only on n mod lcm(sizes) for integer polynomials."""
    L = system.period
    fracs = []
    for rho in range(L):
        fracs.append(intersection_measure(system, A, polys.evaluate(rho)))
    return L, fracs


def _running_from_values(tf: np.ndarray):
    J = len(tf)
    grid = geometric_grid(1, J)
    grid = grid[(grid >= 1) & (grid <= J)]
    cs = np.cumsum(tf)
    return [(int(j), float(cs[j - 1] / j)) for j in grid]


def recurrence_average(system, A, polys: PolynomialFamily, E, J_max: int,
                       floor: float | None = None) -> RecurrenceReport:
    """Running averages of mu(A ∩ T^{-p_1(n_j)}A ∩ ...) along the sequence E.

    The report language is deliberately 'evidence': a finite J exhibits
    stabilization, never the limit itself.
    """
    mem = _members(E)
    if len(mem) == 0:
        raise InputError("empty index sequence")
    truncated = len(mem) < J_max
    J = min(J_max, len(mem))
    mem = mem[:J]
    if floor is None:
        floor = 10.0 / J_max
    if isinstance(system, FiniteSystem):
        L, fracs = _finite_integrand_table(system, A, polys)
        table = np.array([float(fr) for fr in fracs])
        residues = mem % L
        tf = table[residues]
        exact_zero = all(fracs[rho] == 0 for rho in np.unique(residues))
    elif isinstance(system, TorusRotation):
        lims = len(polys) * (len(system.arcs) + 1)
        if J * lims > 2_000_000:
            raise ResourceError(
                f"torus harness would sweep {J} x {lims} arc sets; reduce J_max"
            )
        tf = np.array([intersection_measure(system, A, polys.evaluate(int(n)))
                       for n in mem])
        exact_zero = bool(np.all(tf == 0.0))
    else:
        raise InputError(f"unsupported system {type(system).__name__}")
    running = _running_from_values(tf)
    limit = running[-1][1]
    if exact_zero:
        verdict = "zero_exact"
    elif limit >= floor:
        verdict = "positive_evidence"
    else:
        verdict = "below_floor"
    return RecurrenceReport(
        running=running, limit_estimate=limit, positivity=verdict, floor=floor,
        exact_zero=exact_zero, truncated=truncated,
        inputs={"system": repr(system), "polys": polys.describe(),
                "J": int(J), "J_max": int(J_max), "sequence_length": int(len(_members(E)))},
    )


def convergence_average(system, A, polys: PolynomialFamily, E, J_max: int,
                        observable=None) -> RecurrenceReport:
    """Running averages of int prod_i observable(T^{p_i(n_j)} x) dmu along E,
    with last-decade oscillation as the convergence diagnostic."""
    mem = _members(E)
    if len(mem) == 0:
        raise InputError("empty index sequence")
    if isinstance(system, TorusRotation):
        if observable is not None:
            raise InputError("torus systems support only the indicator observable")
        rep = recurrence_average(system, A, polys, E, J_max)
        return _with_oscillation(rep)
    if not isinstance(system, FiniteSystem):
        raise InputError(f"unsupported system {type(system).__name__}")
    truncated = len(mem) < J_max
    J = min(J_max, len(mem))
    mem = mem[:J]
    obs = _observable_table(system, A, observable)
    L = system.period
    table = np.empty(L, dtype=np.float64)
    pts = list(system.points())
    vals = np.array([obs[x] for x in pts])
    for rho in range(L):
        shifts = polys.evaluate(rho)
        prod = vals.copy()
        for a in shifts:
            shifted = np.array([obs[tuple((c + a) % m for c, m in zip(x, system.sizes))]
                                for x in pts])
            prod = prod * shifted
        table[rho] = prod.mean()
    tf = table[mem % L]
    running = _running_from_values(tf)
    rep = RecurrenceReport(
        running=running, limit_estimate=running[-1][1], positivity="n/a",
        floor=0.0, exact_zero=bool(np.all(tf == 0.0)), truncated=truncated,
        inputs={"system": repr(system), "polys": polys.describe(),
                "J": int(J), "J_max": int(J_max)},
    )
    return _with_oscillation(rep)


def _with_oscillation(rep: RecurrenceReport) -> RecurrenceReport:
    tail = [v for j, v in rep.running if j >= rep.running[-1][0] / 10]
    rep.oscillation = float(max(tail) - min(tail)) if len(tail) > 1 else 0.0
    return rep


def _observable_table(system: FiniteSystem, A, observable) -> dict:
    if observable is None:
        base = system.normalize_set(A)
        return {x: 1.0 if x in base else 0.0 for x in system.points()}
    if callable(observable):
        return {x: float(observable(x)) for x in system.points()}
    table = dict(observable)
    out = {}
    for x in system.points():
        key = x if x in table else (x[0] if len(x) == 1 and x[0] in table else x)
        if key not in table:
            raise InputError(f"observable undefined at point {x}")
        out[x] = float(table[key])
    return out

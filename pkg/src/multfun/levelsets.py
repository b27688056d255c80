"""Level sets E(f, z) and the structure pipeline built on them.

Extraction is integer-exact whenever the function carries exact codes
(rational-phase catalog entries, characters, zero-repaired functions);
the float path must be asked for explicitly with a tolerance.  On top of
level sets: progression density profiles, Ruzsa concentration analysis,
zero repair, the smallest-power/character search, structure pairs
(level set, rational superset, relative-uniformity scores), divisibility
reports with symbolic residue obstructions, squarefree multiplicative
closures of prime sets, and seeded random relative subsets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .arith import (
    MINUS_ONE,
    ONE,
    ZERO,
    RootOfUnity,
    Zero,
    geometric_grid,
    get_context,
    primes_upto,
    snap_root_of_unity,
)
from .characters import DirichletCharacter, characters_mod, principal_character
from .errors import InputError, SearchError
from .mf_core import (
    MultiplicativeFunction,
    SieveTable,
    make_repaired,
    sieve_range,
    zero_free,
)
from .pretentious import PLATEAU_CAP, DistanceProfile, RapReport, _distance_profile, rap_test
from .seminorms import gowers_fast

__all__ = [
    "LevelSet",
    "level_set",
    "DensityProfile",
    "density_profile",
    "ConcentrationAnalysis",
    "concentration_analysis",
    "zero_repair",
    "FindKResult",
    "find_k_and_character",
    "StructurePair",
    "structure_pair",
    "DivisibilityReport",
    "divisibility_report",
    "sp_set",
    "random_relative_subset",
    "normalize_target",
]

GOLDEN_FRAC = (math.sqrt(5.0) - 1.0) / 2.0


def normalize_target(z):
    """Coerce a level target into RootOfUnity / Zero / Fraction / complex."""
    if isinstance(z, (RootOfUnity, Zero, Fraction)):
        return z
    if isinstance(z, (int, np.integer)):
        if z == 0:
            return ZERO
        if z == 1:
            return ONE
        if z == -1:
            return MINUS_ONE
        raise InputError(f"integer target {z} is outside the unit disc")
    if isinstance(z, (float, complex, np.floating, np.complexfloating)):
        return complex(z)
    raise InputError(f"cannot interpret level target {z!r}")


@dataclass(eq=False)
class LevelSet:
    source: str
    z: object
    N: int
    members: np.ndarray          # sorted int64 indices <= N
    exact: bool
    tol: float | None = None
    function: MultiplicativeFunction | None = None

    @property
    def count(self) -> int:
        return int(len(self.members))

    @property
    def density(self) -> float:
        return self.count / self.N

    def indicator(self) -> np.ndarray:
        ind = np.zeros(self.N + 1, dtype=bool)
        ind[self.members] = True
        return ind

    def to_text(self, path) -> None:
        Path(path).write_text("\n".join(str(int(n)) for n in self.members) + "\n")

    def to_bitmap(self, path) -> None:
        """Length-N bitmap, one bit per integer, little-endian bit order."""
        bits = np.zeros(self.N, dtype=np.uint8)
        bits[self.members - 1] = 1
        Path(path).write_bytes(np.packbits(bits, bitorder="little").tobytes())

    def __repr__(self):
        return (f"LevelSet({self.source}, z={self.z!r}, N={self.N}, "
                f"count={self.count})")


def _members_from_mask(mask: np.ndarray) -> np.ndarray:
    return np.flatnonzero(mask).astype(np.int64)


def level_set(f: MultiplicativeFunction, z, N: int, tol: float | None = None,
              table: SieveTable | None = None) -> LevelSet:
    """E(f, z) on [1, N]; exact when codes allow, else |f(n) - z| <= tol."""
    target = normalize_target(z)
    if table is None or table.N < N:
        table = sieve_range(f, N)
    if isinstance(target, Zero) and table.exact is None:
        mask = table.values[: N + 1] == 0
        mask[0] = False
        return LevelSet(table.source, target, N, _members_from_mask(mask), True,
                        function=f)
    if not isinstance(target, complex) and table.exact is not None:
        mask = table.exact.member_mask(target)[: N + 1]
        return LevelSet(table.source, target, N, _members_from_mask(mask), True,
                        function=f)
    if tol is None:
        raise InputError(
            f"{table.source} has no exact representation for target {target!r}; "
            "pass an explicit tolerance for the float path"
        )
    zval = target.value if isinstance(target, (RootOfUnity, Zero)) else complex(target)
    mask = np.abs(table.values[: N + 1] - zval) <= tol
    mask[0] = False
    return LevelSet(table.source, target, N, _members_from_mask(mask), False,
                    tol=tol, function=f)


# --------------------------------------------------------------------------
# Density profiles over progressions

@dataclass
class DensityProfile:
    N: int
    count: int
    density: float               # |E cap [N]| / N
    cells: dict                 # (q, r) -> count of members ≡ r (mod q)
    empty_cells: list

    def cell_density(self, q: int, r: int) -> float:
        return self.cells[(q, r)] / self.N


def density_profile(E: LevelSet, q_max: int) -> DensityProfile:
    """Global density and every progression-cell density d(E cap (qN + r))."""
    if E.count == 0:
        raise InputError("density profile of an empty truncation is meaningless")
    cells = {}
    empty = []
    for q in range(1, q_max + 1):
        counts = np.bincount(E.members % q, minlength=q)
        for r in range(q):
            cells[(q, r)] = int(counts[r])
            if counts[r] == 0:
                empty.append((q, r))
    return DensityProfile(N=E.N, count=E.count, density=E.count / E.N,
                          cells=cells, empty_cells=empty)


# --------------------------------------------------------------------------
# Ruzsa concentration analysis

@dataclass
class ConcentrationAnalysis:
    points: list                 # (complex value, full-range sum of 1/p)
    group: list | str | None     # RootOfUnity list, or "unbounded", or None
    tail: float
    tail_trend: str
    verdict: str                 # concentrated | not_concentrated | inconclusive
    bucket_masses: list = field(default_factory=list)
    thresholds: dict = field(default_factory=dict)

    @property
    def group_size(self) -> int | None:
        return len(self.group) if isinstance(self.group, list) else None


def concentration_analysis(f: MultiplicativeFunction, P: int,
                           k_max: int = 64) -> ConcentrationAnalysis:
    """Bucket primes by f(p) and test Ruzsa's three concentration conditions.

    A bucket is a concentration point when its sum of 1/p clears
    0.8 (ln ln P - ln ln 100); below 0.1 total it is discarded; in between
    it is borderline and forces an inconclusive verdict.  Detected points
    are snapped to roots of unity and closed under multiplication; the
    closure must stay within k_max elements and the off-group prime mass
    must plateau.
    """
    if P < 10 ** 3:
        raise InputError(f"concentration analysis needs P >= 1000, got {P}")
    primes = primes_upto(P)
    fp = f.prime_values(primes)
    inv_p = 1.0 / primes
    key = np.round(fp.real, 9) + 1j * np.round(fp.imag, 9)
    uniq, inverse = np.unique(key, return_inverse=True)
    masses = np.bincount(inverse, weights=inv_p)
    band = 0.8 * (math.log(math.log(P)) - math.log(math.log(100)))
    thresholds = {"qualify": band, "discard": 0.1, "P": int(P), "k_max": k_max}
    order = np.argsort(masses)[::-1]
    points, fuzzy = [], []
    for i in order:
        m = float(masses[i])
        if m >= band:
            points.append((complex(uniq[i]), m))
        elif m >= 0.1:
            fuzzy.append((complex(uniq[i]), m))
    top = [(complex(uniq[i]), float(masses[i])) for i in order[:8]]

    if not points:
        verdict = "inconclusive" if fuzzy else "not_concentrated"
        return ConcentrationAnalysis(points=[], group=None, tail=float(masses.sum()),
                                     tail_trend="", verdict=verdict,
                                     bucket_masses=top, thresholds=thresholds)

    snapped = [snap_root_of_unity(v, max_den=max(64, 4 * k_max)) for v, _ in points]
    if any(s is None for s in snapped):
        return ConcentrationAnalysis(points=points, group="unbounded",
                                     tail=0.0, tail_trend="",
                                     verdict="not_concentrated",
                                     bucket_masses=top, thresholds=thresholds)
    L = 1
    for s in snapped:
        L = L * s.den // math.gcd(L, s.den)
    if L > k_max:
        return ConcentrationAnalysis(points=points, group="unbounded",
                                     tail=0.0, tail_trend="",
                                     verdict="not_concentrated",
                                     bucket_masses=top, thresholds=thresholds)
    group = [RootOfUnity(j, L) for j in range(L)]
    gvals = np.array([g.value for g in group])
    dist = np.min(np.abs(fp[:, None] - gvals[None, :]), axis=1)
    off = dist > 1e-9
    tail_total = float(inv_p[off].sum())
    grid = geometric_grid(10, P)
    cs = np.cumsum(np.where(off, inv_p, 0.0))
    gidx = np.searchsorted(primes, grid, side="right")
    tail_partial = [float(cs[i - 1]) if i > 0 else 0.0 for i in gidx]
    from .pretentious import _classify_trend

    trend, _, _ = _classify_trend([int(x) for x in grid], tail_partial)
    fuzzy_outside = [v for v, _ in fuzzy if float(np.min(np.abs(gvals - v))) > 1e-9]
    if fuzzy_outside:
        verdict = "inconclusive"
    elif trend == "plateau":
        verdict = "concentrated"
    else:
        verdict = "not_concentrated"
    return ConcentrationAnalysis(points=points, group=group, tail=tail_total,
                                 tail_trend=trend, verdict=verdict,
                                 bucket_masses=top, thresholds=thresholds)


# --------------------------------------------------------------------------
# Zero repair

def zero_repair(f: MultiplicativeFunction, z, N_check: int = 10 ** 4) -> MultiplicativeFunction:
    """Replace zero prime-power values by a fixed unimodular y = e(gamma).

    gamma starts at the golden-ratio fractional constant and is rescaled
    until powers y^n (n <= 64) avoid the observed image of f, so level sets
    at nonzero targets are preserved; the finite collision check is a
    documented approximation of the full requirement.
    """
    target = normalize_target(z)
    if isinstance(target, Zero):
        raise InputError("zero repair applies to nonzero targets; "
                         "the z = 0 level set is handled by the rational path")
    if zero_free(f):
        return f
    table = sieve_range(f, N_check)
    if table.exact is not None and not isinstance(target, complex):
        members = table.exact.member_mask(target)
        est = members.sum() / N_check
    else:
        est = float("nan")
    warnings = []
    if not est > 0:
        warnings.append(f"level density estimate at N={N_check} is not positive ({est})")
    angles = _observed_angles(table)
    gamma = GOLDEN_FRAC
    for scale in range(64):
        if _collision_free(gamma, angles):
            break
        gamma = GOLDEN_FRAC / (2.0 + scale)
    else:
        raise SearchError("could not find a collision-free repair value y")
    y = complex(np.exp(2j * np.pi * gamma))
    g = make_repaired(f, y, gamma)
    if warnings:
        g.meta["warnings"] = warnings
    # repaired level set must match the original on the checked truncation
    gt = sieve_range(g, N_check)
    if table.exact is not None and not isinstance(target, complex):
        if not np.array_equal(gt.exact.member_mask(target), table.exact.member_mask(target)):
            raise SearchError("zero repair failed to preserve the level set")
    return g


def _observed_angles(table: SieveTable) -> np.ndarray:
    vals = table.values[1:]
    vals = vals[vals != 0]
    sample = vals[:: max(1, len(vals) // 4096)]
    return np.angle(sample) / (2 * np.pi) % 1.0


def _collision_free(gamma: float, angles: np.ndarray, height: int = 64,
                    eps: float = 1e-8) -> bool:
    diffs = (angles[None, :] - angles[:, None]).ravel() % 1.0
    diffs = np.unique(np.round(diffs, 12))
    for n in range(1, height + 1):
        shift = (n * gamma) % 1.0
        d = np.abs(diffs - shift)
        if np.min(np.minimum(d, 1.0 - d)) < eps:
            return False
    return True


# --------------------------------------------------------------------------
# Smallest power pretending to a character

@dataclass
class FindKResult:
    k: int
    chi: DirichletCharacter
    profile: DistanceProfile
    fallback: bool = False


def find_k_and_character(g: MultiplicativeFunction, k_max: int = 8,
                         Q_max: int = 60, P: int = 10 ** 6) -> FindKResult:
    """Smallest k (then deterministic character order) with a plateauing
    distance profile between g^k and a character of modulus <= Q_max.

    Falls back to k = |G| with the trivial character when the scan misses
    but the concentration group is finite; otherwise raises SearchError.
    """
    primes = primes_upto(P)
    gp = g.prime_values(primes)
    if np.min(np.abs(gp)) < 1e-9:
        raise InputError(f"{g.label} vanishes at some prime; repair zeros first")
    inv_p = 1.0 / primes
    grid = geometric_grid(10, P)
    lo_cut = _grid_two_decades_cut(grid)
    hi = primes > lo_cut
    sum_invp_hi = float(inv_p[hi].sum())
    for k in range(1, k_max + 1):
        gk = gp ** k
        ck = (gk * inv_p)[hi]
        for q in range(1, Q_max + 1):
            res = primes[hi] % q
            for chi in characters_mod(q):
                inc = sum_invp_hi - float((ck * np.conj(chi.table[res])).sum().real)
                if inc < PLATEAU_CAP:
                    prof = _distance_profile(gk, chi.values_at(primes), primes, P,
                                             0.0, f"{g.label}^{k}", chi.label,
                                             grid=grid)
                    return FindKResult(k=k, chi=chi, profile=prof)
    conc = concentration_analysis(g, max(P, 10 ** 3))
    if conc.verdict == "concentrated" and conc.group_size and conc.group_size <= k_max * 8:
        k = conc.group_size
        chi = principal_character(1)
        prof = _distance_profile(gp ** k, chi.values_at(primes), primes, P, 0.0,
                                 f"{g.label}^{k}", chi.label, grid=grid)
        return FindKResult(k=k, chi=chi, profile=prof, fallback=True)
    raise SearchError(
        f"no (k, chi) found for {g.label} with k <= {k_max}, modulus <= {Q_max}, "
        f"P = {P}; the bounds are knobs, failure does not refute existence"
    )


def _grid_two_decades_cut(grid) -> int:
    P = int(grid[-1])
    target = max(P // 100, min(100, P))
    cut = int(grid[0])
    for p in grid:
        if p <= target:
            cut = int(p)
    return cut


# --------------------------------------------------------------------------
# Structure pairs

@dataclass
class StructurePair:
    E: LevelSet
    R: LevelSet
    k: int | None
    chi: DirichletCharacter | None
    dE: float
    dR: float
    u_norms: list                # (N, s, value) triples
    rap: RapReport | None
    concentration: ConcentrationAnalysis | None
    u_mean: float
    notes: list = field(default_factory=list)


def structure_pair(f: MultiplicativeFunction, z, N: int, k_max: int = 8,
                   Q_max: int = 60, P: int = 10 ** 6, u_grid=None,
                   with_u3: bool = False) -> StructurePair:
    """Decompose the level set E(f, z): find g = zero-repaired f, the least
    k with g^k pretending to a character, the superset R = E(g^k, z^k), and
    score the relative-uniformity function u = dR 1_E - dE 1_R."""
    target = normalize_target(z)
    table = sieve_range(f, N)
    E = level_set(f, target, N, table=table)
    notes = []
    if isinstance(target, Zero):
        R = E
        k = None
        chi = None
        rap = None
        conc = None
        notes.append("z = 0: the level set is its own rational superset")
    else:
        if table.exact is None:
            raise InputError(
                f"structure_pair needs exact value codes; {f.label} has none"
            )
        g = zero_repair(f, target, N_check=min(N, 10 ** 4))
        conc = concentration_analysis(g, P)
        res = find_k_and_character(g, k_max=k_max, Q_max=Q_max, P=P)
        k, chi = res.k, res.chi
        if res.fallback:
            notes.append("(k, chi) from the concentration-group fallback")
        g_table = sieve_range(g, N) if g is not f else table
        if not np.array_equal(g_table.exact.member_mask(target)[: N + 1],
                              table.exact.member_mask(target)[: N + 1]):
            raise SearchError("zero repair altered the level set on [N]")
        zk = target ** k
        mask_R = g_table.exact.member_mask(zk, power=k)[: N + 1]
        R = LevelSet(source=f"{g.label}^{k}", z=zk, N=N,
                     members=_members_from_mask(mask_R), exact=True, function=g)
        rap = rap_test(g ** k, Q_max=Q_max, P=P)
    ind_E = E.indicator()
    ind_R = R.indicator()
    if not np.all(ind_R[ind_E]):
        raise SearchError("containment E ⊆ R failed; exact pipeline is inconsistent")
    dE, dR = E.density, R.density
    u = dR * ind_E.astype(np.float64) - dE * ind_R.astype(np.float64)
    if u_grid is None:
        u_grid = sorted({min(N, max(1 << 10, N // 16)), min(N, max(1 << 10, N // 4)), N})
    u_norms = []
    for n in u_grid:
        u_norms.append((int(n), 2, gowers_fast(u, int(n), 2)))
        if with_u3 and (1 << 3) * n <= 1 << 15:
            u_norms.append((int(n), 3, gowers_fast(u, int(n), 3)))
    u_mean = float(u[1 : N + 1].mean())
    return StructurePair(E=E, R=R, k=k, chi=chi, dE=dE, dR=dR, u_norms=u_norms,
                         rap=rap, concentration=conc, u_mean=u_mean, notes=notes)


# --------------------------------------------------------------------------
# Divisibility reports

@dataclass
class DivisibilityReport:
    set_name: str
    shift: int
    N: int
    rows: list                    # (u, count, density)
    verdict: str                  # divisible_evidence | not_divisible | inconclusive
    witness_u: int | None = None
    certificate: dict | None = None
    floor: float = 0.0
    weak_u: list = field(default_factory=list)


def divisibility_report(E: LevelSet, r: int, u_max: int, N: int | None = None,
                        floor: float = 1e-3) -> DivisibilityReport:
    """Densities of (E - r) ∩ uN for u <= u_max, with symbolic obstructions.

    A not_divisible verdict requires a residue obstruction certifying that
    the intersection is empty for structural reasons; a bare zero count only
    yields 'inconclusive' (finite emptiness does not imply density zero).
    """
    if r < 0:
        raise InputError(f"shift must be >= 0, got {r}")
    n = N if N is not None else E.N
    if r >= n / 2:
        raise InputError(f"shift r={r} too large for truncation N={n}")
    mem = E.members[(E.members > r) & (E.members <= n)]
    shifted = mem - r
    rows = []
    witness = None
    certificate = None
    weak = []
    for u in range(1, u_max + 1):
        count = int((shifted % u == 0).sum())
        dens = count / (n - r)
        rows.append((u, count, dens))
        if count == 0 and witness is None:
            cert = _residue_obstruction(E, r, u)
            if cert is not None:
                witness, certificate = u, cert
        if count > 0 and dens < floor:
            weak.append(u)
    if witness is not None:
        verdict = "not_divisible"
    elif all(c > 0 and c / (n - r) >= floor for _, c, _ in rows):
        verdict = "divisible_evidence"
    else:
        verdict = "inconclusive"
    return DivisibilityReport(set_name=E.source, shift=r, N=n, rows=rows,
                              verdict=verdict, witness_u=witness,
                              certificate=certificate, floor=floor, weak_u=weak)


def _squarefree_supported(f: MultiplicativeFunction | None) -> bool:
    if f is None:
        return False
    if f.kind == "squarefree_indicator":
        return True
    if f.kind == "omega_phase" and f.meta.get("squarefree_only"):
        return True
    return False


def _residue_obstruction(E: LevelSet, r: int, u: int) -> dict | None:
    """Symbolic proof that (E - r) ∩ uN is empty, when one exists."""
    f = E.function
    target = E.z
    # squarefree support: p^2 | u and p^2 | r force a square factor of n + r
    if _squarefree_supported(f) and not isinstance(target, Zero):
        for p, _ in _small_square_divisors(u):
            if r % (p * p) == 0:
                return {
                    "type": "square_factor",
                    "prime": p,
                    "statement": (
                        f"members are squarefree, but u ≡ 0 (mod {p*p}) and "
                        f"r ≡ 0 (mod {p*p}) force {p*p} | n + r for every n ∈ uN"
                    ),
                }
    # periodic constraint: members lie in fixed residue classes mod q
    if f is not None and f.kind == "periodic":
        chi = f.meta["char"]
        q = chi.modulus
        if isinstance(target, Zero):
            allowed = [s for s in range(q) if chi.expo[s] < 0]
        elif isinstance(target, RootOfUnity):
            code = None
            L = chi.expo_mod
            if L % target.den == 0:
                code = (target.num * (L // target.den)) % L
            allowed = [s for s in range(q) if code is not None and chi.expo[s] == code]
        else:
            allowed = list(range(q))
        gqu = math.gcd(q, u)
        if all((s - r) % gqu != 0 for s in allowed):
            return {
                "type": "progression_mismatch",
                "modulus": q,
                "statement": (
                    f"members fall in residues {allowed} mod {q}, none of which "
                    f"meets r + uN (gcd(q, u) = {gqu})"
                ),
            }
    return None


def _small_square_divisors(u: int):
    out = []
    p = 2
    while p * p <= u:
        if u % (p * p) == 0:
            out.append((p, 2))
        p += 1
    return out


# --------------------------------------------------------------------------
# S_P sets and random fixtures

def sp_set(prime_set, N: int) -> np.ndarray:
    """Squarefree integers <= N with every prime factor in the given set
    (1 included as the empty product).  prime_set: iterable or predicate."""
    ctx = get_context(N)
    mask = ctx.squarefree.copy()
    if callable(prime_set):
        excluded = [p for p in ctx.prime_list if not prime_set(p)]
    else:
        allowed = {int(p) for p in prime_set}
        excluded = [p for p in ctx.prime_list if p not in allowed]
    for p in excluded:
        mask[p::p] = False
    mask[0] = False
    if N >= 1:
        mask[1] = True
    return np.flatnonzero(mask).astype(np.int64)


def random_relative_subset(R: LevelSet, p: float, seed: int) -> LevelSet:
    """Keep each member of R independently with probability p (seeded PCG64)."""
    if not 0.0 <= p <= 1.0:
        raise InputError(f"probability must lie in [0, 1], got {p}")
    rng = np.random.default_rng(seed)
    keep = rng.random(len(R.members)) < p
    return LevelSet(source=f"random_subset({R.source}, p={p}, seed={seed})",
                    z=R.z, N=R.N, members=R.members[keep].copy(), exact=False,
                    function=None)

"""Dirichlet characters mod q: full group, induction, progression decomposition.

Characters are stored as dense value tables over the residues 0..q-1 together
with an exact exponent table: chi(n) = e(expo[n % q] / expo_mod) for residues
coprime to q, and 0 elsewhere.  The group is enumerated from the cyclic
decomposition of (Z/qZ)* via CRT; the exponent-vector ordering is
lexicographic, so the listing is deterministic and the principal character
always comes first.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .arith import factorize, root_table, totient
from .errors import InputError, ResourceError

__all__ = [
    "DirichletCharacter",
    "characters_mod",
    "principal_character",
    "induce",
    "indicator_decomposition",
]


@dataclass(eq=False)
class DirichletCharacter:
    """A Dirichlet character of modulus q, tabulated on residues 0..q-1."""

    modulus: int
    table: np.ndarray            # complex128, length q
    expo: np.ndarray             # int64, length q; -1 where gcd(n, q) > 1
    expo_mod: int                # chi(n) = e(expo[n]/expo_mod) on units
    order: int                   # smallest m with chi^m principal
    is_principal: bool
    index: int                   # position in the deterministic listing mod q

    def __call__(self, n: int) -> complex:
        return complex(self.table[n % self.modulus])

    def values_at(self, ns: np.ndarray) -> np.ndarray:
        """Vectorized chi(ns)."""
        return self.table[np.asarray(ns) % self.modulus]

    def conj_at(self, n: int) -> complex:
        return complex(np.conj(self.table[n % self.modulus]))

    @property
    def label(self) -> str:
        return f"chi[{self.modulus}.{self.index}]"

    def to_json(self) -> str:
        """Export per the wire format {modulus, values: [[re, im], ...]}."""
        vals = [[float(v.real), float(v.imag)] for v in self.table]
        return json.dumps({"modulus": self.modulus, "values": vals})

    def __repr__(self):
        kind = "principal" if self.is_principal else f"order {self.order}"
        return f"DirichletCharacter(mod {self.modulus}, #{self.index}, {kind})"


def _unit_group_structure(q: int) -> list[tuple[int, int]]:
    """Cyclic decomposition of (Z/qZ)* as (generator mod q, order) pairs.

    Generators are lifted through CRT so each is ≡ 1 modulo the other
    prime-power factors of q.
    """
    if q == 1:
        return []
    factors = []
    for p, a in factorize(q):
        pa = p ** a
        cof = q // pa
        if p == 2:
            if a == 1:
                continue
            if a == 2:
                factors.append((_crt_lift(3, pa, cof, q), 2))
            else:
                factors.append((_crt_lift(pa - 1, pa, cof, q), 2))
                factors.append((_crt_lift(5, pa, cof, q), pa // 4))
        else:
            g = _primitive_root_mod_prime_power(p, a)
            factors.append((_crt_lift(g, pa, cof, q), totient(pa)))
    return factors


def _crt_lift(g: int, pa: int, cof: int, q: int) -> int:
    """x ≡ g (mod pa), x ≡ 1 (mod cof)."""
    if cof == 1:
        return g % q
    inv = pow(pa, -1, cof)
    return (g + pa * ((1 - g) * inv % cof)) % q


def _primitive_root_mod_prime_power(p: int, a: int) -> int:
    phi_p = p - 1
    qs = [f for f, _ in factorize(phi_p)]
    g = 2
    while True:
        if all(pow(g, phi_p // f, p) != 1 for f in qs):
            break
        g += 1
    if a == 1:
        return g
    # lift to p^a: g works unless g^(p-1) ≡ 1 mod p^2
    if pow(g, phi_p, p * p) == 1:
        g += p
    return g


def _dlog_tables(q: int, gens: list[tuple[int, int]]) -> np.ndarray:
    """dlogs[i, n] = exponent of generator i in n, or 0 for non-units."""
    k = len(gens)
    dlogs = np.zeros((k, q), dtype=np.int64)
    # enumerate all units as products of generator powers
    idx = [0] * k
    x = 1
    total = math.prod(d for _, d in gens) if gens else 1
    seen = 0
    # iterate mixed-radix counter over exponent vectors
    while seen < total:
        for i in range(k):
            dlogs[i, x] = idx[i]
        seen += 1
        # increment
        j = 0
        while j < k:
            idx[j] += 1
            x = x * gens[j][0] % q
            if idx[j] < gens[j][1]:
                break
            # wrap: multiply by g^{-order} == back to exponent 0
            idx[j] = 0
            j += 1
        if j == k:
            break
    return dlogs


@lru_cache(maxsize=64)
def _group_data(q: int):
    gens = _unit_group_structure(q)
    dlogs = _dlog_tables(q, gens)
    orders = [d for _, d in gens]
    L = 1
    for d in orders:
        L = L * d // math.gcd(L, d)
    coprime = np.array([math.gcd(n, q) == 1 for n in range(q)], dtype=bool)
    if q == 1:
        coprime = np.array([True])
    return gens, dlogs, orders, max(L, 1), coprime


def characters_mod(q: int) -> list[DirichletCharacter]:
    """All phi(q) Dirichlet characters mod q, principal first, ordering fixed."""
    if q < 1:
        raise InputError(f"modulus must be >= 1, got {q}")
    if q > 10**6:
        raise InputError(f"modulus {q} above the supported bound 10^6")
    phi_q = totient(q)
    check = 16 * q * phi_q
    if check > 2 * 1024**3:
        raise ResourceError(f"character group mod {q} needs ~{check // 1024**2} MB of tables")
    return _characters_mod_cached(q)


@lru_cache(maxsize=32)
def _characters_mod_cached(q: int) -> list[DirichletCharacter]:
    gens, dlogs, orders, L, coprime = _group_data(q)
    roots = root_table(L)
    out = []
    exp_vectors = _lex_vectors(orders)
    for index, ev in enumerate(exp_vectors):
        expo = np.zeros(q, dtype=np.int64)
        for i, ei in enumerate(ev):
            expo += ei * (L // orders[i]) * dlogs[i]
        expo %= L
        expo[~coprime] = -1
        table = np.where(expo >= 0, roots[np.maximum(expo, 0)], 0.0)
        unit_expos = expo[coprime]
        g_all = 0
        for v in unit_expos:
            g_all = math.gcd(g_all, int(v))
        order = L // math.gcd(L, g_all) if g_all else 1
        table.flags.writeable = False
        expo.flags.writeable = False
        out.append(
            DirichletCharacter(
                modulus=q,
                table=table,
                expo=expo,
                expo_mod=L,
                order=order,
                is_principal=bool(order == 1),
                index=index,
            )
        )
    return out


def _lex_vectors(orders: list[int]):
    if not orders:
        return [()]
    out = [()]
    for d in orders:
        out = [v + (j,) for v in out for j in range(d)]
    # lexicographic in the original component order
    return sorted(out)


def principal_character(q: int) -> DirichletCharacter:
    return characters_mod(q)[0]


def induce(chi: DirichletCharacter, k: int) -> DirichletCharacter:
    """Induce chi of modulus d to modulus k (requires d | k): chi' = chi * chi_1."""
    d = chi.modulus
    if k < 1 or k % d != 0:
        raise InputError(f"cannot induce modulus {d} to {k}: {d} does not divide {k}")
    table = np.zeros(k, dtype=np.complex128)
    expo = np.full(k, -1, dtype=np.int64)
    for n in range(k):
        if math.gcd(n, k) == 1:
            table[n] = chi.table[n % d]
            expo[n] = chi.expo[n % d]
    if k == 1:
        table[0] = 1.0
        expo[0] = 0
    unit = expo[expo >= 0]
    g_all = 0
    for v in unit:
        g_all = math.gcd(g_all, int(v))
    order = chi.expo_mod // math.gcd(chi.expo_mod, g_all) if g_all else 1
    return DirichletCharacter(
        modulus=k,
        table=table,
        expo=expo,
        expo_mod=chi.expo_mod,
        order=order,
        is_principal=bool(order == 1),
        index=-1,
    )


def indicator_decomposition(q: int, r: int) -> list[tuple[DirichletCharacter, complex]]:
    """Write 1_{n ≡ r (mod q)} = sum over chi mod q of coeff * chi(n).

    Valid for gcd(q, r) = 1; the coefficient of chi is conj(chi(r)) / phi(q).
    """
    if q < 1:
        raise InputError(f"modulus must be >= 1, got {q}")
    if math.gcd(q, r) != 1:
        raise InputError(
            f"indicator decomposition undefined for gcd({q}, {r}) = {math.gcd(q, r)} > 1"
        )
    chars = characters_mod(q)
    phi_q = len(chars)
    return [(chi, chi.conj_at(r) / phi_q) for chi in chars]

"""Multiplicative functions: prime-power rules, linear sieving, builtin catalog.

A MultiplicativeFunction is defined by its values on prime powers.  Pointwise
evaluation factors n and multiplies rule values; bulk evaluation sieves
[1, N] in O(N) slice work per prime power.  Catalog entries with rational
phase parameters additionally carry an exact finite-alphabet representation
(ExactCodes): every nonzero value is e(code/order), value 0 is code -1.
Level-set extraction downstream is integer-exact through these codes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable

import numpy as np

from .arith import (
    RootOfUnity,
    Zero,
    check_budget,
    e,
    factorize,
    get_context,
    is_prime,
    root_table,
)
from .errors import InputError
from . import characters as characters_mod_pkg

__all__ = [
    "PrimePowerSpec",
    "MultiplicativeFunction",
    "SieveTable",
    "ExactCodes",
    "RadicalCodes",
    "eval_at",
    "sieve_range",
    "builtin",
    "BUILTIN_NAMES",
    "parse_custom_file",
    "make_repaired",
]

_MOD_BOUND = 1.0 + 1e-12


@dataclass(frozen=True, eq=False)
class PrimePowerSpec:
    """Rule f(p^k) for primes p and exponents k >= 1; f(1) = 1 is implied."""

    rule: Callable[[int, int], complex]
    completely_multiplicative: bool = False
    unbounded: bool = False


@dataclass(frozen=True, eq=False)
class MultiplicativeFunction:
    name: str
    spec: PrimePowerSpec
    params: dict = field(default_factory=dict)
    kind: str = "generic"
    meta: dict = field(default_factory=dict)

    @property
    def label(self) -> str:
        if not self.params:
            return self.name
        parts = ",".join(f"{k}={_fmt_param(v)}" for k, v in sorted(self.params.items()))
        return f"{self.name}({parts})"

    def __call__(self, n: int) -> complex:
        return eval_at(self, n)

    def __pow__(self, k: int) -> "MultiplicativeFunction":
        if not isinstance(k, int) or k < 1:
            raise InputError(f"function powers must be positive integers, got {k}")
        if k == 1:
            return self
        base = self

        def rule(p, kk):
            return _ppval(base, p, kk) ** k

        return MultiplicativeFunction(
            name=f"{self.name}^{k}",
            spec=PrimePowerSpec(rule, self.spec.completely_multiplicative, self.spec.unbounded),
            params=dict(self.params),
            kind="power",
            meta={"base": base, "k": k},
        )

    def prime_values(self, ps: np.ndarray) -> np.ndarray:
        """Vectorized f(p) over an array of primes."""
        return _prime_values(self, np.asarray(ps, dtype=np.int64))

    def __repr__(self):
        return f"MultiplicativeFunction({self.label})"


def _fmt_param(v) -> str:
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    return str(v)


def _ppval(f: MultiplicativeFunction, p: int, k: int) -> complex:
    if f.spec.completely_multiplicative:
        v = complex(f.spec.rule(p, 1)) ** k
    else:
        v = complex(f.spec.rule(p, k))
    if not f.spec.unbounded and abs(v) > _MOD_BOUND:
        raise InputError(f"{f.label}({p}^{k}) = {v} breaks the |f| <= 1 modulus bound")
    return v


# --------------------------------------------------------------------------
# Exact representations attached to sieve tables

@dataclass(eq=False)
class ExactCodes:
    """Finite-alphabet value codes: codes[n] = -1 means f(n) = 0, a code
    j >= 0 means f(n) = e(j/order).  The optional yexp array counts repaired
    prime-power factors (see zero repair); entries with yexp > 0 carry an
    off-alphabet factor y^yexp and never match a root-of-unity target."""

    order: int
    codes: np.ndarray
    yexp: np.ndarray | None = None

    def code_of(self, z: RootOfUnity) -> int | None:
        if self.order % z.den != 0:
            return None
        return (z.num * (self.order // z.den)) % self.order

    def value_of_code(self, c: int) -> complex:
        if c < 0:
            return 0j
        return complex(root_table(self.order)[c % self.order])

    def member_mask(self, target, power: int = 1) -> np.ndarray:
        """Boolean mask over 0..N of {n : f(n)^power == target}."""
        if power < 1:
            raise InputError(f"power must be >= 1, got {power}")
        if isinstance(target, Zero):
            if self.yexp is not None:
                return np.zeros(len(self.codes), dtype=bool)
            m = self.codes == -1
            m[0] = False
            return m
        if not isinstance(target, RootOfUnity):
            raise InputError(f"exact membership needs a root of unity or 0, got {target!r}")
        j = self.code_of(target)
        if j is None:
            return np.zeros(len(self.codes), dtype=bool)
        m = self.codes >= 0
        m &= (self.codes.astype(np.int64) * power - j) % self.order == 0
        if self.yexp is not None:
            m &= self.yexp == 0
        m[0] = False
        return m


@dataclass(eq=False)
class RadicalCodes:
    """Exact codes for phi(n)/n: the value is determined by rad(n)."""

    radical: np.ndarray

    def member_mask(self, target, power: int = 1) -> np.ndarray:
        if power != 1:
            raise InputError("exact level sets of powered ratio functions are unsupported")
        if isinstance(target, Zero):
            return np.zeros(len(self.radical), dtype=bool)
        if isinstance(target, RootOfUnity):
            target = Fraction(1, 1) if target.den == 1 else None
        if not isinstance(target, Fraction):
            return np.zeros(len(self.radical), dtype=bool)
        r = self.radical_for_ratio(target)
        if r is None or r > len(self.radical) - 1:
            return np.zeros(len(self.radical), dtype=bool)
        m = self.radical == r
        m[0] = False
        return m

    @staticmethod
    def radical_for_ratio(fr: Fraction) -> int | None:
        """The unique squarefree r with phi(r)/r == fr, if one exists."""
        if fr <= 0 or fr > 1:
            return None
        r = 1
        for _ in range(64):
            if fr == 1:
                return r
            p = max(q for q, _ in factorize(fr.denominator))
            if r % p == 0:
                return None
            fr = fr * p / (p - 1)
            r *= p
        return None


@dataclass(eq=False)
class SieveTable:
    """Dense values of f on [1, N] plus the smallest-prime-factor array."""

    N: int
    values: np.ndarray
    spf: np.ndarray
    source: str
    exact: ExactCodes | RadicalCodes | None = None
    function: MultiplicativeFunction | None = None


# --------------------------------------------------------------------------
# Pointwise evaluation

def prime_power_value(f: MultiplicativeFunction, p: int, k: int) -> complex:
    """f(p^k) from the rule, honoring complete multiplicativity and bounds."""
    return _ppval(f, p, k)


def eval_at(f: MultiplicativeFunction, n: int) -> complex:
    """f(n) via factorization of n; exact 1 at n = 1."""
    if not isinstance(n, (int, np.integer)):
        raise InputError(f"eval_at needs an integer, got {type(n).__name__}")
    n = int(n)
    if n < 1:
        raise InputError(f"eval_at needs n >= 1, got {n}")
    if n == 1:
        return 1 + 0j
    out = 1 + 0j
    for p, k in factorize(n):
        out *= _ppval(f, p, k)
    return out


# --------------------------------------------------------------------------
# Bulk sieving

def sieve_range(f: MultiplicativeFunction, N: int) -> SieveTable:
    """Tabulate f on [1, N].

    Dispatches on the catalog kind: additive-statistic kernels for the
    Omega/omega/squarefree family, residue tables for periodic functions,
    and a generic prime-power pass otherwise.  Exact codes are attached
    whenever the kind supports them.
    """
    if N < 1:
        raise InputError(f"sieve bound must be >= 1, got {N}")
    check_budget(30 * (N + 1), f"sieve of {f.label} to N={N}")
    ctx = get_context(N)
    builder = _SIEVE_BUILDERS.get(f.kind, _sieve_generic)
    values, exact = builder(f, N, ctx)
    values[0] = 0
    if not f.spec.unbounded:
        peak = float(np.abs(values).max())
        if peak > _MOD_BOUND:
            raise InputError(f"{f.label} exceeds the |f| <= 1 modulus bound (max {peak})")
    values.flags.writeable = False
    return SieveTable(N=N, values=values, spf=ctx.spf, source=f.label, exact=exact, function=f)


def _codes_to_values(codes: np.ndarray, order: int) -> np.ndarray:
    roots = root_table(order)
    vals = roots[np.maximum(codes, 0) % order]
    vals[codes < 0] = 0
    return vals


def _sieve_omega_phase(f, N, ctx, stat_attr="big_omega"):
    stat = getattr(ctx, stat_attr)
    sqf_only = f.meta.get("squarefree_only", False)
    if "b" in f.meta:
        a, b = f.meta["a"], f.meta["b"]
        codes = ((stat.astype(np.int64) * a) % b).astype(np.int32)
        if sqf_only:
            codes[~ctx.squarefree] = -1
        codes[0] = -1
        values = _codes_to_values(codes, b)
        return values, ExactCodes(order=b, codes=codes)
    xi = f.meta["xi"]
    values = e(xi * stat.astype(np.float64))
    if sqf_only:
        values[~ctx.squarefree] = 0
    return values, None


def _sieve_small_omega_phase(f, N, ctx):
    return _sieve_omega_phase(f, N, ctx, stat_attr="small_omega")


def _sieve_squarefree(f, N, ctx):
    sq = ctx.squarefree
    codes = np.where(sq, 0, -1).astype(np.int32)
    codes[0] = -1
    values = sq.astype(np.complex128)
    return values, ExactCodes(order=1, codes=codes)


def _sieve_phi_ratio(f, N, ctx):
    v = np.ones(N + 1, dtype=np.float64)
    for p in ctx.prime_list:
        v[p::p] *= 1.0 - 1.0 / p
    return v.astype(np.complex128), RadicalCodes(radical=ctx.radical)


def _tile(table: np.ndarray, N: int) -> np.ndarray:
    q = len(table)
    reps = (N + 1 + q - 1) // q
    return np.tile(table, reps)[: N + 1]


def _sieve_periodic(f, N, ctx):
    chi = f.meta["char"]
    values = _tile(chi.table, N)
    codes = _tile(chi.expo, N).astype(np.int32)
    codes[0] = -1 if chi.modulus > 1 else codes[0]
    return values.copy(), ExactCodes(order=chi.expo_mod, codes=codes)


def _sieve_tau_character(f, N, ctx):
    chi = f.meta["char"]
    b = chi.modulus
    tmod = (ctx.tau % b).astype(np.int64)
    codes = chi.expo[tmod].astype(np.int32)
    codes[0] = -1
    values = chi.table[tmod]
    values[0] = 0
    return values, ExactCodes(order=chi.expo_mod, codes=codes)


def _sieve_repaired(f, N, ctx):
    base = f.meta["base"]
    y = f.meta["y"]
    order = exact_order(base)
    if order is None:
        return _sieve_generic(f, N, ctx)
    root = np.zeros(N + 1, dtype=np.int32)
    yexp = np.zeros(N + 1, dtype=np.int8)
    for p in ctx.prime_list:
        pe, eexp = p, 1
        prev_c, prev_z = 0, 0
        while pe <= N:
            c = ppow_code(base, p, eexp)
            z = 1 if c is None else 0
            cc = 0 if c is None else c
            # telescoped deltas: after all powers, an exact-exponent-e slot
            # accumulates code(p, e) and the zero count for (p, e)
            dc, dz = cc - prev_c, z - prev_z
            if dc:
                root[pe::pe] += dc
            if dz:
                yexp[pe::pe] += dz
            prev_c, prev_z = cc, z
            pe *= p
            eexp += 1
    root %= order
    codes = root
    codes[0] = -1
    values = _codes_to_values(codes, order).astype(np.complex128)
    has_y = yexp > 0
    values[has_y] = values[has_y] * (y ** yexp[has_y].astype(np.float64))
    return values, ExactCodes(order=order, codes=codes, yexp=yexp)


def _sieve_generic(f, N, ctx):
    values = np.ones(N + 1, dtype=np.complex128)
    for p in ctx.prime_list:
        vs = []
        pe = p
        while pe <= N:
            vs.append(_ppval(f, p, len(vs) + 1))
            pe *= p
        if all(v == 1 for v in vs):
            continue
        pathological = any(vs[i] == 0 and vs[i + 1] != 0 for i in range(len(vs) - 1))
        if not pathological:
            prev = 1 + 0j
            pe = p
            for v in vs:
                if prev == 0:
                    break
                r = v / prev
                if r != 1:
                    values[pe::pe] *= r
                prev = v
                pe *= p
        else:
            # exact-exponent assignment; needed when a zero value is followed
            # by a nonzero one at a higher power of the same prime
            pe = p
            for eexp, v in enumerate(vs, start=1):
                idx = np.arange(pe, N + 1, pe)
                if pe * p <= N:
                    idx = idx[(idx // pe) % p != 0]
                values[idx] *= v
                pe *= p
    return values, None


_SIEVE_BUILDERS = {
    "omega_phase": _sieve_omega_phase,
    "small_omega_phase": _sieve_small_omega_phase,
    "squarefree_indicator": _sieve_squarefree,
    "phi_ratio": _sieve_phi_ratio,
    "periodic": _sieve_periodic,
    "tau_character": _sieve_tau_character,
    "repaired": _sieve_repaired,
}


# --------------------------------------------------------------------------
# Exact prime-power codes (for zero repair and level-set machinery)

def exact_order(f: MultiplicativeFunction) -> int | None:
    """Alphabet size of f's exact root-of-unity representation, if any."""
    if f.kind in ("omega_phase", "small_omega_phase") and "b" in f.meta:
        return f.meta["b"]
    if f.kind == "squarefree_indicator":
        return 1
    if f.kind in ("periodic", "tau_character"):
        return f.meta["char"].expo_mod
    if f.kind == "repaired":
        return exact_order(f.meta["base"])
    return None


def ppow_code(f: MultiplicativeFunction, p: int, k: int) -> int | None:
    """Exact code of f(p^k), or None when f(p^k) = 0."""
    kind = f.kind
    if kind == "omega_phase" and "b" in f.meta:
        if f.meta.get("squarefree_only") and k >= 2:
            return None
        return (f.meta["a"] * k) % f.meta["b"]
    if kind == "small_omega_phase" and "b" in f.meta:
        return f.meta["a"] % f.meta["b"]
    if kind == "squarefree_indicator":
        return None if k >= 2 else 0
    if kind == "periodic":
        chi = f.meta["char"]
        ex = int(chi.expo[pow(p, k, chi.modulus)])
        return None if ex < 0 else ex
    if kind == "tau_character":
        chi = f.meta["char"]
        ex = int(chi.expo[(k + 1) % chi.modulus])
        return None if ex < 0 else ex
    if kind == "repaired":
        raise InputError("repaired functions are not repaired twice")
    raise InputError(f"{f.label} has no exact prime-power codes")


def zero_free(f: MultiplicativeFunction) -> bool:
    """True when the kind structurally excludes zero values."""
    if f.kind in ("omega_phase", "small_omega_phase"):
        return not f.meta.get("squarefree_only", False)
    if f.kind == "phi_ratio":
        return True
    if f.kind == "periodic":
        return f.meta["char"].modulus == 1
    if f.kind == "repaired":
        return True
    if f.kind == "power":
        return zero_free(f.meta["base"])
    return False


def make_repaired(base: MultiplicativeFunction, y: complex, gamma: float) -> MultiplicativeFunction:
    """f with zero prime-power values replaced by the fixed unimodular y."""

    def rule(p, k):
        v = _ppval(base, p, k)
        return v if v != 0 else y

    return MultiplicativeFunction(
        name=f"{base.name}#repaired",
        spec=PrimePowerSpec(rule, completely_multiplicative=False,
                            unbounded=base.spec.unbounded),
        params=dict(base.params, y_gamma=gamma),
        kind="repaired",
        meta={"base": base, "y": y, "gamma": gamma},
    )


# --------------------------------------------------------------------------
# Vectorized values at primes

def _prime_values(f: MultiplicativeFunction, ps: np.ndarray) -> np.ndarray:
    kind = f.kind
    if kind in ("omega_phase", "small_omega_phase"):
        if "b" in f.meta:
            v = root_table(f.meta["b"])[f.meta["a"] % f.meta["b"]]
        else:
            v = complex(e(f.meta["xi"]))
        return np.full(len(ps), v, dtype=np.complex128)
    if kind == "squarefree_indicator":
        return np.ones(len(ps), dtype=np.complex128)
    if kind == "phi_ratio":
        return (1.0 - 1.0 / ps).astype(np.complex128)
    if kind == "periodic":
        return f.meta["char"].values_at(ps)
    if kind == "tau_character":
        return np.full(len(ps), complex(f.meta["char"](2)), dtype=np.complex128)
    if kind == "repaired":
        base_vals = _prime_values(f.meta["base"], ps)
        return np.where(base_vals == 0, f.meta["y"], base_vals)
    if kind == "power":
        return _prime_values(f.meta["base"], ps) ** f.meta["k"]
    return np.array([_ppval(f, int(p), 1) for p in ps], dtype=np.complex128)


# --------------------------------------------------------------------------
# Builtin catalog

BUILTIN_NAMES = (
    "liouville",
    "moebius",
    "lambda_xi",
    "mu_xi",
    "kappa_xi",
    "mu_squared",
    "phi_over_n",
    "dirichlet_character",
    "chi_of_tau",
    "custom_file",
)


def _parse_xi(raw) -> Fraction | float:
    if isinstance(raw, Fraction):
        return raw
    if isinstance(raw, int):
        return Fraction(raw, 1)
    if isinstance(raw, float):
        return raw
    if isinstance(raw, str):
        s = raw.strip()
        if "/" in s:
            a, b = s.split("/", 1)
            return Fraction(int(a), int(b))
        try:
            return Fraction(int(s), 1)
        except ValueError:
            return float(s)
    raise InputError(f"cannot parse phase parameter xi from {raw!r}")


def _phase_meta(xi) -> dict:
    if isinstance(xi, Fraction):
        return {"a": xi.numerator % xi.denominator, "b": xi.denominator}
    return {"xi": float(xi)}


def _xi_value(xi) -> complex:
    if isinstance(xi, Fraction):
        return complex(root_table(xi.denominator)[xi.numerator % xi.denominator])
    return complex(e(float(xi)))


def builtin(name: str, params: dict | None = None) -> MultiplicativeFunction:
    """Catalog constructor; see BUILTIN_NAMES for the available keys."""
    params = dict(params or {})
    if name == "liouville":
        return MultiplicativeFunction(
            "liouville",
            PrimePowerSpec(lambda p, k: -1.0, completely_multiplicative=True),
            kind="omega_phase",
            meta={"a": 1, "b": 2},
        )
    if name == "moebius":
        return MultiplicativeFunction(
            "moebius",
            PrimePowerSpec(lambda p, k: -1.0 if k == 1 else 0.0),
            kind="omega_phase",
            meta={"a": 1, "b": 2, "squarefree_only": True},
        )
    if name == "lambda_xi":
        xi = _parse_xi(params.get("xi"))
        v = _xi_value(xi)
        return MultiplicativeFunction(
            "lambda_xi",
            PrimePowerSpec(lambda p, k: v, completely_multiplicative=True),
            params={"xi": xi},
            kind="omega_phase",
            meta=_phase_meta(xi),
        )
    if name == "mu_xi":
        xi = _parse_xi(params.get("xi"))
        v = _xi_value(xi)
        return MultiplicativeFunction(
            "mu_xi",
            PrimePowerSpec(lambda p, k: v if k == 1 else 0.0),
            params={"xi": xi},
            kind="omega_phase",
            meta=dict(_phase_meta(xi), squarefree_only=True),
        )
    if name == "kappa_xi":
        xi = _parse_xi(params.get("xi"))
        v = _xi_value(xi)
        return MultiplicativeFunction(
            "kappa_xi",
            PrimePowerSpec(lambda p, k: v),
            params={"xi": xi},
            kind="small_omega_phase",
            meta=_phase_meta(xi),
        )
    if name == "mu_squared":
        return MultiplicativeFunction(
            "mu_squared",
            PrimePowerSpec(lambda p, k: 1.0 if k == 1 else 0.0),
            kind="squarefree_indicator",
        )
    if name == "phi_over_n":
        return MultiplicativeFunction(
            "phi_over_n",
            PrimePowerSpec(lambda p, k: 1.0 - 1.0 / p),
            kind="phi_ratio",
        )
    if name == "dirichlet_character":
        q = int(params.get("modulus", 1))
        index = int(params.get("index", 0))
        chars = characters_mod_pkg.characters_mod(q)
        if not 0 <= index < len(chars):
            raise InputError(f"character index {index} out of range for modulus {q} "
                             f"(phi({q}) = {len(chars)})")
        chi = chars[index]
        return MultiplicativeFunction(
            "dirichlet_character",
            PrimePowerSpec(lambda p, k: complex(chi(p)), completely_multiplicative=True),
            params={"modulus": q, "index": index},
            kind="periodic",
            meta={"char": chi},
        )
    if name == "chi_of_tau":
        b = int(params.get("modulus", 0))
        if not _cyclic_unit_group(b):
            raise InputError(
                f"chi_of_tau needs modulus b in {{2, 4, p, 2p}} (p an odd prime) so that "
                f"the multiplicative group mod b is cyclic; got b = {b}"
            )
        chars = characters_mod_pkg.characters_mod(b)
        phi_b = len(chars)
        gen = next(c for c in chars if c.order == phi_b)
        return MultiplicativeFunction(
            "chi_of_tau",
            PrimePowerSpec(lambda p, k: complex(gen(k + 1))),
            params={"modulus": b, "index": gen.index},
            kind="tau_character",
            meta={"char": gen},
        )
    if name == "custom_file":
        path = params.get("path")
        if not path:
            raise InputError("custom_file needs a 'path' parameter")
        rule_map, default = parse_custom_file(path)
        dv = 0.0 if default == "zero" else 1.0

        def rule(p, k):
            return rule_map.get((p, k), dv)

        return MultiplicativeFunction(
            "custom_file",
            PrimePowerSpec(rule),
            params={"path": str(path), "default": default},
            kind="generic",
            meta={"rule_map": rule_map, "default": default},
        )
    raise InputError(f"unknown builtin {name!r}; known: {', '.join(BUILTIN_NAMES)}")


def _cyclic_unit_group(b: int) -> bool:
    if b in (2, 4):
        return True
    if b > 2 and b % 2 == 1:
        return is_prime(b)
    if b % 2 == 0 and (b // 2) % 2 == 1 and b // 2 > 1:
        return is_prime(b // 2)
    return False


def parse_custom_file(path) -> tuple[dict[tuple[int, int], complex], str]:
    """Parse the custom-function file format.

    One line per prime power: ``p k re im`` (whitespace separated), ``#``
    comments, optional header ``default: zero|one`` controlling unlisted
    prime powers (default one).
    """
    rule_map: dict[tuple[int, int], complex] = {}
    default = "one"
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if body.lower().startswith("default:"):
            default = body.split(":", 1)[1].strip().lower()
            if default not in ("zero", "one"):
                raise InputError(f"{path}:{lineno}: default must be 'zero' or 'one'")
            continue
        parts = body.split()
        if len(parts) != 4:
            raise InputError(f"{path}:{lineno}: expected 'p k re im', got {body!r}")
        p, k = int(parts[0]), int(parts[1])
        if not is_prime(p):
            raise InputError(f"{path}:{lineno}: {p} is not prime")
        if k < 1:
            raise InputError(f"{path}:{lineno}: exponent must be >= 1, got {k}")
        if (p, k) in rule_map:
            raise InputError(f"{path}:{lineno}: duplicate entry for {p}^{k}")
        rule_map[(p, k)] = complex(float(parts[2]), float(parts[3]))
    return rule_map, default

"""Exact algebra of index sets and polyhomogeneous expansions.

An index set is a subset of R x N closed under lowering the log-exponent and
raising the power by one, with finitely many elements below any power.  Since
the full sets are infinite, every value here carries an explicit truncation
order C and materializes only the members with power <= C.

Expansions are finite sums of terms coeff * x^z * log^k(x) together with an
error order: everything omitted is o(x^(error_order - eps)).  The central
operation is the coefficient-transport recursion that inverts the Euler
operator (x d/dx - c) term by term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Union

Scalar = Union[int, float, Fraction]

#: tolerance for grouping float powers that should be equal
Z_TOL = 1e-12
#: relative magnitude below which merged expansion coefficients are pruned
COEFF_PRUNE = 1e-14
#: guard against runaway materialization
MAX_ENTRIES = 200_000


class IndexSetError(ValueError):
    pass


def _as_power(z: Scalar) -> Scalar:
    """Keep exact rationals exact; leave floats as floats."""
    if isinstance(z, bool):
        raise TypeError("boolean power")
    if isinstance(z, (int, Fraction)):
        return Fraction(z)
    if isinstance(z, float):
        return z
    raise TypeError(f"unsupported power type {type(z)!r}")


def _same_power(z1: Scalar, z2: Scalar) -> bool:
    if isinstance(z1, Fraction) and isinstance(z2, Fraction):
        return z1 == z2
    return abs(float(z1) - float(z2)) <= Z_TOL


def _power_key(z: Scalar) -> int:
    """Hashable grouping key, quantized at Z_TOL (powers here are O(10))."""
    return int(round(float(z) / Z_TOL))


def _merge_powers(zs: Iterable[Scalar]) -> list[Scalar]:
    """Canonical sorted list of distinct powers, grouping floats within Z_TOL."""
    out: list[Scalar] = []
    for z in sorted(zs, key=float):
        if out and _same_power(out[-1], z):
            continue
        out.append(z)
    return out


@dataclass(frozen=True)
class IndexSet:
    """Finite truncation of an index set.

    ``entries`` is the full materialized set {(z, k) : z <= truncation},
    canonically sorted; the closure invariants are enforced on construction.
    """

    entries: tuple
    truncation: Scalar

    def __post_init__(self):
        ent = tuple(sorted(self.entries, key=lambda t: (float(t[0]), t[1])))
        object.__setattr__(self, "entries", ent)
        self._validate()

    def _validate(self):
        C = self.truncation
        if len(self.entries) > MAX_ENTRIES:
            raise IndexSetError("index set accumulates too many entries below truncation")
        keys = {(_power_key(z), k) for (z, k) in self.entries}
        object.__setattr__(self, "_keys", keys)
        for (z, k) in self.entries:
            if k < 0 or k != int(k):
                raise IndexSetError(f"log exponent must be a natural number, got {k}")
            if float(z) > float(C) + Z_TOL:
                raise IndexSetError(f"entry power {z} exceeds truncation {C}")
            if k >= 1 and (_power_key(z), k - 1) not in keys:
                raise IndexSetError(f"closure E.1 violated at ({z},{k})")
            if float(z) + 1 <= float(C) + Z_TOL and (_power_key(z + 1), k) not in keys:
                raise IndexSetError(f"closure E.2 violated at ({z},{k})")

    def __contains__(self, pair) -> bool:
        z, k = pair
        return (_power_key(_as_power(z)), k) in self._keys

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def powers(self) -> list[Scalar]:
        return _merge_powers(z for z, _ in self.entries)

    def max_log(self, z) -> int:
        ks = [k for (z2, k) in self.entries if _same_power(z2, z)]
        if not ks:
            raise KeyError(z)
        return max(ks)

    def generators(self) -> list[tuple]:
        """Minimal entries: none dominated by another (z' <= z and k' >= k)."""
        gens = []
        for (z, k) in self.entries:
            dominated = any(
                (float(z2) < float(z) - Z_TOL or (_same_power(z2, z) and k2 > k))
                and k2 >= k
                for (z2, k2) in self.entries
                if (z2, k2) != (z, k)
            )
            if not dominated:
                gens.append((z, k))
        return gens

    def to_json_dict(self) -> dict:
        return {
            "terms": [{"z": _power_json(z), "k": k} for (z, k) in self.entries],
            "truncation": _power_json(self.truncation),
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "IndexSet":
        ent = tuple((_power_from_json(t["z"]), int(t["k"])) for t in d["terms"])
        return cls(ent, _power_from_json(d["truncation"]))


def _power_json(z: Scalar):
    if isinstance(z, Fraction):
        return str(z) if z.denominator != 1 else int(z)
    return z


def _power_from_json(v) -> Scalar:
    if isinstance(v, str):
        return Fraction(v)
    if isinstance(v, int):
        return Fraction(v)
    return float(v)


def closure(raw: Iterable[tuple], C: Scalar) -> IndexSet:
    """Smallest index set containing ``raw``, truncated at C (the overline hull).

    The closure of a single (z, k) is {(z + n, k') : n in N, k' <= k}.
    """
    C = _as_power(C)
    mat: dict = {}  # (key, k) -> (z, k) with a preferred exact representative
    for (z, k) in raw:
        z = _as_power(z)
        if k < 0 or k != int(k):
            raise IndexSetError(f"log exponent must be a natural number, got {k}")
        n = 0
        while float(z) + n <= float(C) + Z_TOL:
            zn = z + n
            for kp in range(int(k) + 1):
                key = (_power_key(zn), kp)
                prev = mat.get(key)
                if prev is None or (
                    isinstance(zn, Fraction) and not isinstance(prev[0], Fraction)
                ):
                    mat[key] = (zn, kp)
            if len(mat) > MAX_ENTRIES:
                raise IndexSetError("closure accumulates infinitely below truncation")
            n += 1
    return IndexSet(tuple(mat.values()), C)


def ebar_union(e1: IndexSet, e2: IndexSet) -> IndexSet:
    """The bar-union: closure of e1, e2 and all (z, k) with matching power
    z in both sets and k <= k1 + k2 + 1."""
    C = min(e1.truncation, e2.truncation, key=float)
    raw = ebar_union_raw(e1.entries, e2.entries)
    return closure(raw, C)


def ebar_union_raw(s1: Iterable[tuple], s2: Iterable[tuple]) -> set:
    """Bar-union generator set for arbitrary (possibly non-closed) inputs.

    Exposed separately because the operation is only associative on genuine
    index sets; raw sets demonstrate the failure.
    """
    s1 = {( _as_power(z), int(k)) for (z, k) in s1}
    s2 = {( _as_power(z), int(k)) for (z, k) in s2}
    mixed = set()
    for (z1, k1) in s1:
        for (z2, k2) in s2:
            if _same_power(z1, z2):
                for k in range(k1 + k2 + 2):
                    mixed.add((z1, k))
    return mixed | s1 | s2


def sum_sets(e1: IndexSet, e2: IndexSet) -> IndexSet:
    """Elementwise sum {(z1+z2, k1+k2)}.

    Complete below min(C1 + min z2, C2 + min z1): a sum power beyond that
    could receive contributions from unmaterialized entries.
    """
    if not e1.entries or not e2.entries:
        C = min(e1.truncation, e2.truncation, key=float)
        return IndexSet((), C)
    z1min, _ = min_element(e1)
    z2min, _ = min_element(e2)
    C = min(e1.truncation + z2min, e2.truncation + z1min, key=float)
    raw = set()
    for (z1, k1) in e1.entries:
        for (z2, k2) in e2.entries:
            z = z1 + z2
            if float(z) <= float(C) + Z_TOL:
                raw.add((z, k1 + k2))
    # a sum of index sets is already an index set below C; closure canonicalizes
    return closure(raw, C)


def shift(e: IndexSet, dz: Scalar) -> IndexSet:
    dz = _as_power(dz)
    ent = tuple((z + dz, k) for (z, k) in e.entries)
    return IndexSet(ent, e.truncation + dz)


def truncate_below(e: IndexSet, c: Scalar, cmp: str = "<=") -> IndexSet:
    """Filter entries by comparing powers with c (the E_{bullet c} operation).

    The stored truncation shrinks where needed so the filtered set remains a
    valid finite view: filtering from above caps the truncation at c, and the
    slices for >=, > stay closed within the original truncation.
    """
    c = _as_power(c)
    ops = {
        "<=": lambda z: float(z) <= float(c) + Z_TOL,
        "<": lambda z: float(z) < float(c) - Z_TOL,
        ">=": lambda z: float(z) >= float(c) - Z_TOL,
        ">": lambda z: float(z) > float(c) + Z_TOL,
        "==": lambda z: _same_power(z, c),
    }
    if cmp not in ops:
        raise ValueError(f"unknown comparison {cmp!r}")
    ent = tuple((z, k) for (z, k) in e.entries if ops[cmp](z))
    if cmp in ("<=", "=="):
        trunc = min(e.truncation, c, key=float)
    elif cmp == "<":
        trunc = max((z for (z, _) in ent), key=float, default=c)
    else:
        trunc = e.truncation
    return IndexSet(ent, trunc)


def min_element(e: IndexSet) -> tuple:
    """Smallest power; ties resolved toward the largest log exponent."""
    if not e.entries:
        raise IndexSetError("min of empty index set")
    zmin = e.entries[0][0]
    kmax = max(k for (z, k) in e.entries if _same_power(z, zmin))
    return (zmin, kmax)


# ---------------------------------------------------------------------------
# Expansions
# ---------------------------------------------------------------------------


def _merge_terms(terms: Iterable[tuple]) -> tuple:
    acc: dict = {}
    rep: dict = {}
    for (z, k, c) in terms:
        z = _as_power(z)
        if k < 0 or k != int(k):
            raise ValueError(f"log exponent must be a natural number, got {k}")
        key = (_power_key(z), int(k))
        acc[key] = acc.get(key, 0.0) + c
        if key not in rep or (isinstance(z, Fraction) and not isinstance(rep[key], Fraction)):
            rep[key] = z
    if not acc:
        return ()
    cmax = max(abs(float(c)) for c in acc.values())
    if cmax == 0.0:
        return ()
    out = [
        (rep[key], key[1], c)
        for key, c in acc.items()
        if abs(float(c)) > COEFF_PRUNE * cmax
    ]
    out.sort(key=lambda t: (float(t[0]), t[1]))
    return tuple(out)


@dataclass(frozen=True)
class Expansion:
    """Finite expansion sum_i coeff_i x^{z_i} log^{k_i} x + o(x^{error_order-})."""

    terms: tuple
    error_order: Scalar = math.inf

    def __post_init__(self):
        merged = _merge_terms(self.terms)
        for (z, k, _) in merged:
            if float(z) >= float(self.error_order) + Z_TOL:
                raise ValueError(
                    f"term power {z} is not below the error order {self.error_order}"
                )
        object.__setattr__(self, "terms", merged)

    def __iter__(self):
        return iter(self.terms)

    def __len__(self):
        return len(self.terms)

    def coeff(self, z, k) -> float:
        for (z2, k2, c) in self.terms:
            if _same_power(z2, _as_power(z)) and k2 == k:
                return c
        return 0.0

    def index_set(self, C: Scalar | None = None) -> IndexSet:
        C = self.error_order if C is None else C
        if math.isinf(float(C)):
            raise IndexSetError("cannot materialize an index set without finite truncation")
        return closure([(z, k) for (z, k, _) in self.terms], C)

    def __call__(self, x) -> float:
        lx = math.log(x)
        return sum(float(c) * x ** float(z) * lx**k for (z, k, c) in self.terms)

    def isclose(self, other: "Expansion", tol: float = 1e-12) -> bool:
        keys = {(float(z), k) for (z, k, _) in self.terms} | {
            (float(z), k) for (z, k, _) in other.terms
        }
        scale = max(
            [abs(float(c)) for (_, _, c) in self.terms + other.terms] + [1.0]
        )
        return all(
            abs(self.coeff(z, k) - other.coeff(z, k)) <= tol * scale for (z, k) in keys
        )

    def to_json_dict(self) -> dict:
        return {
            "terms": [
                {"z": _power_json(z), "k": k, "coeff": float(c)}
                for (z, k, c) in self.terms
            ],
            "error_order": _power_json(self.error_order)
            if not math.isinf(float(self.error_order))
            else None,
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "Expansion":
        terms = tuple(
            (_power_from_json(t["z"]), int(t["k"]), float(t["coeff"]))
            for t in d["terms"]
        )
        eo = d.get("error_order")
        return cls(terms, math.inf if eo is None else _power_from_json(eo))


def expansion_apply_euler(g: Expansion, c: Scalar) -> Expansion:
    """Apply (x d/dx - c) exactly: (z,k,a) -> (z,k,(z-c)a) + (z,k-1,k*a)."""
    c = _as_power(c)
    out = []
    for (z, k, a) in g.terms:
        out.append((z, k, (z - c) * a))
        if k >= 1:
            out.append((z, k - 1, k * a))
    return Expansion(tuple(out), g.error_order)


def ode_integrate_expansion(g: Expansion, c: Scalar, free_coeff: float = 0.0) -> Expansion:
    """Solve (x d/dx - c) G = g modulo the error order of g.

    Coefficients are transported downward in the log exponent:
    for z != c,  alpha_{z,k} = (beta_{z,k} - (k+1) alpha_{z,k+1}) / (z - c);
    at z = c the division fails and the log exponent shifts instead,
    alpha_{c,k+1} = beta_{c,k} / (k+1), with alpha_{c,0} the free kernel
    coefficient.  The resulting index set sits inside E(g) bar-union {(c,0)}.
    """
    c = _as_power(c)
    groups: dict = {}
    rep: dict = {}
    for (z, k, b) in g.terms:
        key = _power_key(z)
        groups.setdefault(key, {})[k] = b
        rep.setdefault(key, z)

    out = []
    for key, ks in groups.items():
        z = rep[key]
        if _same_power(z, c):
            for k, b in ks.items():
                out.append((z, k + 1, b / (k + 1)))
        else:
            kmax = max(ks)
            alpha_above = 0.0
            denom = z - c
            for k in range(kmax, -1, -1):
                b = ks.get(k, 0.0)
                alpha = (b - (k + 1) * alpha_above) / denom
                out.append((z, k, alpha))
                alpha_above = alpha
    if free_coeff != 0.0 and float(c) < float(g.error_order) - Z_TOL:
        out.append((c, 0, free_coeff))
    return Expansion(tuple(out), g.error_order)

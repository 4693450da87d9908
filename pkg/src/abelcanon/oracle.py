"""Brute-force ground truth: automorphism enumeration and orbit partitions.

Endomorphisms of one prime component are integer matrices whose (i, j)
entry is a residue mod p^{e_i} divisible by p^{max(0, e_i - e_j)} (slots
ordered by ascending exponent); such a matrix is an automorphism exactly
when its reduction mod p is invertible over the p-element field.

Orbit partitions are computed by closing the element set under an
elementary generating set of the automorphism group (unit scalings of one
slot and single-slot shears), which keeps exhaustive runs fast even where
full matrix enumeration would be astronomically large; the two routes are
cross-checked on small shapes in the test suite.  A rank-1 mixed oracle
covers groups with one free factor.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Callable, Sequence

from sympy.ntheory.residue_ntheory import primitive_root

from .counting import count_classes, enumerate_representatives
from .errors import CapExceededError, InfiniteGroupError
from .groups import Element, PrimaryComponent, PrimarySchema
from .reduction import canonicalize, is_representative

DEFAULT_MAX_ORDER = 4096
DEFAULT_MAX_ENDOMORPHISMS = 1 << 24


@dataclass(frozen=True)
class HomMatrix:
    """Endomorphism of one prime component, acting on column vectors by
    t_i -> sum_j entries[i][j] * t_j mod p^{e_i}."""

    p: int
    exponents: tuple[int, ...]
    entries: tuple[tuple[int, ...], ...]

    @property
    def m(self) -> int:
        return len(self.exponents)


def identity_matrix(component: PrimaryComponent) -> HomMatrix:
    exps = component.expanded_exponents
    m = len(exps)
    return HomMatrix(
        p=component.p,
        exponents=exps,
        entries=tuple(tuple(int(i == j) for j in range(m)) for i in range(m)),
    )


def _det_mod_p(rows: Sequence[Sequence[int]], p: int) -> int:
    """Determinant over the p-element field, by Gaussian elimination."""
    n = len(rows)
    m = [[a % p for a in row] for row in rows]
    det = 1
    for col in range(n):
        pivot = next((r for r in range(col, n) if m[r][col]), None)
        if pivot is None:
            return 0
        if pivot != col:
            m[col], m[pivot] = m[pivot], m[col]
            det = -det
        det = det * m[col][col] % p
        inv = pow(m[col][col], -1, p)
        for r in range(col + 1, n):
            if m[r][col]:
                factor = m[r][col] * inv % p
                m[r] = [(a - factor * b) % p for a, b in zip(m[r], m[col])]
    return det % p


def _check_well_formed(M: HomMatrix) -> None:
    p, exps = M.p, M.exponents
    if len(M.entries) != len(exps) or any(len(row) != len(exps) for row in M.entries):
        raise ValueError("matrix shape does not match the exponent list")
    for i, ei in enumerate(exps):
        qi = p**ei
        for j, ej in enumerate(exps):
            a = M.entries[i][j]
            if not 0 <= a < qi:
                raise ValueError(f"entry ({i},{j})={a} out of range for modulus {qi}")
            if ei > ej and a % p ** (ei - ej):
                raise ValueError(
                    f"entry ({i},{j})={a} violates divisibility by p^{ei - ej}"
                )


def is_automorphism(M: HomMatrix, p: int) -> bool:
    """True iff M reduced mod p is invertible over the p-element field."""
    if p != M.p:
        raise ValueError(f"matrix is over p={M.p}, not p={p}")
    _check_well_formed(M)
    return _det_mod_p(M.entries, p) != 0


def apply(M: HomMatrix, t: Sequence[int]) -> tuple[int, ...]:
    """Matrix action on component coordinates, rows reduced mod p^{e_i}."""
    if len(t) != M.m:
        raise ValueError(f"expected {M.m} coordinates, got {len(t)}")
    return tuple(
        sum(a * x for a, x in zip(row, t)) % M.p**e
        for row, e in zip(M.entries, M.exponents)
    )


def count_endomorphisms(component: PrimaryComponent) -> int:
    """Number of well-formed endomorphism matrices: prod p^{min(e_i, e_j)}."""
    exps = component.expanded_exponents
    return component.p ** sum(min(ei, ej) for ei in exps for ej in exps)


def enumerate_automorphisms(
    component: PrimaryComponent, cap: int = DEFAULT_MAX_ENDOMORPHISMS
) -> list[HomMatrix]:
    """All automorphisms of one component, by filtering every well-formed
    endomorphism matrix through the mod-p test."""
    total = count_endomorphisms(component)
    if total > cap:
        raise CapExceededError(
            f"{total} endomorphism matrices exceed the cap of {cap}",
            count=total, cap=cap,
        )
    p = component.p
    exps = component.expanded_exponents
    m = len(exps)
    steps = [[p ** max(0, ei - ej) for ej in exps] for ei in exps]
    counts = [[p ** min(ei, ej) for ej in exps] for ei in exps]
    out = []
    for flat in product(*(range(counts[i][j]) for i in range(m) for j in range(m))):
        entries = tuple(
            tuple(flat[i * m + j] * steps[i][j] for j in range(m)) for i in range(m)
        )
        if _det_mod_p(entries, p) != 0:
            out.append(HomMatrix(p=p, exponents=exps, entries=entries))
    return out


# --- orbit computation via elementary generators ------------------------------

def _unit_generators(p: int, e: int) -> list[int]:
    """Generators of the unit group of Z mod p^e."""
    q = p**e
    if p == 2:
        if e == 1:
            return []
        if e == 2:
            return [3]
        return [q - 1, 5]
    return [int(primitive_root(q))]


def component_generators(component: PrimaryComponent) -> list[Callable[[tuple], tuple]]:
    """Elementary automorphisms generating the component's automorphism
    group: unit scalings of single slots, and shears adding the smallest
    valid multiple of one slot to another."""
    p = component.p
    exps = component.expanded_exponents
    moduli = component.slot_moduli
    m = len(exps)
    gens: list[Callable[[tuple], tuple]] = []

    def scale(i, u, q):
        def go(t, i=i, u=u, q=q):
            return t[:i] + (t[i] * u % q,) + t[i + 1:]
        return go

    def shear(i, j, c, q):
        def go(t, i=i, j=j, c=c, q=q):
            return t[:i] + ((t[i] + c * t[j]) % q,) + t[i + 1:]
        return go

    for i in range(m):
        for u in _unit_generators(p, exps[i]):
            gens.append(scale(i, u, moduli[i]))
    for i in range(m):
        for j in range(m):
            if i != j:
                c = p ** max(0, exps[i] - exps[j])
                gens.append(shear(i, j, c, moduli[i]))
    return gens


def component_orbits(component: PrimaryComponent) -> tuple[dict[tuple, int], list[tuple]]:
    """Partition a component's element set under its automorphism group.

    Returns the element -> orbit id map and the orbit representatives;
    representatives are lexicographically minimal, ids follow their order.
    """
    gens = component_generators(component)
    orbit_of: dict[tuple, int] = {}
    reps: list[tuple] = []
    for elem in product(*(range(q) for q in component.slot_moduli)):
        if elem in orbit_of:
            continue
        oid = len(reps)
        reps.append(elem)
        orbit_of[elem] = oid
        stack = [elem]
        while stack:
            cur = stack.pop()
            for g in gens:
                nxt = g(cur)
                if nxt not in orbit_of:
                    orbit_of[nxt] = oid
                    stack.append(nxt)
    return orbit_of, reps


@dataclass(frozen=True)
class OrbitPartition:
    """Exhaustive orbit partition of a finite group's element set; keys of
    ``orbit_of`` are torsion coordinates (one tuple per component)."""

    schema: PrimarySchema
    orbit_of: dict[tuple, int]
    representatives: tuple[tuple, ...]

    @property
    def orbit_count(self) -> int:
        return len(self.representatives)

    def element(self, key: tuple) -> Element:
        return Element(torsion=key, free=())


def all_orbits(schema: PrimarySchema, cap: int = DEFAULT_MAX_ORDER) -> OrbitPartition:
    """Orbit partition of a finite group: per-prime partitions combined by
    Cartesian product (automorphisms respect the primary decomposition)."""
    if schema.free_rank:
        raise InfiniteGroupError("cannot enumerate orbits: the group is infinite")
    order = schema.torsion_order
    if order > cap:
        raise CapExceededError(
            f"group order {order} exceeds the cap of {cap}", count=order, cap=cap
        )
    per_comp = [component_orbits(comp) for comp in schema.primes]

    orbit_of: dict[tuple, int] = {}
    counts = [len(reps) for _, reps in per_comp]
    for combo in product(*(orbits.items() for orbits, _ in per_comp)):
        key = tuple(elem for elem, _ in combo)
        oid = 0
        for (_, comp_oid), n in zip(combo, counts):
            oid = oid * n + comp_oid
        orbit_of[key] = oid
    representatives = tuple(
        combo for combo in product(*(reps for _, reps in per_comp))
    )
    return OrbitPartition(schema=schema, orbit_of=orbit_of, representatives=representatives)


# --- rank-1 mixed oracle -------------------------------------------------------

def mixed_orbit(
    t: tuple[tuple[int, ...], ...],
    z: int,
    schema: PrimarySchema,
    cap: int = DEFAULT_MAX_ORDER,
) -> frozenset:
    """Orbit closure of (t, z) in a group with exactly one free factor.

    States are (torsion coordinates, signed z); the generators are the
    torsion automorphism generators, the sign flip of the free factor, and
    for every torsion slot the unipotent mix sending (t, z) to
    (t + z * e_slot, z).  All generators have finite order, so closing
    under them alone reaches the full group orbit.
    """
    if schema.free_rank != 1:
        raise ValueError("mixed_orbit requires a schema with free rank 1")
    order = schema.torsion_order
    if order > cap:
        raise CapExceededError(
            f"torsion order {order} exceeds the cap of {cap}", count=order, cap=cap
        )

    comp_gens = [
        (ci, g)
        for ci, comp in enumerate(schema.primes)
        for g in component_generators(comp)
    ]
    mixers = [
        (ci, slot, q)
        for ci, comp in enumerate(schema.primes)
        for slot, q in enumerate(comp.slot_moduli)
    ]

    start = (tuple(tuple(c) for c in t), z)
    seen = {start}
    stack = [start]
    while stack:
        tt, zz = stack.pop()
        nxts = [(tt, -zz)]
        for ci, g in comp_gens:
            nxts.append((tt[:ci] + (g(tt[ci]),) + tt[ci + 1:], zz))
        for ci, slot, q in mixers:
            comp = tt[ci]
            mixed = comp[:slot] + ((comp[slot] + zz) % q,) + comp[slot + 1:]
            nxts.append((tt[:ci] + (mixed,) + tt[ci + 1:], zz))
        for nxt in nxts:
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return frozenset(seen)


# --- executable verification ----------------------------------------------------

@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    witness: dict | None = None

    def to_json(self) -> dict:
        out = {"name": self.name, "pass": self.passed}
        if self.witness is not None:
            out["witness"] = self.witness
        return out


@dataclass(frozen=True)
class VerificationReport:
    schema: PrimarySchema
    checks: tuple[CheckResult, ...]
    orbit_count: int
    class_count: int

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self) -> dict:
        return {
            "schema": self.schema.to_json(),
            "checks": [c.to_json() for c in self.checks],
            "orbit_count": self.orbit_count,
            "class_count": self.class_count,
        }


def verify_schema(schema: PrimarySchema, cap: int = DEFAULT_MAX_ORDER) -> VerificationReport:
    """Exhaustively check the canonical-form machinery against the orbit
    partition of one finite group.

    Checks: the canonical form is constant on every orbit and distinct
    across orbits, every orbit's canonical form satisfies the
    representative predicate, the closed-form class count matches the
    orbit count, and the enumerated representatives are exactly the
    per-orbit canonical forms.  Failures carry a concrete witness.
    """
    partition = all_orbits(schema, cap)
    counted = count_classes(schema)

    canon_of = {
        key: canonicalize(partition.element(key), schema)[0]
        for key in partition.orbit_of
    }
    by_orbit: dict[int, dict] = {}
    for key, oid in partition.orbit_of.items():
        by_orbit.setdefault(oid, {})[key] = canon_of[key]

    checks = []

    witness = None
    for oid, members in by_orbit.items():
        forms = {}
        for key, form in members.items():
            forms.setdefault(form, key)
        if len(forms) > 1:
            (f1, k1), (f2, k2) = list(forms.items())[:2]
            witness = {
                "orbit": oid,
                "elements": [list(map(list, k1)), list(map(list, k2))],
                "canonicals": [f1.to_json(schema), f2.to_json(schema)],
            }
            break
    checks.append(CheckResult("canonical_constant_on_orbits", witness is None, witness))

    witness = None
    seen: dict = {}
    for oid, members in by_orbit.items():
        form = next(iter(members.values()))
        if form in seen:
            other_oid, other_key = seen[form]
            witness = {
                "orbits": [other_oid, oid],
                "elements": [list(map(list, other_key)), list(map(list, next(iter(members))))],
                "canonical": form.to_json(schema),
            }
            break
        seen[form] = (oid, next(iter(members)))
    checks.append(CheckResult("canonical_injective_across_orbits", witness is None, witness))

    witness = None
    for oid, members in by_orbit.items():
        form = next(iter(members.values()))
        if not (is_representative(form.torsion, schema, form.d) and form.conforming):
            witness = {
                "orbit": oid,
                "element": list(map(list, next(iter(members)))),
                "canonical": form.to_json(schema),
            }
            break
    checks.append(CheckResult("canonical_is_representative", witness is None, witness))

    formula_ok = partition.orbit_count == counted.total
    checks.append(CheckResult(
        "orbit_count_matches_formula",
        formula_ok,
        None if formula_ok else {"orbit_count": partition.orbit_count, "class_count": counted.total},
    ))

    orbit_forms = {next(iter(members.values())) for members in by_orbit.values()}
    enumerated = set(enumerate_representatives(schema))
    witness = None
    if orbit_forms != enumerated:
        witness = {
            "missing": [f.to_json(schema) for f in sorted(orbit_forms - enumerated, key=repr)],
            "extra": [f.to_json(schema) for f in sorted(enumerated - orbit_forms, key=repr)],
        }
    checks.append(CheckResult("enumeration_matches_orbit_canonicals", witness is None, witness))

    return VerificationReport(
        schema=schema,
        checks=tuple(checks),
        orbit_count=partition.orbit_count,
        class_count=counted.total,
    )

"""Canonical orbit representatives via reduction rewriting.

Every element of a finitely generated abelian group is automorphically
equivalent to a canonical form living in the repeat-free part of the group:
per prime a vector with one entry per layer, each entry zero or a p-power,
nonzero entries strictly increasing in both value and order; plus a single
nonnegative integer d carrying the free part (the gcd of the free vector).

The pipeline: collapse each layer's block of copies to a single p-power
entry, zero dominated entries until no rewrite fires, reduce the free
vector to its gcd d, and, when d is nonzero, clear every p-power entry
that a unipotent mixed automorphism can absorb into the free part (those
with p-valuation >= v_p(d)).  Entries with positive valuation below
v_p(d) cannot be cleared by any automorphism; they are kept and the
result is flagged ``conforming=False``.

Two elements are automorphically equivalent exactly when their canonical
forms coincide (for torsion groups; with a free factor, equality of
conforming forms decides, and agreement of non-conforming forms carries a
caveat).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .groups import Element, PrimarySchema, validate_element


@dataclass(frozen=True)
class CanonicalElement:
    """Canonical orbit representative.

    ``torsion[i]`` has one entry per layer of the i-th component, each 0 or
    a p-power; ``d >= 0`` is the free-part gcd (0 when there is no free part
    or it is zero); ``conforming`` records whether the coprimality condition
    against d could be fully enforced.
    """

    torsion: tuple[tuple[int, ...], ...]
    d: int
    conforming: bool

    def to_json(self, schema: PrimarySchema) -> dict:
        return {
            "repeat_free": [
                {"p": comp.p, "entries": list(entries)}
                for comp, entries in zip(schema.primes, self.torsion)
            ],
            "d": self.d,
            "conforming": self.conforming,
        }


@dataclass(frozen=True)
class TraceStep:
    kind: str
    prime: int | None
    position: int | None
    cleared_positions: tuple[int, ...]
    before: tuple[int, ...]
    after: tuple[int, ...]

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "prime": self.prime,
            "position": self.position,
            "cleared_positions": list(self.cleared_positions),
            "before": list(self.before),
            "after": list(self.after),
        }


@dataclass(frozen=True)
class ReductionTrace:
    """Audit log of a canonicalization; replaying it on the input element
    reproduces the embedded canonical element."""

    steps: tuple[TraceStep, ...]

    def to_json(self) -> list[dict]:
        return [step.to_json() for step in self.steps]


def _cleared(before: Sequence[int], after: Sequence[int]) -> tuple[int, ...]:
    return tuple(i for i, (b, a) in enumerate(zip(before, after)) if b != 0 and a == 0)


def _pval(x: int, p: int) -> int:
    """p-adic valuation of x != 0."""
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


def _log_p(x: int, p: int) -> int:
    """Exponent l with x == p**l; entries are exact p-powers by invariant."""
    l = 0
    while x > 1:
        x //= p
        l += 1
    return l


def entry_order(entry: int, p: int, r: int) -> int:
    """Order of an entry (0 or p^l) in the cyclic group of order p^r."""
    if entry == 0:
        return 1
    return p ** (r - _log_p(entry, p))


# --- the three rewrite moves -------------------------------------------------

def block_reduce(block: Sequence[int], p: int, r: int) -> int:
    """Collapse one layer's block of residues mod p^r to a single entry.

    Returns p^l where p^(r-l) is the order of the block, and 0 for the zero
    block.  The block is automorphically equivalent to (p^l, 0, ..., 0):
    scale each coordinate by the inverse of its unit part, then subtract
    p-power multiples of a minimum-valuation coordinate from the others.
    """
    l = min((_pval(a, p) for a in block if a != 0), default=None)
    return 0 if l is None else p**l


def free_reduce(v: Iterable[int]) -> int:
    """gcd of a free-part vector, nonnegative; 0 for the zero vector."""
    return math.gcd(*v)


def basic_reduction(
    entries: Sequence[int], exponents: Sequence[int], p: int, i: int
) -> tuple[int, ...]:
    """Rewrite about position i: zero every other entry whose value is >=
    and whose order is <= that of entry i.  Entry i must be nonzero."""
    if entries[i] == 0:
        raise ValueError(f"basic reduction about position {i}: entry is zero")
    vi = entries[i]
    oi = entry_order(vi, p, exponents[i])
    return tuple(
        0
        if j != i and a != 0 and a >= vi and entry_order(a, p, exponents[j]) <= oi
        else a
        for j, a in enumerate(entries)
    )


def is_reduced(entries: Sequence[int], exponents: Sequence[int], p: int) -> bool:
    """True when no basic reduction changes the vector."""
    for i, a in enumerate(entries):
        if a != 0 and basic_reduction(entries, exponents, p, i) != tuple(entries):
            return False
    return True


def _reduce_to_fixpoint(entries, exponents, p, steps):
    """Apply nontrivial basic reductions, positions scanned ascending,
    until none fires.  Appends TraceSteps; returns the reduced tuple."""
    entries = tuple(entries)
    fired = True
    while fired:
        fired = False
        for i in range(len(entries)):
            if entries[i] == 0:
                continue
            after = basic_reduction(entries, exponents, p, i)
            if after != entries:
                steps.append(TraceStep(
                    kind="basic_reduction",
                    prime=p,
                    position=i,
                    cleared_positions=_cleared(entries, after),
                    before=entries,
                    after=after,
                ))
                entries = after
                fired = True
    return entries


# --- the canonical-form predicate and builder --------------------------------

def is_representative(
    torsion: Sequence[Sequence[int]], schema: PrimarySchema, d: int = 0
) -> bool:
    """Decide whether per-prime repeat-free vectors (entries zero or
    p-powers) form a canonical representative relative to d.

    Nonzero entries must strictly increase in value and in order within
    each component; when d != 0 every nonzero entry must be coprime to d.
    Zero entries are exempt from the pairwise conditions.
    """
    for comp, entries in zip(schema.primes, torsion):
        exps = comp.exponents
        nonzero = [(a, entry_order(a, comp.p, exps[i])) for i, a in enumerate(entries) if a != 0]
        for (v1, o1), (v2, o2) in zip(nonzero, nonzero[1:]):
            if not (v1 < v2 and o1 < o2):
                return False
        if d != 0 and any(math.gcd(a, d) != 1 for a, _ in nonzero):
            return False
    return True


def canonicalize(e: Element, schema: PrimarySchema) -> tuple[CanonicalElement, ReductionTrace]:
    """Compute the canonical representative of e's automorphism class.

    Stages: per layer, collapse the block of copies; per component, run
    basic reductions to a fixpoint; gcd-reduce the free part to d; while d
    is nonzero, clear p-power entries with valuation >= v_p(d) and re-run
    the reductions until nothing changes.  The output is a fixpoint of
    canonicalize and carries a replayable trace.
    """
    validate_element(e, schema)
    steps: list[TraceStep] = []

    vectors: list[tuple[int, ...]] = []
    for comp, coords in zip(schema.primes, e.torsion):
        entries = []
        offset = 0
        for layer_idx, (r, k) in enumerate(comp.layers):
            block = tuple(coords[offset:offset + k])
            entry = block_reduce(block, comp.p, r)
            after = (entry,) + (0,) * (k - 1)
            if block != after:
                steps.append(TraceStep(
                    kind="block_reduce",
                    prime=comp.p,
                    position=layer_idx,
                    cleared_positions=_cleared(block, after),
                    before=block,
                    after=after,
                ))
            entries.append(entry)
            offset += k
        vectors.append(_reduce_to_fixpoint(entries, comp.exponents, comp.p, steps))

    d = free_reduce(e.free)
    if schema.free_rank:
        after_free = (d,) + (0,) * (schema.free_rank - 1)
        if tuple(e.free) != after_free:
            steps.append(TraceStep(
                kind="free_reduce",
                prime=None,
                position=None,
                cleared_positions=_cleared(e.free, after_free),
                before=tuple(e.free),
                after=after_free,
            ))

    if d != 0:
        changed = True
        while changed:
            changed = False
            for ci, comp in enumerate(schema.primes):
                if d % comp.p != 0:
                    continue
                v = _pval(d, comp.p)
                before = vectors[ci]
                after = tuple(
                    0 if a != 0 and _log_p(a, comp.p) >= v else a for a in before
                )
                if after != before:
                    steps.append(TraceStep(
                        kind="coprime_clear",
                        prime=comp.p,
                        position=None,
                        cleared_positions=_cleared(before, after),
                        before=before,
                        after=after,
                    ))
                    vectors[ci] = _reduce_to_fixpoint(after, comp.exponents, comp.p, steps)
                    changed = True

    torsion = tuple(vectors)
    result = CanonicalElement(torsion=torsion, d=d, conforming=is_representative(torsion, schema, d))
    return result, ReductionTrace(tuple(steps))


def are_equivalent(e1: Element, e2: Element, schema: PrimarySchema) -> bool:
    """True iff e1 and e2 have identical canonical forms.

    For torsion groups this decides orbit membership exactly.  With a free
    factor it decides whenever both forms are conforming; agreement of two
    non-conforming forms is still reported True (callers can inspect the
    conforming flags for the caveat).
    """
    return canonicalize(e1, schema)[0] == canonicalize(e2, schema)[0]


# --- embedding and replay -----------------------------------------------------

def embed_canonical(c: CanonicalElement, schema: PrimarySchema) -> Element:
    """The canonical form as a group element: each layer entry in the
    layer's first slot, free part (d, 0, ..., 0)."""
    torsion = []
    for comp, entries in zip(schema.primes, c.torsion):
        coords = []
        for (r, k), entry in zip(comp.layers, entries):
            coords.extend([entry] + [0] * (k - 1))
        torsion.append(tuple(coords))
    free = (c.d,) + (0,) * (schema.free_rank - 1) if schema.free_rank else ()
    return Element(torsion=tuple(torsion), free=free)


def replay_trace(e: Element, trace: ReductionTrace, schema: PrimarySchema) -> Element:
    """Re-apply a trace to its input element; raises ValueError when a
    step's recorded state disagrees with the evolving element."""
    validate_element(e, schema)
    comp_of_prime = {comp.p: ci for ci, comp in enumerate(schema.primes)}
    torsion = [list(coords) for coords in e.torsion]
    free = list(e.free)

    def layer_offsets(comp):
        offs, total = [], 0
        for _, k in comp.layers:
            offs.append(total)
            total += k
        return offs

    for step in trace.steps:
        if step.kind == "free_reduce":
            if tuple(free) != step.before:
                raise ValueError("trace mismatch in free part")
            free = list(step.after)
            continue
        ci = comp_of_prime[step.prime]
        comp = schema.primes[ci]
        offs = layer_offsets(comp)
        if step.kind == "block_reduce":
            off, (_, k) = offs[step.position], comp.layers[step.position]
            if tuple(torsion[ci][off:off + k]) != step.before:
                raise ValueError(f"trace mismatch in p={comp.p} layer {step.position}")
            torsion[ci][off:off + k] = step.after
        else:  # basic_reduction / coprime_clear act on the repeat-free view
            current = tuple(torsion[ci][off] for off in offs)
            if current != step.before:
                raise ValueError(f"trace mismatch in p={comp.p} repeat-free vector")
            for off, value in zip(offs, step.after):
                torsion[ci][off] = value
    return Element(torsion=tuple(tuple(c) for c in torsion), free=tuple(free))

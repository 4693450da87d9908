"""Closed-form class counts and exhaustive enumeration of representatives.

For one prime component with repeat-free exponents r_1 < ... < r_k and
gaps n_i = r_{i+1} - r_i, the number of automorphism classes of elements
is (r_1 + 1) * (n_1 + 1) * ... * (n_{k-1} + 1); multiplicities never enter.
The count for a finite group is the product over its primes.  Groups with
a free factor have infinitely many classes and are rejected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations, product

from .errors import InfiniteClassesError
from .groups import PrimaryComponent, PrimarySchema
from .reduction import CanonicalElement


@dataclass(frozen=True)
class GapVector:
    """First repeat-free exponent and the gaps between consecutive ones."""

    r1: int
    gaps: tuple[int, ...]


@dataclass(frozen=True)
class ClassCount:
    total: int
    per_prime: dict[int, int]


def gaps(component: PrimaryComponent) -> GapVector:
    """Gap vector of a component's repeat-free exponents (multiplicities
    are ignored)."""
    exps = component.exponents
    return GapVector(r1=exps[0], gaps=tuple(b - a for a, b in zip(exps, exps[1:])))


def count_classes_rf(g: GapVector) -> int:
    """(r1 + 1) * prod(n_i + 1)."""
    return (g.r1 + 1) * math.prod(n + 1 for n in g.gaps)


def count_classes(schema: PrimarySchema) -> ClassCount:
    """Automorphism-class count of a finite group, per prime and total."""
    if schema.free_rank:
        raise InfiniteClassesError(
            f"class count is infinite: the group has free rank {schema.free_rank}"
        )
    per_prime = {comp.p: count_classes_rf(gaps(comp)) for comp in schema.primes}
    return ClassCount(total=math.prod(per_prime.values()), per_prime=per_prime)


def count_last_nonzero(g: GapVector, j: int) -> int:
    """Number of representatives whose last nonzero entry sits at layer j
    (layers counted from 1): (r1+1)(n_1+1)...(n_{j-2}+1) * n_{j-1}."""
    if not 2 <= j <= len(g.gaps) + 1:
        raise ValueError(f"position j={j} out of range 2..{len(g.gaps) + 1}")
    return (g.r1 + 1) * math.prod(n + 1 for n in g.gaps[: j - 2]) * g.gaps[j - 2]


def component_representatives(exponents: tuple[int, ...], p: int) -> list[tuple[int, ...]]:
    """All repeat-free canonical vectors for one component, in lexicographic
    (support set, exponent tuple) order.

    A vector picks a support of layers and a p-power exponent l for each
    chosen layer, with 0 <= l_first < r_first and, between consecutive
    chosen layers i < j, l_i < l_j < l_i + (r_j - r_i).
    """
    k = len(exponents)
    out = [(0,) * k]
    supports = sorted(
        s for size in range(1, k + 1) for s in combinations(range(k), size)
    )
    for support in supports:
        choices: list[tuple[int, ...]] = [()]
        for idx, layer in enumerate(support):
            r = exponents[layer]
            fresh = []
            for partial in choices:
                if idx == 0:
                    lo, hi = 0, r
                else:
                    prev_layer = support[idx - 1]
                    prev_l = partial[-1]
                    lo = prev_l + 1
                    hi = prev_l + (r - exponents[prev_layer])
                fresh.extend(partial + (l,) for l in range(lo, hi))
            choices = fresh
        for ls in choices:
            vec = [0] * k
            for layer, l in zip(support, ls):
                vec[layer] = p**l
            out.append(tuple(vec))
    return out


def enumerate_representatives(schema: PrimarySchema) -> list[CanonicalElement]:
    """Every canonical representative of a finite group, deterministically
    ordered (primes ascending, later primes varying fastest)."""
    if schema.free_rank:
        raise InfiniteClassesError(
            f"cannot enumerate classes: the group has free rank {schema.free_rank}"
        )
    per_prime = [component_representatives(comp.exponents, comp.p) for comp in schema.primes]
    return [
        CanonicalElement(torsion=combo, d=0, conforming=True)
        for combo in product(*per_prime)
    ]


def nonzero_term_histogram(exponents: tuple[int, ...], p: int = 2) -> list[int]:
    """Class counts of one repeat-free shape, bucketed by the number of
    nonzero entries; index t holds the count for t nonzero terms."""
    hist = [0] * (len(exponents) + 1)
    for vec in component_representatives(exponents, p):
        hist[sum(1 for a in vec if a)] += 1
    return hist

"""Group descriptions, primary decomposition, and element coordinates.

A group is entered as a product of cyclic factors, e.g. ``"Z8 x Z4^2 x Z"``.
Internally every group is normalized to its primary decomposition: for each
prime p an ascending list of layers (p-power exponent, multiplicity), plus a
free rank.  Elements are stored in primary-decomposition slots, obtained from
the user's coordinates by projecting each coordinate modulo the prime-power
parts of its factor's modulus.

All values are immutable after construction and safe to share.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

from sympy import factorint
from sympy.ntheory.modular import crt as _crt


class GroupParseError(ValueError):
    """Malformed group description; ``position`` indexes the input text."""

    def __init__(self, message, position):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class ElementParseError(ValueError):
    """Malformed element literal; ``index`` is the offending coordinate
    (None when the coordinate count itself is wrong)."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class _InfiniteOrder:
    """Singleton order of an element with nonzero free part."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INFINITE"


INFINITE = _InfiniteOrder()


@dataclass(frozen=True)
class FiniteFactor:
    modulus: int
    multiplicity: int = 1

    def __post_init__(self):
        if self.modulus < 2:
            raise ValueError(f"finite factor modulus must be >= 2, got {self.modulus}")
        if self.multiplicity < 1:
            raise ValueError(f"multiplicity must be >= 1, got {self.multiplicity}")

    def __str__(self):
        base = f"Z{self.modulus}"
        return base if self.multiplicity == 1 else f"{base}^{self.multiplicity}"


@dataclass(frozen=True)
class FreeFactor:
    multiplicity: int = 1

    def __post_init__(self):
        if self.multiplicity < 1:
            raise ValueError(f"multiplicity must be >= 1, got {self.multiplicity}")

    def __str__(self):
        return "Z" if self.multiplicity == 1 else f"Z^{self.multiplicity}"


Factor = Union[FiniteFactor, FreeFactor]


@dataclass(frozen=True)
class GroupSpec:
    """A group exactly as the user wrote it: an ordered factor list."""

    factors: tuple[Factor, ...]

    def __str__(self):
        return " x ".join(str(f) for f in self.factors) if self.factors else "Z1"

    @property
    def user_slot_count(self) -> int:
        """Number of coordinates in an element literal (one per factor copy)."""
        return sum(f.multiplicity for f in self.factors)


@dataclass(frozen=True)
class PrimaryComponent:
    """The p-part of a group: layers of (exponent r, multiplicity k),
    exponents strictly ascending."""

    p: int
    layers: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if not self.layers:
            raise ValueError("a primary component needs at least one layer")
        prev = 0
        for r, k in self.layers:
            if r <= prev:
                raise ValueError(f"layer exponents must be strictly ascending, got {self.layers}")
            if k < 1:
                raise ValueError(f"layer multiplicity must be >= 1, got {k}")
            prev = r

    @property
    def exponents(self) -> tuple[int, ...]:
        """Repeat-free exponents r_1 < ... < r_n (one per layer)."""
        return tuple(r for r, _ in self.layers)

    @property
    def expanded_exponents(self) -> tuple[int, ...]:
        """One exponent per slot, each layer repeated by its multiplicity."""
        return tuple(r for r, k in self.layers for _ in range(k))

    @property
    def slot_moduli(self) -> tuple[int, ...]:
        return tuple(self.p**r for r in self.expanded_exponents)

    @property
    def slot_count(self) -> int:
        return sum(k for _, k in self.layers)

    @property
    def order(self) -> int:
        return self.p ** sum(r * k for r, k in self.layers)

    def to_json(self) -> dict:
        return {"p": self.p, "layers": [list(layer) for layer in self.layers]}


@dataclass(frozen=True)
class PrimarySchema:
    """Primary decomposition: components with strictly ascending primes,
    plus the free rank."""

    primes: tuple[PrimaryComponent, ...]
    free_rank: int = 0

    def __post_init__(self):
        if self.free_rank < 0:
            raise ValueError("free rank must be >= 0")
        seen = 0
        for comp in self.primes:
            if comp.p <= seen:
                raise ValueError("component primes must be strictly ascending")
            seen = comp.p

    @property
    def torsion_order(self) -> int:
        return math.prod(comp.order for comp in self.primes)

    @property
    def order(self):
        """Group order: an integer, or INFINITE when the free rank is positive."""
        return INFINITE if self.free_rank else self.torsion_order

    def component(self, p: int) -> PrimaryComponent:
        for comp in self.primes:
            if comp.p == p:
                return comp
        raise KeyError(f"no component for prime {p}")

    def to_json(self) -> dict:
        return {
            "primes": [comp.to_json() for comp in self.primes],
            "free_rank": self.free_rank,
        }


@dataclass(frozen=True)
class Element:
    """Coordinates in primary-decomposition slots.

    ``torsion[i]`` lists the residues for the i-th component (layers in
    ascending order, each layer's copies consecutive); ``free`` is the
    signed integer vector of the free part.
    """

    torsion: tuple[tuple[int, ...], ...]
    free: tuple[int, ...] = ()

    def to_json(self) -> dict:
        return {"torsion": [list(c) for c in self.torsion], "free": list(self.free)}


def validate_element(e: Element, schema: PrimarySchema) -> None:
    """Raise ValueError unless e's shape and residue ranges match schema."""
    if len(e.torsion) != len(schema.primes):
        raise ValueError(
            f"expected {len(schema.primes)} torsion components, got {len(e.torsion)}"
        )
    for comp, coords in zip(schema.primes, e.torsion):
        moduli = comp.slot_moduli
        if len(coords) != len(moduli):
            raise ValueError(
                f"component p={comp.p} expects {len(moduli)} slots, got {len(coords)}"
            )
        for a, m in zip(coords, moduli):
            if not 0 <= a < m:
                raise ValueError(f"residue {a} out of range for modulus {m}")
    if len(e.free) != schema.free_rank:
        raise ValueError(f"expected {schema.free_rank} free coordinates, got {len(e.free)}")


def zero_element(schema: PrimarySchema) -> Element:
    return Element(
        torsion=tuple((0,) * comp.slot_count for comp in schema.primes),
        free=(0,) * schema.free_rank,
    )


def scale_element(e: Element, n: int, schema: PrimarySchema) -> Element:
    """The element n*e."""
    torsion = tuple(
        tuple((n * a) % m for a, m in zip(coords, comp.slot_moduli))
        for comp, coords in zip(schema.primes, e.torsion)
    )
    return Element(torsion=torsion, free=tuple(n * z for z in e.free))


# --- parsing ----------------------------------------------------------------

def parse_group_spec(text: str) -> GroupSpec:
    """Parse a group description like ``"Z8 x Z4^2 x Z"``.

    Case-insensitive, whitespace ignored, ``x`` or ``*`` between factors.
    ``Z`` with no digits is an infinite cyclic factor; ``^k`` repeats a
    factor k times.  ``Z1`` is accepted and dropped as trivial.
    """
    factors: list[Factor] = []
    i, n = 0, len(text)

    def skip_ws(j):
        while j < n and text[j].isspace():
            j += 1
        return j

    def scan_digits(j):
        start = j
        while j < n and text[j].isdigit():
            j += 1
        return (int(text[start:j]) if j > start else None), j

    i = skip_ws(i)
    if i == n:
        raise GroupParseError("empty group description", i)
    while True:
        if i == n or text[i] not in "zZ":
            raise GroupParseError("expected a factor starting with 'Z'", i)
        i += 1
        modulus, i = scan_digits(i)
        multiplicity = 1
        if i < n and text[i] == "^":
            mult_pos = i + 1
            multiplicity, i = scan_digits(i + 1)
            if multiplicity is None:
                raise GroupParseError("expected digits after '^'", mult_pos)
            if multiplicity == 0:
                raise GroupParseError("multiplicity 0 is not allowed", mult_pos)
        if modulus is None:
            factors.append(FreeFactor(multiplicity))
        elif modulus == 0:
            raise GroupParseError("modulus 0 is not allowed", i - 1)
        elif modulus > 1:
            factors.append(FiniteFactor(modulus, multiplicity))
        # modulus == 1: trivial factor, dropped
        i = skip_ws(i)
        if i == n:
            break
        if text[i] not in "xX*":
            raise GroupParseError("expected 'x' or '*' between factors", i)
        i = skip_ws(i + 1)
    return GroupSpec(tuple(factors))


@dataclass(frozen=True)
class _UserSlot:
    """Where one user coordinate lands in primary slots.

    ``targets`` maps the coordinate into components: (component index,
    slot index, prime-power modulus).  Free coordinates have a free index
    instead.
    """

    modulus: int | None  # None for a free coordinate
    targets: tuple[tuple[int, int, int], ...] = ()
    free_index: int | None = None


def _primary_with_slots(spec: GroupSpec) -> tuple[PrimarySchema, tuple[_UserSlot, ...]]:
    """Build the schema plus the user-slot -> primary-slot map.

    Slots of a layer are ordered by the user coordinate's position, so the
    map is a bijection onto torsion slots and CRT round trips are exact.
    """
    # expand user slots; each finite one factors into (p, r) parts
    expanded: list[list[tuple[int, int]] | None] = []
    moduli: list[int | None] = []
    for factor in spec.factors:
        if isinstance(factor, FreeFactor):
            expanded.extend([None] * factor.multiplicity)
            moduli.extend([None] * factor.multiplicity)
        else:
            parts = [(int(p), int(r)) for p, r in sorted(factorint(factor.modulus).items())]
            expanded.extend([parts] * factor.multiplicity)
            moduli.extend([factor.modulus] * factor.multiplicity)

    # multiplicity of each (p, r) layer, counted over user slots
    layer_mult: dict[tuple[int, int], int] = {}
    for parts in expanded:
        for key in parts or ():
            layer_mult[key] = layer_mult.get(key, 0) + 1

    components = []
    # (p, r) -> (component index, slot offset of this layer's first copy)
    placement: dict[tuple[int, int], tuple[int, int]] = {}
    for comp_idx, p in enumerate(sorted({p for p, _ in layer_mult})):
        offset = 0
        layers = []
        for r in sorted(r for q, r in layer_mult if q == p):
            placement[(p, r)] = (comp_idx, offset)
            layers.append((r, layer_mult[(p, r)]))
            offset += layer_mult[(p, r)]
        components.append(PrimaryComponent(p, tuple(layers)))

    # per-layer running counter assigns each user slot its copy position
    taken: dict[tuple[int, int], int] = {}
    user_slots = []
    free_count = 0
    for parts, modulus in zip(expanded, moduli):
        if parts is None:
            user_slots.append(_UserSlot(modulus=None, free_index=free_count))
            free_count += 1
            continue
        targets = []
        for p, r in parts:
            comp_idx, offset = placement[(p, r)]
            copy = taken.get((p, r), 0)
            taken[(p, r)] = copy + 1
            targets.append((comp_idx, offset + copy, p**r))
        user_slots.append(_UserSlot(modulus=modulus, targets=tuple(targets)))

    schema = PrimarySchema(primes=tuple(components), free_rank=free_count)
    return schema, tuple(user_slots)


def to_primary(spec: GroupSpec) -> PrimarySchema:
    """Normalize a group description to its primary decomposition."""
    return _primary_with_slots(spec)[0]


def parse_element(text: str, spec: GroupSpec) -> Element:
    """Parse a comma-separated coordinate list for ``spec``.

    A factor with multiplicity k contributes k coordinates, in written
    order.  Finite coordinates are projected into the prime-power slots of
    their modulus and reduced into range; free coordinates stay signed.
    """
    schema, user_slots = _primary_with_slots(spec)
    stripped = text.strip()
    tokens = [] if stripped == "" else stripped.split(",")
    if len(tokens) != len(user_slots):
        raise ElementParseError(
            f"expected {len(user_slots)} coordinates, got {len(tokens)}"
        )
    values = []
    for idx, tok in enumerate(tokens):
        try:
            values.append(int(tok.strip()))
        except ValueError:
            raise ElementParseError(
                f"coordinate {idx}: {tok.strip()!r} is not an integer", index=idx
            ) from None

    torsion = [[0] * comp.slot_count for comp in schema.primes]
    free = [0] * schema.free_rank
    for value, slot in zip(values, user_slots):
        if slot.modulus is None:
            free[slot.free_index] = value
        else:
            for comp_idx, slot_idx, q in slot.targets:
                torsion[comp_idx][slot_idx] = value % q
    return Element(torsion=tuple(tuple(c) for c in torsion), free=tuple(free))


def user_coordinates(e: Element, spec: GroupSpec) -> list[int]:
    """Map primary-slot coordinates back to the user's factor list (CRT)."""
    schema, user_slots = _primary_with_slots(spec)
    validate_element(e, schema)
    out = []
    for slot in user_slots:
        if slot.modulus is None:
            out.append(e.free[slot.free_index])
            continue
        moduli = [q for _, _, q in slot.targets]
        residues = [e.torsion[comp_idx][slot_idx] for comp_idx, slot_idx, _ in slot.targets]
        if len(moduli) == 1:
            out.append(residues[0])
        else:
            x, _ = _crt(moduli, residues)
            out.append(int(x))
    return out


# --- orders -----------------------------------------------------------------

def element_order(e: Element, schema: PrimarySchema):
    """Least n >= 1 with n*e = 0, or INFINITE when the free part is nonzero."""
    validate_element(e, schema)
    if any(z != 0 for z in e.free):
        return INFINITE
    order = 1
    for comp, coords in zip(schema.primes, e.torsion):
        for a, m in zip(coords, comp.slot_moduli):
            order = math.lcm(order, m // math.gcd(a, m))
    return order

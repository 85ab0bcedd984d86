"""Powerset- and product-lattice algebra on interned atom universes.

Interpretations are fixed-width bit vectors over an atom universe; a product
of powerset lattices over disjoint atom sets is represented as the single
powerset over their union, so projection and combination are mask
operations.  All values here are immutable and safe to share between
concurrent workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Iterator, Sequence

from .errors import NonMonotoneOperatorError, UsageError


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def iter_submasks(mask: int) -> Iterator[int]:
    """All submasks of ``mask``, including 0 and the mask itself."""
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


@dataclass(frozen=True)
class AtomUniverse:
    """Interned ground atoms with stable, contiguous positions."""

    names: tuple[str, ...]
    index: dict[str, int] = field(init=False, compare=False, repr=False)

    def __post_init__(self):
        if len(set(self.names)) != len(self.names):
            raise UsageError("atom names must be unique")
        object.__setattr__(self, "index", {n: k for k, n in enumerate(self.names)})

    def __len__(self) -> int:
        return len(self.names)

    def __contains__(self, name: str) -> bool:
        return name in self.index

    def __hash__(self):
        return hash(self.names)

    def position(self, name: str) -> int:
        try:
            return self.index[name]
        except KeyError:
            raise UsageError(f"unknown atom {name!r}") from None

    @property
    def full_mask(self) -> int:
        return (1 << len(self.names)) - 1


def _require_shared(a: AtomUniverse, b: AtomUniverse) -> None:
    if a is not b and a != b:
        raise UsageError("operands belong to different atom universes")


@dataclass(frozen=True)
class Scope:
    """A subset of universe positions; the index set of a sub-lattice."""

    mask: int
    universe: AtomUniverse

    def __post_init__(self):
        if self.mask & ~self.universe.full_mask:
            raise UsageError("scope contains out-of-range positions")

    @classmethod
    def of_positions(cls, universe: AtomUniverse, positions: Iterable[int]) -> "Scope":
        mask = 0
        for p in positions:
            if not 0 <= p < len(universe):
                raise UsageError(f"position {p} outside universe of size {len(universe)}")
            mask |= 1 << p
        return cls(mask, universe)

    @classmethod
    def of_names(cls, universe: AtomUniverse, names: Iterable[str]) -> "Scope":
        return cls.of_positions(universe, (universe.position(n) for n in names))

    @classmethod
    def full(cls, universe: AtomUniverse) -> "Scope":
        return cls(universe.full_mask, universe)

    @classmethod
    def empty(cls, universe: AtomUniverse) -> "Scope":
        return cls(0, universe)

    def positions(self) -> tuple[int, ...]:
        return tuple(p for p in range(len(self.universe)) if self.mask >> p & 1)

    def names(self) -> tuple[str, ...]:
        return tuple(self.universe.names[p] for p in self.positions())

    def __len__(self) -> int:
        return popcount(self.mask)

    def __bool__(self) -> bool:
        return self.mask != 0

    def __or__(self, other: "Scope") -> "Scope":
        _require_shared(self.universe, other.universe)
        return Scope(self.mask | other.mask, self.universe)

    def __and__(self, other: "Scope") -> "Scope":
        _require_shared(self.universe, other.universe)
        return Scope(self.mask & other.mask, self.universe)

    def __sub__(self, other: "Scope") -> "Scope":
        _require_shared(self.universe, other.universe)
        return Scope(self.mask & ~other.mask, self.universe)

    def __le__(self, other: "Scope") -> bool:
        _require_shared(self.universe, other.universe)
        return self.mask & ~other.mask == 0

    def complement(self) -> "Scope":
        return Scope(self.universe.full_mask & ~self.mask, self.universe)

    def disjoint(self, other: "Scope") -> bool:
        _require_shared(self.universe, other.universe)
        return self.mask & other.mask == 0


@dataclass(frozen=True)
class Interp:
    """A set of atoms: one element of the powerset lattice of a universe."""

    bits: int
    universe: AtomUniverse

    def __post_init__(self):
        if self.bits & ~self.universe.full_mask:
            raise UsageError("interpretation has bits outside its universe")

    @classmethod
    def of_names(cls, universe: AtomUniverse, names: Iterable[str]) -> "Interp":
        bits = 0
        for n in names:
            bits |= 1 << universe.position(n)
        return cls(bits, universe)

    @classmethod
    def empty(cls, universe: AtomUniverse) -> "Interp":
        return cls(0, universe)

    @classmethod
    def full(cls, universe: AtomUniverse) -> "Interp":
        return cls(universe.full_mask, universe)

    def names(self) -> tuple[str, ...]:
        return tuple(n for k, n in enumerate(self.universe.names) if self.bits >> k & 1)

    def positions(self) -> tuple[int, ...]:
        return tuple(p for p in range(len(self.universe)) if self.bits >> p & 1)

    def __contains__(self, name: str) -> bool:
        return bool(self.bits >> self.universe.position(name) & 1)

    def __len__(self) -> int:
        return popcount(self.bits)

    def __or__(self, other: "Interp") -> "Interp":
        _require_shared(self.universe, other.universe)
        return Interp(self.bits | other.bits, self.universe)

    def __and__(self, other: "Interp") -> "Interp":
        _require_shared(self.universe, other.universe)
        return Interp(self.bits & other.bits, self.universe)

    def __le__(self, other: "Interp") -> bool:
        """Subset order: the lattice order of the powerset."""
        _require_shared(self.universe, other.universe)
        return self.bits & ~other.bits == 0

    def __repr__(self):
        return "{" + ", ".join(self.names()) + "}"


@dataclass(frozen=True)
class ApproxPair:
    """A (lower, upper) pair of interpretations: one bilattice element.

    Consistency (lower <= upper) is a queryable property, not an invariant;
    inconsistent pairs encode the truth value C.
    """

    lower: Interp
    upper: Interp

    def __post_init__(self):
        _require_shared(self.lower.universe, self.upper.universe)

    @classmethod
    def of(cls, universe: AtomUniverse, lower_bits: int, upper_bits: int) -> "ApproxPair":
        return cls(Interp(lower_bits, universe), Interp(upper_bits, universe))

    @classmethod
    def bottom_i(cls, universe: AtomUniverse) -> "ApproxPair":
        """The least-precise pair (empty, full)."""
        return cls(Interp.empty(universe), Interp.full(universe))

    @classmethod
    def exact(cls, x: Interp) -> "ApproxPair":
        return cls(x, x)

    @property
    def universe(self) -> AtomUniverse:
        return self.lower.universe

    @property
    def consistent(self) -> bool:
        return self.lower <= self.upper

    @property
    def total(self) -> bool:
        return self.lower.bits == self.upper.bits

    def __repr__(self):
        return f"({self.lower!r}, {self.upper!r})"


class TruthValue(Enum):
    """The four truth values with their two orders and the involution."""

    F = "F"
    U = "U"
    C = "C"
    T = "T"

    def __neg__(self) -> "TruthValue":
        return _INVOLUTION[self]

    def leq_t(self, other: "TruthValue") -> bool:
        return (self, other) in _LEQ_T

    def leq_i(self, other: "TruthValue") -> bool:
        return (self, other) in _LEQ_I

    @staticmethod
    def glb_t(values: Iterable["TruthValue"]) -> "TruthValue":
        """Greatest lower bound in the truth order; T for an empty collection."""
        out = TruthValue.T
        for v in values:
            out = _GLB_T[out, v]
        return out


_INVOLUTION = {
    TruthValue.F: TruthValue.T,
    TruthValue.T: TruthValue.F,
    TruthValue.U: TruthValue.U,
    TruthValue.C: TruthValue.C,
}

# F <= C <= T and F <= U <= T; U, C incomparable.
_LEQ_T = frozenset(
    [(a, a) for a in TruthValue]
    + [
        (TruthValue.F, TruthValue.C),
        (TruthValue.F, TruthValue.U),
        (TruthValue.F, TruthValue.T),
        (TruthValue.C, TruthValue.T),
        (TruthValue.U, TruthValue.T),
    ]
)

# U <= F <= C and U <= T <= C; F, T incomparable.
_LEQ_I = frozenset(
    [(a, a) for a in TruthValue]
    + [
        (TruthValue.U, TruthValue.F),
        (TruthValue.U, TruthValue.T),
        (TruthValue.U, TruthValue.C),
        (TruthValue.F, TruthValue.C),
        (TruthValue.T, TruthValue.C),
    ]
)


def _pairwise_glb_t(a: TruthValue, b: TruthValue) -> TruthValue:
    below_both = [v for v in TruthValue if v.leq_t(a) and v.leq_t(b)]
    best = [v for v in below_both if all(w.leq_t(v) for w in below_both)]
    return best[0]


_GLB_T = {(a, b): _pairwise_glb_t(a, b) for a in TruthValue for b in TruthValue}


def atom_value(pair: ApproxPair, position: int) -> TruthValue:
    """Value of a single atom under a four-valued interpretation."""
    in_lower = bool(pair.lower.bits >> position & 1)
    in_upper = bool(pair.upper.bits >> position & 1)
    if in_lower and in_upper:
        return TruthValue.T
    if in_lower:
        return TruthValue.C
    if in_upper:
        return TruthValue.U
    return TruthValue.F


def project(x: Interp, scope: Scope) -> Interp:
    """Restrict an interpretation to a scope (set intersection)."""
    _require_shared(x.universe, scope.universe)
    return Interp(x.bits & scope.mask, x.universe)


def project_pair(pair: ApproxPair, scope: Scope) -> ApproxPair:
    return ApproxPair(project(pair.lower, scope), project(pair.upper, scope))


def combine(parts: Sequence[tuple[Interp, Scope]]) -> Interp:
    """Reassemble an interpretation from per-scope fragments.

    Scopes may overlap as long as the fragments agree on the overlap; this
    is what pivot-sharing leaf results need.  Conflicting overlaps raise.
    """
    if not parts:
        raise UsageError("combine needs at least one part")
    universe = parts[0][0].universe
    bits = 0
    covered = 0
    for frag, scope in parts:
        _require_shared(frag.universe, universe)
        _require_shared(scope.universe, universe)
        if frag.bits & ~scope.mask:
            raise UsageError("fragment has support outside its scope")
        overlap = covered & scope.mask
        if (bits ^ frag.bits) & overlap:
            raise UsageError("overlapping scopes disagree")
        bits |= frag.bits
        covered |= scope.mask
    return Interp(bits, universe)


def combine_pairs(parts: Sequence[tuple[ApproxPair, Scope]]) -> ApproxPair:
    lower = combine([(p.lower, s) for p, s in parts])
    upper = combine([(p.upper, s) for p, s in parts])
    return ApproxPair(lower, upper)


def leq_i(p: ApproxPair, q: ApproxPair) -> bool:
    """Information (precision) order on pairs."""
    _require_shared(p.universe, q.universe)
    return p.lower <= q.lower and q.upper <= p.upper


def leq_t(p: ApproxPair, q: ApproxPair) -> bool:
    """Truth order on pairs: componentwise subset."""
    _require_shared(p.universe, q.universe)
    return p.lower <= q.lower and p.upper <= q.upper


def _lfp_masks(op: Callable[[int], int], width: int, start: int = 0) -> int:
    """Kleene iteration on raw masks; raises if it fails to settle in
    ``width + 1`` applications, which a monotone operator cannot do."""
    x = start
    for _ in range(width + 1):
        nxt = op(x)
        if nxt == x:
            return x
        x = nxt
    raise NonMonotoneOperatorError(
        f"no fixpoint after {width + 1} applications; operator is not monotone"
    )


def kleene_lfp(op: Callable[[Interp], Interp], universe: AtomUniverse) -> Interp:
    """Least fixpoint of a subset-monotone operator, iterated from the
    empty interpretation."""
    bits = _lfp_masks(lambda m: op(Interp(m, universe)).bits, len(universe))
    return Interp(bits, universe)

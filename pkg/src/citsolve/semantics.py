"""Immediate-consequence operators and the fixpoint semantics built on
them: supported, Kripke-Kleene, partial and two-valued stable, well-founded,
and the interval-based most-precise ("ultimate") variants.

Two layers coexist here.  The public operations work on Interp/ApproxPair
values; the enumeration and fixpoint loops run on raw bit masks via
precompiled rule triples, which keeps exhaustive searches on sixteen-atom
universes in the sub-second range.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .config import ENV_CUTOFF, Cutoffs, default_cutoffs
from .errors import InconsistentPairError, ResourceCutoffError, UsageError
from .lattice import (
    ApproxPair,
    AtomUniverse,
    Interp,
    Scope,
    TruthValue,
    _lfp_masks,
    atom_value,
    iter_submasks,
    popcount,
)
from .program import Program, Rule

SEMANTICS = ("supported", "kk", "partial-stable", "stable", "wf", "ultimate-wf")


def eval_formula(pair: ApproxPair, rule: Rule) -> TruthValue:
    """Four-valued value of a rule body: the truth-order greatest lower
    bound of the literal values, T for an empty body."""
    values = []
    if rule.body_top:
        values.append(TruthValue.T)
    if rule.body_bot:
        values.append(TruthValue.F)
    for p in rule.pos:
        values.append(atom_value(pair, p))
    for p in rule.neg:
        values.append(-atom_value(pair, p))
    return TruthValue.glb_t(values)


@lru_cache(maxsize=512)
def _compiled(program: Program) -> tuple[tuple[int, int, int], ...]:
    """(head_bit, pos_mask, neg_mask) per non-inert rule."""
    out = []
    for r in program.rules:
        if r.inert:
            continue
        pos = 0
        for p in r.pos:
            pos |= 1 << p
        neg = 0
        for p in r.neg:
            neg |= 1 << p
        out.append((1 << r.head, pos, neg))
    return tuple(out)


def _ic2_mask(rules: tuple[tuple[int, int, int], ...], x: int) -> int:
    acc = 0
    for head, pos, neg in rules:
        if pos & ~x == 0 and neg & x == 0:
            acc |= head
    return acc


def ic2(program: Program, x: Interp) -> Interp:
    """Two-valued immediate consequences: heads of rules whose body is
    true under the total interpretation x."""
    if x.universe != program.universe:
        raise UsageError("interpretation universe differs from program universe")
    return Interp(_ic2_mask(_compiled(program), x.bits), program.universe)


class Approximator:
    """A pair-to-pair operator over the bilattice of a (sub-)universe.

    ``lower``/``upper`` expose the two components; ``apply`` the full
    operator.  Outputs are confined to ``scope``, making a scoped
    approximator the restriction of the operator to that sub-lattice.
    """

    consistent_only = False

    def __init__(self, program: Program, scope: Scope | None):
        self.program = program
        self.universe = program.universe
        self.scope = scope if scope is not None else Scope.full(program.universe)

    def _lower_m(self, xl: int, xu: int) -> int:
        raise NotImplementedError

    def _upper_m(self, xl: int, xu: int) -> int:
        raise NotImplementedError

    def lower(self, x: Interp, y: Interp) -> Interp:
        return Interp(self._lower_m(x.bits, y.bits), self.universe)

    def upper(self, x: Interp, y: Interp) -> Interp:
        return Interp(self._upper_m(x.bits, y.bits), self.universe)

    def apply(self, pair: ApproxPair) -> ApproxPair:
        if pair.universe != self.universe:
            raise UsageError("pair universe differs from operator universe")
        xl, xu = pair.lower.bits, pair.upper.bits
        return ApproxPair.of(self.universe, self._lower_m(xl, xu), self._upper_m(xl, xu))


class _FourValuedIC(Approximator):
    def __init__(self, program: Program, scope: Scope | None):
        super().__init__(program, scope)
        self._rules = _compiled(program)
        self._mask = self.scope.mask

    def _lower_m(self, xl: int, xu: int) -> int:
        acc = 0
        for head, pos, neg in self._rules:
            if pos & ~xl == 0 and neg & xu == 0:
                acc |= head
        return acc & self._mask

    def _upper_m(self, xl: int, xu: int) -> int:
        acc = 0
        for head, pos, neg in self._rules:
            if pos & ~xu == 0 and neg & xl == 0:
                acc |= head
        return acc & self._mask


class _Ultimate(Approximator):
    consistent_only = True

    def __init__(self, program: Program, scope: Scope | None, max_interval: int):
        super().__init__(program, scope)
        self._rules = _compiled(program)
        self._mask = self.scope.mask
        self._max_interval = max_interval

    def _interval(self, xl: int, xu: int) -> tuple[int, int]:
        if xl & ~xu:
            raise InconsistentPairError(
                "interval is empty: lower bound is not contained in upper bound"
            )
        free = xu & ~xl
        if 1 << popcount(free) > self._max_interval:
            raise ResourceCutoffError(
                f"interval of 2^{popcount(free)} elements exceeds the "
                f"ultimate-operator cutoff of {self._max_interval} "
                f"(raise it via the ultimate_interval cutoff)"
            )
        meet = self.universe.full_mask
        join = 0
        rules = self._rules
        for sub in iter_submasks(free):
            img = _ic2_mask(rules, xl | sub)
            meet &= img
            join |= img
        return meet, join

    def _lower_m(self, xl: int, xu: int) -> int:
        return self._interval(xl, xu)[0] & self._mask

    def _upper_m(self, xl: int, xu: int) -> int:
        return self._interval(xl, xu)[1] & self._mask


def ic4(program: Program, scope: Scope | None = None) -> Approximator:
    """The four-valued immediate-consequence approximator: the lower
    component collects heads whose body value is T or C, the upper those
    with body value U or T.  On exact pairs it extends ic2."""
    return _FourValuedIC(program, scope)


def ultimate(
    program: Program,
    scope: Scope | None = None,
    max_interval: int | None = None,
) -> Approximator:
    """The most precise approximator of ic2, by explicit enumeration of the
    interval between the bounds.  Requires consistent input pairs; refuses
    intervals wider than ``max_interval`` elements."""
    if max_interval is None:
        max_interval = default_cutoffs().ultimate_interval
    return _Ultimate(program, scope, max_interval)


def _stable_masks(op: Approximator, xl: int, xu: int) -> tuple[int, int]:
    width = len(op.scope)
    lower = _lfp_masks(lambda z: op._lower_m(z, xu), width)
    # A partial operator's upper component lives on the sub-lattice above
    # the (fixed) lower bound; its least fixpoint is reached from there.
    start = xl if op.consistent_only else 0
    upper = _lfp_masks(lambda z: op._upper_m(xl, z), width, start=start)
    return lower, upper


def stable_op(op: Approximator, pair: ApproxPair) -> ApproxPair:
    """The stable operator: the pair of least fixpoints of the lower
    component (upper bound fixed) and the upper component (lower fixed)."""
    if pair.universe != op.universe:
        raise UsageError("pair universe differs from operator universe")
    lo, up = _stable_masks(op, pair.lower.bits, pair.upper.bits)
    return ApproxPair.of(op.universe, lo, up)


def _iterate_i_monotone(op, start: tuple[int, int], width: int) -> tuple[int, int]:
    """Iterate a precision-monotone pair operator from ``start`` until it
    settles; each proper step strictly gains precision, bounding the loop."""
    cur = start
    for _ in range(2 * width + 2):
        nxt = op(cur)
        if nxt == cur:
            return cur
        cur = nxt
    raise UsageError("pair iteration did not converge; operator is not precision-monotone")


def kripke_kleene(op: Approximator) -> ApproxPair:
    """The precision-least fixpoint of an approximator, iterated from the
    least precise pair of its scope."""
    width = len(op.scope)
    lo, up = _iterate_i_monotone(
        lambda p: (op._lower_m(*p), op._upper_m(*p)), (0, op.scope.mask), width
    )
    return ApproxPair.of(op.universe, lo, up)


def well_founded(op: Approximator) -> ApproxPair:
    """The precision-least fixpoint of the stable operator; unique."""
    width = len(op.scope)
    lo, up = _iterate_i_monotone(
        lambda p: _stable_masks(op, *p), (0, op.scope.mask), width
    )
    return ApproxPair.of(op.universe, lo, up)


@dataclass(frozen=True)
class SemanticsResult:
    """Outcome of a semantics computation: a set of pairs.

    Singleton for kk / wf / ultimate-wf; two-valued kinds hold exact pairs.
    """

    kind: str
    models: frozenset[ApproxPair]
    universe: AtomUniverse

    def sorted_models(self) -> list[ApproxPair]:
        return sorted(self.models, key=lambda p: (p.lower.bits, p.upper.bits))

    def single(self) -> ApproxPair:
        if len(self.models) != 1:
            raise UsageError(f"{self.kind} result is not a singleton")
        return next(iter(self.models))

    def two_valued(self) -> list[Interp]:
        return [p.lower for p in self.sorted_models()]


def _check_exhaustive(size: int, max_atoms: int | None) -> None:
    limit = max_atoms if max_atoms is not None else default_cutoffs().exhaustive_atoms
    if size > limit:
        raise ResourceCutoffError(
            f"exhaustive search over {size} atoms exceeds the cutoff of "
            f"{limit} (override with {ENV_CUTOFF} or max_atoms)"
        )


MODES = ("operator", "stable", "two-valued-stable", "supported")


def enumerate_fixpoints(
    op: Approximator, mode: str, max_atoms: int | None = None
) -> SemanticsResult:
    """Exhaustively enumerate fixpoints over the operator's scope.

    ``operator`` tests every consistent pair against the approximator,
    ``stable`` tests the stable operator, ``two-valued-stable`` restricts
    to exact pairs, and ``supported`` tests the base operator on total
    interpretations.  On a partial approximator, candidates outside its
    domain are skipped; such enumeration is experimental.
    """
    if mode not in MODES:
        raise UsageError(f"unknown enumeration mode {mode!r}")
    scope_mask = op.scope.mask
    _check_exhaustive(popcount(scope_mask), max_atoms)
    universe = op.universe
    found: set[ApproxPair] = set()

    if mode == "supported":
        for x in iter_submasks(scope_mask):
            if op._lower_m(x, x) == x and op._upper_m(x, x) == x:
                found.add(ApproxPair.of(universe, x, x))
        kind = "supported"
    elif mode == "two-valued-stable":
        for x in iter_submasks(scope_mask):
            try:
                if _stable_masks(op, x, x) == (x, x):
                    found.add(ApproxPair.of(universe, x, x))
            except InconsistentPairError:
                continue
        kind = "stable"
    elif mode == "stable":
        # The lower component of the stable operator ignores the lower
        # input, so the upper bound determines the candidate pair.
        width = popcount(scope_mask)
        for y in iter_submasks(scope_mask):
            try:
                x = _lfp_masks(lambda z: op._lower_m(z, y), width)
                if x & ~y:
                    continue
                start = x if op.consistent_only else 0
                if _lfp_masks(lambda z: op._upper_m(x, z), width, start=start) == y:
                    found.add(ApproxPair.of(universe, x, y))
            except InconsistentPairError:
                continue
        kind = "partial-stable"
    else:
        for y in iter_submasks(scope_mask):
            for x in iter_submasks(y):
                try:
                    if op._lower_m(x, y) == x and op._upper_m(x, y) == y:
                        found.add(ApproxPair.of(universe, x, y))
                except InconsistentPairError:
                    continue
        kind = "operator"

    return SemanticsResult(kind, frozenset(found), universe)


def gl_reduct_stable(
    program: Program,
    scope: Scope | None = None,
    max_atoms: int | None = None,
) -> frozenset[Interp]:
    """Stable models via the reduct: delete rules with a negated atom in
    the candidate, strip the remaining negations, and keep the candidate
    iff it is the least model of that positive program.  This path shares
    nothing with the stable-operator machinery and serves as its oracle."""
    scope_mask = scope.mask if scope is not None else program.universe.full_mask
    _check_exhaustive(popcount(scope_mask), max_atoms)
    rules = _compiled(program)
    width = popcount(scope_mask)
    out = set()
    for x in iter_submasks(scope_mask):
        reduct = [(head, pos) for head, pos, neg in rules if neg & x == 0]

        def positive_step(z: int) -> int:
            acc = 0
            for head, pos in reduct:
                if pos & ~z == 0:
                    acc |= head
            return acc & scope_mask

        if _lfp_masks(positive_step, width) == x:
            out.add(Interp(x, program.universe))
    return frozenset(out)


def solve_monolithic(
    program: Program,
    semantics: str,
    scope: Scope | None = None,
    max_atoms: int | None = None,
    cutoffs: Cutoffs | None = None,
) -> SemanticsResult:
    """Dispatch a semantics name to the corresponding computation over the
    full universe (or the given sub-scope)."""
    cutoffs = cutoffs if cutoffs is not None else default_cutoffs()
    if semantics == "kk":
        pair = kripke_kleene(ic4(program, scope))
        return SemanticsResult("kk", frozenset({pair}), program.universe)
    if semantics == "wf":
        pair = well_founded(ic4(program, scope))
        return SemanticsResult("wf", frozenset({pair}), program.universe)
    if semantics == "ultimate-wf":
        pair = well_founded(ultimate(program, scope, cutoffs.ultimate_interval))
        return SemanticsResult("ultimate-wf", frozenset({pair}), program.universe)
    if semantics == "supported":
        return enumerate_fixpoints(ic4(program, scope), "supported", max_atoms)
    if semantics == "stable":
        return enumerate_fixpoints(ic4(program, scope), "two-valued-stable", max_atoms)
    if semantics == "partial-stable":
        return enumerate_fixpoints(ic4(program, scope), "stable", max_atoms)
    raise UsageError(f"unknown semantics {semantics!r}; expected one of {SEMANTICS}")

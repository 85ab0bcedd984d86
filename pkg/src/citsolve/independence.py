"""Conditional-independence machinery.

``ci_semantic`` verifies the defining property by brute force: projecting
the operator's output onto one side plus the pivot must be insensitive to
the other side's input.  ``ci_syntactic`` is the sound (not complete)
graph criterion: the pivot separates the two sides in the dependency graph
and forms a lower stratum that depends on neither side.
``detect_partitions`` searches for partitions passing the graph criterion.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import networkx as nx

from .config import ENV_CUTOFF, default_cutoffs
from .errors import InvalidPartitionError, ResourceCutoffError, UsageError
from .lattice import Interp, Scope, iter_submasks, popcount
from .program import Program, dep_graph
from .semantics import _compiled, _ic2_mask, ic4


@dataclass(frozen=True)
class Partition3:
    """A three-way split of a scope: two sides and the conditional pivot."""

    a1: Scope
    a2: Scope
    a3: Scope

    def __post_init__(self):
        if self.a1.universe != self.a2.universe or self.a1.universe != self.a3.universe:
            raise UsageError("partition parts belong to different universes")
        if (
            self.a1.mask & self.a2.mask
            or self.a1.mask & self.a3.mask
            or self.a2.mask & self.a3.mask
        ):
            raise UsageError("partition parts overlap")

    @property
    def scope(self) -> Scope:
        return Scope(self.a1.mask | self.a2.mask | self.a3.mask, self.a1.universe)

    def swapped(self) -> "Partition3":
        return Partition3(self.a2, self.a1, self.a3)

    def sort_key(self) -> tuple:
        return (self.a1.positions(), self.a2.positions(), self.a3.positions())

    def to_dict(self) -> dict:
        return {
            "a1": list(self.a1.names()),
            "a2": list(self.a2.names()),
            "a3": list(self.a3.names()),
        }

    @classmethod
    def from_dict(cls, data: dict, program: Program) -> "Partition3":
        try:
            parts = [
                Scope.of_names(program.universe, data.get(key, []))
                for key in ("a1", "a2", "a3")
            ]
        except UsageError as exc:
            raise InvalidPartitionError(str(exc)) from exc
        try:
            return cls(*parts)
        except UsageError as exc:
            raise InvalidPartitionError(str(exc)) from exc


def load_partition(path: str, program: Program) -> Partition3:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidPartitionError(f"{path}: {exc}") from exc
    if not isinstance(data, dict):
        raise InvalidPartitionError(f"{path}: expected a JSON object")
    return Partition3.from_dict(data, program)


@dataclass(frozen=True)
class CiCertificate:
    """Record of which check established an independence, and how."""

    partition: Partition3
    method: str  # "semantic-bruteforce" or "syntactic"
    witness: tuple[tuple[str, bool], ...] = ()


def ci_semantic(
    program: Program,
    part: Partition3,
    mode: str = "two-valued",
    max_atoms: int | None = None,
) -> bool:
    """Brute-force check that the two sides are independent given the
    pivot.  Inputs range over the partition's scope; atoms outside it are
    absent, which coincides with marginalising them away."""
    if mode not in ("two-valued", "four-valued"):
        raise UsageError(f"unknown mode {mode!r}")
    defaults = default_cutoffs()
    scope = part.scope
    n = len(scope)
    if max_atoms is None:
        max_atoms = (
            defaults.ci_two_valued_atoms
            if mode == "two-valued"
            else defaults.ci_four_valued_atoms
        )
    if n > max_atoms:
        raise ResourceCutoffError(
            f"independence check over {n} atoms exceeds the cutoff of "
            f"{max_atoms} (override with {ENV_CUTOFF} or max_atoms)"
        )

    m13 = part.a1.mask | part.a3.mask
    m23 = part.a2.mask | part.a3.mask

    if mode == "two-valued":
        rules = _compiled(program)
        seen1: dict[int, int] = {}
        seen2: dict[int, int] = {}
        for x in iter_submasks(scope.mask):
            out = _ic2_mask(rules, x)
            for mask, seen in ((m13, seen1), (m23, seen2)):
                key = x & mask
                val = out & mask
                prev = seen.setdefault(key, val)
                if prev != val:
                    return False
        return True

    op = ic4(program, scope)
    pseen1: dict[tuple[int, int], tuple[int, int]] = {}
    pseen2: dict[tuple[int, int], tuple[int, int]] = {}
    for xl in iter_submasks(scope.mask):
        for xu in iter_submasks(scope.mask):
            out = (op._lower_m(xl, xu), op._upper_m(xl, xu))
            for mask, seen in ((m13, pseen1), (m23, pseen2)):
                key = (xl & mask, xu & mask)
                val = (out[0] & mask, out[1] & mask)
                prev = seen.setdefault(key, val)
                if prev != val:
                    return False
    return True


def _scope_edges(program: Program, scope_mask: int) -> list[tuple[int, int]]:
    return [
        (p, q)
        for p, q in dep_graph(program).edges
        if (1 << p) & scope_mask and (1 << q) & scope_mask
    ]


def ci_syntactic(program: Program, part: Partition3) -> bool:
    """Graph criterion: (1) with the pivot removed, no dependency edge
    links the two sides; (2) the pivot is a lower stratum, with no
    dependency path from either side into it."""
    edges = _scope_edges(program, part.scope.mask)
    a1, a2, a3 = part.a1.mask, part.a2.mask, part.a3.mask
    for p, q in edges:
        pb, qb = 1 << p, 1 << q
        if (pb & a1 and qb & a2) or (pb & a2 and qb & a1):
            return False
    graph = nx.DiGraph(edges)
    sides = [p for p in part.a1.positions() + part.a2.positions() if p in graph]
    reachable = set(sides)
    for s in sides:
        reachable |= nx.descendants(graph, s)
    return all(not (1 << p) & a3 for p in reachable)


def separator_witness(program: Program, part: Partition3) -> tuple[tuple[str, bool], ...]:
    """The two sub-checks of the graph criterion, by name."""
    edges = _scope_edges(program, part.scope.mask)
    a1, a2, a3 = part.a1.mask, part.a2.mask, part.a3.mask
    separated = not any(
        ((1 << p) & a1 and (1 << q) & a2) or ((1 << p) & a2 and (1 << q) & a1)
        for p, q in edges
    )
    graph = nx.DiGraph(edges)
    sides = [p for p in part.a1.positions() + part.a2.positions() if p in graph]
    reachable = set(sides)
    for s in sides:
        reachable |= nx.descendants(graph, s)
    lower = all(not (1 << p) & a3 for p in reachable)
    return (("separator", separated), ("lower-stratum", lower))


def certify_partition(
    program: Program,
    part: Partition3,
    semantic_max_atoms: int | None = None,
) -> CiCertificate | None:
    """Certificate via the graph criterion, or by brute force when the
    scope is small enough; None when neither check passes."""
    if not part.a2:
        return CiCertificate(part, "syntactic", (("trivial", True),))
    if ci_syntactic(program, part):
        return CiCertificate(part, "syntactic", separator_witness(program, part))
    limit = (
        semantic_max_atoms
        if semantic_max_atoms is not None
        else default_cutoffs().ci_two_valued_atoms
    )
    if len(part.scope) <= limit and ci_semantic(program, part, max_atoms=limit):
        return CiCertificate(part, "semantic-bruteforce")
    return None


def _downset_candidates(cond: nx.DiGraph, max_candidates: int) -> list[frozenset[int]]:
    """Predecessor-closed sets of condensation nodes, in breadth-first
    order starting from the empty set, capped at ``max_candidates``."""
    order = sorted(cond.nodes)
    out: list[frozenset[int]] = []
    seen = {frozenset()}
    queue = [frozenset()]
    while queue and len(out) < max_candidates:
        current = queue.pop(0)
        out.append(current)
        for node in order:
            if node in current:
                continue
            if all(p in current for p in cond.predecessors(node)):
                nxt = current | {node}
                if nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)
    return out


def detect_partitions(
    program: Program,
    scope: Scope | None = None,
    max_strata: int | None = None,
) -> list[Partition3]:
    """Deterministic search for partitions passing the graph criterion.

    Candidate pivots are downward-closed unions of strongly connected
    components (so nothing in the pivot depends on the remainder); for
    each pivot whose removal splits the remainder, the component holding
    the smallest atom becomes one side and the rest the other."""
    if scope is None:
        scope = program.full_scope()
    if max_strata is None:
        max_strata = default_cutoffs().detect_max_strata
    universe = program.universe
    graph = nx.DiGraph()
    graph.add_nodes_from(scope.positions())
    graph.add_edges_from(_scope_edges(program, scope.mask))
    cond = nx.condensation(graph)
    members = {node: cond.nodes[node]["members"] for node in cond.nodes}

    found: list[Partition3] = []
    seen_keys: set[tuple] = set()
    for candidate in _downset_candidates(cond, max_strata):
        a3_mask = 0
        for node in candidate:
            for atom in members[node]:
                a3_mask |= 1 << atom
        rest = scope.mask & ~a3_mask
        if rest == 0:
            continue
        sub = graph.subgraph([p for p in scope.positions() if (1 << p) & rest])
        components = sorted(
            (sorted(c) for c in nx.connected_components(sub.to_undirected())),
        )
        if len(components) < 2:
            continue
        a1_mask = 0
        for atom in components[0]:
            a1_mask |= 1 << atom
        part = Partition3(
            Scope(a1_mask, universe),
            Scope(rest & ~a1_mask, universe),
            Scope(a3_mask, universe),
        )
        key = part.sort_key()
        if key in seen_keys:
            continue
        seen_keys.add(key)
        if ci_syntactic(program, part):
            found.append(part)
    return sorted(found, key=Partition3.sort_key)


def check_symmetry(program: Program, part: Partition3, mode: str = "two-valued") -> bool:
    """Re-test with the sides swapped; must hold whenever the original does."""
    if not ci_semantic(program, part, mode):
        raise UsageError("symmetry check requires an established independence")
    return ci_semantic(program, part.swapped(), mode)


def check_weak_union(
    program: Program, part: Partition3, move: Scope, mode: str = "two-valued"
) -> bool:
    """Move part of the second side into the pivot and re-test.  Unlike in
    the probabilistic setting this may come out false."""
    if not ci_semantic(program, part, mode):
        raise UsageError("weak-union check requires an established independence")
    if not move <= part.a2:
        raise UsageError("moved atoms must come from the second side")
    shrunk = Partition3(part.a1, part.a2 - move, part.a3 | move)
    return ci_semantic(program, shrunk, mode)


def stratifiable(
    program: Program,
    layers: Sequence[Scope],
    max_atoms: int | None = None,
) -> bool:
    """Brute-force layering check: agreement of two interpretations on a
    prefix of layers forces agreement of the operator outputs there."""
    universe = program.universe
    covered = 0
    for layer in layers:
        if layer.universe != universe:
            raise UsageError("layer universe differs from program universe")
        if layer.mask & covered:
            raise UsageError("layers overlap")
        covered |= layer.mask
    if covered != universe.full_mask:
        raise UsageError("layers do not cover the universe")
    n = len(universe)
    limit = max_atoms if max_atoms is not None else default_cutoffs().ci_two_valued_atoms
    if n > limit:
        raise ResourceCutoffError(
            f"stratifiability check over {n} atoms exceeds the cutoff of {limit}"
        )
    rules = _compiled(program)
    prefixes = []
    acc = 0
    for layer in layers:
        acc |= layer.mask
        prefixes.append(acc)
    for prefix in prefixes:
        seen: dict[int, int] = {}
        for x in iter_submasks(universe.full_mask):
            out = _ic2_mask(rules, x) & prefix
            prev = seen.setdefault(x & prefix, out)
            if prev != out:
                return False
    return True


class Formula:
    """Propositional formula over program atoms: atoms, negation,
    conjunction, and the two constants."""

    def eval_two(self, x: int) -> bool:
        raise NotImplementedError


@dataclass(frozen=True)
class FAtom(Formula):
    position: int

    def eval_two(self, x: int) -> bool:
        return bool(x >> self.position & 1)


@dataclass(frozen=True)
class FNeg(Formula):
    sub: Formula

    def eval_two(self, x: int) -> bool:
        return not self.sub.eval_two(x)


@dataclass(frozen=True)
class FConj(Formula):
    subs: tuple[Formula, ...]

    def eval_two(self, x: int) -> bool:
        return all(s.eval_two(x) for s in self.subs)


@dataclass(frozen=True)
class FConst(Formula):
    value: bool

    def eval_two(self, x: int) -> bool:
        return self.value


def literal_conjunction(scope: Scope, true_mask: int) -> Formula:
    """The complete conjunction of literals over ``scope`` satisfied
    exactly by interpretations agreeing with ``true_mask`` there."""
    subs: list[Formula] = []
    for p in scope.positions():
        atom = FAtom(p)
        subs.append(atom if true_mask >> p & 1 else FNeg(atom))
    return FConj(tuple(subs))


def darwiche_entails(
    program: Program,
    premise: Formula,
    conclusion: Formula,
    max_atoms: int | None = None,
) -> bool:
    """Inference through one operator application: every total
    interpretation satisfying the premise must have its immediate
    consequences satisfy the conclusion."""
    n = len(program.universe)
    limit = max_atoms if max_atoms is not None else default_cutoffs().ci_two_valued_atoms
    if n > limit:
        raise ResourceCutoffError(
            f"entailment check over {n} atoms exceeds the cutoff of {limit}"
        )
    rules = _compiled(program)
    for x in iter_submasks(program.universe.full_mask):
        if premise.eval_two(x) and not conclusion.eval_two(_ic2_mask(rules, x)):
            return False
    return True

"""Conditional-independence trees: construction, size metrics, and
decomposed solving with verified recombination.

A tree node is labelled with a three-way partition of its scope; its
children cover side-one-plus-pivot and side-two-plus-pivot.  Leaves with an
empty second side inherit the parent's split unchanged.  Every label
carries a certificate for the independence it claims.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

from .config import Cutoffs, default_cutoffs
from .errors import (
    InvalidPartitionError,
    PivotMismatchError,
    ResourceCutoffError,
    UsageError,
)
from .lattice import ApproxPair, AtomUniverse, Interp, Scope, popcount
from .program import Program, marginalise, restrict_to_scope
from .independence import CiCertificate, Partition3, certify_partition, detect_partitions
from .semantics import SEMANTICS, SemanticsResult, solve_monolithic


@dataclass(frozen=True)
class CitNode:
    part: Partition3
    cert: CiCertificate | None
    children: tuple["CitNode", "CitNode"] | None = None

    @property
    def scope(self) -> Scope:
        return self.part.scope

    @property
    def is_leaf(self) -> bool:
        return self.children is None


@dataclass(frozen=True)
class Cit:
    root: CitNode
    universe: AtomUniverse

    def leaves(self) -> Iterator[CitNode]:
        stack = [self.root]
        while stack:
            node = stack.pop()
            if node.is_leaf:
                yield node
            else:
                stack.extend(reversed(node.children))

    def nodes(self) -> Iterator[CitNode]:
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            if not node.is_leaf:
                stack.extend(reversed(node.children))

    def to_dict(self) -> dict:
        def render(node: CitNode) -> dict:
            data = node.part.to_dict()
            data["children"] = (
                [] if node.is_leaf else [render(c) for c in node.children]
            )
            return data

        return render(self.root)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


@dataclass(frozen=True)
class CitSizes:
    cps: int
    cs: int
    leaf_count: int


def cit_sizes(tree: Cit) -> CitSizes:
    """Partition size: the largest side-plus-pivot sub-lattice over the
    leaves; tree size: its maximum with the leaf count."""
    cps = 1
    leaf_count = 0
    for leaf in tree.leaves():
        leaf_count += 1
        for side in (leaf.part.a1, leaf.part.a2):
            cps = max(cps, 1 << popcount(side.mask | leaf.part.a3.mask))
    return CitSizes(cps=cps, cs=max(cps, leaf_count), leaf_count=leaf_count)


@dataclass(frozen=True)
class CitConfig:
    max_depth: int = 64
    max_strata: int | None = None
    root_partition: Partition3 | None = None
    semantic_max_atoms: int | None = None


def _best_partition(candidates: list[Partition3]) -> Partition3:
    def key(p: Partition3) -> tuple:
        pivot = popcount(p.a3.mask)
        worst = max(popcount(p.a1.mask) + pivot, popcount(p.a2.mask) + pivot)
        return (worst, p.sort_key())

    return min(candidates, key=key)


def build_cit(program: Program, config: CitConfig | None = None) -> Cit:
    """Recursively split the universe along detected independencies.

    Splitting continues while a certified non-trivial partition of the
    current scope exists and the depth budget permits; a scope that cannot
    be split becomes a leaf labelled with the side and pivot it inherited.
    Deterministic for a fixed configuration.
    """
    config = config or CitConfig()
    universe = program.universe

    def certified_or_raise(part: Partition3, scoped: Program) -> CiCertificate:
        cert = certify_partition(scoped, part, config.semantic_max_atoms)
        if cert is None:
            raise InvalidPartitionError(
                f"partition {part.to_dict()} fails both independence checks"
            )
        return cert

    def leaf(side: Scope, pivot: Scope) -> CitNode:
        part = Partition3(side, Scope.empty(universe), pivot)
        return CitNode(part, CiCertificate(part, "syntactic", (("trivial", True),)))

    def split(scope: Scope, side: Scope, pivot: Scope, depth: int,
              forced: Partition3 | None) -> CitNode:
        scoped = restrict_to_scope(program, scope)
        if forced is not None:
            part = forced
            cert = certified_or_raise(part, scoped)
        else:
            if depth >= config.max_depth:
                return leaf(side, pivot)
            candidates = detect_partitions(program, scope, config.max_strata)
            candidates = [p for p in candidates if p.a1 and p.a2]
            if not candidates:
                return leaf(side, pivot)
            part = _best_partition(candidates)
            cert = certify_partition(scoped, part, config.semantic_max_atoms)
            if cert is None:
                return leaf(side, pivot)
        left = split(part.a1 | part.a3, part.a1, part.a3, depth + 1, None)
        right = split(part.a2 | part.a3, part.a2, part.a3, depth + 1, None)
        return CitNode(part, cert, (left, right))

    if config.root_partition is not None and config.root_partition.scope.mask != universe.full_mask:
        raise InvalidPartitionError("root partition must cover the whole universe")
    root = split(
        program.full_scope(),
        program.full_scope(),
        Scope.empty(universe),
        0,
        config.root_partition,
    )
    tree = Cit(root, universe)
    seen: set[int] = set()
    for lf in tree.leaves():
        if lf.scope.mask in seen:
            raise PivotMismatchError("duplicate leaf scope; construction is broken")
        seen.add(lf.scope.mask)
    return tree


def load_cit(path: str, program: Program, semantic_max_atoms: int | None = None) -> Cit:
    """Read a tree from JSON and re-validate structure and certificates."""
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidPartitionError(f"{path}: {exc}") from exc
    return cit_from_dict(data, program, semantic_max_atoms)


def cit_from_dict(
    data: dict, program: Program, semantic_max_atoms: int | None = None
) -> Cit:
    universe = program.universe

    def build(node_data: dict, expected_scope: Scope) -> CitNode:
        if not isinstance(node_data, dict):
            raise InvalidPartitionError("tree node must be a JSON object")
        part = Partition3.from_dict(node_data, program)
        if part.scope.mask != expected_scope.mask:
            raise InvalidPartitionError(
                f"node scope {sorted(part.scope.names())} does not match the "
                f"expected scope {sorted(expected_scope.names())}"
            )
        cert = certify_partition(
            restrict_to_scope(program, part.scope), part, semantic_max_atoms
        )
        if cert is None:
            raise InvalidPartitionError(
                f"partition {part.to_dict()} fails both independence checks"
            )
        children = node_data.get("children", [])
        if not children:
            return CitNode(part, cert)
        if len(children) != 2:
            raise InvalidPartitionError("a tree node has either zero or two children")
        left = build(children[0], part.a1 | part.a3)
        right = build(children[1], part.a2 | part.a3)
        return CitNode(part, cert, (left, right))

    root = build(data, Scope.full(universe))
    return Cit(root, universe)


@dataclass(frozen=True)
class LeafRun:
    scope: Scope
    seconds: float
    result: SemanticsResult


_SINGLETON = {"kk", "wf", "ultimate-wf"}


def _leaf_scopes(tree: Cit) -> list[Scope]:
    """One task per non-empty leaf side; a pivot-only leaf is one task."""
    scopes: list[Scope] = []
    seen: set[int] = set()
    for leaf in tree.leaves():
        part = leaf.part
        sides = [s for s in (part.a1, part.a2) if s]
        tasks = [s | part.a3 for s in sides] if sides else [part.a3]
        for sc in tasks:
            if sc.mask not in seen:
                seen.add(sc.mask)
                scopes.append(sc)
    return sorted(scopes, key=lambda s: s.positions())


def _solve_leaf(
    program: Program, scope: Scope, semantics: str, cutoffs: Cutoffs
) -> LeafRun:
    local = restrict_to_scope(program, scope)
    t0 = time.perf_counter()
    try:
        result = solve_monolithic(local, semantics, scope, cutoffs=cutoffs)
    except ResourceCutoffError as exc:
        raise ResourceCutoffError(
            f"leaf scope {sorted(scope.names())}: {exc}"
        ) from exc
    return LeafRun(scope, time.perf_counter() - t0, result)


def _join_models(
    runs: Sequence[LeafRun], kind: str, universe: AtomUniverse
) -> SemanticsResult:
    """Relational join of leaf model sets on their scope overlaps."""
    acc: set[tuple[int, int]] = {(0, 0)}
    covered = 0
    for run in runs:
        mask = run.scope.mask
        overlap = covered & mask
        leaf_models = [
            (p.lower.bits, p.upper.bits) for p in run.result.sorted_models()
        ]
        nxt: set[tuple[int, int]] = set()
        for lo, up in acc:
            for llo, lup in leaf_models:
                if (lo ^ llo) & overlap or (up ^ lup) & overlap:
                    continue
                nxt.add((lo | llo, up | lup))
        acc = nxt
        covered |= mask
        if not acc:
            break
    models = frozenset(ApproxPair.of(universe, lo, up) for lo, up in acc)
    return SemanticsResult(kind, models, universe)


def _combine_singletons(
    runs: Sequence[LeafRun], kind: str, universe: AtomUniverse
) -> SemanticsResult:
    lo_bits = 0
    up_bits = 0
    covered = 0
    for run in runs:
        pair = run.result.single()
        mask = run.scope.mask
        overlap = covered & mask
        if (lo_bits ^ pair.lower.bits) & overlap or (up_bits ^ pair.upper.bits) & overlap:
            raise PivotMismatchError(
                f"leaf over {sorted(run.scope.names())} disagrees with earlier "
                f"leaves on shared pivot atoms; an independence certificate is wrong"
            )
        lo_bits |= pair.lower.bits
        up_bits |= pair.upper.bits
        covered |= mask
    return SemanticsResult(
        kind, frozenset({ApproxPair.of(universe, lo_bits, up_bits)}), universe
    )


def run_decomposed(
    program: Program,
    tree: Cit,
    semantics: str,
    jobs: int | None = None,
    cutoffs: Cutoffs | None = None,
) -> tuple[SemanticsResult, list[LeafRun]]:
    """Solve every leaf module concurrently and recombine: scope union for
    the unique-fixpoint semantics, a pivot join for model sets."""
    if semantics not in SEMANTICS:
        raise UsageError(f"unknown semantics {semantics!r}; expected one of {SEMANTICS}")
    if tree.universe != program.universe:
        raise UsageError("tree universe differs from program universe")
    cutoffs = cutoffs if cutoffs is not None else default_cutoffs()
    scopes = _leaf_scopes(tree)
    if jobs is not None and jobs < 1:
        raise UsageError("jobs must be at least 1")
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        runs = list(
            pool.map(lambda s: _solve_leaf(program, s, semantics, cutoffs), scopes)
        )
    runs.sort(key=lambda r: r.scope.positions())
    if semantics in _SINGLETON:
        result = _combine_singletons(runs, semantics, program.universe)
    else:
        kind = {"partial-stable": "partial-stable", "stable": "stable"}.get(
            semantics, "supported"
        )
        result = _join_models(runs, kind, program.universe)
    return result, runs


def solve_decomposed(
    program: Program,
    tree: Cit,
    semantics: str,
    jobs: int | None = None,
    cutoffs: Cutoffs | None = None,
) -> SemanticsResult:
    result, _ = run_decomposed(program, tree, semantics, jobs, cutoffs)
    return result


def query_decomposed(
    program: Program,
    tree: Cit,
    mode: str,
    atom: str,
    semantics: str = "stable",
    jobs: int | None = None,
    cutoffs: Cutoffs | None = None,
) -> bool:
    """Credulous / skeptical atom membership over the decomposed models.

    Leaves whose scope holds the atom are screened first: if none of their
    local models contains it, no joined model can.  Global answers always
    come from the pivot join, so a locally promising model that cannot be
    extended never counts.
    """
    if mode not in ("credulous", "skeptical"):
        raise UsageError(f"unknown query mode {mode!r}")
    if semantics not in ("supported", "stable"):
        raise UsageError("queries support the supported and stable semantics")
    position = program.universe.position(atom)
    bit = 1 << position
    cutoffs = cutoffs if cutoffs is not None else default_cutoffs()
    scopes = _leaf_scopes(tree)
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        runs = list(
            pool.map(lambda s: _solve_leaf(program, s, semantics, cutoffs), scopes)
        )
    if mode == "credulous":
        for run in runs:
            if run.scope.mask & bit and not any(
                p.lower.bits & bit for p in run.result.models
            ):
                return False
    runs.sort(key=lambda r: r.scope.positions())
    joined = _join_models(runs, semantics, program.universe)
    if mode == "credulous":
        return any(p.lower.bits & bit for p in joined.models)
    return all(p.lower.bits & bit for p in joined.models)

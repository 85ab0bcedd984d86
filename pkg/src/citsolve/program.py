"""Propositional normal logic programs: parsing, printing, dependency
graphs, and marginalisation.

Program file format (.lp): one rule per line, ``head.`` or
``head :- lit, lit, ... .`` where a literal is ``atom``, ``not atom``,
``true``, ``false``, ``not true`` or ``not false``.  ``%`` starts a
comment.  An atom is an identifier optionally followed by a parenthesized
comma-separated identifier list, lexed as part of the name, so ``inf(a)``
is a single propositional atom.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Iterable

from .errors import ParseError, UsageError
from .lattice import AtomUniverse, Scope


@dataclass(frozen=True)
class Rule:
    """One normal rule.

    ``head`` is an atom position, or None for a rule whose head was
    marginalised away (such rules derive nothing but keep their index).
    ``pos`` and ``neg`` may overlap: ``p :- q, not q.`` is legal input.
    ``body_top`` / ``body_bot`` record truth constants left in the body;
    a body containing the falsity constant can never fire.
    """

    head: int | None
    pos: frozenset[int]
    neg: frozenset[int]
    body_top: bool = False
    body_bot: bool = False

    @property
    def inert(self) -> bool:
        return self.head is None or self.body_bot

    def atoms(self) -> frozenset[int]:
        base = self.pos | self.neg
        return base | {self.head} if self.head is not None else base


@dataclass(frozen=True)
class Program:
    rules: tuple[Rule, ...]
    universe: AtomUniverse

    def __post_init__(self):
        full = self.universe.full_mask
        for r in self.rules:
            for p in r.atoms():
                if not (1 << p) & full:
                    raise UsageError("rule mentions an atom outside the universe")

    @property
    def n_atoms(self) -> int:
        return len(self.universe)

    @property
    def n_rules(self) -> int:
        return len(self.rules)

    def full_scope(self) -> Scope:
        return Scope.full(self.universe)

    def pretty(self) -> str:
        return "".join(self._pretty_rule(r) + "\n" for r in self.rules)

    def _pretty_rule(self, r: Rule) -> str:
        head = "false" if r.head is None else self.universe.names[r.head]
        lits = sorted(self.universe.names[p] for p in r.pos)
        if r.body_top:
            lits.append("true")
        if r.body_bot:
            lits.append("false")
        lits += sorted("not " + self.universe.names[p] for p in r.neg)
        if not lits:
            return head + "."
        return head + " :- " + ", ".join(lits) + "."


_ATOM_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*(?:\(\s*[A-Za-z0-9_]+(?:\s*,\s*[A-Za-z0-9_]+)*\s*\))?")
_KEYWORDS = {"not", "true", "false"}


class _Lexer:
    def __init__(self, text: str, line_no: int):
        self.text = text
        self.line_no = line_no
        self.pos = 0

    def error(self, message: str) -> ParseError:
        return ParseError(message, self.line_no, self.pos + 1)

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos] in " \t":
            self.pos += 1

    def at_end(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.text)

    def take(self, literal: str) -> bool:
        self.skip_ws()
        if self.text.startswith(literal, self.pos):
            self.pos += len(literal)
            return True
        return False

    def expect(self, literal: str) -> None:
        if not self.take(literal):
            raise self.error(f"expected {literal!r}")

    def atom_token(self) -> str:
        self.skip_ws()
        m = _ATOM_RE.match(self.text, self.pos)
        if not m:
            raise self.error("expected an atom")
        self.pos = m.end()
        return re.sub(r"\s+", "", m.group())


def parse_program(text: str) -> Program:
    """Parse program text, interning atoms in first-occurrence order."""
    names: list[str] = []
    index: dict[str, int] = {}

    def intern(name: str) -> int:
        if name not in index:
            index[name] = len(names)
            names.append(name)
        return index[name]

    rules: list[Rule] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("%", 1)[0]
        lx = _Lexer(line, line_no)
        if lx.at_end():
            continue
        head_tok = lx.atom_token()
        if head_tok in _KEYWORDS:
            raise lx.error(f"{head_tok!r} cannot be a rule head")
        head = intern(head_tok)
        pos: set[int] = set()
        neg: set[int] = set()
        body_top = False
        body_bot = False
        if lx.take(":-"):
            while True:
                negated = lx.take("not")
                tok = lx.atom_token()
                if tok == "not":
                    raise lx.error("'not' must be followed by an atom or constant")
                if tok == "true":
                    # not true folds to the falsity constant
                    body_bot = body_bot or negated
                    body_top = body_top or not negated
                elif tok == "false":
                    body_top = body_top or negated
                    body_bot = body_bot or not negated
                elif negated:
                    neg.add(intern(tok))
                else:
                    pos.add(intern(tok))
                if not lx.take(","):
                    break
        lx.expect(".")
        if not lx.at_end():
            raise lx.error("trailing input after '.'")
        rules.append(Rule(head, frozenset(pos), frozenset(neg), body_top, body_bot))

    return Program(tuple(rules), AtomUniverse(tuple(names)))


@dataclass(frozen=True)
class DepGraph:
    """Edges (p, q) with p occurring in the body of a rule with head q."""

    edges: frozenset[tuple[int, int]]
    universe: AtomUniverse

    def in_edges_of(self, position: int) -> frozenset[int]:
        return frozenset(p for p, q in self.edges if q == position)

    def descendants(self, sources: Iterable[int]) -> frozenset[int]:
        """All atoms reachable from ``sources`` along dependency edges,
        excluding the sources themselves unless reached by a cycle."""
        succ: dict[int, list[int]] = {}
        for p, q in self.edges:
            succ.setdefault(p, []).append(q)
        seen: set[int] = set()
        stack = list(sources)
        while stack:
            node = stack.pop()
            for nxt in succ.get(node, ()):
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        return frozenset(seen)


def dep_graph(program: Program) -> DepGraph:
    """The syntactic dependency graph; constants generate no edges."""
    edges = set()
    for r in program.rules:
        if r.head is None:
            continue
        for p in r.pos | r.neg:
            edges.add((p, r.head))
    return DepGraph(frozenset(edges), program.universe)


@lru_cache(maxsize=256)
def _marginalise_cached(program: Program, mask: int) -> Program:
    rules = []
    for r in program.rules:
        head = r.head
        if head is not None and (1 << head) & mask:
            head = None
        pos = frozenset(p for p in r.pos if not (1 << p) & mask)
        neg = frozenset(p for p in r.neg if not (1 << p) & mask)
        rules.append(
            Rule(
                head,
                pos,
                neg,
                body_top=r.body_top or len(neg) != len(r.neg),
                body_bot=r.body_bot or len(pos) != len(r.pos),
            )
        )
    return replace(program, rules=tuple(rules))


def marginalise(program: Program, atoms: Scope) -> Program:
    """Replace every occurrence of an atom in ``atoms`` by the falsity
    constant: positive body occurrences become false, negated ones become
    true, and rules whose head is hit become inert.  The universe and the
    rule count are unchanged."""
    if atoms.universe != program.universe:
        raise UsageError("scope universe differs from program universe")
    if atoms.mask == 0:
        return program
    return _marginalise_cached(program, atoms.mask)


def restrict_to_scope(program: Program, scope: Scope) -> Program:
    """Marginalise everything outside ``scope``."""
    return marginalise(program, scope.complement())

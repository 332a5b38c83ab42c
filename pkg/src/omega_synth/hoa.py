#!/usr/bin/env python3
"""
Extended HOA automata for the parity track.

Parses, normalizes and prints deterministic omega-automata written in the
Hanoi Omega-Automata format extended with a ``controllable-AP:`` header that
lists the atomic propositions owned by the system. Acceptance is kept on
transitions; state-based marks are stamped onto outgoing edges when parsing.

Valuations are plain integers: bit ``k`` holds the value of AP ``k``. Guards are
sets of cubes ``(mask, value)``; a cube matches a valuation ``v`` when
``v & mask == value``.
"""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import (
    CapacityError, NondeterminismError, ParseError, UnsupportedAcceptanceError
)

logger = logging.getLogger(__name__)

# Explicit valuation enumeration is limited to this many propositions
MAX_EXPLICIT_APS = 16

Cube = Tuple[int, int]


def _bits(mask):
    """Yield the indices of the set bits of ``mask`` in ascending order."""
    index = 0
    while mask:
        if mask & 1:
            yield index
        mask >>= 1
        index += 1


def _subsumes(a, b):
    """True when cube ``a`` matches every valuation cube ``b`` matches."""
    return (a[0] & b[0]) == a[0] and (b[1] & a[0]) == a[1]


def _simplify(cubes):
    """Merge adjacent cubes and drop subsumed ones."""
    work = set(cubes)
    changed = True
    while changed:
        changed = False
        ordered = sorted(work)
        for i, (m1, v1) in enumerate(ordered):
            for m2, v2 in ordered[i + 1:]:
                diff = v1 ^ v2
                if m1 == m2 and diff and diff & (diff - 1) == 0:
                    work.discard((m1, v1))
                    work.discard((m2, v2))
                    work.add((m1 & ~diff, v1 & ~diff))
                    changed = True
                    break
            if changed:
                break
    return frozenset(c for c in work
                     if not any(o != c and _subsumes(o, c) for o in work))


@dataclass(frozen=True)
class Guard:
    """A Boolean function over AP indices stored as a set of cubes (DNF)."""

    cubes: FrozenSet[Cube] = frozenset()

    @classmethod
    def from_cubes(cls, cubes: Iterable[Cube]) -> "Guard":
        return cls(_simplify(cubes))

    @classmethod
    def true(cls) -> "Guard":
        return cls(frozenset({(0, 0)}))

    @classmethod
    def false(cls) -> "Guard":
        return cls(frozenset())

    @classmethod
    def literal(cls, ap: int, positive: bool = True) -> "Guard":
        bit = 1 << ap
        return cls(frozenset({(bit, bit if positive else 0)}))

    @property
    def is_false(self) -> bool:
        return not self.cubes

    def aps(self) -> FrozenSet[int]:
        """Indices of the propositions the guard mentions."""
        mask = 0
        for m, _ in self.cubes:
            mask |= m
        return frozenset(_bits(mask))

    def evaluate(self, valuation: int) -> bool:
        return any(valuation & m == v for m, v in self.cubes)

    def evaluate_array(self, valuations: np.ndarray) -> np.ndarray:
        """Vectorized ``evaluate`` over an integer array of valuations."""
        result = np.zeros(valuations.shape, dtype=bool)
        for m, v in self.cubes:
            result |= (valuations & m) == v
        return result

    def conjoin(self, other: "Guard") -> "Guard":
        out = set()
        for m1, v1 in self.cubes:
            for m2, v2 in other.cubes:
                if (v1 ^ v2) & m1 & m2 == 0:
                    out.add((m1 | m2, v1 | v2))
        return Guard.from_cubes(out)

    def disjoin(self, other: "Guard") -> "Guard":
        return Guard.from_cubes(self.cubes | other.cubes)

    def negate(self) -> "Guard":
        result = {(0, 0)}
        for m, v in self.cubes:
            negated = [(1 << b, (~v & (1 << b))) for b in _bits(m)]
            step = set()
            for rm, rv in result:
                for lm, lv in negated:
                    if (rv ^ lv) & rm & lm == 0:
                        step.add((rm | lm, rv | lv))
            result = _simplify(step)
        return Guard(frozenset(result))

    def overlaps(self, other: "Guard") -> bool:
        return any((v1 ^ v2) & m1 & m2 == 0
                   for m1, v1 in self.cubes for m2, v2 in other.cubes)

    def equivalent(self, other: "Guard", num_aps: int) -> bool:
        """Compare two guards by enumerating all valuations."""
        valuations = np.arange(1 << num_aps, dtype=np.int64)
        return bool(np.array_equal(self.evaluate_array(valuations),
                                   other.evaluate_array(valuations)))

    def to_label(self) -> str:
        if not self.cubes:
            return "f"
        terms = []
        for m, v in sorted(self.cubes):
            if m == 0:
                return "t"
            terms.append("&".join(str(b) if v >> b & 1 else f"!{b}" for b in _bits(m)))
        return " | ".join(terms)


class Flavor(Enum):
    """Acceptance flavors understood by the parser."""
    PARITY = "parity"
    BUCHI = "Buchi"
    CO_BUCHI = "co-Buchi"


@dataclass(frozen=True)
class Acceptance:
    """
    Acceptance descriptor.

    ``kind`` is ``"min"`` or ``"max"`` and ``polarity`` is ``"even"`` or
    ``"odd"``; Buchi and co-Buchi conditions use a single color 0.
    """

    flavor: Flavor = Flavor.PARITY
    kind: str = "min"
    polarity: str = "even"
    colors: int = 1

    @property
    def is_min_even(self) -> bool:
        return self.flavor is Flavor.PARITY and self.kind == "min" and self.polarity == "even"

    def accepts(self, recurring) -> bool:
        """
        Decide whether a run whose recurring marks are ``recurring`` is accepting.

        Args:
            recurring: set of transition priorities seen infinitely often,
                ``None`` standing for unmarked transitions

        Returns:
            bool: True if the run is accepting
        """
        if self.flavor is Flavor.BUCHI:
            return 0 in recurring
        if self.flavor is Flavor.CO_BUCHI:
            return 0 not in recurring
        if self.kind == "min":
            effective = min(self.colors if p is None else p for p in recurring)
        else:
            effective = max(-1 if p is None else p for p in recurring)
        return effective % 2 == (0 if self.polarity == "even" else 1)

    def rejecting_priority(self) -> Optional[int]:
        """A priority whose self-loop alone is rejecting."""
        if self.flavor is Flavor.BUCHI:
            return None
        if self.flavor is Flavor.CO_BUCHI:
            return 0
        return 1 if self.polarity == "even" else 0

    def acc_name(self) -> str:
        if self.flavor is Flavor.PARITY:
            return f"parity {self.kind} {self.polarity} {self.colors}"
        return self.flavor.value

    def formula(self) -> tuple:
        """The canonical HOA acceptance formula as a nested tuple."""
        if self.flavor is Flavor.BUCHI:
            return ("Inf", 0)
        if self.flavor is Flavor.CO_BUCHI:
            return ("Fin", 0)
        return _parity_formula(self.kind, self.polarity, self.colors)


def _parity_formula(kind, polarity, colors):
    accepting = 0 if polarity == "even" else 1
    if colors == 0:
        # uncolored runs behave like color 0 (min) or -1 (max)
        missing = 0 if kind == "min" else -1
        return ("t",) if missing % 2 == accepting else ("f",)
    order = list(range(colors)) if kind == "min" else list(range(colors - 1, -1, -1))
    last = order[-1]
    node = ("Inf", last) if last % 2 == accepting else ("Fin", last)
    for color in reversed(order[:-1]):
        if color % 2 == accepting:
            node = ("or", ("Inf", color), node)
        else:
            node = ("and", ("Fin", color), node)
    return node


def _canonical(node):
    """Flatten and/or chains and ignore operand order."""
    if node[0] in ("and", "or"):
        members = set()
        for child in node[1:]:
            canon = _canonical(child)
            if canon[0] == node[0]:
                members |= canon[1]
            else:
                members.add(canon)
        return (node[0], frozenset(members))
    return node


def _format_formula(node, top=True):
    if node[0] in ("t", "f"):
        return node[0]
    if node[0] in ("Inf", "Fin"):
        return f"{node[0]}({node[1]})"
    op = " & " if node[0] == "and" else " | "
    text = op.join(_format_formula(child, top=False) for child in node[1:])
    return text if top else f"({text})"


@dataclass(frozen=True)
class Transition:
    """An edge of the automaton; ``priority`` is None for unmarked edges."""

    guard: Guard
    target: int
    priority: Optional[int] = None


@dataclass(frozen=True)
class ParityAutomaton:
    """
    Deterministic omega-automaton with an input/output partition of its APs.

    ``transitions[q]`` lists the outgoing edges of state ``q``. Output APs are
    the indices in ``controllable``; every other AP is an input.
    """

    num_states: int
    initial: int
    aps: Tuple[str, ...]
    controllable: FrozenSet[int]
    transitions: Tuple[Tuple[Transition, ...], ...]
    acceptance: Acceptance
    normalized: bool = False
    name: Optional[str] = None
    state_names: Optional[Tuple[Optional[str], ...]] = field(default=None, compare=False)

    @property
    def states(self) -> range:
        return range(self.num_states)

    @property
    def inputs(self) -> Tuple[int, ...]:
        return tuple(i for i in range(len(self.aps)) if i not in self.controllable)

    @property
    def outputs(self) -> Tuple[int, ...]:
        return tuple(sorted(self.controllable))

    @property
    def input_names(self) -> Tuple[str, ...]:
        return tuple(self.aps[i] for i in self.inputs)

    @property
    def output_names(self) -> Tuple[str, ...]:
        return tuple(self.aps[i] for i in self.outputs)

    def successor(self, state: int, valuation: int) -> Optional[Transition]:
        """The transition firing on ``valuation`` from ``state``, if any."""
        for transition in self.transitions[state]:
            if transition.guard.evaluate(valuation):
                return transition
        return None

    def priorities(self) -> List[int]:
        return sorted({t.priority for ts in self.transitions for t in ts
                       if t.priority is not None})


# ---------------------------------------------------------------------------
# Lexer
# ---------------------------------------------------------------------------

_TOKEN_SPEC = [
    ("COMMENT", r"/\*.*?\*/"),
    ("NEWLINE", r"\n"),
    ("SKIP", r"[ \t\r]+"),
    ("BODY", r"--BODY--"),
    ("END", r"--END--"),
    ("ABORT", r"--ABORT--"),
    ("HEADER", r"[A-Za-z_][A-Za-z0-9_-]*:"),
    ("STRING", r'"(?:[^"\\]|\\.)*"'),
    ("INT", r"\d+"),
    ("ALIAS", r"@[A-Za-z0-9_-]+"),
    ("IDENT", r"[A-Za-z_][A-Za-z0-9_-]*"),
    ("PUNCT", r"[\[\]{}()!&|]"),
    ("MISMATCH", r"."),
]
_TOKEN_RE = re.compile("|".join(f"(?P<{name}>{pattern})" for name, pattern in _TOKEN_SPEC),
                       re.DOTALL)


@dataclass(frozen=True)
class _Token:
    kind: str
    value: str
    line: int
    column: int


def _tokenize(text):
    tokens = []
    line, line_start = 1, 0
    for match in _TOKEN_RE.finditer(text):
        kind, value = match.lastgroup, match.group()
        column = match.start() - line_start + 1
        if kind == "NEWLINE":
            line += 1
            line_start = match.end()
            continue
        if kind == "COMMENT":
            newlines = value.count("\n")
            if newlines:
                line += newlines
                line_start = match.start() + value.rfind("\n") + 1
            continue
        if kind == "SKIP":
            continue
        if kind == "MISMATCH":
            raise ParseError(f"unexpected character {value!r}", line, column)
        tokens.append(_Token(kind, value, line, column))
    return tokens


class _HOAParser:
    """Recursive-descent parser over the token stream of one automaton."""

    def __init__(self, text):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.num_aps = None
        self.aliases = {}
        self.last_line = text.count("\n") + 1

    # token helpers

    def peek(self):
        if self.pos >= len(self.tokens):
            return None
        return self.tokens[self.pos]

    def consume(self, what="token"):
        token = self.peek()
        if token is None:
            raise ParseError(f"unexpected end of input, expected {what}", self.last_line)
        self.pos += 1
        return token

    def expect(self, kind, value=None):
        token = self.consume(value or kind)
        if token.kind != kind or (value is not None and token.value != value):
            expected = value if value is not None else kind
            raise ParseError(f"expected {expected!r}, found {token.value!r}",
                             token.line, token.column)
        return token

    def at(self, kind, value=None):
        token = self.peek()
        return token is not None and token.kind == kind and (value is None or token.value == value)

    @staticmethod
    def fail(message, token):
        raise ParseError(message, token.line, token.column)

    # header

    def parse(self):
        first = self.expect("HEADER", "HOA:")
        version = self.expect("IDENT")
        if version.value != "v1":
            self.fail(f"unsupported HOA version {version.value!r}", version)

        headers = {}
        while not self.at("BODY"):
            token = self.consume("--BODY--")
            if token.kind != "HEADER":
                self.fail(f"expected a header item, found {token.value!r}", token)
            values = []
            while not (self.at("HEADER") or self.at("BODY") or self.peek() is None):
                values.append(self.consume())
            name = token.value[:-1]
            headers.setdefault(name, []).append((token, values))
        self.expect("BODY")

        aps = self.parse_ap_header(headers, first)
        self.num_aps = len(aps)
        # aliases may precede AP: in the header, so they are expanded only now
        for token, values in headers.get("Alias", ()):
            self.parse_alias(token, values)
        controllable = self.parse_controllable(headers, len(aps))
        num_states = self.parse_int_header(headers, "States")
        initial = self.parse_start(headers, first)
        acceptance = self.parse_acceptance(headers, first)
        name = None
        if "name" in headers:
            _, values = headers["name"][0]
            if values and values[0].kind == "STRING":
                name = _unquote(values[0].value)

        edges, state_names = self.parse_body(acceptance)
        if num_states is None:
            referenced = [initial] + list(edges) + [t.target for ts in edges.values() for t in ts]
            num_states = max(referenced) + 1 if referenced else 0
        for state, state_edges in edges.items():
            if state >= num_states:
                raise ParseError(f"state {state} out of range (States: {num_states})")
            for transition in state_edges:
                if transition.target >= num_states:
                    raise ParseError(f"edge target {transition.target} out of range "
                                     f"(States: {num_states})")
        if initial >= num_states:
            raise ParseError(f"initial state {initial} out of range (States: {num_states})")

        transitions = tuple(tuple(edges.get(q, ())) for q in range(num_states))
        names = tuple(state_names.get(q) for q in range(num_states))
        automaton = ParityAutomaton(
            num_states=num_states,
            initial=initial,
            aps=tuple(aps),
            controllable=frozenset(controllable),
            transitions=transitions,
            acceptance=acceptance,
            name=name,
            state_names=names if any(n is not None for n in names) else None,
        )
        return replace(automaton, normalized=_is_normalized(automaton))

    def parse_alias(self, token, values):
        if not values or values[0].kind != "ALIAS":
            self.fail("Alias header needs an @name", token)
        saved_tokens, saved_pos = self.tokens, self.pos
        self.tokens, self.pos = values[1:], 0
        try:
            guard = self.parse_label_or()
            if self.peek() is not None:
                self.fail(f"trailing tokens in alias {values[0].value}", self.peek())
        finally:
            self.tokens, self.pos = saved_tokens, saved_pos
        self.aliases[values[0].value] = guard

    def parse_ap_header(self, headers, first):
        if "AP" not in headers:
            return []
        token, values = headers["AP"][0]
        if not values or values[0].kind != "INT":
            self.fail("AP header needs a count", token)
        count = int(values[0].value)
        names = []
        for value in values[1:]:
            if value.kind != "STRING":
                self.fail(f"expected a quoted AP name, found {value.value!r}", value)
            names.append(_unquote(value.value))
        if len(names) != count:
            self.fail(f"AP header declares {count} propositions but lists {len(names)}", token)
        return names

    def parse_controllable(self, headers, num_aps):
        if "controllable-AP" not in headers:
            logger.warning("No controllable-AP header; treating all propositions as inputs")
            return set()
        _, values = headers["controllable-AP"][0]
        indices = set()
        for value in values:
            if value.kind != "INT":
                self.fail(f"expected an AP index, found {value.value!r}", value)
            index = int(value.value)
            if index >= num_aps:
                self.fail(f"controllable AP {index} is not declared", value)
            indices.add(index)
        return indices

    def parse_int_header(self, headers, name):
        if name not in headers:
            return None
        token, values = headers[name][0]
        if len(values) != 1 or values[0].kind != "INT":
            self.fail(f"{name} header needs a single number", token)
        return int(values[0].value)

    def parse_start(self, headers, first):
        if "Start" not in headers:
            self.fail("missing Start header", first)
        if len(headers["Start"]) > 1:
            self.fail("multiple initial states are not supported", headers["Start"][1][0])
        token, values = headers["Start"][0]
        if len(values) != 1 or values[0].kind != "INT":
            self.fail("Start header must name a single state (no conjunctions)", token)
        return int(values[0].value)

    def parse_acceptance(self, headers, first):
        if "Acceptance" not in headers:
            self.fail("missing Acceptance header", first)
        token, values = headers["Acceptance"][0]
        if not values or values[0].kind != "INT":
            self.fail("Acceptance header needs a set count", token)
        sets = int(values[0].value)
        saved_tokens, saved_pos = self.tokens, self.pos
        self.tokens, self.pos = values[1:], 0
        try:
            formula = self.parse_acc_or()
            if self.peek() is not None:
                self.fail(f"trailing tokens in acceptance formula: {self.peek().value!r}",
                          self.peek())
        finally:
            self.tokens, self.pos = saved_tokens, saved_pos
        canonical = _canonical(formula)

        acc_name = None
        if "acc-name" in headers:
            acc_name = [v.value for v in headers["acc-name"][0][1]]
        candidates = _acceptance_candidates(acc_name, sets, token)
        for candidate in candidates:
            if _canonical(candidate.formula()) == canonical:
                logger.debug("Recognized acceptance %s", candidate.acc_name())
                return candidate
        raise UnsupportedAcceptanceError(
            f"unsupported acceptance condition {_format_formula(formula)!r}"
            + (f" (acc-name: {' '.join(acc_name)})" if acc_name else ""),
            token.line, token.column)

    # acceptance formulas

    def parse_acc_or(self):
        node = self.parse_acc_and()
        while self.at("PUNCT", "|"):
            self.consume()
            node = ("or", node, self.parse_acc_and())
        return node

    def parse_acc_and(self):
        node = self.parse_acc_atom()
        while self.at("PUNCT", "&"):
            self.consume()
            node = ("and", node, self.parse_acc_atom())
        return node

    def parse_acc_atom(self):
        token = self.consume("acceptance atom")
        if token.kind == "PUNCT" and token.value == "(":
            node = self.parse_acc_or()
            self.expect("PUNCT", ")")
            return node
        if token.kind == "IDENT" and token.value in ("t", "f"):
            return (token.value,)
        if token.kind == "IDENT" and token.value in ("Inf", "Fin"):
            self.expect("PUNCT", "(")
            if self.at("PUNCT", "!"):
                raise UnsupportedAcceptanceError("complemented acceptance sets are not supported",
                                                 token.line, token.column)
            index = self.expect("INT")
            self.expect("PUNCT", ")")
            return (token.value, int(index.value))
        self.fail(f"unexpected {token.value!r} in acceptance formula", token)

    # labels

    def parse_label_or(self):
        guard = self.parse_label_and()
        while self.at("PUNCT", "|"):
            self.consume()
            guard = guard.disjoin(self.parse_label_and())
        return guard

    def parse_label_and(self):
        guard = self.parse_label_not()
        while self.at("PUNCT", "&"):
            self.consume()
            guard = guard.conjoin(self.parse_label_not())
        return guard

    def parse_label_not(self):
        if self.at("PUNCT", "!"):
            self.consume()
            return self.parse_label_not().negate()
        return self.parse_label_atom()

    def parse_label_atom(self):
        token = self.consume("label")
        if token.kind == "PUNCT" and token.value == "(":
            guard = self.parse_label_or()
            self.expect("PUNCT", ")")
            return guard
        if token.kind == "IDENT" and token.value == "t":
            return Guard.true()
        if token.kind == "IDENT" and token.value == "f":
            return Guard.false()
        if token.kind == "INT":
            index = int(token.value)
            if self.num_aps is not None and index >= self.num_aps:
                self.fail(f"AP index {index} is not declared (AP: {self.num_aps})", token)
            return Guard.literal(index)
        if token.kind == "ALIAS":
            if token.value not in self.aliases:
                self.fail(f"undefined alias {token.value}", token)
            return self.aliases[token.value]
        self.fail(f"unexpected {token.value!r} in label", token)

    # body

    def parse_marks(self, sets):
        marks = []
        self.expect("PUNCT", "{")
        while not self.at("PUNCT", "}"):
            token = self.expect("INT")
            mark = int(token.value)
            if mark >= sets:
                self.fail(f"acceptance set {mark} is not declared", token)
            marks.append(mark)
        self.expect("PUNCT", "}")
        return marks

    def parse_body(self, acceptance):
        sets = 1 if acceptance.flavor is not Flavor.PARITY else acceptance.colors
        edges = {}
        names = {}
        while not self.at("END"):
            token = self.consume("--END--")
            if token.kind == "ABORT":
                self.fail("automaton aborted by producer", token)
            if token.kind != "HEADER" or token.value != "State:":
                self.fail(f"expected 'State:', found {token.value!r}", token)
            if self.at("PUNCT", "["):
                self.fail("state labels are not supported; use transition labels", self.peek())
            state_token = self.expect("INT")
            state = int(state_token.value)
            if state in edges:
                self.fail(f"state {state} is defined twice", state_token)
            if self.at("STRING"):
                names[state] = _unquote(self.consume().value)
            state_marks = self.parse_marks(sets) if self.at("PUNCT", "{") else []
            state_edges = []
            while not (self.at("HEADER", "State:") or self.at("END") or self.at("ABORT")):
                state_edges.append(self.parse_edge(acceptance, sets, state_marks))
            edges[state] = state_edges
        self.expect("END")
        return edges, names

    def parse_edge(self, acceptance, sets, state_marks):
        token = self.peek()
        if not self.at("PUNCT", "["):
            self.fail("implicit edge labels are not supported", token)
        self.consume()
        guard = self.parse_label_or()
        self.expect("PUNCT", "]")
        target = int(self.expect("INT").value)
        if self.at("PUNCT", "&"):
            self.fail("alternating automata are not supported", self.peek())
        marks = list(state_marks)
        if self.at("PUNCT", "{"):
            marks += self.parse_marks(sets)
        return Transition(guard, target, _effective_priority(acceptance, marks))


def _unquote(text):
    return re.sub(r"\\(.)", r"\1", text[1:-1])


def _effective_priority(acceptance, marks):
    if not marks:
        return None
    if acceptance.flavor is not Flavor.PARITY:
        return 0
    return min(marks) if acceptance.kind == "min" else max(marks)


def _acceptance_candidates(acc_name, sets, token):
    if acc_name:
        name = acc_name[0]
        if name == "Buchi":
            return [Acceptance(Flavor.BUCHI, colors=1)] if sets == 1 else []
        if name == "co-Buchi":
            return [Acceptance(Flavor.CO_BUCHI, colors=1)] if sets == 1 else []
        if name == "parity":
            if len(acc_name) != 4 or acc_name[1] not in ("min", "max") \
                    or acc_name[2] not in ("even", "odd") or not acc_name[3].isdigit():
                raise ParseError("malformed parity acc-name", token.line, token.column)
            if int(acc_name[3]) != sets:
                raise ParseError(f"acc-name declares {acc_name[3]} colors but Acceptance "
                                 f"uses {sets} sets", token.line, token.column)
            return [Acceptance(Flavor.PARITY, acc_name[1], acc_name[2], sets)]
        if name in ("all", "none"):
            return [Acceptance(Flavor.PARITY, "min", "even" if name == "all" else "odd", 0)]
        raise UnsupportedAcceptanceError(f"unsupported acceptance {' '.join(acc_name)!r}",
                                         token.line, token.column)
    candidates = []
    if sets == 1:
        candidates += [Acceptance(Flavor.BUCHI, colors=1), Acceptance(Flavor.CO_BUCHI, colors=1)]
    for kind in ("min", "max"):
        for polarity in ("even", "odd"):
            candidates.append(Acceptance(Flavor.PARITY, kind, polarity, sets))
    return candidates


def parse_ehoa(text: str) -> ParityAutomaton:
    """
    Parse one extended-HOA automaton.

    Args:
        text (str): HOA v1 text with a ``controllable-AP:`` header

    Returns:
        ParityAutomaton: the automaton, flagged ``normalized`` only when it is
            already min-even, fully colored, deterministic and complete

    Raises:
        ParseError: on syntax errors (with line and column)
        UnsupportedAcceptanceError: for acceptance conditions other than
            parity, Buchi and co-Buchi
    """
    automaton = _HOAParser(text).parse()
    logger.debug("Parsed automaton with %d states, %d APs (%d controllable), %s",
                 automaton.num_states, len(automaton.aps), len(automaton.controllable),
                 automaton.acceptance.acc_name())
    return automaton


def print_ehoa(aut: ParityAutomaton) -> str:
    """Render an automaton as extended HOA text."""
    lines = ["HOA: v1"]
    if aut.name is not None:
        lines.append(f'name: "{_escape(aut.name)}"')
    lines.append(f"States: {aut.num_states}")
    lines.append(f"Start: {aut.initial}")
    lines.append(" ".join([f"AP: {len(aut.aps)}"] + [f'"{_escape(a)}"' for a in aut.aps]))
    lines.append(" ".join(["controllable-AP:"] + [str(i) for i in aut.outputs]))
    lines.append(f"acc-name: {aut.acceptance.acc_name()}")
    sets = aut.acceptance.colors if aut.acceptance.flavor is Flavor.PARITY else 1
    lines.append(f"Acceptance: {sets} {_format_formula(aut.acceptance.formula())}")
    lines.append("--BODY--")
    for state in aut.states:
        header = f"State: {state}"
        if aut.state_names and aut.state_names[state] is not None:
            header += f' "{_escape(aut.state_names[state])}"'
        lines.append(header)
        for transition in aut.transitions[state]:
            line = f"[{transition.guard.to_label()}] {transition.target}"
            if transition.priority is not None:
                line += f" {{{transition.priority}}}"
            lines.append(line)
    lines.append("--END--")
    return "\n".join(lines) + "\n"


def _escape(text):
    return text.replace("\\", "\\\\").replace('"', '\\"')


# ---------------------------------------------------------------------------
# Determinism, completeness and normalization
# ---------------------------------------------------------------------------

def _overlap(aut):
    for state in aut.states:
        edges = aut.transitions[state]
        for i, first in enumerate(edges):
            for second in edges[i + 1:]:
                if first.guard.overlaps(second.guard):
                    return state, first, second
    return None


def _uncovered(aut, state):
    covered = Guard.false()
    for transition in aut.transitions[state]:
        covered = covered.disjoin(transition.guard)
    return covered.negate()


def _is_normalized(aut):
    if not aut.acceptance.is_min_even:
        return False
    if any(t.priority is None for ts in aut.transitions for t in ts):
        return False
    if _overlap(aut) is not None:
        return False
    return all(_uncovered(aut, q).is_false for q in aut.states)


def _stamp_unmarked(aut):
    """Give unmarked edges of a min-parity automaton an explicit color."""
    acc = aut.acceptance
    if acc.flavor is not Flavor.PARITY or acc.kind != "min":
        return aut
    if all(t.priority is not None for ts in aut.transitions for t in ts):
        return aut
    missing = acc.colors
    transitions = tuple(
        tuple(t if t.priority is not None else replace(t, priority=missing) for t in ts)
        for ts in aut.transitions)
    return replace(aut, transitions=transitions, acceptance=replace(acc, colors=missing + 1))


def complete(aut: ParityAutomaton) -> ParityAutomaton:
    """
    Route every valuation without a transition to a fresh rejecting sink.

    Args:
        aut (ParityAutomaton): a deterministic automaton

    Returns:
        ParityAutomaton: the input itself when already complete, otherwise a
            copy with one extra sink state

    Raises:
        NondeterminismError: if two guards out of one state overlap
    """
    overlap = _overlap(aut)
    if overlap is not None:
        state, first, second = overlap
        raise NondeterminismError(
            f"nondeterministic input: state {state} has overlapping guards "
            f"[{first.guard.to_label()}] and [{second.guard.to_label()}]")

    missing = {q: _uncovered(aut, q) for q in aut.states}
    if all(g.is_false for g in missing.values()):
        return aut

    aut = _stamp_unmarked(aut)
    acc = aut.acceptance
    reject = acc.rejecting_priority()
    if acc.flavor is Flavor.PARITY and reject + 1 > acc.colors:
        acc = replace(acc, colors=reject + 1)
    sink = aut.num_states
    transitions = []
    for state in aut.states:
        edges = list(aut.transitions[state])
        if not missing[state].is_false:
            edges.append(Transition(missing[state], sink, reject))
        transitions.append(tuple(edges))
    transitions.append((Transition(Guard.true(), sink, reject),))
    names = None
    if aut.state_names is not None:
        names = tuple(aut.state_names) + ("sink",)
    completed = replace(aut, num_states=sink + 1, transitions=tuple(transitions),
                        acceptance=acc, state_names=names)
    logger.debug("Completed automaton with rejecting sink %d (priority %s)", sink, reject)
    return replace(completed, normalized=_is_normalized(completed))


def _min_even_priority(acc, priority):
    if acc.flavor is Flavor.BUCHI:
        return 0 if priority == 0 else 1
    if acc.flavor is Flavor.CO_BUCHI:
        return 1 if priority == 0 else 2
    if acc.kind == "min":
        effective = acc.colors if priority is None else priority
        return effective if acc.polarity == "even" else effective + 1
    effective = -1 if priority is None else priority
    colors = acc.colors
    if acc.polarity == "odd":
        effective += 1
        colors += 1
    top = 2 * math.ceil((colors - 1) / 2)
    return top - effective


def normalize_acceptance(aut: ParityAutomaton) -> ParityAutomaton:
    """
    Convert to a complete automaton with min-even transition priorities.

    Buchi marks become 0 (others 1), co-Buchi marks become 1 (others 2), and
    max-parity colors are reversed around the smallest even bound of the
    color range after odd polarity has been shifted by one.

    Args:
        aut (ParityAutomaton): a parsed automaton

    Returns:
        ParityAutomaton: a language-equivalent automaton with ``normalized`` set
    """
    if aut.normalized:
        return aut
    acc = aut.acceptance
    transitions = tuple(
        tuple(replace(t, priority=_min_even_priority(acc, t.priority)) for t in ts)
        for ts in aut.transitions)
    top = max((t.priority for ts in transitions for t in ts), default=0)
    converted = replace(aut, transitions=transitions,
                        acceptance=Acceptance(Flavor.PARITY, "min", "even", top + 1))
    result = complete(converted)
    result = replace(result, normalized=True)
    logger.info("Normalized %s acceptance to %s", acc.acc_name(), result.acceptance.acc_name())
    return result


def accepts(aut: ParityAutomaton, prefix: Sequence[int], cycle: Sequence[int]) -> bool:
    """
    Decide whether the lasso word ``prefix . cycle^omega`` is accepted.

    Args:
        aut (ParityAutomaton): a deterministic automaton
        prefix: finite list of full valuations
        cycle: non-empty list of full valuations repeated forever

    Returns:
        bool: True if the (unique) run exists and is accepting
    """
    if not cycle:
        raise ValueError("the cycle of a lasso word must be non-empty")
    state = aut.initial
    for letter in prefix:
        transition = aut.successor(state, letter)
        if transition is None:
            return False
        state = transition.target
    seen = {}
    rounds = []
    while state not in seen:
        seen[state] = len(rounds)
        marks = set()
        for letter in cycle:
            transition = aut.successor(state, letter)
            if transition is None:
                return False
            marks.add(transition.priority)
            state = transition.target
        rounds.append(marks)
    recurring = set().union(*rounds[seen[state]:])
    return aut.acceptance.accepts(recurring)


def successor_table(aut: ParityAutomaton):
    """
    Tabulate the transition function over all full valuations.

    Returns:
        tuple: ``(targets, priorities)`` integer arrays of shape
            ``(num_states, 2**len(aps))``; both hold -1 where no transition
            fires, and ``priorities`` also holds -1 for unmarked edges

    Raises:
        CapacityError: with more than ``MAX_EXPLICIT_APS`` propositions
    """
    if len(aut.aps) > MAX_EXPLICIT_APS:
        raise CapacityError(f"{len(aut.aps)} atomic propositions exceed the explicit "
                            f"enumeration cap of {MAX_EXPLICIT_APS}")
    valuations = np.arange(1 << len(aut.aps), dtype=np.int64)
    targets = np.full((aut.num_states, valuations.size), -1, dtype=np.int64)
    priorities = np.full((aut.num_states, valuations.size), -1, dtype=np.int64)
    for state in aut.states:
        for transition in aut.transitions[state]:
            fires = transition.guard.evaluate_array(valuations)
            targets[state, fires] = transition.target
            priorities[state, fires] = -1 if transition.priority is None else transition.priority
    return targets, priorities


def join_valuation(aut: ParityAutomaton, input_bits: int, output_bits: int) -> int:
    """Combine input and output valuations (bit k = k-th input/output AP) into a full one."""
    valuation = 0
    for k, ap in enumerate(aut.inputs):
        if input_bits >> k & 1:
            valuation |= 1 << ap
    for k, ap in enumerate(aut.outputs):
        if output_bits >> k & 1:
            valuation |= 1 << ap
    return valuation


def split_valuations(aut: ParityAutomaton) -> np.ndarray:
    """
    Full valuation for every (input valuation, output valuation) pair.

    Returns:
        numpy.ndarray: integer array of shape ``(2**|I|, 2**|O|)``
    """
    inputs = np.arange(1 << len(aut.inputs), dtype=np.int64)
    outputs = np.arange(1 << len(aut.outputs), dtype=np.int64)
    full_in = np.zeros_like(inputs)
    for k, ap in enumerate(aut.inputs):
        full_in |= ((inputs >> k) & 1) << ap
    full_out = np.zeros_like(outputs)
    for k, ap in enumerate(aut.outputs):
        full_out |= ((outputs >> k) & 1) << ap
    return full_in[:, None] | full_out[None, :]

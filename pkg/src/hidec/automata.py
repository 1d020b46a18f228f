"""Compilation of constraint templates to finite acceptors.

Every template becomes a deterministic, total acceptor over the completion
labels of its model. Acceptance means the constraint permits termination
right now; a dead state means the constraint is permanently violated, no
matter what completes later. Dead states are computed from the transition
structure (no accepting state reachable), never hard-coded, so the same
reachability argument that classifies a template also guarantees that
violation is monotone.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Hashable, Optional

from .model import BINARY_TEMPLATES, CARDINALITY_TEMPLATES, ConstraintInstance


class CompilationError(ValueError):
    pass


class TraceInputError(ValueError):
    pass


@dataclass(frozen=True)
class ConstraintAutomaton:
    constraint: ConstraintInstance
    alphabet: frozenset[str]
    n_states: int
    initial: int
    # transitions[state][label] -> state; total over the alphabet
    transitions: tuple[dict[str, int], ...]
    accepting: frozenset[int]
    dead: frozenset[int]

    def step(self, state: int, label: str) -> int:
        try:
            return self.transitions[state][label]
        except KeyError:
            raise TraceInputError(
                f"label {label!r} outside alphabet of {self.constraint}"
            ) from None

    def run(self, trace) -> int:
        state = self.initial
        for label in trace:
            state = self.step(state, label)
        return state

    def status(self, state: int) -> str:
        if state in self.dead:
            return "violated"
        if state in self.accepting:
            return "accepting"
        return "pending"

    def blocks(self, state: int, label: str) -> bool:
        """Would completing `label` now make this constraint unsatisfiable?"""
        return self.step(state, label) in self.dead


# Semantic state machines, one per template. Each returns
# (initial_state, accepting_predicate, transition_fn); states are small
# hashable values, the generic builder does the rest.


def _cardinality(template: str, n: int):
    # Counter saturates one past the cardinality; beyond that the exact
    # count can never matter again.
    cap = n + 1

    def delta(state: int, label: str, a: str) -> int:
        return min(state + 1, cap) if label == a else state

    if template == "existence":
        accept = lambda s: s >= n
    elif template == "absence":
        accept = lambda s: s <= n
    else:  # exactly
        accept = lambda s: s == n
    return 0, accept, delta


def _init():
    def delta(state: str, label: str, a: str) -> str:
        if state == "start":
            return "ok" if label == a else "dead"
        return state

    return "start", lambda s: s == "ok", delta


def _responded_existence():
    # (seen first operand, seen second operand); second-seen satisfies forever
    def delta(state, label, a, b):
        seen_a, seen_b = state
        if label == a:
            seen_a = True
        if label == b:
            seen_b = True
        return (seen_a, seen_b)

    return (False, False), lambda s: s[1] or not s[0], delta


def _response():
    # obligation open after the trigger until the answer completes;
    # discharge before re-trigger so a shared label re-opens the obligation
    def delta(state, label, a, b):
        if label == b:
            state = "ok"
        if label == a:
            state = "await"
        return state

    return "ok", lambda s: s == "ok", delta


def _precedence():
    def delta(state, label, a, b):
        if state == "dead":
            return state
        if label == b and state != "armed":
            return "dead"
        if label == a:
            return "armed"
        return state

    return "unarmed", lambda s: s != "dead", delta


def _succession():
    ri, ra, rd = _response()
    pi, pa, pd = _precedence()

    def delta(state, label, a, b):
        return (rd(state[0], label, a, b), pd(state[1], label, a, b))

    return (ri, pi), lambda s: ra(s[0]) and pa(s[1]), delta


def _chain_response():
    def delta(state, label, a, b):
        if state == "dead":
            return state
        if state == "expect":
            if label != b:
                return "dead"
            state = "ok"
        return "expect" if label == a else state

    return "ok", lambda s: s == "ok", delta


def _chain_precedence():
    def delta(state, label, a, b):
        if state == "dead":
            return state
        if label == b and state != "prev_a":
            return "dead"
        return "prev_a" if label == a else "prev_other"

    return "prev_other", lambda s: s != "dead", delta


def _neg_response():
    def delta(state, label, a, b):
        if state == "dead":
            return state
        if label == b and state == "after_a":
            return "dead"
        return "after_a" if label == a or state == "after_a" else "clean"

    return "clean", lambda s: s != "dead", delta


_BINARY_BUILDERS: dict[str, Callable] = {
    "responded_existence": _responded_existence,
    "response": _response,
    "precedence": _precedence,
    "succession": _succession,
    "chain_response": _chain_response,
    "chain_precedence": _chain_precedence,
    "neg_response": _neg_response,
}


def compile_constraint(c: ConstraintInstance, alpha) -> ConstraintAutomaton:
    """Build the acceptor for one constraint over the given alphabet."""
    alpha = frozenset(alpha)
    missing = set(c.operands) - alpha
    if missing:
        raise CompilationError(f"operands {sorted(missing)} of {c} not in alphabet")

    if c.template in CARDINALITY_TEMPLATES:
        if c.cardinality is None or c.cardinality < 0:
            raise CompilationError(f"{c} needs a non-negative cardinality")
        initial, accept, raw = _cardinality(c.template, c.cardinality)
        (a,) = c.operands
        delta = lambda s, lbl: raw(s, lbl, a)
    elif c.template == "init":
        initial, accept, raw = _init()
        (a,) = c.operands
        delta = lambda s, lbl: raw(s, lbl, a)
    elif c.template in BINARY_TEMPLATES:
        initial, accept, raw = _BINARY_BUILDERS[c.template]()
        a, b = c.operands
        delta = lambda s, lbl: raw(s, lbl, a, b)
    else:
        raise CompilationError(f"unknown template {c.template!r}")

    return _freeze(c, alpha, initial, accept, delta)


def _freeze(
    c: ConstraintInstance,
    alpha: frozenset[str],
    initial: Hashable,
    accept: Callable[[Hashable], bool],
    delta: Callable[[Hashable, str], Hashable],
) -> ConstraintAutomaton:
    """Explore reachable states breadth-first and number them canonically."""
    order = sorted(alpha)
    index: dict[Hashable, int] = {initial: 0}
    frontier = [initial]
    table: list[dict[str, int]] = []
    while frontier:
        nxt: list[Hashable] = []
        for state in frontier:
            row: dict[str, int] = {}
            for label in order:
                succ = delta(state, label)
                if succ not in index:
                    index[succ] = len(index)
                    nxt.append(succ)
                row[label] = index[succ]
            table.append(row)
        frontier = nxt

    accepting = frozenset(i for s, i in index.items() if accept(s))

    # Dead = cannot reach any accepting state; fixpoint over the reverse graph.
    alive: set[int] = set(accepting)
    changed = True
    while changed:
        changed = False
        for i, row in enumerate(table):
            if i not in alive and any(t in alive for t in row.values()):
                alive.add(i)
                changed = True
    dead = frozenset(range(len(table))) - alive

    return ConstraintAutomaton(
        constraint=c,
        alphabet=alpha,
        n_states=len(table),
        initial=0,
        transitions=tuple(table),
        accepting=accepting,
        dead=dead,
    )


def evaluate_trace(c: ConstraintInstance, trace, alpha=None) -> str:
    """Status of one constraint after a completion sequence.

    With an explicit alphabet, labels outside it are an input error; without
    one, the alphabet is inferred to cover the trace (non-operand labels all
    behave alike, so inference cannot change the verdict).
    """
    if alpha is None:
        alpha = frozenset(c.operands) | frozenset(trace)
    automaton = compile_constraint(c, alpha)
    return automaton.status(automaton.run(trace))


@dataclass(frozen=True)
class TemplateClassification:
    execution_restricting: bool
    termination_restricting: bool


def classify_template(a: ConstraintAutomaton) -> TemplateClassification:
    """Derive the execution/termination character from automaton structure.

    A constraint restricts execution if some completion can push it into a
    dead state; it restricts termination if it can be in a state that is
    neither accepting nor hopeless (the instance must keep going).
    """
    execution = any(
        i not in a.dead and any(t in a.dead for t in row.values())
        for i, row in enumerate(a.transitions)
    )
    termination = any(
        i not in a.accepting and i not in a.dead for i in range(a.n_states)
    )
    return TemplateClassification(execution, termination)

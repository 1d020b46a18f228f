"""Bounded language analysis and hierarchy rewriting.

The comparison language of a model is its set of leaf projections: atomic
completions in order, with complex-activity events erased. Enumeration is
exhaustive within two explicit budgets (leaf length and complex-activity
activations per run), so equality of the enumerated sets is equality of the
bounded languages, and any difference yields a concrete counterexample that
is re-checked through the execution engine before being reported.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

from .engine import CommandRejected, Instance, TraceStep, replay
from .model import (
    ActivityDecl,
    ConstraintInstance,
    Document,
    ProcessModel,
    UNARY_TEMPLATES,
    leaf_alphabet,
    validate_document,
)

DEFAULT_NODE_CAP = 500_000


class BoundExceeded(RuntimeError):
    """The state-space cap was hit; results would be incomplete."""


class ExtractionInfeasible(ValueError):
    def __init__(self, report: "ExtractionReport"):
        super().__init__(
            "extraction infeasible; blocking constraints: "
            + ", ".join(str(c) for c in report.blocking_constraints)
        )
        self.report = report


@dataclass(frozen=True)
class BoundedLanguage:
    max_leaf_len: int
    max_activations: int
    traces: frozenset[tuple[str, ...]]

    def sorted_traces(self) -> list[tuple[str, ...]]:
        return sorted(self.traces, key=lambda t: (len(t), t))


@dataclass(frozen=True)
class EquivalenceResult:
    equivalent_up_to_k: bool
    counterexample: Optional[tuple[str, ...]] = None


@dataclass(frozen=True)
class BoundaryAggregate:
    """One constraint shared by every member against the same outside activity."""

    template: str
    outside: str
    members_first: bool  # members sit in the first operand slot

    def on_complex(self, complex_label: str) -> ConstraintInstance:
        ops = (complex_label, self.outside) if self.members_first else (self.outside, complex_label)
        return ConstraintInstance(self.template, ops)


@dataclass(frozen=True)
class ExtractionReport:
    feasible: bool
    aggregated_constraints: tuple[BoundaryAggregate, ...]
    blocking_constraints: tuple[ConstraintInstance, ...]
    internal_constraints: tuple[ConstraintInstance, ...]


@dataclass(frozen=True)
class InlineResult:
    flat: Document
    verdict: EquivalenceResult
    dropped: tuple[ConstraintInstance, ...]  # unary constraints on the complex activity


# -- bounded enumeration -------------------------------------------------------

# Enumeration state: (model name, constraint automaton states, running children)
# as nested immutable tuples, so states memoize by value.


class _Enumerator:
    def __init__(self, doc: Document, node_cap: int):
        self.doc = doc
        self.node_cap = node_cap
        probe = Instance(doc)  # compiles every model's automata once
        self.automata = {name: tuple(a for _, a in pairs) for name, pairs in probe.compiled.items()}
        self.memo: dict = {}

    def fresh(self, model_name: str):
        autos = self.automata[model_name]
        return (model_name, tuple(a.initial for a in autos), frozenset())

    def terminable(self, state) -> bool:
        name, qs, children = state
        if children:
            return False
        autos = self.automata[name]
        return all(q in a.accepting for a, q in zip(autos, qs))

    def moves(self, state):
        """Yield (kind, leaf symbol, successor); kind in leaf|start|complete."""
        name, qs, children = state
        model = self.doc.model(name)
        autos = self.automata[name]
        child_map = dict(children)

        def stepped(label):
            return tuple(a.step(q, label) for a, q in zip(autos, qs))

        def survives(label):
            return not any(a.blocks(q, label) for a, q in zip(autos, qs))

        for a in model.activities:
            if a.is_complex:
                if a.name not in child_map:
                    if survives(a.name):
                        child = self.fresh(a.sub_model)
                        yield ("start", None, (name, qs, children | {(a.name, child)}))
                else:
                    child = child_map[a.name]
                    if self.terminable(child) and survives(a.name):
                        yield ("complete", None, (name, stepped(a.name), children - {(a.name, child)}))
            elif survives(a.name):
                yield ("leaf", a.name, (name, stepped(a.name), children))
        for label, child in children:
            rest = children - {(label, child)}
            for kind, sym, nxt in self.moves(child):
                yield (kind, sym, (name, qs, rest | {(label, nxt)}))

    def language(self, state, leaf_budget: int, act_budget: int) -> frozenset:
        key = (state, leaf_budget, act_budget)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        if len(self.memo) >= self.node_cap:
            raise BoundExceeded(
                f"exploration exceeded {self.node_cap} states; raise the cap to continue"
            )
        # No cycle guard needed: leaf moves and starts consume a budget, and a
        # complete strictly shrinks the tree of running scopes.
        out: set[tuple[str, ...]] = set()
        if self.terminable(state):
            out.add(())
        for kind, sym, nxt in self.moves(state):
            if kind == "leaf":
                if leaf_budget > 0:
                    for suffix in self.language(nxt, leaf_budget - 1, act_budget):
                        out.add((sym,) + suffix)
            elif kind == "start":
                if act_budget > 0:
                    out |= self.language(nxt, leaf_budget, act_budget - 1)
            else:
                out |= self.language(nxt, leaf_budget, act_budget)
        result = frozenset(out)
        self.memo[key] = result
        return result


def enumerate_language(
    doc: Document,
    max_leaf_len: int,
    max_activations: int,
    node_cap: int = DEFAULT_NODE_CAP,
) -> BoundedLanguage:
    """Every leaf projection of an accepted run within the given budgets."""
    if max_leaf_len < 0 or max_activations < 0:
        raise ValueError("bounds must be non-negative")
    enum = _Enumerator(doc, node_cap)
    traces = enum.language(enum.fresh(doc.root.name), max_leaf_len, max_activations)
    return BoundedLanguage(max_leaf_len, max_activations, traces)


# -- engine-backed membership --------------------------------------------------


def leaf_witness(
    doc: Document,
    leaf: tuple[str, ...],
    max_activations: int,
    node_cap: int = DEFAULT_NODE_CAP,
) -> Optional[list[TraceStep]]:
    """A schedule the engine accepts whose leaf projection is `leaf`, or None.

    The search drives the real engine (clone per branch), so a returned
    schedule is engine-approved by construction and None is an exhaustive
    negative within the activation budget.
    """
    atoms = leaf_alphabet(doc)
    if any(sym not in atoms for sym in leaf):
        return None
    complexes = [
        (m.name, a.name)
        for m in doc.models
        for a in m.activities
        if a.is_complex
    ]
    seen: set = set()
    nodes = 0

    def dfs(inst: Instance, i: int, acts: int, steps: list[TraceStep]):
        nonlocal nodes
        key = (inst.fingerprint(), i, acts)
        if key in seen:
            return None
        seen.add(key)
        nodes += 1
        if nodes > node_cap:
            raise BoundExceeded(f"membership search exceeded {node_cap} nodes")
        if i == len(leaf):
            probe = inst.clone()
            try:
                probe.terminate()
            except CommandRejected:
                pass
            else:
                return steps + [TraceStep("terminate")]
        candidates: list[tuple[TraceStep, int, int]] = []
        if i < len(leaf):
            candidates.append((TraceStep("execute", leaf[i]), i + 1, acts))
        running = {
            (s.id, lbl) for s in inst.root.walk() for lbl in s.child_scopes
        }
        for _, label in running:
            candidates.append((TraceStep("complete", label), i, acts))
        if acts > 0:
            for _, label in complexes:
                candidates.append((TraceStep("start", label), i, acts - 1))
        for step, ni, nacts in candidates:
            probe = inst.clone()
            try:
                probe.apply_step(step)
            except CommandRejected:
                continue
            found = dfs(probe, ni, nacts, steps + [step])
            if found is not None:
                return found
        return None

    return dfs(Instance(doc), 0, max_activations, [])


def bounded_equivalent(
    doc1: Document,
    doc2: Document,
    max_leaf_len: int,
    max_activations: int,
    node_cap: int = DEFAULT_NODE_CAP,
) -> EquivalenceResult:
    """Set equality of the bounded leaf languages, with a verified witness."""
    alpha1, alpha2 = leaf_alphabet(doc1), leaf_alphabet(doc2)
    if alpha1 != alpha2:
        sym = min(alpha1 ^ alpha2)
        return EquivalenceResult(False, (sym,))
    lang1 = enumerate_language(doc1, max_leaf_len, max_activations, node_cap).traces
    lang2 = enumerate_language(doc2, max_leaf_len, max_activations, node_cap).traces
    if lang1 == lang2:
        return EquivalenceResult(True, None)
    cex = min(lang1 ^ lang2, key=lambda t: (len(t), t))
    w1 = leaf_witness(doc1, cex, max_activations, node_cap)
    w2 = leaf_witness(doc2, cex, max_activations, node_cap)
    if (w1 is None) == (w2 is None):
        raise AssertionError(
            f"enumeration and engine disagree on counterexample {cex!r}"
        )
    witness = w1 if w1 is not None else w2
    accepted_doc = doc1 if w1 is not None else doc2
    verdict = replay(accepted_doc, witness)
    if not verdict.accepted:
        raise AssertionError(f"witness schedule for {cex!r} was rejected: {verdict.reason}")
    return EquivalenceResult(False, cex)


# -- extraction and inlining -----------------------------------------------------


def check_extraction(
    doc: Document, members, model_name: Optional[str] = None
) -> ExtractionReport:
    """Partition a model's constraints around a candidate member set."""
    model = doc.model(model_name) if model_name else doc.root
    member_set = set(members)
    for label in member_set:
        decl = model.activity(label)
        if decl is None:
            raise KeyError(f"{label!r} is not an activity of process {model.name!r}")
        if decl.is_complex:
            raise ValueError(f"member {label!r} is complex; inline it before extracting")

    internal: list[ConstraintInstance] = []
    groups: dict[tuple[str, str, bool], set[str]] = {}
    group_constraints: dict[tuple[str, str, bool], list[ConstraintInstance]] = {}
    for c in model.constraints:
        inside = [op for op in c.operands if op in member_set]
        if not inside:
            continue
        if len(inside) == len(c.operands):
            internal.append(c)
            continue
        members_first = c.operands[0] in member_set
        member_op = c.operands[0] if members_first else c.operands[1]
        outside = c.operands[1] if members_first else c.operands[0]
        key = (c.template, outside, members_first)
        groups.setdefault(key, set()).add(member_op)
        group_constraints.setdefault(key, []).append(c)

    aggregated: list[BoundaryAggregate] = []
    blocking: list[ConstraintInstance] = []
    for key, covered in sorted(groups.items()):
        template, outside, members_first = key
        if covered == member_set:
            aggregated.append(BoundaryAggregate(template, outside, members_first))
        else:
            blocking.extend(group_constraints[key])
    return ExtractionReport(
        feasible=not blocking,
        aggregated_constraints=tuple(aggregated),
        blocking_constraints=tuple(sorted(blocking, key=ConstraintInstance.sort_key)),
        internal_constraints=tuple(sorted(internal, key=ConstraintInstance.sort_key)),
    )


def extract_subprocess(
    doc: Document, members, new_name: str, model_name: Optional[str] = None
) -> Document:
    """Move members into a new sub-model behind a complex activity `new_name`."""
    model = doc.model(model_name) if model_name else doc.root
    member_set = set(members)
    report = check_extraction(doc, member_set, model.name)
    if not report.feasible:
        raise ExtractionInfeasible(report)
    for m in doc.models:
        if m.activity(new_name) is not None:
            raise ValueError(f"activity name {new_name!r} already in use")
        if m.name == new_name:
            raise ValueError(f"process name {new_name!r} already in use")

    sub_activities = tuple(a for a in model.activities if a.name in member_set)
    sub = ProcessModel(new_name, sub_activities, report.internal_constraints)

    new_activities: list[ActivityDecl] = []
    placed = False
    for a in model.activities:
        if a.name in member_set:
            if not placed:
                new_activities.append(ActivityDecl(new_name, sub_model=new_name))
                placed = True
            continue
        new_activities.append(a)
    if not placed:
        new_activities.append(ActivityDecl(new_name, sub_model=new_name))

    internal = set(report.internal_constraints)
    kept = [
        c
        for c in model.constraints
        if c not in internal and not (set(c.operands) & member_set)
    ]
    kept.extend(g.on_complex(new_name) for g in report.aggregated_constraints)
    host = replace(model, activities=tuple(new_activities), constraints=tuple(kept))

    result = Document(
        tuple(host if m.name == model.name else m for m in doc.models) + (sub,)
    )
    bad = validate_document(result)
    if not bad.well_formed:
        raise AssertionError(f"extraction produced an ill-formed document: {bad.violations}")
    return result


def inline_subprocess(
    doc: Document,
    complex_label: str,
    max_leaf_len: int,
    max_activations: int,
    node_cap: int = DEFAULT_NODE_CAP,
) -> InlineResult:
    """Hoist one sub-model into its host and verify the rewrite behaviorally.

    Binary constraints on the complex activity are re-expanded per member
    (the inverse of aggregation); unary ones have no flat counterpart and
    are dropped, reported in the result. The verdict states whether the
    rewrite preserved the bounded leaf language.
    """
    host = None
    decl = None
    for m in doc.models:
        a = m.activity(complex_label)
        if a is not None and a.is_complex:
            host, decl = m, a
            break
    if host is None:
        raise KeyError(f"no complex activity {complex_label!r} in the document")
    sub = doc.model(decl.sub_model)
    nested = [a.name for a in sub.activities if a.is_complex]
    if nested:
        raise ValueError(
            f"sub-process {sub.name!r} contains complex activities {nested}; inline bottom-up"
        )

    members = [a.name for a in sub.activities]
    new_activities: list[ActivityDecl] = []
    for a in host.activities:
        if a.name == complex_label:
            new_activities.extend(sub.activities)
        else:
            new_activities.append(a)

    dropped: list[ConstraintInstance] = []
    new_constraints: list[ConstraintInstance] = []
    for c in host.constraints:
        if complex_label not in c.operands:
            new_constraints.append(c)
            continue
        if c.template in UNARY_TEMPLATES:
            dropped.append(c)
            continue
        expansions = [c.operands]
        for slot in (0, 1):
            nxt = []
            for ops in expansions:
                if ops[slot] == complex_label:
                    for member in members:
                        repl = list(ops)
                        repl[slot] = member
                        nxt.append(tuple(repl))
                else:
                    nxt.append(ops)
            expansions = nxt
        new_constraints.extend(ConstraintInstance(c.template, ops) for ops in expansions)
    new_constraints.extend(sub.constraints)
    flat_host = replace(
        host, activities=tuple(new_activities), constraints=tuple(new_constraints)
    )

    still_referenced = any(
        a.sub_model == sub.name
        for m in doc.models
        if m.name != host.name
        for a in m.activities
        if a.is_complex
    )
    models = []
    for m in doc.models:
        if m.name == host.name:
            models.append(flat_host)
        elif m.name == sub.name and not still_referenced:
            continue
        else:
            models.append(m)
    flat = Document(tuple(models))
    bad = validate_document(flat)
    if not bad.well_formed:
        raise AssertionError(f"inline produced an ill-formed document: {bad.violations}")

    verdict = bounded_equivalent(doc, flat, max_leaf_len, max_activations, node_cap)
    return InlineResult(flat=flat, verdict=verdict, dropped=tuple(dropped))

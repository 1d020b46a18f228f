"""Process model data structures and well-formedness checking.

A document is a set of named process models. One model is marked as the
root; other models are sub-processes that complex activities refer to.
Constraints are strictly local: every operand must name an activity of
the model the constraint is declared in, so a sub-process can never be
steered from outside its own scope.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

# Template catalogue. Cardinality templates take a non-negative count as
# their first argument; all others take activity labels only.
UNARY_TEMPLATES = frozenset({"existence", "absence", "exactly", "init"})
BINARY_TEMPLATES = frozenset(
    {
        "responded_existence",
        "response",
        "precedence",
        "succession",
        "chain_response",
        "chain_precedence",
        "neg_response",
    }
)
CARDINALITY_TEMPLATES = frozenset({"existence", "absence", "exactly"})
TEMPLATES = UNARY_TEMPLATES | BINARY_TEMPLATES


@dataclass(frozen=True)
class ActivityDecl:
    """An activity of one model: atomic, or complex with a sub-model reference."""

    name: str
    sub_model: Optional[str] = None

    @property
    def is_complex(self) -> bool:
        return self.sub_model is not None


@dataclass(frozen=True, order=True)
class ConstraintInstance:
    """One instantiated constraint template, scoped to a single model."""

    template: str
    operands: tuple[str, ...]
    cardinality: Optional[int] = None

    def __str__(self) -> str:
        args = list(self.operands)
        if self.cardinality is not None:
            args = [str(self.cardinality)] + args
        return f"{self.template}({', '.join(args)})"

    def sort_key(self) -> tuple:
        return (self.template, self.cardinality if self.cardinality is not None else -1, self.operands)


@dataclass(frozen=True)
class ProcessModel:
    name: str
    activities: tuple[ActivityDecl, ...]
    constraints: tuple[ConstraintInstance, ...]
    root_marker: bool = False

    def activity(self, label: str) -> Optional[ActivityDecl]:
        for a in self.activities:
            if a.name == label:
                return a
        return None


@dataclass(frozen=True)
class Document:
    """All models of one source, in declaration order."""

    models: tuple[ProcessModel, ...]

    @property
    def model_map(self) -> dict[str, ProcessModel]:
        return {m.name: m for m in self.models}

    @property
    def root(self) -> ProcessModel:
        roots = [m for m in self.models if m.root_marker]
        if len(roots) != 1:
            raise ValueError(f"document has {len(roots)} root models, expected exactly 1")
        return roots[0]

    def model(self, name: str) -> ProcessModel:
        for m in self.models:
            if m.name == name:
                return m
        raise KeyError(name)

    def owner_of(self, label: str) -> Optional[ProcessModel]:
        """The model declaring `label`; unique in well-formed documents."""
        for m in self.models:
            if m.activity(label) is not None:
                return m
        return None


@dataclass(frozen=True)
class Violation:
    kind: str  # cyclic-hierarchy | dangling-reference | duplicate-name |
    #            arity-mismatch | non-local-operand | root-count | unknown-template |
    #            bad-cardinality
    model: Optional[str]
    subject: str
    message: str

    def __str__(self) -> str:
        where = f" in process {self.model!r}" if self.model else ""
        return f"{self.kind}{where}: {self.message}"


@dataclass(frozen=True)
class WellFormednessReport:
    violations: tuple[Violation, ...]

    @property
    def well_formed(self) -> bool:
        return not self.violations


def alphabet(model: ProcessModel) -> frozenset[str]:
    """Labels a model's constraints can observe: its own activities only."""
    return frozenset(a.name for a in model.activities)


def _check_constraint(model: ProcessModel, c: ConstraintInstance, out: list[Violation]) -> None:
    if c.template not in TEMPLATES:
        out.append(
            Violation("unknown-template", model.name, str(c), f"unknown template {c.template!r}")
        )
        return
    want = 1 if c.template in UNARY_TEMPLATES else 2
    if len(c.operands) != want:
        out.append(
            Violation(
                "arity-mismatch",
                model.name,
                str(c),
                f"{c.template} takes {want} activity operand(s), got {len(c.operands)}",
            )
        )
    if c.template in CARDINALITY_TEMPLATES:
        if c.cardinality is None or c.cardinality < 0:
            out.append(
                Violation(
                    "bad-cardinality",
                    model.name,
                    str(c),
                    f"{c.template} requires a non-negative cardinality",
                )
            )
    elif c.cardinality is not None:
        out.append(
            Violation(
                "bad-cardinality", model.name, str(c), f"{c.template} takes no cardinality"
            )
        )
    local = alphabet(model)
    for op in c.operands:
        if op not in local:
            out.append(
                Violation(
                    "non-local-operand",
                    model.name,
                    str(c),
                    f"operand {op!r} is not an activity of process {model.name!r}",
                )
            )


def validate_document(doc: Document) -> WellFormednessReport:
    """Pure structural check; violations are data, never exceptions."""
    out: list[Violation] = []

    seen_models: set[str] = set()
    for m in doc.models:
        if m.name in seen_models:
            out.append(
                Violation("duplicate-name", None, m.name, f"process {m.name!r} defined twice")
            )
        seen_models.add(m.name)
    model_names = {m.name for m in doc.models}

    roots = [m.name for m in doc.models if m.root_marker]
    if len(roots) != 1:
        out.append(
            Violation(
                "root-count",
                None,
                ",".join(roots) or "-",
                f"document must mark exactly one root process, found {len(roots)}",
            )
        )

    # Activity labels are unique across the whole document so that flat
    # traces resolve unambiguously.
    seen_labels: dict[str, str] = {}
    for m in doc.models:
        for a in m.activities:
            if a.name in seen_labels:
                out.append(
                    Violation(
                        "duplicate-name",
                        m.name,
                        a.name,
                        f"activity {a.name!r} already declared in process {seen_labels[a.name]!r}",
                    )
                )
            else:
                seen_labels[a.name] = m.name
            if a.is_complex and a.sub_model not in model_names:
                out.append(
                    Violation(
                        "dangling-reference",
                        m.name,
                        a.name,
                        f"complex activity {a.name!r} refers to undefined process {a.sub_model!r}",
                    )
                )

    # Reference graph must be acyclic: model -> sub-models of its complex activities.
    edges = {
        m.name: [a.sub_model for a in m.activities if a.is_complex and a.sub_model in model_names]
        for m in doc.models
    }
    state: dict[str, int] = {}  # 0 visiting, 1 done

    def visit(name: str, path: tuple[str, ...]) -> None:
        if state.get(name) == 1:
            return
        if state.get(name) == 0:
            cycle = path[path.index(name):] + (name,)
            out.append(
                Violation(
                    "cyclic-hierarchy",
                    name,
                    " -> ".join(cycle),
                    f"hierarchy cycle: {' -> '.join(cycle)}",
                )
            )
            return
        state[name] = 0
        for nxt in edges[name]:
            visit(nxt, path + (name,))
        state[name] = 1

    for m in doc.models:
        if state.get(m.name) != 1:
            visit(m.name, ())

    for m in doc.models:
        for c in m.constraints:
            _check_constraint(m, c, out)

    return WellFormednessReport(tuple(out))


def canonical_constraints(model: ProcessModel) -> tuple[ConstraintInstance, ...]:
    return tuple(sorted(model.constraints, key=ConstraintInstance.sort_key))


def structurally_equal(a: Document | ProcessModel, b: Document | ProcessModel) -> bool:
    """Equality up to declaration order of activities and constraints."""
    if isinstance(a, ProcessModel) and isinstance(b, ProcessModel):
        return (
            a.name == b.name
            and a.root_marker == b.root_marker
            and frozenset(a.activities) == frozenset(b.activities)
            and canonical_constraints(a) == canonical_constraints(b)
        )
    if isinstance(a, Document) and isinstance(b, Document):
        am, bm = a.model_map, b.model_map
        if set(am) != set(bm):
            return False
        return all(structurally_equal(am[k], bm[k]) for k in am)
    return False


def reachable_models(doc: Document) -> tuple[ProcessModel, ...]:
    """Models reachable from the root through complex-activity references."""
    by_name = doc.model_map
    seen: dict[str, ProcessModel] = {}
    stack = [doc.root.name]
    while stack:
        name = stack.pop()
        if name in seen or name not in by_name:
            continue
        seen[name] = by_name[name]
        for a in by_name[name].activities:
            if a.is_complex:
                stack.append(a.sub_model)
    return tuple(seen.values())


def leaf_alphabet(doc: Document) -> frozenset[str]:
    """Atomic labels that can ever appear in a leaf completion sequence."""
    return frozenset(
        a.name for m in reachable_models(doc) for a in m.activities if not a.is_complex
    )


def make_document(models: Iterable[ProcessModel]) -> Document:
    return Document(tuple(models))

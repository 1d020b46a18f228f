"""Execution of process instances over a hierarchical model.

Each running scope tracks its own constraint acceptors over its own
activities' completions; nothing crosses scope boundaries except the
life-cycle of the complex activity itself. Completing a complex activity
requires its child scope to be terminable, and afterwards the child's
activities are gone for good (a later start opens a fresh child).

All command methods either apply fully and append one event, or raise
CommandRejected leaving the instance untouched.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Optional

from .automata import ConstraintAutomaton, compile_constraint
from .model import ConstraintInstance, Document, ProcessModel, alphabet


@dataclass(frozen=True)
class Event:
    seq: int
    kind: str  # started | completed | terminated
    scope: str
    activity: Optional[str]
    activity_instance: Optional[str]

    def to_json(self) -> dict:
        return {
            "seq": self.seq,
            "kind": self.kind,
            "scope": self.scope,
            "activity": self.activity,
            "activity_instance": self.activity_instance,
        }

    @staticmethod
    def from_json(d: dict) -> "Event":
        return Event(d["seq"], d["kind"], d["scope"], d.get("activity"), d.get("activity_instance"))


class CommandRejected(Exception):
    """A command the engine refuses; the instance state is unchanged."""

    def __init__(self, kind: str, reason: str, blockers: tuple[ConstraintInstance, ...] = ()):
        super().__init__(reason)
        self.kind = kind  # disabled | termination-blocked | subprocess-blocked |
        #                   unknown-label | not-running | already-terminated | ambiguous-label
        self.reason = reason
        self.blockers = blockers

    def describe(self) -> str:
        if self.blockers:
            return f"{self.reason} [{', '.join(str(b) for b in self.blockers)}]"
        return self.reason


@dataclass
class Scope:
    """One running (or completed) instance of a model."""

    id: str
    model: ProcessModel
    status: str = "running"  # running | completed
    constraint_states: list[int] = field(default_factory=list)
    running_activities: dict[str, str] = field(default_factory=dict)  # instance id -> label
    child_scopes: dict[str, "Scope"] = field(default_factory=dict)  # complex label -> scope
    finished_children: list["Scope"] = field(default_factory=list)
    local_completions: list[str] = field(default_factory=list)

    def walk(self) -> Iterable["Scope"]:
        yield self
        for child in self.child_scopes.values():
            yield from child.walk()


@dataclass(frozen=True)
class ConstraintStatus:
    constraint: ConstraintInstance
    status: str  # accepting | pending | violated
    blocks: bool


@dataclass(frozen=True)
class ReplayVerdict:
    outcome: str  # accepted | rejected
    failure_index: Optional[int] = None
    reason: Optional[str] = None

    @property
    def accepted(self) -> bool:
        return self.outcome == "accepted"


@dataclass(frozen=True)
class TraceStep:
    """One step of a trace file: merged execute, bare start/complete, or terminate."""

    kind: str  # execute | start | complete | terminate
    label: Optional[str] = None
    instance_id: Optional[str] = None
    expect_rejection: bool = False


class Instance:
    """A live process instance: a tree of scopes plus the event log."""

    def __init__(self, document: Document):
        self.document = document
        self.compiled: dict[str, tuple[tuple[ConstraintInstance, ConstraintAutomaton], ...]] = {}
        for m in document.models:
            alpha = alphabet(m)
            self.compiled[m.name] = tuple((c, compile_constraint(c, alpha)) for c in m.constraints)
        self._seq = 0
        self._next_scope = 0
        self._next_act = 0
        self._aliases: dict[str, str] = {}
        self.terminated = False
        self.events: list[Event] = []
        self.root = self._new_scope(document.root, root=True)

    # -- construction helpers -------------------------------------------------

    def _new_scope(self, model: ProcessModel, root: bool = False) -> Scope:
        if root:
            sid = "root"
        else:
            self._next_scope += 1
            sid = f"s{self._next_scope}"
        automata = self.compiled[model.name]
        return Scope(id=sid, model=model, constraint_states=[a.initial for _, a in automata])

    def _emit(self, kind: str, scope: str, activity: Optional[str], inst: Optional[str]) -> Event:
        self._seq += 1
        ev = Event(self._seq, kind, scope, activity, inst)
        self.events.append(ev)
        return ev

    def clone(self) -> "Instance":
        """Independent copy; the immutable document and automata are shared."""
        new = object.__new__(Instance)
        new.document = self.document
        new.compiled = self.compiled
        new._seq = self._seq
        new._next_scope = self._next_scope
        new._next_act = self._next_act
        new._aliases = dict(self._aliases)
        new.terminated = self.terminated
        new.events = list(self.events)
        new.root = _copy_scope(self.root)
        return new

    def fingerprint(self):
        """Hashable summary of behaviorally relevant state (scope tree only)."""
        return _scope_fingerprint(self.root)

    # -- lookups ---------------------------------------------------------------

    def scopes(self) -> list[Scope]:
        return list(self.root.walk())

    def scope(self, scope_id: str) -> Scope:
        for s in self.root.walk():
            if s.id == scope_id:
                return s
        raise CommandRejected("not-running", f"no running scope {scope_id!r}")

    def _owner_of_instance(self, inst_id: str) -> tuple[Scope, str]:
        for s in self.root.walk():
            if inst_id in s.running_activities:
                return s, s.running_activities[inst_id]
        raise CommandRejected("not-running", f"no running activity instance {inst_id!r}")

    def scope_for_label(self, label: str) -> Scope:
        """The unique running scope whose model declares `label`."""
        owners = [s for s in self.root.walk() if s.model.activity(label) is not None]
        if not owners:
            if self.document.owner_of(label) is not None:
                raise CommandRejected(
                    "disabled", f"activity {label!r} has no running scope (sub-process not started)"
                )
            raise CommandRejected("unknown-label", f"unknown activity {label!r}")
        if len(owners) > 1:
            raise CommandRejected(
                "ambiguous-label",
                f"activity {label!r} is live in {len(owners)} scopes; address it by scope",
            )
        return owners[0]

    # -- read side ---------------------------------------------------------------

    def _automata(self, scope: Scope):
        return self.compiled[scope.model.name]

    def _dead_on(self, scope: Scope, label: str) -> tuple[ConstraintInstance, ...]:
        """Constraints a hypothetical completion of `label` would break for good."""
        hits = []
        for (c, a), cur in zip(self._automata(scope), scope.constraint_states):
            if a.blocks(cur, label):
                hits.append(c)
        return tuple(hits)

    def enabled_activities(self) -> set[tuple[str, str]]:
        if self.terminated:
            return set()
        out: set[tuple[str, str]] = set()
        for s in self.root.walk():
            if s.status != "running":
                continue
            for a in s.model.activities:
                if a.is_complex and a.name in s.child_scopes:
                    continue  # one running instance per complex activity per scope
                if not self._dead_on(s, a.name):
                    out.add((s.id, a.name))
        return out

    def explain(self, scope_id: str, label: str) -> list[ConstraintStatus]:
        s = self.scope(scope_id)
        if s.model.activity(label) is None:
            raise CommandRejected("unknown-label", f"{label!r} is not an activity of {s.model.name!r}")
        out = []
        for (c, a), cur in zip(self._automata(s), s.constraint_states):
            out.append(ConstraintStatus(c, a.status(cur), a.blocks(cur, label)))
        return out

    def may_terminate(self, scope_id: str = "root") -> tuple[bool, list[ConstraintInstance]]:
        s = self.scope(scope_id)
        blockers = [
            c
            for (c, a), cur in zip(self._automata(s), s.constraint_states)
            if a.status(cur) != "accepting"
        ]
        ok = not blockers and not s.running_activities and s.status == "running"
        return ok, blockers

    # -- write side ---------------------------------------------------------------

    def _guard_open(self) -> None:
        if self.terminated:
            raise CommandRejected("already-terminated", "instance is terminated")

    def start_activity(self, scope_id: str, label: str) -> Event:
        self._guard_open()
        s = self.scope(scope_id)
        decl = s.model.activity(label)
        if decl is None:
            raise CommandRejected("unknown-label", f"{label!r} is not an activity of {s.model.name!r}")
        if s.status != "running":
            raise CommandRejected("not-running", f"scope {scope_id!r} already completed")
        if decl.is_complex and label in s.child_scopes:
            raise CommandRejected(
                "disabled", f"complex activity {label!r} already has a running instance in this scope"
            )
        blockers = self._dead_on(s, label)
        if blockers:
            raise CommandRejected(
                "disabled", f"starting {label!r} would permanently violate local constraints", blockers
            )
        self._next_act += 1
        inst_id = f"a{self._next_act}"
        s.running_activities[inst_id] = label
        if decl.is_complex:
            s.child_scopes[label] = self._new_scope(self.document.model(decl.sub_model))
        return self._emit("started", s.id, label, inst_id)

    def complete_activity(self, inst_id: str) -> Event:
        self._guard_open()
        s, label = self._owner_of_instance(inst_id)
        decl = s.model.activity(label)
        assert decl is not None
        child = s.child_scopes.get(label) if decl.is_complex else None
        if child is not None:
            ok, sub_blockers = self.may_terminate(child.id)
            if not ok:
                if child.running_activities:
                    reason = f"sub-process of {label!r} still has running activities"
                else:
                    reason = f"sub-process of {label!r} cannot terminate yet"
                raise CommandRejected("subprocess-blocked", reason, tuple(sub_blockers))
        blockers = self._dead_on(s, label)
        if blockers:
            raise CommandRejected(
                "disabled", f"completing {label!r} would permanently violate local constraints", blockers
            )
        # Commit.
        del s.running_activities[inst_id]
        if child is not None:
            child.status = "completed"
            del s.child_scopes[label]
            s.finished_children.append(child)
        s.local_completions.append(label)
        automata = self._automata(s)
        s.constraint_states = [
            a.step(cur, label) for (_, a), cur in zip(automata, s.constraint_states)
        ]
        return self._emit("completed", s.id, label, inst_id)

    def execute(self, scope_id: Optional[str], label: str) -> tuple[Event, Event]:
        """Merged start+complete; rejected atomically if either half would fail."""
        self._guard_open()
        s = self.scope(scope_id) if scope_id else self.scope_for_label(label)
        decl = s.model.activity(label)
        if decl is None:
            raise CommandRejected("unknown-label", f"{label!r} is not an activity of {s.model.name!r}")
        if decl.is_complex:
            # A fresh child must be terminable at once for the merged form to work.
            sub = self.document.model(decl.sub_model)
            pending = [c for c, a in self.compiled[sub.name] if a.status(a.initial) != "accepting"]
            if label in s.child_scopes:
                raise CommandRejected(
                    "disabled", f"complex activity {label!r} already has a running instance in this scope"
                )
            if pending:
                raise CommandRejected(
                    "subprocess-blocked",
                    f"merged execution of {label!r} needs an immediately terminable sub-process",
                    tuple(pending),
                )
        started = self.start_activity(s.id, label)
        completed = self.complete_activity(started.activity_instance)
        return started, completed

    def terminate(self) -> Event:
        self._guard_open()
        ok, blockers = self.may_terminate("root")
        if not ok:
            if blockers:
                raise CommandRejected(
                    "termination-blocked", "termination not allowed yet", tuple(blockers)
                )
            raise CommandRejected(
                "termination-blocked", "termination not allowed while activities are running"
            )
        self.terminated = True
        self.root.status = "completed"
        return self._emit("terminated", self.root.id, None, None)

    # -- replay ---------------------------------------------------------------

    def apply_step(self, step: TraceStep) -> None:
        if step.kind == "execute":
            self.execute(None, step.label)
        elif step.kind == "start":
            scope = self.scope_for_label(step.label)
            ev = self.start_activity(scope.id, step.label)
            if step.instance_id is not None:
                self._alias_instance(ev.activity_instance, step.instance_id)
        elif step.kind == "complete":
            self.complete_activity(self._resolve_completion(step))
        elif step.kind == "terminate":
            self.terminate()
        else:
            raise ValueError(f"unknown step kind {step.kind!r}")

    def _alias_instance(self, engine_id: str, alias: str) -> None:
        if alias in self._aliases:
            raise CommandRejected("ambiguous-label", f"instance alias {alias!r} reused")
        self._aliases[alias] = engine_id

    def _resolve_completion(self, step: TraceStep) -> str:
        if step.instance_id is not None:
            if step.instance_id in self._aliases:
                return self._aliases[step.instance_id]
            return step.instance_id
        # Bare complete by label: must be unambiguous.
        matches = [
            iid
            for s in self.root.walk()
            for iid, lbl in s.running_activities.items()
            if lbl == step.label
        ]
        if not matches:
            raise CommandRejected("not-running", f"no running instance of {step.label!r} to complete")
        if len(matches) > 1:
            raise CommandRejected(
                "ambiguous-label", f"{len(matches)} running instances of {step.label!r}; use an id"
            )
        return matches[0]


def _copy_scope(s: Scope) -> Scope:
    return Scope(
        id=s.id,
        model=s.model,
        status=s.status,
        constraint_states=list(s.constraint_states),
        running_activities=dict(s.running_activities),
        child_scopes={k: _copy_scope(v) for k, v in s.child_scopes.items()},
        finished_children=list(s.finished_children),
        local_completions=list(s.local_completions),
    )


def _scope_fingerprint(s: Scope):
    return (
        s.model.name,
        tuple(s.constraint_states),
        tuple(sorted(s.running_activities.values())),
        frozenset((label, _scope_fingerprint(c)) for label, c in s.child_scopes.items()),
    )


def instantiate(document: Document) -> Instance:
    return Instance(document)


def replay(document: Document, steps: Iterable[TraceStep]) -> ReplayVerdict:
    """Run a trace from scratch; acceptance requires a final successful terminate.

    Steps marked expect_rejection must be refused by the engine; they assert
    the pinned behavior of a fixture without changing any state.
    """
    inst = Instance(document)
    steps = list(steps)
    for i, step in enumerate(steps):
        try:
            inst.apply_step(step)
        except CommandRejected as rej:
            if step.expect_rejection:
                continue
            return ReplayVerdict("rejected", i, rej.describe())
        if step.expect_rejection:
            return ReplayVerdict("rejected", i, f"step {i} was permitted but marked as expected rejection")
    if not inst.terminated:
        return ReplayVerdict("rejected", len(steps), "trace does not end with an explicit terminate")
    return ReplayVerdict("accepted")


def restore(document: Document, events: Iterable[Event]) -> Instance:
    """Rebuild an instance from its own event log.

    Commands regenerate ids deterministically, so a log produced by this
    engine replays onto identical ids; any mismatch means the log was not
    produced by (or was corrupted since) this engine.
    """
    inst = Instance(document)
    for ev in events:
        if ev.kind == "started":
            got = inst.start_activity(ev.scope, ev.activity)
        elif ev.kind == "completed":
            got = inst.complete_activity(ev.activity_instance)
        elif ev.kind == "terminated":
            got = inst.terminate()
        else:
            raise ValueError(f"unknown event kind {ev.kind!r}")
        if got != ev:
            raise ValueError(f"event log mismatch: expected {ev}, produced {got}")
    return inst

"""Acceptance suite: the release gate, one test per criterion.

conftest prints an `ACCEPTANCE PASS/FAIL: <name>` line per test here.
"""

import random
import time

import pytest

from hidec.analysis import (
    bounded_equivalent,
    check_extraction,
    enumerate_language,
    extract_subprocess,
    inline_subprocess,
    leaf_witness,
)
from hidec.automata import classify_template, compile_constraint
from hidec.cli import render_replay_transcript, run_cli
from hidec.dsl import parse_model, serialize_model
from hidec.engine import replay
from hidec.model import ConstraintInstance, leaf_alphabet, structurally_equal
from hidec.server import SessionStore, enabled_json, instance_json

from conftest import (
    FIXTURES,
    MODEL_FIXTURES,
    load_fixture_model,
    load_fixture_trace,
)
from oracles import all_traces, holds, satisfiable_extension_exists

MEMBERS = ["Read reviews for revising paper", "Write response letter", "Work on revision"]


def test_flat_timeline_golden_replay(flat_basic):
    """Starter model: E gated by its precedence, termination gated by existence."""
    t0 = time.monotonic()
    steps = load_fixture_trace("flat_basic")
    text, verdict = render_replay_transcript(flat_basic, steps)
    assert verdict.accepted
    golden = (FIXTURES / "transcripts" / "flat_basic.txt").read_text()
    assert text == golden  # byte-stable
    # milestone spot checks, independent of formatting
    lines = text.splitlines()
    assert lines[1] == "enabled root(Main): A B C D F"  # E disabled at instantiation
    assert lines[2] == "terminate: blocked [existence(1, A)]"
    first_ok = lines.index("terminate: ok")
    assert lines[first_ok - 1] == "enabled root(Main): A B C D F"
    assert lines[first_ok - 2] == "exec A"  # unlocked exactly when A completes
    first_e = lines.index("enabled root(Main): A B C D E F")
    assert lines[first_e - 1] == "exec C"  # E appears exactly when C completes
    assert time.monotonic() - t0 < 1.0


def test_nested_timeline_golden_replay(nested_basic):
    """Sub-process model: C,D live only inside a running instance of B."""
    t0 = time.monotonic()
    steps = load_fixture_trace("nested_basic_full")
    text, verdict = render_replay_transcript(nested_basic, steps)
    assert verdict.accepted
    golden = (FIXTURES / "transcripts" / "nested_basic.txt").read_text()
    assert text == golden
    lines = text.splitlines()
    # C,D rejected before B starts
    assert any("exec C => rejected" in l and "no running scope" in l for l in lines[:4])
    # C enabled as soon as B starts, D still blocked
    b_start = lines.index("start B")
    assert lines[b_start + 2] == "enabled s1(Sub): C"
    assert "exec D => rejected" in lines[b_start + 4]
    # D enabled once C completed
    c_done = lines.index("complete C")
    assert lines[c_done + 2] == "enabled s1(Sub): C D"
    # after B completes, the sub-scope is gone for good; A and B stay enabled
    b_done = lines.index("complete B")
    assert lines[b_done + 1] == "enabled root(Main): A B"
    assert "exec C => rejected" in lines[b_done + 3]
    assert "exec D => rejected" in lines[b_done + 4]
    assert lines[-1] == "verdict: accepted"
    assert time.monotonic() - t0 < 1.0


ORACLE_CASES = [
    ("existence", ("A",), 1),
    ("absence", ("A",), 1),
    ("exactly", ("A",), 1),
    ("init", ("A",), None),
    ("responded_existence", ("A", "B"), None),
    ("response", ("A", "B"), None),
    ("precedence", ("A", "B"), None),
    ("succession", ("A", "B"), None),
    ("chain_response", ("A", "B"), None),
    ("chain_precedence", ("A", "B"), None),
    ("neg_response", ("A", "B"), None),
]

ALPHA3 = frozenset({"A", "B", "C"})


def test_template_oracle_suite():
    """Automaton verdicts match the positional predicates on every trace
    of length <= 6 over a 3-letter alphabet; dead states coincide with
    constructive unsatisfiability of every extension."""
    t0 = time.monotonic()
    checked = 0
    for template, operands, cardinality in ORACLE_CASES:
        automaton = compile_constraint(
            ConstraintInstance(template, operands, cardinality), ALPHA3
        )
        for trace in all_traces(ALPHA3, 6):
            state = automaton.run(trace)
            expected = holds(template, operands, cardinality, trace)
            assert (state in automaton.accepting) == expected, (template, trace)
            fixable = satisfiable_extension_exists(
                template, operands, cardinality, trace, ALPHA3, automaton.n_states
            )
            assert (state in automaton.dead) == (not fixable), (template, trace)
            checked += 1
    assert checked == 11 * 1093
    assert time.monotonic() - t0 < 30.0


# The expected execution/termination character of each template. The init
# row is contentious: with the empty trace not satisfying init (the adopted
# reading), a correct acceptor's initial state is pending, which makes init
# termination-restricting under the structural rule; that row currently
# fails by design rather than silently flipping either the predicate or the
# classifier. See test_init_classification_follows_empty_trace_semantics in
# test_automata.py for the behavior actually implemented.
CLASSIFICATION_TABLE = {
    "existence": (False, True),
    "responded_existence": (False, True),
    "response": (False, True),
    "absence": (True, False),
    "precedence": (True, False),
    "chain_precedence": (True, False),
    "neg_response": (True, False),
    "init": (True, False),
    "exactly": (True, True),
    "succession": (True, True),
    "chain_response": (True, True),
}


@pytest.mark.parametrize("case", ORACLE_CASES, ids=[c[0] for c in ORACLE_CASES])
def test_classification_table(case):
    template, operands, cardinality = case
    automaton = compile_constraint(ConstraintInstance(template, operands, cardinality), ALPHA3)
    cls = classify_template(automaton)
    assert (cls.execution_restricting, cls.termination_restricting) == CLASSIFICATION_TABLE[
        template
    ]


def test_aggregation_fixture(paper_flat, paper_hier):
    report = check_extraction(paper_flat, MEMBERS)
    assert report.feasible
    # exactly three boundary constraints collapse into one
    assert len(report.aggregated_constraints) == 1
    agg = report.aggregated_constraints[0]
    assert agg.template == "neg_response" and agg.outside == "Get acceptance"
    flat_boundary = [
        c
        for c in paper_flat.root.constraints
        if c.template == "neg_response" and c.operands[0] == "Get acceptance"
    ]
    assert len(flat_boundary) == 3
    hier = extract_subprocess(paper_flat, MEMBERS, "Revise paper")
    assert structurally_equal(hier, paper_hier)
    back = inline_subprocess(hier, "Revise paper", 2, 1)
    assert structurally_equal(back.flat, paper_flat)  # round-trip identity


def test_expressiveness_witness(nested_cardinality, nested_cardinality_flat):
    t0 = time.monotonic()
    result = inline_subprocess(nested_cardinality, "C", 4, 2)
    assert structurally_equal(result.flat, nested_cardinality_flat)
    assert not result.verdict.equivalent_up_to_k
    cex = result.verdict.counterexample
    assert cex is not None and len(cex) <= 4
    # re-verified through both models' replay machinery
    hier_schedule = leaf_witness(nested_cardinality, cex, 2)
    assert hier_schedule is not None
    assert replay(nested_cardinality, hier_schedule).accepted
    assert leaf_witness(result.flat, cex, 2) is None
    assert time.monotonic() - t0 < 10.0


ENUMERATION_BOUNDS = {
    "flat_basic": (3, 0),
    "nested_basic": (3, 2),
    "nested_cardinality": (4, 2),
    "nested_cardinality_flat": (4, 0),
    "paper_flat": (3, 0),
    "paper_hier": (3, 2),
}


def test_enumeration_consistency():
    rng = random.Random(1186)
    for name, (max_leaf, max_act) in ENUMERATION_BOUNDS.items():
        doc = load_fixture_model(name)
        lang = enumerate_language(doc, max_leaf, max_act)
        for trace in lang.traces:
            schedule = leaf_witness(doc, trace, max_act)
            assert schedule is not None, (name, trace)
            assert replay(doc, schedule).accepted, (name, trace)
        atoms = sorted(leaf_alphabet(doc))
        rejected = 0
        attempts = 0
        while rejected < 100:
            attempts += 1
            assert attempts < 20_000, f"{name}: complement too sparse to sample"
            candidate = tuple(
                rng.choice(atoms) for _ in range(rng.randint(0, max_leaf))
            )
            if candidate in lang.traces:
                continue
            assert leaf_witness(doc, candidate, max_act) is None, (name, candidate)
            rejected += 1


def test_dsl_round_trip():
    for name in MODEL_FIXTURES:
        doc = load_fixture_model(name)
        text = serialize_model(doc)
        reparsed, diags = parse_model(text)
        assert not diags, name
        assert structurally_equal(reparsed, doc), name
        assert serialize_model(reparsed) == text, name  # canonical idempotence
        assert (FIXTURES / f"{name}.dpm").read_text() == text, name


def test_gateway_determinism(tmp_path):
    """Kill-and-restore mid-replay: the revived gateway answers identically."""
    snapshot = tmp_path / "snap.json"
    text = (FIXTURES / "nested_basic.dpm").read_text()

    live = SessionStore(snapshot_path=str(snapshot))
    live.add_model(text)
    control = SessionStore()  # uninterrupted twin
    control.add_model(text)
    iid = live.create_instance("Main")
    assert control.create_instance("Main") == iid

    first_half = [
        {"kind": "execute", "activity": "A"},
        {"kind": "start", "activity": "B"},
        {"kind": "execute", "activity": "C"},
    ]
    for cmd in first_half:
        live.apply_command(iid, cmd)
        control.apply_command(iid, cmd)

    del live  # crash point: only the snapshot file survives
    revived = SessionStore(snapshot_path=str(snapshot))
    assert enabled_json(revived.instance(iid)) == enabled_json(control.instance(iid))
    assert instance_json(revived, iid) == instance_json(control, iid)

    second_half = [
        {"kind": "execute", "activity": "D"},
        {"kind": "complete", "activity": "B"},
        {"kind": "terminate"},
    ]
    for cmd in second_half:
        revived.apply_command(iid, cmd)
        control.apply_command(iid, cmd)
        assert enabled_json(revived.instance(iid)) == enabled_json(control.instance(iid))
    assert instance_json(revived, iid) == instance_json(control, iid)


def test_cli_surface_smoke(tmp_path, capsys):
    """The documented commands exist and honor the exit-code contract."""
    assert run_cli(["validate", str(FIXTURES / "flat_basic.dpm")]) == 0
    assert run_cli(["validate", str(FIXTURES / "invalid" / "cyclic.dpm")]) == 1
    assert (
        run_cli(["replay", str(FIXTURES / "flat_basic.dpm"), str(FIXTURES / "flat_basic.dpt")])
        == 0
    )
    assert (
        run_cli(
            [
                "equiv",
                str(FIXTURES / "nested_cardinality.dpm"),
                str(FIXTURES / "nested_cardinality_flat.dpm"),
                "--max-leaf",
                "4",
            ]
        )
        == 1
    )
    capsys.readouterr()

"""Command line front end.

Exit codes: 0 on success (valid model, accepted trace, equivalent models,
feasible extraction, verified inline); 1 on a negative verdict; 2 on usage
or parse errors.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional

from . import analysis, dsl, engine
from .model import Document


def _fmt_label(name: str) -> str:
    return dsl._emit_name(name)


def _fmt_trace(trace) -> str:
    if not trace:
        return "<empty>"
    return " ".join(_fmt_label(t) for t in trace)


def _load_model_or_exit(path: str) -> Document:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        raise SystemExit(2)
    doc, diags = dsl.parse_model(text)
    if doc is None or diags:
        for d in diags:
            print(f"{path}:{d}", file=sys.stderr)
        raise SystemExit(2)
    return doc


def _load_trace_or_exit(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return dsl.parse_trace(fh.read())
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        raise SystemExit(2)
    except dsl.ParseError as exc:
        for d in exc.diagnostics:
            print(f"{path}:{d}", file=sys.stderr)
        raise SystemExit(2)


def _step_text(step: engine.TraceStep) -> str:
    mark = "! " if step.expect_rejection else ""
    if step.kind == "terminate":
        return f"{mark}terminate"
    if step.kind == "execute":
        return f"{mark}exec {_fmt_label(step.label)}"
    if step.kind == "start":
        suffix = f" @{step.instance_id}" if step.instance_id else ""
        return f"{mark}start {_fmt_label(step.label)}{suffix}"
    target = _fmt_label(step.label) if step.label else f"@{step.instance_id}"
    return f"{mark}complete {target}"


def _state_block(inst: engine.Instance) -> list[str]:
    lines = []
    enabled = inst.enabled_activities()
    for scope in inst.root.walk():
        if scope.status != "running":
            continue
        labels = sorted(lbl for sid, lbl in enabled if sid == scope.id)
        shown = " ".join(_fmt_label(l) for l in labels) if labels else "-"
        lines.append(f"enabled {scope.id}({scope.model.name}): {shown}")
    if inst.terminated:
        lines.append("terminate: done")
        return lines
    ok, blockers = inst.may_terminate("root")
    if ok:
        lines.append("terminate: ok")
    else:
        parts = sorted(str(c) for c in blockers)
        if inst.root.running_activities:
            parts.append("running activities")
        lines.append(f"terminate: blocked [{'; '.join(parts)}]")
    return lines


def render_replay_transcript(doc: Document, steps) -> tuple[str, engine.ReplayVerdict]:
    """Deterministic play-by-play of a replay; the basis of the golden tests."""
    inst = engine.Instance(doc)
    lines = [f"= instantiate {doc.root.name}"]
    lines.extend(_state_block(inst))
    verdict: Optional[engine.ReplayVerdict] = None
    for i, step in enumerate(steps):
        try:
            inst.apply_step(step)
        except engine.CommandRejected as rej:
            if step.expect_rejection:
                lines.append(f"{_step_text(step)} => rejected ({rej.describe()})")
                continue
            lines.append(f"{_step_text(step)} => REJECTED ({rej.describe()})")
            verdict = engine.ReplayVerdict("rejected", i, rej.describe())
            break
        if step.expect_rejection:
            lines.append(f"{_step_text(step)} => PERMITTED (expected a rejection)")
            verdict = engine.ReplayVerdict(
                "rejected", i, f"step {i} was permitted but marked as expected rejection"
            )
            break
        lines.append(f"{_step_text(step)}")
        lines.extend(_state_block(inst))
    if verdict is None:
        if inst.terminated:
            verdict = engine.ReplayVerdict("accepted")
        else:
            verdict = engine.ReplayVerdict(
                "rejected", len(steps), "trace does not end with an explicit terminate"
            )
    lines.append(f"verdict: {verdict.outcome}")
    if verdict.reason:
        lines.append(f"reason: {verdict.reason} (at step {verdict.failure_index})")
    return "\n".join(lines) + "\n", verdict


def _cmd_validate(args) -> int:
    try:
        with open(args.model, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    doc, diags = dsl.parse_model(text)
    if doc is None:
        for d in diags:
            print(f"{args.model}:{d}", file=sys.stderr)
        return 2
    if diags:
        for d in diags:
            print(f"{args.model}:{d}")
        return 1
    print(f"{args.model}: well-formed ({len(doc.models)} process(es))")
    return 0


def _cmd_replay(args) -> int:
    doc = _load_model_or_exit(args.model)
    steps = _load_trace_or_exit(args.trace)
    if args.transcript:
        text, verdict = render_replay_transcript(doc, steps)
        print(text, end="")
    else:
        verdict = engine.replay(doc, steps)
        if verdict.accepted:
            print("accepted")
        else:
            print(f"rejected at step {verdict.failure_index}: {verdict.reason}")
    return 0 if verdict.accepted else 1


def _cmd_enumerate(args) -> int:
    doc = _load_model_or_exit(args.model)
    try:
        lang = analysis.enumerate_language(doc, args.max_leaf, args.max_activations)
    except analysis.BoundExceeded as exc:
        print(f"bound exceeded: {exc}", file=sys.stderr)
        return 1
    for trace in lang.sorted_traces():
        print(_fmt_trace(trace))
    print(f"# {len(lang.traces)} trace(s) with leaf length <= {lang.max_leaf_len}, "
          f"activations <= {lang.max_activations}")
    return 0


def _cmd_equiv(args) -> int:
    doc1 = _load_model_or_exit(args.model1)
    doc2 = _load_model_or_exit(args.model2)
    try:
        result = analysis.bounded_equivalent(doc1, doc2, args.max_leaf, args.max_activations)
    except analysis.BoundExceeded as exc:
        print(f"bound exceeded: {exc}", file=sys.stderr)
        return 1
    if result.equivalent_up_to_k:
        print(f"equivalent up to leaf length {args.max_leaf}, activations {args.max_activations}")
        return 0
    cex = result.counterexample
    w1 = analysis.leaf_witness(doc1, cex, args.max_activations)
    side = args.model1 if w1 is not None else args.model2
    other = args.model2 if w1 is not None else args.model1
    print("inequivalent")
    print(f"counterexample: {_fmt_trace(cex)}")
    print(f"accepted by {side}, rejected by {other}")
    return 1


def _cmd_extract(args) -> int:
    doc = _load_model_or_exit(args.model)
    members = [m.strip() for m in args.members.split(",") if m.strip()]
    try:
        report = analysis.check_extraction(doc, members)
    except (KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for g in report.aggregated_constraints:
        print(f"aggregates: {g.on_complex(args.name)} (shared with {_fmt_label(g.outside)})")
    for c in report.internal_constraints:
        print(f"moves inside: {c}")
    if not report.feasible:
        for c in report.blocking_constraints:
            print(f"blocking: {c}")
        print("infeasible")
        return 1
    result = analysis.extract_subprocess(doc, members, args.name)
    text = dsl.serialize_model(result)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(f"feasible; wrote {args.output}")
    else:
        print(text, end="")
    return 0


def _cmd_inline(args) -> int:
    doc = _load_model_or_exit(args.model)
    try:
        result = analysis.inline_subprocess(doc, args.complex, args.max_leaf, args.max_activations)
    except (KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except analysis.BoundExceeded as exc:
        print(f"bound exceeded: {exc}", file=sys.stderr)
        return 1
    for c in result.dropped:
        print(f"warning: dropped unary constraint on complex activity: {c}", file=sys.stderr)
    text = dsl.serialize_model(result.flat)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        print(text, end="")
    if result.verdict.equivalent_up_to_k:
        print(f"refactorable: equivalent up to leaf length {args.max_leaf}, "
              f"activations {args.max_activations}")
        return 0
    print("not refactorable at these bounds")
    print(f"counterexample: {_fmt_trace(result.verdict.counterexample)}")
    return 1


def _cmd_simulate(args) -> int:
    doc = _load_model_or_exit(args.model)
    inst = engine.Instance(doc)
    out = sys.stdout
    print(f"simulating {doc.root.name}; commands: start L | complete L|@id | exec L | "
          f"explain L | terminate | state | events | quit", file=out)
    print("\n".join(_state_block(inst)), file=out)
    for line in sys.stdin:
        words = line.split()
        if not words:
            continue
        cmd, rest = words[0], " ".join(words[1:])
        try:
            if cmd == "quit":
                break
            elif cmd == "state":
                pass
            elif cmd == "events":
                for ev in inst.events:
                    print(f"  e{ev.seq}: {ev.kind} {ev.activity or ''} "
                          f"[{ev.scope}/{ev.activity_instance or '-'}]", file=out)
            elif cmd == "start":
                scope = inst.scope_for_label(rest)
                ev = inst.start_activity(scope.id, rest)
                print(f"started {rest} as @{ev.activity_instance}", file=out)
            elif cmd == "complete":
                step = engine.TraceStep(
                    "complete",
                    label=None if rest.startswith("@") else rest,
                    instance_id=rest[1:] if rest.startswith("@") else None,
                )
                inst.complete_activity(inst._resolve_completion(step))
                print(f"completed {rest}", file=out)
            elif cmd == "exec":
                inst.execute(None, rest)
                print(f"executed {rest}", file=out)
            elif cmd == "explain":
                scope = inst.scope_for_label(rest)
                statuses = inst.explain(scope.id, rest)
                if not statuses:
                    print("  no local constraints", file=out)
                for st in statuses:
                    flag = " BLOCKS" if st.blocks else ""
                    print(f"  {st.constraint}: {st.status}{flag}", file=out)
            elif cmd == "terminate":
                inst.terminate()
                print("terminated", file=out)
            else:
                print(f"unknown command {cmd!r}", file=out)
                continue
        except engine.CommandRejected as rej:
            print(f"rejected: {rej.describe()}", file=out)
        if cmd in ("start", "complete", "exec", "terminate", "state"):
            print("\n".join(_state_block(inst)), file=out)
        if inst.terminated:
            break
    return 0


def _cmd_serve(args) -> int:
    from . import server

    return server.serve(port=args.port, snapshot=args.snapshot)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="hidec", description="hierarchical declarative process models: run and analyze"
    )
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("validate", help="check a model file for well-formedness")
    sp.add_argument("model")
    sp.set_defaults(fn=_cmd_validate)

    sp = sub.add_parser("replay", help="replay a trace file against a model")
    sp.add_argument("model")
    sp.add_argument("trace")
    sp.add_argument("--transcript", action="store_true", help="print the step-by-step timeline")
    sp.set_defaults(fn=_cmd_replay)

    sp = sub.add_parser("enumerate", help="list the bounded leaf language")
    sp.add_argument("model")
    sp.add_argument("--max-leaf", type=int, required=True)
    sp.add_argument("--max-activations", type=int, default=2)
    sp.set_defaults(fn=_cmd_enumerate)

    sp = sub.add_parser("equiv", help="compare two models' bounded leaf languages")
    sp.add_argument("model1")
    sp.add_argument("model2")
    sp.add_argument("--max-leaf", type=int, required=True)
    sp.add_argument("--max-activations", type=int, default=2)
    sp.set_defaults(fn=_cmd_equiv)

    sp = sub.add_parser("extract", help="move activities into a new sub-process")
    sp.add_argument("model")
    sp.add_argument("--members", required=True, help="comma-separated activity labels")
    sp.add_argument("--name", required=True, help="name of the new complex activity")
    sp.add_argument("-o", "--output")
    sp.set_defaults(fn=_cmd_extract)

    sp = sub.add_parser("inline", help="flatten one sub-process and verify the rewrite")
    sp.add_argument("model")
    sp.add_argument("--complex", required=True, help="complex activity to inline")
    sp.add_argument("--max-leaf", type=int, required=True)
    sp.add_argument("--max-activations", type=int, default=2)
    sp.add_argument("-o", "--output")
    sp.set_defaults(fn=_cmd_inline)

    sp = sub.add_parser("simulate", help="drive an instance interactively")
    sp.add_argument("model")
    sp.set_defaults(fn=_cmd_simulate)

    sp = sub.add_parser("serve", help="expose the engine as an HTTP/JSON service")
    sp.add_argument("--port", type=int, default=None)
    sp.add_argument("--snapshot", default=None, help="JSON file for crash recovery")
    sp.set_defaults(fn=_cmd_serve)
    return p


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.fn(args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except BrokenPipeError:
        return 0


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()

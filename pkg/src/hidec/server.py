"""HTTP/JSON gateway over the engine and the analysis toolkit.

State lives in memory; an optional snapshot file makes it crash-safe.
Snapshots are log-based: canonical model text plus each instance's event
log. Because the engine regenerates identical ids when replaying its own
log, restoring a snapshot reproduces the exact pre-crash state.
"""

from __future__ import annotations

import json
import os
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Optional

from . import analysis, dsl
from .engine import CommandRejected, Event, Instance, TraceStep, restore
from .model import Document, alphabet


class SessionStore:
    """Models and live instances; one writer at a time per instance."""

    def __init__(self, snapshot_path: Optional[str] = None):
        self.snapshot_path = snapshot_path
        self.models: dict[str, Document] = {}
        self.texts: dict[str, str] = {}
        self.instances: dict[str, Instance] = {}
        self.instance_model: dict[str, str] = {}
        self._lock = threading.Lock()
        self._instance_locks: dict[str, threading.Lock] = {}
        self._next_instance = 0
        if snapshot_path and os.path.exists(snapshot_path):
            self._load_snapshot(snapshot_path)

    # -- persistence ---------------------------------------------------------

    def _load_snapshot(self, path: str) -> None:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        for text in data.get("models", []):
            doc, diags = dsl.parse_model(text)
            if doc is None or diags:
                raise ValueError(f"snapshot model failed to parse: {[str(d) for d in diags]}")
            self._register(doc)
        for entry in data.get("instances", []):
            doc = self.models[entry["model"]]
            events = [Event.from_json(e) for e in entry["events"]]
            inst = restore(doc, events)
            iid = entry["id"]
            self.instances[iid] = inst
            self.instance_model[iid] = entry["model"]
            self._instance_locks[iid] = threading.Lock()
            if iid.startswith("i") and iid[1:].isdigit():
                self._next_instance = max(self._next_instance, int(iid[1:]))

    def _write_snapshot(self) -> None:
        if not self.snapshot_path:
            return
        data = {
            "models": [self.texts[name] for name in sorted(self.texts)],
            "instances": [
                {
                    "id": iid,
                    "model": self.instance_model[iid],
                    "events": [e.to_json() for e in inst.events],
                }
                for iid, inst in sorted(self.instances.items())
            ],
        }
        tmp = self.snapshot_path + ".tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(data, fh, indent=1)
        os.replace(tmp, self.snapshot_path)

    # -- models ---------------------------------------------------------------

    def _register(self, doc: Document) -> str:
        name = doc.root.name
        self.models[name] = doc
        self.texts[name] = dsl.serialize_model(doc)
        return name

    def add_model(self, text: str) -> str:
        doc, diags = dsl.parse_model(text)
        if doc is None or diags:
            raise dsl.ParseError(diags)
        with self._lock:
            name = self._register(doc)
            self._write_snapshot()
        return name

    # -- instances ------------------------------------------------------------

    def create_instance(self, model_name: str) -> str:
        with self._lock:
            doc = self.models[model_name]
            self._next_instance += 1
            iid = f"i{self._next_instance}"
            self.instances[iid] = Instance(doc)
            self.instance_model[iid] = model_name
            self._instance_locks[iid] = threading.Lock()
            self._write_snapshot()
        return iid

    def instance(self, iid: str) -> Instance:
        return self.instances[iid]

    def apply_command(self, iid: str, command: dict) -> Event:
        """Run one engine command under the instance's writer lock."""
        inst = self.instances[iid]
        with self._instance_locks[iid]:
            kind = command.get("kind")
            if kind == "start":
                scope_id = command.get("scope")
                label = command.get("activity")
                if label is None:
                    raise CommandRejected("unknown-label", "command needs an 'activity'")
                scope = inst.scope(scope_id) if scope_id else inst.scope_for_label(label)
                ev = inst.start_activity(scope.id, label)
            elif kind == "complete":
                target = command.get("activity_instance")
                if target is None:
                    step = TraceStep("complete", command.get("activity"))
                    target = inst._resolve_completion(step)
                ev = inst.complete_activity(target)
            elif kind == "execute":
                label = command.get("activity")
                if label is None:
                    raise CommandRejected("unknown-label", "command needs an 'activity'")
                _, ev = inst.execute(command.get("scope"), label)
            elif kind == "terminate":
                ev = inst.terminate()
            else:
                raise CommandRejected("unknown-label", f"unknown command kind {kind!r}")
            with self._lock:
                self._write_snapshot()
            return ev


def scope_json(inst: Instance, scope) -> dict:
    enabled = inst.enabled_activities()
    local_enabled = sorted(lbl for sid, lbl in enabled if sid == scope.id)
    may, blockers = (False, []) if scope.status != "running" else inst.may_terminate(scope.id)
    automata = inst.compiled[scope.model.name]
    constraints = []
    for (c, a), cur in zip(automata, scope.constraint_states):
        constraints.append(
            {
                "text": str(c),
                "template": c.template,
                "operands": list(c.operands),
                "cardinality": c.cardinality,
                "status": a.status(cur),
                "blocking": sorted(l for l in alphabet(scope.model) if a.blocks(cur, l)),
            }
        )
    return {
        "id": scope.id,
        "model": scope.model.name,
        "status": scope.status,
        "completions": list(scope.local_completions),
        "running": [
            {
                "id": iid,
                "activity": label,
                "complex": scope.model.activity(label).is_complex,
            }
            for iid, label in sorted(scope.running_activities.items())
        ],
        "activities": [
            {"name": a.name, "complex": a.is_complex, "enabled": a.name in local_enabled}
            for a in scope.model.activities
        ],
        "enabled": local_enabled,
        "may_terminate": may,
        "termination_blockers": [str(c) for c in blockers],
        "constraints": constraints,
        "children": {label: scope_json(inst, child) for label, child in scope.child_scopes.items()},
        "finished_children": [scope_json(inst, child) for child in scope.finished_children],
    }


def instance_json(store: SessionStore, iid: str) -> dict:
    inst = store.instance(iid)
    return {
        "id": iid,
        "model": store.instance_model[iid],
        "terminated": inst.terminated,
        "root": scope_json(inst, inst.root),
        "events": [e.to_json() for e in inst.events],
    }


def enabled_json(inst: Instance) -> dict:
    may, blockers = (False, []) if inst.terminated else inst.may_terminate("root")
    return {
        "enabled": [
            {"scope": sid, "activity": lbl} for sid, lbl in sorted(inst.enabled_activities())
        ],
        "may_terminate": may and not inst.terminated,
        "termination_blockers": [str(c) for c in blockers],
        "terminated": inst.terminated,
    }


class _Handler(BaseHTTPRequestHandler):
    store: SessionStore  # set by make_server

    def log_message(self, fmt, *args):  # quiet by default
        pass

    # -- plumbing --------------------------------------------------------------

    def _send(self, code: int, payload: dict) -> None:
        body = json.dumps(payload).encode("utf-8")
        self.send_response(code)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def _body(self) -> dict:
        length = int(self.headers.get("Content-Length") or 0)
        if length == 0:
            return {}
        raw = self.rfile.read(length)
        try:
            parsed = json.loads(raw)
        except json.JSONDecodeError:
            raise ValueError("request body is not valid JSON")
        if not isinstance(parsed, dict):
            raise ValueError("request body must be a JSON object")
        return parsed

    def _resolve_model(self, value: str) -> Document:
        if value in self.store.models:
            return self.store.models[value]
        doc, diags = dsl.parse_model(value)
        if doc is None or diags:
            raise ValueError(
                "not a stored model name and not parseable source: "
                + "; ".join(str(d) for d in diags)
            )
        return doc

    # -- routes -----------------------------------------------------------------

    def do_OPTIONS(self):
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.end_headers()

    def do_GET(self):
        parts = [p for p in self.path.split("?")[0].split("/") if p]
        try:
            if parts == ["models"]:
                return self._send(200, {"models": sorted(self.store.models)})
            if len(parts) == 2 and parts[0] == "models":
                name = parts[1]
                if name not in self.store.models:
                    return self._send(404, {"error": f"no model {name!r}"})
                return self._send(200, {"name": name, "text": self.store.texts[name]})
            if parts == ["instances"]:
                return self._send(200, {"instances": sorted(self.store.instances)})
            if len(parts) >= 2 and parts[0] == "instances":
                iid = parts[1]
                if iid not in self.store.instances:
                    return self._send(404, {"error": f"no instance {iid!r}"})
                if len(parts) == 2:
                    return self._send(200, instance_json(self.store, iid))
                if parts[2] == "enabled":
                    return self._send(200, enabled_json(self.store.instance(iid)))
                if parts[2] == "trace":
                    events = [e.to_json() for e in self.store.instance(iid).events]
                    return self._send(200, {"events": events})
            return self._send(404, {"error": f"no route {self.path!r}"})
        except Exception as exc:  # defensive: a handler crash must not kill the server
            return self._send(500, {"error": str(exc)})

    def do_POST(self):
        parts = [p for p in self.path.split("?")[0].split("/") if p]
        try:
            body = self._body()
            if parts == ["models"]:
                try:
                    name = self.store.add_model(body.get("text", ""))
                except dsl.ParseError as exc:
                    return self._send(
                        400, {"error": "parse", "diagnostics": [str(d) for d in exc.diagnostics]}
                    )
                return self._send(201, {"model": name})
            if parts == ["instances"]:
                model = body.get("model")
                if model not in self.store.models:
                    return self._send(404, {"error": f"no model {model!r}"})
                iid = self.store.create_instance(model)
                return self._send(201, instance_json(self.store, iid))
            if len(parts) == 3 and parts[0] == "instances" and parts[2] in ("commands", "terminate"):
                iid = parts[1]
                if iid not in self.store.instances:
                    return self._send(404, {"error": f"no instance {iid!r}"})
                command = {"kind": "terminate"} if parts[2] == "terminate" else body
                try:
                    ev = self.store.apply_command(iid, command)
                except CommandRejected as rej:
                    return self._send(
                        409,
                        {
                            "error": rej.reason,
                            "kind": rej.kind,
                            "blockers": [str(b) for b in rej.blockers],
                        },
                    )
                return self._send(
                    200, {"event": ev.to_json(), "state": instance_json(self.store, iid)}
                )
            if parts == ["analysis", "equiv"]:
                doc1 = self._resolve_model(body["model1"])
                doc2 = self._resolve_model(body["model2"])
                result = analysis.bounded_equivalent(
                    doc1,
                    doc2,
                    int(body.get("max_leaf", 4)),
                    int(body.get("max_activations", 2)),
                )
                return self._send(
                    200,
                    {
                        "equivalent_up_to_k": result.equivalent_up_to_k,
                        "counterexample": list(result.counterexample)
                        if result.counterexample is not None
                        else None,
                    },
                )
            if parts == ["analysis", "extract"]:
                doc = self._resolve_model(body["model"])
                members = body.get("members", [])
                report = analysis.check_extraction(doc, members)
                payload = {
                    "feasible": report.feasible,
                    "aggregated": [
                        {"template": g.template, "outside": g.outside, "members_first": g.members_first}
                        for g in report.aggregated_constraints
                    ],
                    "blocking": [str(c) for c in report.blocking_constraints],
                    "internal": [str(c) for c in report.internal_constraints],
                }
                if report.feasible and body.get("name"):
                    result = analysis.extract_subprocess(doc, members, body["name"])
                    payload["text"] = dsl.serialize_model(result)
                return self._send(200, payload)
            return self._send(404, {"error": f"no route {self.path!r}"})
        except (KeyError, ValueError) as exc:
            return self._send(400, {"error": str(exc)})
        except analysis.BoundExceeded as exc:
            return self._send(422, {"error": str(exc)})
        except Exception as exc:
            return self._send(500, {"error": str(exc)})


def make_server(store: SessionStore, port: int = 0) -> ThreadingHTTPServer:
    handler = type("BoundHandler", (_Handler,), {"store": store})
    return ThreadingHTTPServer(("127.0.0.1", port), handler)


def serve(port: Optional[int] = None, snapshot: Optional[str] = None) -> int:
    if port is None:
        port = int(os.environ.get("PORT", "8173"))
    store = SessionStore(snapshot_path=snapshot)
    httpd = make_server(store, port)
    host, actual_port = httpd.server_address[:2]
    print(f"listening on http://{host}:{actual_port}"
          + (f" (snapshot: {snapshot})" if snapshot else ""))
    try:
        httpd.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        httpd.server_close()
    return 0

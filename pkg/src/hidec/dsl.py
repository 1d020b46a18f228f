"""Textual formats: .dpm model documents and .dpt trace files.

Model grammar (whitespace-insensitive, UTF-8, `#` starts a line comment):

    document   := processdef+
    processdef := ("root")? "process" NAME "{" item* "}"
    item       := "activity" NAME
                | "complex" NAME "=" "process" NAME
                | "constraint" TEMPLATE "(" args ")"

Cardinality templates take the count first: ``constraint existence(1, A)``.
Names may be double-quoted to carry spaces: ``activity "Work on revision"``.

Trace files are whitespace-separated tokens:

    LABEL        merged form: start and complete in one step
    +LABEL[@id]  start only (optional id names the instance)
    -LABEL       complete the unique running instance of LABEL
    -@id | -LABEL@id   complete by id
    .            terminate the instance
    !TOKEN       assert that the engine rejects this step

Serialization is canonical: root model first, remaining models sorted by
name, constraints sorted, two-space indent. Canonical text is the committed
fixture format.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from .engine import TraceStep
from .model import (
    CARDINALITY_TEMPLATES,
    TEMPLATES,
    UNARY_TEMPLATES,
    ActivityDecl,
    ConstraintInstance,
    Document,
    ProcessModel,
    canonical_constraints,
    validate_document,
)

_BARE_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_KEYWORDS = frozenset({"root", "process", "activity", "complex", "constraint"})


@dataclass(frozen=True)
class ParseDiagnostic:
    severity: str  # error | warning
    line: int
    column: int
    message: str

    def __str__(self) -> str:
        return f"{self.severity}:{self.line}:{self.column}: {self.message}"


class ParseError(ValueError):
    def __init__(self, diagnostics: list[ParseDiagnostic]):
        super().__init__("; ".join(str(d) for d in diagnostics) or "parse error")
        self.diagnostics = diagnostics


@dataclass(frozen=True)
class _Token:
    kind: str  # word | string | punct | int | eof
    text: str
    line: int
    column: int


def _tokenize(text: str) -> tuple[list[_Token], list[ParseDiagnostic]]:
    tokens: list[_Token] = []
    diags: list[ParseDiagnostic] = []
    line, col, i = 1, 1, 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        start_line, start_col = line, col
        if ch == '"':
            j = i + 1
            buf = []
            while j < n and text[j] != '"':
                if text[j] == "\n":
                    break
                buf.append(text[j])
                j += 1
            if j >= n or text[j] != '"':
                diags.append(ParseDiagnostic("error", start_line, start_col, "unterminated string"))
                return tokens, diags
            tokens.append(_Token("string", "".join(buf), start_line, start_col))
            col += (j - i) + 1
            i = j + 1
            continue
        if ch in "{}(),=.":
            tokens.append(_Token("punct", ch, start_line, start_col))
            i += 1
            col += 1
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(_Token("int", text[i:j], start_line, start_col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(_Token("word", text[i:j], start_line, start_col))
            col += j - i
            i = j
            continue
        diags.append(ParseDiagnostic("error", start_line, start_col, f"unexpected character {ch!r}"))
        return tokens, diags
    tokens.append(_Token("eof", "", line, col))
    return tokens, diags


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0
        self.diags: list[ParseDiagnostic] = []
        # positions of declarations, for mapping validator output back to source
        self.positions: dict[tuple[str, str], tuple[int, int]] = {}

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def take(self) -> _Token:
        t = self.tokens[self.pos]
        if t.kind != "eof":
            self.pos += 1
        return t

    def error(self, tok: _Token, message: str) -> None:
        self.diags.append(ParseDiagnostic("error", tok.line, tok.column, message))

    def expect_word(self, word: str) -> bool:
        t = self.peek()
        if t.kind == "word" and t.text == word:
            self.take()
            return True
        self.error(t, f"expected {word!r}, got {t.text!r}" if t.text else f"expected {word!r}")
        return False

    def expect_punct(self, ch: str) -> bool:
        t = self.peek()
        if t.kind == "punct" and t.text == ch:
            self.take()
            return True
        self.error(t, f"expected {ch!r}, got {t.text!r}" if t.text else f"expected {ch!r}")
        return False

    def name(self, what: str) -> Optional[str]:
        t = self.peek()
        if t.kind in ("word", "string"):
            if t.kind == "word" and t.text in _KEYWORDS:
                self.error(t, f"{t.text!r} is a keyword; quote it to use as a {what}")
                return None
            self.take()
            return t.text
        self.error(t, f"expected {what}")
        return None

    def document(self) -> Optional[Document]:
        models: list[ProcessModel] = []
        while self.peek().kind != "eof":
            m = self.processdef()
            if m is None:
                return None
            models.append(m)
        if not models:
            self.error(self.peek(), "empty document: at least one process required")
            return None
        return Document(tuple(models))

    def processdef(self) -> Optional[ProcessModel]:
        t = self.peek()
        root = False
        if t.kind == "word" and t.text == "root":
            root = True
            self.take()
        if not self.expect_word("process"):
            return None
        head = self.peek()
        name = self.name("process name")
        if name is None:
            return None
        self.positions[("process", name)] = (head.line, head.column)
        if not self.expect_punct("{"):
            return None
        activities: list[ActivityDecl] = []
        constraints: list[ConstraintInstance] = []
        while True:
            t = self.peek()
            if t.kind == "punct" and t.text == "}":
                self.take()
                break
            if t.kind == "eof":
                self.error(t, f"unterminated process {name!r}: missing '}}'")
                return None
            if t.kind == "word" and t.text == "activity":
                self.take()
                pos = self.peek()
                a = self.name("activity name")
                if a is None:
                    return None
                activities.append(ActivityDecl(a))
                self.positions[("activity", a)] = (pos.line, pos.column)
            elif t.kind == "word" and t.text == "complex":
                self.take()
                pos = self.peek()
                a = self.name("activity name")
                if a is None:
                    return None
                if not (self.expect_punct("=") and self.expect_word("process")):
                    return None
                ref = self.name("process name")
                if ref is None:
                    return None
                activities.append(ActivityDecl(a, sub_model=ref))
                self.positions[("activity", a)] = (pos.line, pos.column)
            elif t.kind == "word" and t.text == "constraint":
                self.take()
                c = self.constraint()
                if c is None:
                    return None
                constraints.append(c)
            else:
                self.error(t, f"expected 'activity', 'complex', 'constraint' or '}}', got {t.text!r}")
                return None
        return ProcessModel(name, tuple(activities), tuple(constraints), root_marker=root)

    def constraint(self) -> Optional[ConstraintInstance]:
        head = self.peek()
        if head.kind != "word":
            self.error(head, "expected a constraint template name")
            return None
        template = head.text
        self.take()
        if template not in TEMPLATES:
            self.error(head, f"unknown constraint template {template!r}")
            return None
        if not self.expect_punct("("):
            return None
        cardinality: Optional[int] = None
        if template in CARDINALITY_TEMPLATES:
            t = self.peek()
            if t.kind != "int":
                self.error(t, f"{template} takes its cardinality first: {template}(1, A)")
                return None
            self.take()
            cardinality = int(t.text)
            if not self.expect_punct(","):
                return None
        operands: list[str] = []
        first = self.name("activity name")
        if first is None:
            return None
        operands.append(first)
        if template not in UNARY_TEMPLATES:
            if not self.expect_punct(","):
                return None
            second = self.name("activity name")
            if second is None:
                return None
            operands.append(second)
        if not self.expect_punct(")"):
            return None
        c = ConstraintInstance(template, tuple(operands), cardinality)
        self.positions[("constraint", str(c))] = (head.line, head.column)
        return c


def parse_model(text: str) -> tuple[Optional[Document], list[ParseDiagnostic]]:
    """Parse and validate source text.

    Returns (None, diagnostics) on syntax failure. On syntactic success the
    document is returned together with any well-formedness violations mapped
    back to source positions; it is well-formed iff the diagnostics are empty.
    """
    tokens, diags = _tokenize(text)
    if diags:
        return None, diags
    p = _Parser(tokens)
    doc = p.document()
    if doc is None or p.diags:
        return None, p.diags or [ParseDiagnostic("error", 1, 1, "parse failed")]
    report = validate_document(doc)
    out = []
    for v in report.violations:
        line, col = 1, 1
        for key in (
            ("constraint", v.subject),
            ("activity", v.subject),
            ("process", v.subject),
            ("process", v.model or ""),
        ):
            if key in p.positions:
                line, col = p.positions[key]
                break
        out.append(ParseDiagnostic("error", line, col, str(v)))
    return doc, out


def load_model(path: str) -> Document:
    """Parse a .dpm file, raising on any syntactic or semantic error."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    doc, diags = parse_model(text)
    if doc is None or any(d.severity == "error" for d in diags):
        raise ParseError(diags)
    return doc


def _emit_name(name: str) -> str:
    if _BARE_NAME.match(name) and name not in _KEYWORDS:
        return name
    return '"' + name + '"'


def serialize_model(doc: Document) -> str:
    """Canonical text: stable across constraint order and formatting noise."""
    ordered = [doc.root] + sorted((m for m in doc.models if not m.root_marker), key=lambda m: m.name)
    chunks = []
    for m in ordered:
        lines = []
        marker = "root " if m.root_marker else ""
        lines.append(f"{marker}process {_emit_name(m.name)} {{")
        for a in m.activities:
            if a.is_complex:
                lines.append(f"  complex {_emit_name(a.name)} = process {_emit_name(a.sub_model)}")
            else:
                lines.append(f"  activity {_emit_name(a.name)}")
        for c in canonical_constraints(m):
            args = ", ".join(_emit_name(o) for o in c.operands)
            if c.cardinality is not None:
                args = f"{c.cardinality}, {args}"
            lines.append(f"  constraint {c.template}({args})")
        lines.append("}")
        chunks.append("\n".join(lines))
    return "\n\n".join(chunks) + "\n"


def _scan_trace_tokens(line: str, line_no: int) -> list[tuple[str, int]]:
    """Whitespace-separated tokens; quoted sections may embed spaces."""
    tokens: list[tuple[str, int]] = []
    i, n = 0, len(line)
    while i < n:
        if line[i] in " \t":
            i += 1
            continue
        if line[i] == "#":
            break
        col = i + 1
        buf = []
        while i < n and line[i] not in " \t":
            if line[i] == '"':
                j = line.find('"', i + 1)
                if j < 0:
                    raise ParseError(
                        [ParseDiagnostic("error", line_no, col, "unterminated quoted label")]
                    )
                buf.append(line[i : j + 1])
                i = j + 1
            else:
                buf.append(line[i])
                i += 1
        tokens.append(("".join(buf), col))
    return tokens


def parse_trace(text: str) -> list[TraceStep]:
    """Parse a .dpt trace into steps; see module docstring for the format."""
    steps: list[TraceStep] = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        for tok, col in _scan_trace_tokens(line, line_no):
            steps.append(_trace_step(tok, line_no, col))
    return steps


def _split_label_id(body: str, line: int, col: int) -> tuple[Optional[str], Optional[str]]:
    if body.startswith('"'):
        end = body.find('"', 1)
        if end < 0:
            raise ParseError([ParseDiagnostic("error", line, col, "unterminated quoted label")])
        label = body[1:end]
        rest = body[end + 1 :]
    else:
        label, _, rest = body.partition("@")
        if '"' in label:
            raise ParseError(
                [ParseDiagnostic("error", line, col, f"stray quote inside bare label {label!r}")]
            )
        return (label or None), (rest or None)
    if rest == "":
        return label, None
    if rest.startswith("@") and len(rest) > 1:
        return label, rest[1:]
    raise ParseError([ParseDiagnostic("error", line, col, f"malformed step near {body!r}")])


def _trace_step(tok: str, line: int, col: int) -> TraceStep:
    expect_rejection = False
    if tok.startswith("!"):
        expect_rejection = True
        tok = tok[1:]
        if not tok:
            raise ParseError(
                [ParseDiagnostic("error", line, col, "dangling '!' must be attached to a step")]
            )
    if tok == ".":
        return TraceStep("terminate", expect_rejection=expect_rejection)
    if tok.startswith("+"):
        label, inst = _split_label_id(tok[1:], line, col)
        if label is None:
            raise ParseError([ParseDiagnostic("error", line, col, "start step needs a label")])
        return TraceStep("start", label, inst, expect_rejection)
    if tok.startswith("-"):
        label, inst = _split_label_id(tok[1:], line, col)
        if label is None and inst is None:
            raise ParseError(
                [ParseDiagnostic("error", line, col, "complete step needs a label or @id")]
            )
        return TraceStep("complete", label, inst, expect_rejection)
    label, inst = _split_label_id(tok, line, col)
    if label is None or inst is not None:
        raise ParseError([ParseDiagnostic("error", line, col, f"malformed step {tok!r}")])
    return TraceStep("execute", label, expect_rejection=expect_rejection)


def load_trace(path: str) -> list[TraceStep]:
    with open(path, encoding="utf-8") as fh:
        return parse_trace(fh.read())

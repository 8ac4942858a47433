"""Batch claim-verification prompts and parsing of the model's answers.

Answers are expected as a Python-style list of tuples::

    [
        (1, True, "explanation"),
        (2, False, "explanation with \\"quotes\\" and \\\\ backslashes"),
    ]

Inside the explanation only ``\\"`` and ``\\\\`` are valid escapes.
Whitespace between tokens and a trailing comma before ``]`` are accepted.
Anything else raises :class:`ResponseSyntaxError` with the character offset.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import IO, Iterable, Sequence, Union

__all__ = [
    "TEMPLATE_VERSION",
    "LlmAnswer",
    "ExampleBlock",
    "PromptBundle",
    "PromptError",
    "InvalidChunkSize",
    "EmptyBatch",
    "ResponseSyntaxError",
    "AnswerCountMismatch",
    "DuplicateNumber",
    "VerdictNotBoolean",
    "load_template",
    "chunk_claims",
    "build_bundle",
    "render_prompt",
    "build_prompt",
    "render_answers",
    "parse_response",
    "write_answers",
    "read_answers",
]

TEMPLATE_VERSION = 1


class PromptError(ValueError):
    pass


class InvalidChunkSize(PromptError):
    pass


class EmptyBatch(PromptError):
    pass


class ResponseSyntaxError(PromptError):
    def __init__(self, offset: int, message: str):
        self.offset = offset
        super().__init__(f"offset {offset}: {message}")


class AnswerCountMismatch(PromptError):
    def __init__(self, expected: int, found: int):
        self.expected = expected
        self.found = found
        super().__init__(f"expected {expected} answers, found {found}")


class DuplicateNumber(PromptError):
    def __init__(self, number: int):
        self.number = number
        super().__init__(f"claim number {number} answered more than once")


class VerdictNotBoolean(PromptError):
    def __init__(self, number: int, token: str = ""):
        self.number = number
        self.token = token
        super().__init__(f"answer {number}: verdict {token!r} is not True or False")


@dataclass(frozen=True)
class LlmAnswer:
    number: int
    verdict: bool
    explanation: str

    def __post_init__(self):
        if self.number < 1:
            raise ValueError("claim numbers start at 1")


@dataclass(frozen=True)
class ExampleBlock:
    claims: tuple[str, ...]
    output: tuple[LlmAnswer, ...]


@dataclass(frozen=True)
class PromptBundle:
    task_text: str
    instructions: tuple[str, ...]
    output_format_text: str
    example_claims: tuple[tuple[int, str], ...]
    example_output: str
    claims: tuple[tuple[int, str], ...]
    version: int = TEMPLATE_VERSION


@lru_cache(maxsize=None)
def load_template(version: int = TEMPLATE_VERSION) -> dict:
    name = f"prompt_v{version}.json"
    try:
        text = resources.files("kgretrieve").joinpath("templates", name).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise PromptError(f"no prompt template version {version}") from None
    tpl = json.loads(text)
    if tpl.get("version") != version:
        raise PromptError(f"{name} declares version {tpl.get('version')!r}")
    return tpl


def default_examples(version: int = TEMPLATE_VERSION) -> ExampleBlock:
    tpl = load_template(version)
    return ExampleBlock(
        claims=tuple(tpl["example_claims"]),
        output=tuple(LlmAnswer(n, v, e) for n, v, e in tpl["example_output"]),
    )


def chunk_claims(claims: Sequence, size: int) -> list[list]:
    if size < 1:
        raise InvalidChunkSize(f"chunk size must be >= 1, got {size}")
    return [list(claims[i : i + size]) for i in range(0, len(claims), size)]


def _claim_text(c) -> str:
    text = c if isinstance(c, str) else c.claim
    if "\n" in text or "\r" in text:
        # one claim per prompt line; a line break would merge or split claims
        raise PromptError(f"claim text contains a line break: {text!r}")
    return text


def build_bundle(batch: Sequence, examples: ExampleBlock | None = None, version: int = TEMPLATE_VERSION) -> PromptBundle:
    if not batch:
        raise EmptyBatch("cannot build a prompt for an empty batch")
    tpl = load_template(version)
    ex = examples if examples is not None else default_examples(version)
    return PromptBundle(
        task_text=tpl["task"],
        instructions=tuple(tpl["instructions"]),
        output_format_text=tpl["output_format"],
        example_claims=tuple((i, _claim_text(c)) for i, c in enumerate(ex.claims, start=1)),
        example_output=render_answers(ex.output),
        claims=tuple((i, _claim_text(c)) for i, c in enumerate(batch, start=1)),
        version=version,
    )


def render_prompt(bundle: PromptBundle) -> str:
    tpl = load_template(bundle.version)
    parts = [
        tpl["task_header"],
        bundle.task_text,
        "",
        tpl["instructions_header"],
        *(f"- {line}" for line in bundle.instructions),
        "",
        tpl["output_format_header"],
        bundle.output_format_text,
        "",
        tpl["example_claims_header"],
        *(f"{n}. {text}" for n, text in bundle.example_claims),
        "",
        tpl["example_output_header"],
        bundle.example_output,
        "",
        tpl["claims_header"],
        *(f"{n}. {text}" for n, text in bundle.claims),
    ]
    return "\n".join(parts) + "\n"


def build_prompt(batch: Sequence, examples: ExampleBlock | None = None, version: int = TEMPLATE_VERSION) -> str:
    """Full prompt text for one batch of claims (ClaimRecords or strings)."""
    return render_prompt(build_bundle(batch, examples, version))


# ---------------------------------------------------------------------------
# answers
# ---------------------------------------------------------------------------


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def render_answers(answers: Iterable[LlmAnswer]) -> str:
    rows = [f"    ({a.number}, {a.verdict!r}, {_quote(a.explanation)})," for a in answers]
    if not rows:
        return "[]"
    return "[\n" + "\n".join(rows) + "\n]"


_WS = " \t\r\n"


class _Parser:
    def __init__(self, text: str):
        self.s = text
        self.i = 0

    def fail(self, msg: str):
        raise ResponseSyntaxError(self.i, msg)

    def ws(self):
        s, i = self.s, self.i
        while i < len(s) and s[i] in _WS:
            i += 1
        self.i = i

    def peek(self) -> str:
        return self.s[self.i] if self.i < len(self.s) else ""

    def expect(self, ch: str):
        if self.peek() != ch:
            found = repr(self.peek()) if self.peek() else "end of input"
            self.fail(f"expected {ch!r}, found {found}")
        self.i += 1

    def integer(self) -> int:
        start = self.i
        while self.peek().isdigit() and self.peek().isascii():
            self.i += 1
        if start == self.i:
            self.fail("expected a claim number")
        n = int(self.s[start : self.i])
        if n < 1:
            self.i = start
            self.fail("claim numbers start at 1")
        return n

    def string(self) -> str:
        self.expect('"')
        out = []
        s = self.s
        while True:
            if self.i >= len(s):
                self.fail("unterminated string")
            c = s[self.i]
            if c == '"':
                self.i += 1
                return "".join(out)
            if c == "\\":
                nxt = s[self.i + 1] if self.i + 1 < len(s) else ""
                if nxt not in ('"', "\\"):
                    self.fail(f"invalid escape \\{nxt}")
                out.append(nxt)
                self.i += 2
            else:
                out.append(c)
                self.i += 1

    def verdict(self, number: int) -> bool:
        start = self.i
        c = self.peek()
        if c == '"':
            token = self.string()
            raise VerdictNotBoolean(number, token)
        if not c or c in _WS or c in ",()[]":
            self.fail("expected True or False")
        while self.peek() and self.peek() not in _WS and self.peek() not in ",()[]":
            self.i += 1
        token = self.s[start : self.i]
        if token == "True":
            return True
        if token == "False":
            return False
        raise VerdictNotBoolean(number, token)

    def answer(self) -> LlmAnswer:
        self.expect("(")
        self.ws()
        n = self.integer()
        self.ws()
        self.expect(",")
        self.ws()
        v = self.verdict(n)
        self.ws()
        self.expect(",")
        self.ws()
        e = self.string()
        self.ws()
        self.expect(")")
        return LlmAnswer(n, v, e)

    def answers(self) -> list[LlmAnswer]:
        self.ws()
        self.expect("[")
        self.ws()
        out = []
        while self.peek() != "]":
            out.append(self.answer())
            self.ws()
            if self.peek() == ",":
                self.i += 1
                self.ws()
            elif self.peek() != "]":
                self.fail("expected ',' or ']'")
        self.i += 1
        self.ws()
        if self.i != len(self.s):
            self.fail("unexpected text after the list")
        return out


def parse_response(text: str, expected_count: int) -> list[LlmAnswer]:
    """Parse a tuple-list reply; enforces unique numbers and the answer count."""
    answers = _Parser(text).answers()
    seen = set()
    for a in answers:
        if a.number in seen:
            raise DuplicateNumber(a.number)
        seen.add(a.number)
    if len(answers) != expected_count:
        raise AnswerCountMismatch(expected_count, len(answers))
    return answers


def write_answers(answers: Iterable[LlmAnswer], sink: IO[str], ids: Sequence[str] | None = None) -> int:
    """JSON Lines export: ``number``, ``verdict``, ``explanation`` (+ ``id`` when known)."""
    n = 0
    for a in answers:
        rec: dict = {"number": a.number, "verdict": a.verdict, "explanation": a.explanation}
        if ids is not None:
            if not 1 <= a.number <= len(ids):
                raise PromptError(f"answer number {a.number} has no claim id")
            rec = {"id": ids[a.number - 1], **rec}
        sink.write(json.dumps(rec, ensure_ascii=False) + "\n")
        n += 1
    return n


def read_answers(source: Union[IO[str], Iterable[str]]) -> list[dict]:
    return [json.loads(line) for line in source if line.strip()]

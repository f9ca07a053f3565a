"""OpenQASM 3.0 subset reader/writer.

Accepted input::

    OPENQASM 3.0;                 // optional header, version 3 only
    include "stdgates.inc";       // ignored
    qubit[4] q;                   // exactly one register
    h q[0];
    rz(-pi/4) q[1];
    cx q[0], q[1];

Angles are arithmetic over numeric literals and ``pi`` with ``+ - * /``,
unary signs and parentheses.  Measurement, classical registers, gate
definitions and control flow raise ``ParseError(kind=UNSUPPORTED_FEATURE)``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from enum import Enum

from .ir import Circuit, Gate, GateKind

MAX_EXPR_NESTING = 64


class ErrorKind(str, Enum):
    SYNTAX = "Syntax"
    UNKNOWN_GATE = "UnknownGate"
    ARITY_MISMATCH = "ArityMismatch"
    UNDECLARED_QUBIT = "UndeclaredQubit"
    UNSUPPORTED_FEATURE = "UnsupportedFeature"


class ParseError(ValueError):
    def __init__(self, kind: ErrorKind, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {kind.value}: {message}")
        self.kind = kind
        self.message = message
        self.line = line
        self.column = column


_UNSUPPORTED = frozenset(
    {
        "measure", "reset", "barrier", "bit", "creg", "qreg", "if", "else", "for", "while",
        "def", "gate", "defcal", "cal", "box", "let", "input", "output", "const", "int",
        "uint", "float", "angle", "bool", "duration", "stretch", "delay", "return",
        "break", "continue", "extern", "opaque", "ctrl", "inv", "pow", "negctrl",
        "array", "complex", "end", "switch", "case", "defcalgrammar", "pragma",
    }
)

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<lcomment>//[^\n]*)
  | (?P<bcomment>/\*.*?\*/)
  | (?P<number>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*|π)
  | (?P<string>"[^"\n]*")
  | (?P<punct>[\[\]();,+\-*/])
    """,
    re.VERBOSE | re.DOTALL | re.ASCII,
)


@dataclass(frozen=True)
class _Tok:
    type: str  # number | ident | string | punct | eof
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos, line, line_start = 0, 1, 0
    n = len(text)
    while pos < n:
        m = _TOKEN.match(text, pos)
        if m is None:
            if text.startswith("/*", pos):
                msg = "unterminated block comment"
            else:
                msg = f"unexpected character {text[pos]!r}"
            raise ParseError(ErrorKind.SYNTAX, msg, line, pos - line_start + 1)
        kind = m.lastgroup
        tok_text = m.group()
        if kind not in ("ws", "lcomment", "bcomment"):
            toks.append(_Tok(kind, tok_text, line, pos - line_start + 1))
        newlines = tok_text.count("\n")
        if newlines:
            line += newlines
            line_start = pos + tok_text.rindex("\n") + 1
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, toks: list[_Tok]):
        self.toks = toks
        self.i = 0
        self.reg_name: str | None = None
        self.num_qubits = 0
        self.gates: list[Gate] = []

    # -- helpers
    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def advance(self) -> _Tok:
        t = self.toks[self.i]
        if t.type != "eof":
            self.i += 1
        return t

    def error(self, kind: ErrorKind, msg: str, tok: _Tok | None = None) -> ParseError:
        tok = tok or self.tok
        return ParseError(kind, msg, tok.line, tok.col)

    def expect(self, text: str) -> _Tok:
        if self.tok.text != text or self.tok.type in ("string", "eof"):
            found = self.tok.text or "end of input"
            raise self.error(ErrorKind.SYNTAX, f"expected {text!r}, found {found!r}")
        return self.advance()

    def expect_int(self) -> int:
        t = self.tok
        if t.type != "number" or not t.text.isdigit():
            raise self.error(ErrorKind.SYNTAX, "expected integer literal")
        if len(t.text) > 9:
            raise self.error(ErrorKind.SYNTAX, "integer literal too large")
        self.advance()
        return int(t.text)

    # -- grammar
    def program(self) -> Circuit:
        if self.tok.type == "ident" and self.tok.text == "OPENQASM":
            self.header()
        while self.tok.type != "eof":
            self.statement()
        if self.reg_name is None:
            raise self.error(ErrorKind.SYNTAX, "missing qubit register declaration")
        return Circuit(self.num_qubits, tuple(self.gates))

    def header(self):
        self.advance()
        t = self.tok
        if t.type != "number":
            raise self.error(ErrorKind.SYNTAX, "expected version number")
        if t.text not in ("3", "3.0"):
            raise self.error(ErrorKind.UNSUPPORTED_FEATURE, f"OpenQASM version {t.text}")
        self.advance()
        self.expect(";")

    def statement(self):
        t = self.tok
        if t.type != "ident":
            raise self.error(ErrorKind.SYNTAX, f"unexpected {t.text!r}")
        word = t.text
        if word == "OPENQASM":
            raise self.error(ErrorKind.SYNTAX, "header must be the first statement")
        if word == "include":
            self.advance()
            if self.tok.type != "string":
                raise self.error(ErrorKind.SYNTAX, "expected file name string")
            self.advance()
            self.expect(";")
        elif word == "qubit":
            self.declaration()
        elif word in _UNSUPPORTED:
            raise self.error(ErrorKind.UNSUPPORTED_FEATURE, f"{word!r} is not supported")
        else:
            self.gate_statement()

    def declaration(self):
        start = self.advance()
        if self.reg_name is not None:
            raise self.error(ErrorKind.UNSUPPORTED_FEATURE, "only one qubit register is supported", start)
        size = 1
        if self.tok.text == "[" and self.tok.type == "punct":
            self.advance()
            size_tok = self.tok
            size = self.expect_int()
            if size < 1:
                raise self.error(ErrorKind.SYNTAX, "register size must be positive", size_tok)
            self.expect("]")
        if self.tok.type != "ident":
            raise self.error(ErrorKind.SYNTAX, "expected register name")
        self.reg_name = self.advance().text
        self.num_qubits = size
        self.expect(";")

    def gate_statement(self):
        name_tok = self.advance()
        try:
            kind = GateKind(name_tok.text)
        except ValueError:
            raise self.error(ErrorKind.UNKNOWN_GATE, f"unknown gate {name_tok.text!r}", name_tok) from None
        params: list[float] = []
        if self.tok.type == "punct" and self.tok.text == "(":
            self.advance()
            params.append(self.expr(0))
            while self.tok.text == "," and self.tok.type == "punct":
                self.advance()
                params.append(self.expr(0))
            self.expect(")")
        if len(params) != kind.num_params:
            raise self.error(
                ErrorKind.ARITY_MISMATCH,
                f"{name_tok.text} takes {kind.num_params} parameter(s), got {len(params)}",
                name_tok,
            )
        qubits = [self.operand()]
        while self.tok.type == "punct" and self.tok.text == ",":
            self.advance()
            qubits.append(self.operand())
        self.expect(";")
        if len(qubits) != kind.num_qubits:
            raise self.error(
                ErrorKind.ARITY_MISMATCH,
                f"{name_tok.text} acts on {kind.num_qubits} qubit(s), got {len(qubits)}",
                name_tok,
            )
        if len(set(qubits)) != len(qubits):
            raise self.error(ErrorKind.ARITY_MISMATCH, "repeated qubit operand", name_tok)
        self.gates.append(Gate(kind, tuple(qubits), tuple(params)))

    def operand(self) -> int:
        t = self.tok
        if t.type != "ident":
            raise self.error(ErrorKind.SYNTAX, "expected qubit operand")
        if self.reg_name is None or t.text != self.reg_name:
            raise self.error(ErrorKind.UNDECLARED_QUBIT, f"undeclared register {t.text!r}")
        self.advance()
        if not (self.tok.type == "punct" and self.tok.text == "["):
            raise self.error(ErrorKind.UNSUPPORTED_FEATURE, "register broadcast is not supported")
        self.advance()
        idx_tok = self.tok
        idx = self.expect_int()
        if idx >= self.num_qubits:
            raise self.error(
                ErrorKind.UNDECLARED_QUBIT, f"index {idx} out of range for {self.reg_name}[{self.num_qubits}]", idx_tok
            )
        self.expect("]")
        return idx

    # -- angle expressions
    def expr(self, depth: int) -> float:
        value = self.term(depth)
        while self.tok.type == "punct" and self.tok.text in "+-":
            op = self.advance().text
            rhs = self.term(depth)
            value = value + rhs if op == "+" else value - rhs
        return self._finite(value)

    def term(self, depth: int) -> float:
        value = self.unary(depth)
        while self.tok.type == "punct" and self.tok.text in "*/":
            op_tok = self.advance()
            rhs = self.unary(depth)
            if op_tok.text == "*":
                value *= rhs
            else:
                if rhs == 0:
                    raise self.error(ErrorKind.SYNTAX, "division by zero", op_tok)
                value /= rhs
        return self._finite(value)

    def unary(self, depth: int) -> float:
        if depth > MAX_EXPR_NESTING:
            raise self.error(ErrorKind.SYNTAX, "expression nested too deeply")
        t = self.tok
        if t.type == "punct" and t.text in "+-":
            self.advance()
            v = self.unary(depth + 1)
            return -v if t.text == "-" else v
        if t.type == "number":
            self.advance()
            return self._finite(float(t.text), t)
        if t.type == "ident" and t.text in ("pi", "π"):
            self.advance()
            return math.pi
        if t.type == "punct" and t.text == "(":
            self.advance()
            v = self.expr(depth + 1)
            self.expect(")")
            return v
        raise self.error(ErrorKind.SYNTAX, f"expected angle expression, found {t.text or 'end of input'!r}")

    def _finite(self, v: float, tok: _Tok | None = None) -> float:
        if not math.isfinite(v):
            raise self.error(ErrorKind.SYNTAX, "angle is not finite", tok)
        return v


def parse_qasm(text: str | bytes, name: str = "") -> Circuit:
    """Parse an OpenQASM 3.0 subset program; raises :class:`ParseError`."""
    if isinstance(text, (bytes, bytearray)):
        try:
            text = bytes(text).decode("utf-8")
        except UnicodeDecodeError as exc:
            prefix = bytes(text[: exc.start]).decode("utf-8")
            line = prefix.count("\n") + 1
            col = len(prefix) - (prefix.rfind("\n") + 1) + 1
            raise ParseError(ErrorKind.SYNTAX, "invalid UTF-8", line, col) from None
    circuit = _Parser(_tokenize(text)).program()
    return Circuit(circuit.num_qubits, circuit.gates, name)


def emit_qasm(c: Circuit, register: str = "q") -> str:
    lines = ["OPENQASM 3.0;", 'include "stdgates.inc";', f"qubit[{c.num_qubits}] {register};"]
    for g in c.gates:
        args = f"({', '.join(repr(p) for p in g.params)})" if g.params else ""
        ops = ", ".join(f"{register}[{q}]" for q in g.qubits)
        lines.append(f"{g.kind.value}{args} {ops};")
    return "\n".join(lines) + "\n"

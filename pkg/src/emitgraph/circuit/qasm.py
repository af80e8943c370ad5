"""
OpenQASM 2.0 export and import for emitter/photon circuits.

Registers are ``qreg e[..]`` (emitters), ``qreg p[..]`` (photons) and
``creg c[..]``.  Emission is written with a custom ``emit`` gate so that it
survives the round trip.  The measurement composite is lowered to::

    h e[k];
    measure e[k] -> c[m];
    if(c[m]==1) x p[j];
    reset e[k];

Conditioning on a single classical bit is an extension of plain OpenQASM 2.0,
which only conditions on whole registers.
"""

import re

from ..exceptions import QasmParseError, UnsupportedGateError
from .dag import COMPOSITE, CircuitDAG, GateSpec

_TO_QASM = {
    "H": "h",
    "X": "x",
    "Y": "y",
    "Z": "z",
    "S": "s",
    "Sdag": "sdg",
    "Identity": "id",
    "CNOT": "cx",
    "CZ": "cz",
    "EmissionCNOT": "emit",
}
_FROM_QASM = {v: k for k, v in _TO_QASM.items()}
HEADER = 'OPENQASM 2.0;\ninclude "qelib1.inc";\ngate emit a,b { cx a,b; }\n'


def _ref(wire):
    return f"{wire[0]}[{wire[1:]}]"


def to_qasm(circuit):
    lines = [HEADER.rstrip("\n")]
    for reg, size in (("e", circuit.n_emitters), ("p", circuit.n_photons)):
        if size:
            lines.append(f"qreg {reg}[{size}];")
    if circuit.n_classical:
        lines.append(f"creg c[{circuit.n_classical}];")
    for g in circuit.gates():
        if g.kind == COMPOSITE:
            e, t, c = (_ref(w) for w in g.wires)
            lines.append(f"h {e};")
            lines.append(f"measure {e} -> {c};")
            lines.append(f"if({c}==1) {g.correction.lower()} {t};")
            lines.append(f"reset {e};")
        else:
            lines.append(f"{_TO_QASM[g.kind]} {','.join(_ref(w) for w in g.wires)};")
    return "\n".join(lines) + "\n"


_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<newline>\n)
  | (?P<comment>//[^\n]*)
  | (?P<string>"[^"\n]*")
  | (?P<number>\d+(\.\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<arrow>->)
  | (?P<eq>==)
  | (?P<sym>[;,\[\]\(\){}])
    """,
    re.VERBOSE,
)


def _tokenize(text):
    tokens = []
    line, col, pos = 1, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise QasmParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        value = m.group()
        if kind == "newline":
            line, col = line + 1, 1
        else:
            if kind not in ("ws", "comment"):
                tokens.append((kind, value, line, col))
            col += len(value)
        pos = m.end()
    tokens.append(("eof", "", line, col))
    return tokens


class _Parser:
    def __init__(self, text):
        self.toks = _tokenize(text)
        self.i = 0
        self.sizes = {"e": 0, "p": 0, "c": 0}
        self.ops = []  # (name, wires, line, col, condition)

    def peek(self):
        return self.toks[self.i]

    def next(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, value=None, kind=None):
        tok = self.next()
        if (value is not None and tok[1] != value) or (kind is not None and tok[0] != kind):
            want = value if value is not None else kind
            got = tok[1] or "end of input"
            raise QasmParseError(f"expected {want!r}, got {got!r}", tok[2], tok[3])
        return tok

    def operand(self):
        reg = self.expect(kind="ident")
        self.expect("[")
        idx = self.expect(kind="number")
        self.expect("]")
        name = reg[1]
        if name not in self.sizes:
            raise QasmParseError(f"unknown register {name!r}", reg[2], reg[3])
        k = int(idx[1])
        if k >= self.sizes[name]:
            raise QasmParseError(f"index {k} outside register {name}[{self.sizes[name]}]", idx[2], idx[3])
        return f"{name}{k}"

    def parse(self):
        self.expect("OPENQASM")
        version = self.expect(kind="number")
        if version[1] != "2.0":
            raise QasmParseError(f"only OpenQASM 2.0 is supported, got {version[1]}", version[2], version[3])
        self.expect(";")
        while self.peek()[0] != "eof":
            self.statement()
        return self.ops

    def statement(self):
        tok = self.next()
        kind, word, line, col = tok
        if kind != "ident":
            raise QasmParseError(f"unexpected {word!r}", line, col)
        if word == "include":
            self.expect(kind="string")
            self.expect(";")
        elif word == "gate":
            self.gate_definition(tok)
        elif word in ("qreg", "creg"):
            name = self.expect(kind="ident")
            self.expect("[")
            size = self.expect(kind="number")
            self.expect("]")
            self.expect(";")
            allowed = ("e", "p") if word == "qreg" else ("c",)
            if name[1] not in allowed:
                raise QasmParseError(f"{word} must be named {' or '.join(allowed)}", name[2], name[3])
            self.sizes[name[1]] = int(size[1])
        elif word == "measure":
            q = self.operand()
            self.expect("->")
            c = self.operand()
            self.expect(";")
            self.ops.append(("measure", (q, c), line, col, None))
        elif word == "reset":
            q = self.operand()
            self.expect(";")
            self.ops.append(("reset", (q,), line, col, None))
        elif word == "barrier":
            while self.next()[1] != ";":
                pass
        elif word == "if":
            self.expect("(")
            c = self.operand()
            self.expect("==")
            val = self.expect(kind="number")
            self.expect(")")
            if val[1] != "1":
                raise QasmParseError("only '==1' conditions are supported", val[2], val[3])
            name = self.expect(kind="ident")
            q = self.operand()
            self.expect(";")
            self.ops.append((name[1], (q,), name[2], name[3], c))
        else:
            wires = [self.operand()]
            while self.peek()[1] == ",":
                self.next()
                wires.append(self.operand())
            self.expect(";")
            self.ops.append((word, tuple(wires), line, col, None))

    def gate_definition(self, tok):
        name = self.expect(kind="ident")
        body = []
        while self.peek()[1] != "{":
            if self.peek()[0] == "eof":
                raise QasmParseError("unterminated gate definition", tok[2], tok[3])
            self.next()
        self.next()
        while self.peek()[1] != "}":
            if self.peek()[0] == "eof":
                raise QasmParseError("unterminated gate body", tok[2], tok[3])
            body.append(self.next()[1])
        self.next()
        if name[1] != "emit" or body != ["cx", "a", ",", "b", ";"]:
            raise UnsupportedGateError(f"custom gate {name[1]!r} is not supported (line {name[2]})")


def from_qasm(text):
    """Parse the QASM subset produced by :func:`to_qasm` into a :class:`CircuitDAG`."""
    parser = _Parser(text)
    ops = parser.parse()
    sizes = parser.sizes
    circuit = CircuitDAG(sizes["e"], sizes["p"], sizes["c"])
    i = 0
    while i < len(ops):
        name, wires, line, col, cond = ops[i]
        if name == "h" and wires[0][0] == "e" and i + 1 < len(ops) and ops[i + 1][0] == "measure":
            e = wires[0]
            m_name, (mq, mc), mline, mcol, _ = ops[i + 1]
            if mq != e:
                raise QasmParseError("measurement must follow the Hadamard on the same emitter", mline, mcol)
            j = i + 2
            if j >= len(ops) or ops[j][4] is None:
                raise QasmParseError("measurement must be followed by a conditioned correction", mline, mcol)
            cname, (target,), cline, ccol, c = ops[j]
            if c != mc or cname not in ("x", "y", "z"):
                raise QasmParseError("feed-forward must be x, y or z conditioned on the measured bit", cline, ccol)
            correction = cname.upper()
            j += 1
            if j >= len(ops) or ops[j][0] != "reset" or ops[j][1] != (e,):
                raise QasmParseError("measured emitter must be reset", mline, mcol)
            circuit.add_gate(GateSpec(COMPOSITE, (e, target, mc), correction))
            i = j + 1
            continue
        if name in ("measure", "reset") or cond is not None:
            raise QasmParseError(f"'{name}' only appears inside the measure/feed-forward/reset pattern", line, col)
        if name not in _FROM_QASM:
            raise UnsupportedGateError(f"unsupported gate {name!r} (line {line}, column {col})")
        try:
            circuit.add_gate(GateSpec(_FROM_QASM[name], wires))
        except (ValueError, IndexError) as exc:
            raise QasmParseError(str(exc), line, col) from None
        i += 1
    return circuit

"""A textual wiring-diagram language compiled to lenses and systems.

A program declares finite sets, inner boxes with typed ports, an outer
boundary, connections, per-port default values, optional mode blocks
keyed by one designated box's output, and optional machine tables.  A
box with out-ports typed B1..Bm and in-ports typed A1..An presents the
monomial interface (B1x..xBm)y^(A1x..xAn); the whole diagram compiles
to a lens from the tensor of the box interfaces (in declaration order)
to the outer interface.  The forward direction projects outer outputs
from inner outputs along the connections; the backward direction routes
every inner input from its driver in the active mode, falling back to
declared defaults.  Machine tables compile to MooreMachine values bound
to their boxes, and a fully tabulated diagram compiles to a runnable
closed or open system.

Grammar (comments run from "#" to end of line, identifiers are ASCII
word runs):

    file     := stmt*
    stmt     := "set" ID "=" "{" ID ("," ID)* "}"
              | "box" ID "{" portdecl* "}"
              | "outer" ID "{" portdecl* "}"
              | "connect" ID "." ID "->" ID "." ID
              | "default" ID "." ID "=" ID
              | "modes" "from" ID "{" ("mode" ID "{" connect* "}")+ "}"
              | "machine" ID "{" "states" "=" "{" ID ("," ID)* "}" ";"
                                "init" "=" ID ";"
                                ("readout" ID "=" valuation)*
                                ("update" ID valuation "=" ID)* "}"
    portdecl := ("in" | "out") ID ":" ID ";"
    valuation := "(" (ID "=" ID ("," ID "=" ID)*)? ")"
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from typing import Optional, Sequence

from polydyn.core import (
    FinPoly,
    FinSet,
    Lens,
    SetFn,
    UNIT_SET,
    Y,
    lens_compose,
    lens_id,
    monomial,
    pair_label,
    split_pair,
)
from polydyn.algebra import tensor_many
from polydyn.comonoid import contractible
from polydyn.dynamics import MDDS, MooreMachine, input_state_pairs, moore_to_lens

__all__ = [
    "WiringSyntaxError",
    "SetDecl",
    "PortDecl",
    "BoxDecl",
    "OuterDecl",
    "Connect",
    "Default",
    "ModeBlock",
    "ModesDecl",
    "ReadoutRow",
    "UpdateRow",
    "MachineDecl",
    "WiringSpec",
    "parse",
    "print_spec",
    "validate",
    "compile_wiring",
    "compile_machines",
    "compile_system",
    "random_spec",
]


# ---------------------------------------------------------------------------
# Tokens.

_KEYWORDS = frozenset(
    "set box outer connect default modes from mode machine "
    "states init readout update in out".split()
)

_TOKEN_RE = re.compile(r"->|[{}().,:;=]|[A-Za-z0-9_]+")


class WiringSyntaxError(ValueError):
    """A parse failure, carrying the 1-based source position."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} (line {line}, column {col})")
        self.line = line
        self.col = col


@dataclass(frozen=True)
class _Token:
    kind: str
    value: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.split("#", 1)[0]
        pos = 0
        while pos < len(line):
            ch = line[pos]
            if ch.isspace():
                pos += 1
                continue
            m = _TOKEN_RE.match(line, pos)
            if m is None:
                raise WiringSyntaxError(
                    f"unexpected character {ch!r}", lineno, pos + 1
                )
            value = m.group()
            if value[0].isalnum() or value[0] == "_":
                kind = "kw" if value in _KEYWORDS else "id"
            else:
                kind = value
            tokens.append(_Token(kind, value, lineno, pos + 1))
            pos = m.end()
    last = tokens[-1] if tokens else None
    tokens.append(
        _Token("eof", "", last.line if last else 1, last.col + len(last.value) if last else 1)
    )
    return tokens


# ---------------------------------------------------------------------------
# Syntax tree.  Source spans are (line, column) pairs and never take part
# in equality, so parse(print_spec(ast)) == ast holds.


@dataclass(frozen=True)
class SetDecl:
    name: str
    elements: tuple[str, ...]
    span: Optional[tuple[int, int]] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class PortDecl:
    kind: str
    name: str
    set_name: str
    span: Optional[tuple[int, int]] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.kind not in ("in", "out"):
            raise ValueError(f"port kind must be 'in' or 'out', got {self.kind!r}")


@dataclass(frozen=True)
class BoxDecl:
    name: str
    ports: tuple[PortDecl, ...]
    span: Optional[tuple[int, int]] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class OuterDecl:
    name: str
    ports: tuple[PortDecl, ...]
    span: Optional[tuple[int, int]] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Connect:
    src_owner: str
    src_port: str
    dst_owner: str
    dst_port: str
    span: Optional[tuple[int, int]] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Default:
    owner: str
    port: str
    value: str
    span: Optional[tuple[int, int]] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class ModeBlock:
    label: str
    connects: tuple[Connect, ...]
    span: Optional[tuple[int, int]] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class ModesDecl:
    box: str
    blocks: tuple[ModeBlock, ...]
    span: Optional[tuple[int, int]] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class ReadoutRow:
    state: str
    valuation: tuple[tuple[str, str], ...]
    span: Optional[tuple[int, int]] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class UpdateRow:
    state: str
    valuation: tuple[tuple[str, str], ...]
    next_state: str
    span: Optional[tuple[int, int]] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class MachineDecl:
    box: str
    states: tuple[str, ...]
    init: str
    readouts: tuple[ReadoutRow, ...]
    updates: tuple[UpdateRow, ...]
    span: Optional[tuple[int, int]] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class WiringSpec:
    statements: tuple = ()

    def sets(self) -> dict[str, SetDecl]:
        return {s.name: s for s in self.statements if isinstance(s, SetDecl)}

    def boxes(self) -> dict[str, BoxDecl]:
        return {b.name: b for b in self.statements if isinstance(b, BoxDecl)}

    def outer(self) -> Optional[OuterDecl]:
        for s in self.statements:
            if isinstance(s, OuterDecl):
                return s
        return None

    def connects(self) -> tuple[Connect, ...]:
        return tuple(s for s in self.statements if isinstance(s, Connect))

    def defaults(self) -> tuple[Default, ...]:
        return tuple(s for s in self.statements if isinstance(s, Default))

    def modes(self) -> Optional[ModesDecl]:
        for s in self.statements:
            if isinstance(s, ModesDecl):
                return s
        return None

    def machines(self) -> tuple[MachineDecl, ...]:
        return tuple(s for s in self.statements if isinstance(s, MachineDecl))


# ---------------------------------------------------------------------------
# Parsing.


class _Parser:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        t = self.tokens[self.pos]
        self.pos += 1
        return t

    def fail(self, message: str) -> "WiringSyntaxError":
        t = self.peek()
        return WiringSyntaxError(message, t.line, t.col)

    def expect(self, kind: str, what: str = "") -> _Token:
        t = self.peek()
        if t.kind != kind:
            shown = what or f"{kind!r}"
            got = "end of input" if t.kind == "eof" else repr(t.value)
            raise self.fail(f"expected {shown}, got {got}")
        return self.advance()

    def expect_kw(self, word: str) -> _Token:
        t = self.peek()
        if t.kind != "kw" or t.value != word:
            got = "end of input" if t.kind == "eof" else repr(t.value)
            raise self.fail(f"expected {word!r}, got {got}")
        return self.advance()

    def ident(self, what: str = "an identifier") -> _Token:
        # keywords are reserved and never double as names
        return self.expect("id", what)

    def at_kw(self, word: str) -> bool:
        t = self.peek()
        return t.kind == "kw" and t.value == word

    # -- grammar productions

    def file(self) -> WiringSpec:
        stmts = []
        while self.peek().kind != "eof":
            stmts.append(self.statement())
        return WiringSpec(tuple(stmts))

    def statement(self):
        t = self.peek()
        if t.kind != "kw":
            raise self.fail(f"expected a statement keyword, got {t.value!r}")
        if t.value == "set":
            return self.set_decl()
        if t.value == "box":
            return self.box_decl(outer=False)
        if t.value == "outer":
            return self.box_decl(outer=True)
        if t.value == "connect":
            return self.connect()
        if t.value == "default":
            return self.default_decl()
        if t.value == "modes":
            return self.modes_decl()
        if t.value == "machine":
            return self.machine_decl()
        raise self.fail(f"unexpected keyword {t.value!r}")

    def id_list(self) -> tuple[str, ...]:
        self.expect("{")
        names = [self.ident("an element name").value]
        while self.peek().kind == ",":
            self.advance()
            names.append(self.ident("an element name").value)
        self.expect("}")
        return tuple(names)

    def set_decl(self) -> SetDecl:
        t = self.expect_kw("set")
        name = self.ident("a set name").value
        self.expect("=")
        return SetDecl(name, self.id_list(), span=(t.line, t.col))

    def box_decl(self, outer: bool):
        t = self.advance()
        name = self.ident("a box name").value
        self.expect("{")
        ports = []
        while self.at_kw("in") or self.at_kw("out"):
            kt = self.advance()
            pname = self.ident("a port name").value
            self.expect(":")
            sname = self.ident("a set name").value
            self.expect(";")
            ports.append(PortDecl(kt.value, pname, sname, span=(kt.line, kt.col)))
        self.expect("}")
        cls = OuterDecl if outer else BoxDecl
        return cls(name, tuple(ports), span=(t.line, t.col))

    def connect(self) -> Connect:
        t = self.expect_kw("connect")
        so = self.ident("a source box").value
        self.expect(".")
        sp = self.ident("a source port").value
        self.expect("->")
        do = self.ident("a target box").value
        self.expect(".")
        dp = self.ident("a target port").value
        return Connect(so, sp, do, dp, span=(t.line, t.col))

    def default_decl(self) -> Default:
        t = self.expect_kw("default")
        owner = self.ident("a box name").value
        self.expect(".")
        port = self.ident("a port name").value
        self.expect("=")
        value = self.ident("an element name").value
        return Default(owner, port, value, span=(t.line, t.col))

    def modes_decl(self) -> ModesDecl:
        t = self.expect_kw("modes")
        self.expect_kw("from")
        box = self.ident("a box name").value
        self.expect("{")
        blocks = []
        while self.at_kw("mode"):
            mt = self.advance()
            label = self.ident("a mode label").value
            self.expect("{")
            conns = []
            while self.at_kw("connect"):
                conns.append(self.connect())
            self.expect("}")
            blocks.append(ModeBlock(label, tuple(conns), span=(mt.line, mt.col)))
        if not blocks:
            raise self.fail("a modes block needs at least one mode")
        self.expect("}")
        return ModesDecl(box, tuple(blocks), span=(t.line, t.col))

    def valuation(self) -> tuple[tuple[str, str], ...]:
        self.expect("(")
        entries = []
        if self.peek().kind == "id":
            while True:
                port = self.ident("a port name").value
                self.expect("=")
                entries.append((port, self.ident("an element name").value))
                if self.peek().kind != ",":
                    break
                self.advance()
        self.expect(")")
        return tuple(entries)

    def machine_decl(self) -> MachineDecl:
        t = self.expect_kw("machine")
        box = self.ident("a box name").value
        self.expect("{")
        self.expect_kw("states")
        self.expect("=")
        states = self.id_list()
        self.expect(";")
        self.expect_kw("init")
        self.expect("=")
        init = self.ident("a state name").value
        self.expect(";")
        readouts = []
        while self.at_kw("readout"):
            rt = self.advance()
            state = self.ident("a state name").value
            self.expect("=")
            readouts.append(
                ReadoutRow(state, self.valuation(), span=(rt.line, rt.col))
            )
        updates = []
        while self.at_kw("update"):
            ut = self.advance()
            state = self.ident("a state name").value
            val = self.valuation()
            self.expect("=")
            nxt = self.ident("a state name").value
            updates.append(UpdateRow(state, val, nxt, span=(ut.line, ut.col)))
        self.expect("}")
        return MachineDecl(
            box, states, init, tuple(readouts), tuple(updates), span=(t.line, t.col)
        )


def _at(span) -> str:
    if span is None:
        return ""
    return f"line {span[0]}: "


def _structural_problems(spec: WiringSpec) -> list[tuple[str, Optional[tuple]]]:
    """Duplicate declarations and undeclared set references."""
    problems = []
    set_names = set()
    owner_names = set()
    machine_boxes = set()
    seen_outer = False
    seen_modes = False
    declared_sets = {s.name for s in spec.statements if isinstance(s, SetDecl)}
    for s in spec.statements:
        if isinstance(s, SetDecl):
            if s.name in set_names:
                problems.append((f"duplicate set declaration {s.name!r}", s.span))
            set_names.add(s.name)
            seen_el = set()
            for e in s.elements:
                if e in seen_el:
                    problems.append(
                        (f"duplicate element {e!r} in set {s.name!r}", s.span)
                    )
                seen_el.add(e)
        elif isinstance(s, (BoxDecl, OuterDecl)):
            if s.name in owner_names:
                problems.append((f"duplicate declaration {s.name!r}", s.span))
            owner_names.add(s.name)
            if isinstance(s, OuterDecl):
                if seen_outer:
                    problems.append(("duplicate outer declaration", s.span))
                seen_outer = True
            seen_ports = set()
            for p in s.ports:
                if p.name in seen_ports:
                    problems.append(
                        (f"duplicate port {p.name!r} on {s.name!r}", p.span)
                    )
                seen_ports.add(p.name)
                if p.set_name not in declared_sets:
                    problems.append((f"undeclared set {p.set_name!r}", p.span))
        elif isinstance(s, ModesDecl):
            if seen_modes:
                problems.append(("duplicate modes declaration", s.span))
            seen_modes = True
            seen_labels = set()
            for b in s.blocks:
                if b.label in seen_labels:
                    problems.append((f"duplicate mode {b.label!r}", b.span))
                seen_labels.add(b.label)
        elif isinstance(s, MachineDecl):
            if s.box in machine_boxes:
                problems.append(
                    (f"duplicate machine declaration for box {s.box!r}", s.span)
                )
            machine_boxes.add(s.box)
    return problems


def parse(text: str) -> WiringSpec:
    """Parse program text; raises WiringSyntaxError with line and column.

    Besides grammar errors this rejects duplicate declarations and
    references to undeclared sets, so a parsed spec always names its
    port types meaningfully.
    """
    spec = _Parser(_tokenize(text)).file()
    problems = _structural_problems(spec)
    if problems:
        msg, span = problems[0]
        line, col = span if span is not None else (1, 1)
        raise WiringSyntaxError(msg, line, col)
    return spec


# ---------------------------------------------------------------------------
# Pretty-printing.  parse(print_spec(spec)) == spec for any valid AST.


def _print_ports(ports: Sequence[PortDecl]) -> list[str]:
    return [f"  {p.kind} {p.name} : {p.set_name};" for p in ports]


def _print_valuation(valuation: Sequence[tuple[str, str]]) -> str:
    return "(" + ", ".join(f"{p} = {v}" for p, v in valuation) + ")"


def print_spec(spec: WiringSpec) -> str:
    """Render an AST back to canonical program text."""
    chunks = []
    for s in spec.statements:
        if isinstance(s, SetDecl):
            chunks.append(f"set {s.name} = {{{', '.join(s.elements)}}}")
        elif isinstance(s, (BoxDecl, OuterDecl)):
            kw = "outer" if isinstance(s, OuterDecl) else "box"
            lines = [f"{kw} {s.name} {{"] + _print_ports(s.ports) + ["}"]
            chunks.append("\n".join(lines))
        elif isinstance(s, Connect):
            chunks.append(
                f"connect {s.src_owner}.{s.src_port} -> {s.dst_owner}.{s.dst_port}"
            )
        elif isinstance(s, Default):
            chunks.append(f"default {s.owner}.{s.port} = {s.value}")
        elif isinstance(s, ModesDecl):
            lines = [f"modes from {s.box} {{"]
            for b in s.blocks:
                lines.append(f"  mode {b.label} {{")
                for c in b.connects:
                    lines.append(
                        f"    connect {c.src_owner}.{c.src_port} -> "
                        f"{c.dst_owner}.{c.dst_port}"
                    )
                lines.append("  }")
            lines.append("}")
            chunks.append("\n".join(lines))
        elif isinstance(s, MachineDecl):
            lines = [f"machine {s.box} {{"]
            lines.append(f"  states = {{{', '.join(s.states)}}};")
            lines.append(f"  init = {s.init};")
            for r in s.readouts:
                lines.append(f"  readout {r.state} = {_print_valuation(r.valuation)}")
            for u in s.updates:
                lines.append(
                    f"  update {u.state} {_print_valuation(u.valuation)} = {u.next_state}"
                )
            lines.append("}")
            chunks.append("\n".join(lines))
        else:
            raise ValueError(f"unknown statement {s!r}")
    return "\n\n".join(chunks) + ("\n" if chunks else "")


# ---------------------------------------------------------------------------
# Name resolution and validation.


class _Resolved:
    """Lookup tables for a structurally sound spec; no semantic checks."""

    def __init__(self, spec: WiringSpec):
        self.spec = spec
        # duplicates are reported elsewhere; dedupe so lookups still work
        self.sets = {
            name: FinSet(tuple(dict.fromkeys(decl.elements)))
            for name, decl in spec.sets().items()
        }
        self.boxes = spec.boxes()
        self.box_order = list(self.boxes)
        self.outer = spec.outer()
        self.outer_name = self.outer.name if self.outer is not None else None
        self.in_ports = {}
        self.out_ports = {}
        for name, decl in self.boxes.items():
            self.in_ports[name] = [p for p in decl.ports if p.kind == "in"]
            self.out_ports[name] = [p for p in decl.ports if p.kind == "out"]
        if self.outer is not None:
            self.in_ports[self.outer_name] = [
                p for p in self.outer.ports if p.kind == "in"
            ]
            self.out_ports[self.outer_name] = [
                p for p in self.outer.ports if p.kind == "out"
            ]
        self.defaults = {(d.owner, d.port): d.value for d in spec.defaults()}
        self.modes = spec.modes()

    def port(self, owner: str, name: str) -> Optional[PortDecl]:
        for p in self.in_ports.get(owner, []) + self.out_ports.get(owner, []):
            if p.name == name:
                return p
        return None

    def mode_labels(self) -> list[Optional[str]]:
        """One label per mode box position, or [None] without modes."""
        if self.modes is None:
            return [None]
        outs = self.out_ports.get(self.modes.box, [])
        if len(outs) != 1 or outs[0].set_name not in self.sets:
            return [None]
        return list(self.sets[outs[0].set_name].elements)

    def connects_for(self, label: Optional[str]) -> list[Connect]:
        conns = list(self.spec.connects())
        if self.modes is not None and label is not None:
            for b in self.modes.blocks:
                if b.label == label:
                    conns.extend(b.connects)
        return conns


def _connect_problems(r: _Resolved, c: Connect, where: str) -> list[str]:
    problems = []
    loc = _at(c.span)
    for owner, port in ((c.src_owner, c.src_port), (c.dst_owner, c.dst_port)):
        if owner not in r.in_ports:
            problems.append(f"{loc}undeclared box {owner!r}{where}")
        elif r.port(owner, port) is None:
            problems.append(f"{loc}undeclared port {owner}.{port}{where}")
    if problems:
        return problems
    src = r.port(c.src_owner, c.src_port)
    dst = r.port(c.dst_owner, c.dst_port)
    src_is_outer = c.src_owner == r.outer_name
    dst_is_outer = c.dst_owner == r.outer_name
    if (src.kind == "out") == src_is_outer:
        want = "an outer in port" if src_is_outer else "a box out port"
        problems.append(
            f"{loc}connection source {c.src_owner}.{c.src_port} must be {want}{where}"
        )
    if (dst.kind == "in") == dst_is_outer:
        want = "an outer out port" if dst_is_outer else "a box in port"
        problems.append(
            f"{loc}connection target {c.dst_owner}.{c.dst_port} must be {want}{where}"
        )
    if src_is_outer and dst_is_outer:
        problems.append(
            f"{loc}direct connection from outer input {c.src_port} to outer "
            f"output {c.dst_port} is forbidden{where}"
        )
    if not problems and src.set_name != dst.set_name:
        problems.append(
            f"{loc}type mismatch: {c.src_owner}.{c.src_port} : {src.set_name} "
            f"-> {c.dst_owner}.{c.dst_port} : {dst.set_name}{where}"
        )
    return problems


def _connect_ok(r: _Resolved, c: Connect) -> bool:
    return not _connect_problems(r, c, "")


def validate(spec: WiringSpec) -> dict:
    """Check every AST invariant; returns {"ok": bool, "violations": [...]}.

    All violations are reported, not just the first: structural
    duplicates, dangling references, ill-directed or ill-typed
    connections, and, per mode, fan-in and missing drivers.
    """
    violations = [_at(span) + msg for msg, span in _structural_problems(spec)]
    r = _Resolved(spec)

    for c in spec.connects():
        violations.extend(_connect_problems(r, c, ""))
    for d in spec.defaults():
        loc = _at(d.span)
        if d.owner not in r.boxes:
            violations.append(f"{loc}default on undeclared box {d.owner!r}")
            continue
        p = r.port(d.owner, d.port)
        if p is None:
            violations.append(f"{loc}default on undeclared port {d.owner}.{d.port}")
        elif p.kind != "in":
            violations.append(
                f"{loc}default on {d.owner}.{d.port}, which is not an in port"
            )
        elif p.set_name in r.sets and d.value not in r.sets[p.set_name]:
            violations.append(
                f"{loc}default value {d.value!r} is not in set {p.set_name!r}"
            )

    modes = r.modes
    if modes is not None:
        loc = _at(modes.span)
        if modes.box not in r.boxes:
            violations.append(f"{loc}modes from undeclared box {modes.box!r}")
        else:
            outs = r.out_ports[modes.box]
            if len(outs) != 1:
                violations.append(
                    f"{loc}mode box {modes.box!r} must have exactly one out port, "
                    f"has {len(outs)}"
                )
            else:
                elements = r.sets.get(outs[0].set_name, FinSet(()))
                for b in modes.blocks:
                    if b.label not in elements:
                        violations.append(
                            f"{_at(b.span)}mode {b.label!r} is not a position of "
                            f"box {modes.box!r}"
                        )
        for b in modes.blocks:
            for c in b.connects:
                violations.extend(_connect_problems(r, c, f" (mode {b.label})"))

    for m in spec.machines():
        if m.box not in r.boxes:
            violations.append(
                f"{_at(m.span)}machine bound to undeclared box {m.box!r}"
            )

    # driver analysis, one pass per mode, over well-formed connections only
    targets = []
    for name in r.box_order:
        targets.extend((name, p.name, True) for p in r.in_ports[name])
    if r.outer is not None:
        targets.extend(
            (r.outer_name, p.name, False) for p in r.out_ports[r.outer_name]
        )
    for label in r.mode_labels():
        conns = [c for c in r.connects_for(label) if _connect_ok(r, c)]
        suffix = f" in mode {label}" if label is not None else ""
        for owner, port, is_inner in targets:
            drivers = [
                c for c in conns if c.dst_owner == owner and c.dst_port == port
            ]
            if len(drivers) > 1:
                violations.append(f"fan-in at {owner}.{port}{suffix}")
            elif not drivers:
                if is_inner and (owner, port) in r.defaults:
                    continue
                kind = "no driver or default" if is_inner else "no driver"
                violations.append(f"{kind} for {owner}.{port}{suffix}")

    return {"ok": not violations, "violations": violations}


# ---------------------------------------------------------------------------
# Compilation.


def _product_set(sets: Sequence[FinSet]) -> FinSet:
    if not sets:
        return UNIT_SET
    if len(sets) == 1:
        return sets[0]
    elements = [()]
    for s in sets:
        elements = [prefix + (e,) for prefix in elements for e in s.elements]
    return FinSet(tuple(pair_label(*combo) for combo in elements))


def _join(values: Sequence[str]) -> str:
    if not values:
        return "*"
    if len(values) == 1:
        return values[0]
    return pair_label(*values)


def _split(label: str, n: int) -> tuple[str, ...]:
    if n == 0:
        return ()
    if n == 1:
        return (label,)
    return split_pair(label)


def _box_poly(r: _Resolved, name: str) -> FinPoly:
    outs = _product_set([r.sets[p.set_name] for p in r.out_ports[name]])
    ins = _product_set([r.sets[p.set_name] for p in r.in_ports[name]])
    return monomial(outs, ins)


def _outer_poly(r: _Resolved) -> FinPoly:
    if r.outer is None:
        return Y
    outs = _product_set([r.sets[p.set_name] for p in r.out_ports[r.outer_name]])
    ins = _product_set([r.sets[p.set_name] for p in r.in_ports[r.outer_name]])
    return monomial(outs, ins)


def _inner_poly(r: _Resolved) -> FinPoly:
    polys = [_box_poly(r, name) for name in r.box_order]
    if not polys:
        return Y
    if len(polys) == 1:
        return polys[0]
    return tensor_many(polys)


def compile_wiring(spec: WiringSpec) -> Lens:
    """The lens from the tensor of box interfaces to the outer interface.

    Forward: at each tuple of box positions, read every outer out port
    from its driver under the active mode.  Backward: split the outer
    direction into outer in-port values, route every box in port from
    its driver (an inner out port or an outer in port) under the active
    mode, falling back to its default, and rebuild each box's direction.
    The active mode is the designated mode box's component of the
    position; without modes the base connections apply everywhere.
    """
    report = validate(spec)
    if not report["ok"]:
        raise ValueError(f"invalid wiring spec: {report['violations'][0]}")
    r = _Resolved(spec)
    dom = _inner_poly(r)
    cod = _outer_poly(r)
    outer_ins = r.in_ports.get(r.outer_name, []) if r.outer else []
    outer_outs = r.out_ports.get(r.outer_name, []) if r.outer else []

    mode_box_index = None
    if r.modes is not None:
        mode_box_index = r.box_order.index(r.modes.box)
    routing = {}
    for label in r.mode_labels():
        table = {}
        for c in r.connects_for(label):
            table[(c.dst_owner, c.dst_port)] = (c.src_owner, c.src_port)
        routing[label] = table

    on_pos = {}
    on_dir = {}
    for pos in dom.position_labels:
        parts = _split(pos, len(r.box_order))
        out_vals = {}
        for name, part in zip(r.box_order, parts):
            ports = r.out_ports[name]
            for p, v in zip(ports, _split(part, len(ports))):
                out_vals[(name, p.name)] = v
        label = None
        if mode_box_index is not None:
            mode_port = r.out_ports[r.modes.box][0]
            label = out_vals[(r.modes.box, mode_port.name)]
        table = routing.get(label, routing[None] if None in routing else {})

        on_pos[pos] = _join(
            [out_vals[table[(r.outer_name, p.name)]] for p in outer_outs]
        )

        row = {}
        for d in cod.directions(on_pos[pos]).elements:
            in_vals = dict(zip((p.name for p in outer_ins), _split(d, len(outer_ins))))
            box_dirs = []
            for name in r.box_order:
                vals = []
                for p in r.in_ports[name]:
                    src = table.get((name, p.name))
                    if src is None:
                        vals.append(r.defaults[(name, p.name)])
                    elif src[0] == r.outer_name:
                        vals.append(in_vals[src[1]])
                    else:
                        vals.append(out_vals[src])
                box_dirs.append(_join(vals))
            row[d] = _join(box_dirs)
        on_dir[pos] = row
    return Lens(dom, cod, on_pos, on_dir)


def compile_machines(spec: WiringSpec) -> list[tuple[str, MooreMachine]]:
    """Build one MooreMachine per machine table, bound to its box.

    Raises with a full account of what is wrong: undeclared boxes, bad
    states, mistyped valuations, and every missing (state, input) row.
    """
    r = _Resolved(spec)
    problems = []
    out = []
    for m in spec.machines():
        name = m.box
        before = len(problems)
        if name not in r.boxes:
            problems.append(f"machine bound to undeclared box {name!r}")
            continue
        states = list(dict.fromkeys(m.states))
        if len(states) != len(m.states):
            problems.append(f"machine {name!r}: duplicate states")
        if m.init not in states:
            problems.append(f"machine {name!r}: init {m.init!r} is not a state")
            continue
        out_ports = r.out_ports[name]
        in_ports = r.in_ports[name]

        def valuation_label(rows, ports, what, row_state, span):
            given = dict(rows)
            want = [p.name for p in ports]
            if len(given) != len(rows) or sorted(given) != sorted(want):
                problems.append(
                    f"{_at(span)}machine {name!r}: {what} for {row_state!r} must "
                    f"assign exactly the ports {want!r}"
                )
                return None
            vals = []
            for p in ports:
                v = given[p.name]
                if v not in r.sets[p.set_name]:
                    problems.append(
                        f"{_at(span)}machine {name!r}: {v!r} is not in set "
                        f"{p.set_name!r}"
                    )
                    return None
                vals.append(v)
            return _join(vals)

        readout = {}
        for row in m.readouts:
            if row.state not in states:
                problems.append(
                    f"{_at(row.span)}machine {name!r}: readout for unknown state "
                    f"{row.state!r}"
                )
                continue
            if row.state in readout:
                problems.append(
                    f"machine {name!r}: duplicate readout for {row.state!r}"
                )
                continue
            v = valuation_label(row.valuation, out_ports, "readout", row.state, row.span)
            if v is not None:
                readout[row.state] = v
        for s in states:
            if s not in readout:
                problems.append(f"machine {name!r}: missing readout for {s!r}")

        update = {}
        for row in m.updates:
            if row.state not in states:
                problems.append(
                    f"{_at(row.span)}machine {name!r}: update for unknown state "
                    f"{row.state!r}"
                )
                continue
            if row.next_state not in states:
                problems.append(
                    f"{_at(row.span)}machine {name!r}: next state "
                    f"{row.next_state!r} is not a state"
                )
                continue
            v = valuation_label(row.valuation, in_ports, "update", row.state, row.span)
            if v is None:
                continue
            if (v, row.state) in update:
                problems.append(
                    f"machine {name!r}: duplicate update for ({row.state!r}, {v!r})"
                )
                continue
            update[(v, row.state)] = row.next_state
        input_set = _product_set([r.sets[p.set_name] for p in in_ports])
        for a in input_set.elements:
            for s in states:
                if (a, s) not in update:
                    problems.append(
                        f"machine {name!r}: missing update for ({s!r}, {a!r})"
                    )
        if len(problems) > before:
            continue

        state_set = FinSet(tuple(states))
        output_set = _product_set([r.sets[p.set_name] for p in out_ports])
        machine = MooreMachine(
            state_set,
            input_set,
            output_set,
            SetFn(state_set, output_set, readout),
            SetFn(
                input_state_pairs(input_set, state_set),
                state_set,
                {pair_label(a, s): t for (a, s), t in update.items()},
            ),
            m.init,
        )
        out.append((name, machine))
    if problems:
        raise ValueError("; ".join(problems))
    return out


def _tensor_lenses(lenses: Sequence[Lens]) -> Lens:
    """The flat n-ary tensor of lenses, matching tensor_many's labels."""
    if len(lenses) == 1:
        return lenses[0]
    dom = tensor_many([f.dom for f in lenses]) if lenses else Y
    cod = tensor_many([f.cod for f in lenses]) if lenses else Y
    on_pos = {}
    on_dir = {}
    for pos in dom.position_labels:
        parts = _split(pos, len(lenses)) if lenses else ()
        images = [f.on_pos[p] for f, p in zip(lenses, parts)]
        on_pos[pos] = _join(list(images)) if lenses else "*"
        row = {}
        for d in cod.directions(on_pos[pos]).elements:
            dparts = _split(d, len(lenses)) if lenses else ()
            row[d] = _join(
                [f.on_dir[p][dp] for f, p, dp in zip(lenses, parts, dparts)]
            )
        on_dir[pos] = row
    return Lens(dom, cod, on_pos, on_dir)


def compile_system(spec: WiringSpec) -> tuple[MDDS, str]:
    """A runnable system for a fully tabulated diagram, plus its start state.

    Every box must carry a machine table.  The system's state comonoid
    is contractible on the product of the machine state sets; its
    dynamics is the wiring lens composed with the tensor of the machine
    lenses; the start state is the tuple of init states.
    """
    wiring = compile_wiring(spec)
    machines = dict(compile_machines(spec))
    r = _Resolved(spec)
    missing = [name for name in r.box_order if name not in machines]
    if missing:
        raise ValueError(f"no machine table for box {missing[0]!r}")
    if not r.box_order:
        state = contractible(UNIT_SET)
        return MDDS(state, wiring.cod, lens_compose(wiring, lens_id(Y))), "*"
    lenses = [moore_to_lens(machines[name]) for name in r.box_order]
    inner = _tensor_lenses(lenses)
    state = contractible(FinSet(inner.dom.position_labels))
    system = MDDS(state, wiring.cod, lens_compose(wiring, inner))
    start = _join([machines[name].initial for name in r.box_order])
    return system, start


# ---------------------------------------------------------------------------
# Random well-formed specs, for fuzzing the compiler.


def random_spec(rng: random.Random) -> WiringSpec:
    """A random valid spec: every input driven or defaulted in every mode."""
    stmts = []
    sets = []
    for i in range(rng.randint(1, 3)):
        elements = tuple(f"e{i}{j}" for j in range(rng.randint(1, 2)))
        sets.append(SetDecl(f"T{i}", elements))
    stmts.extend(sets)
    set_names = [s.name for s in sets]
    elements_of = {s.name: s.elements for s in sets}

    boxes = []
    for i in range(rng.randint(1, 3)):
        ports = []
        for j in range(rng.randint(0, 2)):
            ports.append(PortDecl("out", f"o{j}", rng.choice(set_names)))
        for j in range(rng.randint(0, 2)):
            ports.append(PortDecl("in", f"i{j}", rng.choice(set_names)))
        boxes.append(BoxDecl(f"B{i}", tuple(ports)))
    stmts.extend(boxes)

    out_sources = {}
    for b in boxes:
        for p in b.ports:
            if p.kind == "out":
                out_sources.setdefault(p.set_name, []).append((b.name, p.name))

    outer_ports = []
    for j in range(rng.randint(0, 2)):
        outer_ports.append(PortDecl("in", f"x{j}", rng.choice(set_names)))
    candidates = [t for t in set_names if t in out_sources]
    for j in range(rng.randint(0, 2) if candidates else 0):
        outer_ports.append(PortDecl("out", f"y{j}", rng.choice(candidates)))
    outer = OuterDecl("Top", tuple(outer_ports))
    stmts.append(outer)

    in_sources = {}
    for p in outer_ports:
        if p.kind == "in":
            in_sources.setdefault(p.set_name, []).append((outer.name, p.name))

    mode_candidates = [
        b for b in boxes if len([p for p in b.ports if p.kind == "out"]) == 1
    ]
    mode_box = None
    mode_labels = []
    if mode_candidates and rng.random() < 0.5:
        mode_box = rng.choice(mode_candidates)
        port = next(p for p in mode_box.ports if p.kind == "out")
        mode_labels = list(elements_of[port.set_name])

    base = []
    per_mode = {label: [] for label in mode_labels}
    defaults = []
    for b in boxes:
        for p in b.ports:
            if p.kind != "in":
                continue
            sources = out_sources.get(p.set_name, []) + in_sources.get(
                p.set_name, []
            )
            style = rng.random()
            if not sources or style < 0.3:
                defaults.append(
                    Default(b.name, p.name, rng.choice(elements_of[p.set_name]))
                )
            elif mode_labels and style < 0.6:
                for label in mode_labels:
                    so, sp = rng.choice(sources)
                    per_mode[label].append(Connect(so, sp, b.name, p.name))
            else:
                so, sp = rng.choice(sources)
                base.append(Connect(so, sp, b.name, p.name))
    for p in outer_ports:
        if p.kind == "out":
            so, sp = rng.choice(out_sources[p.set_name])
            base.append(Connect(so, sp, outer.name, p.name))
    stmts.extend(base)
    stmts.extend(defaults)
    if mode_labels:
        blocks = tuple(
            ModeBlock(label, tuple(per_mode[label])) for label in mode_labels
        )
        stmts.append(ModesDecl(mode_box.name, blocks))
    return WiringSpec(tuple(stmts))

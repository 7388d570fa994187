"""Lossless lexer and statement-level parser for C-like function bodies.

The parser recognizes just enough structure for complexity metrics and
control-flow rewriting: blocks, if/while/do-while/for, break/continue/return,
simple declarations, and expression statements.  Everything else (switch,
goto, labels, preprocessor lines, exotic declarations) is kept verbatim as an
Opaque node covering a balanced token run, so parsing never fails on
balanced-brace input.
"""

from __future__ import annotations

from dataclasses import dataclass, field

KEYWORDS = frozenset(
    """
    auto break case char const continue default do double else enum extern
    float for goto if inline int long register restrict return short signed
    sizeof static struct switch typedef union unsigned void volatile while
    """.split()
)

TYPE_KEYWORDS = frozenset(
    "auto char const double enum extern float inline int long register "
    "restrict short signed static struct union unsigned void volatile".split()
)

# Multi-character operators, longest first so maximal munch works.
OPERATORS = (
    "<<=", ">>=", "...",
    "->", "++", "--", "<<", ">>", "<=", ">=", "==", "!=", "&&", "||",
    "+=", "-=", "*=", "/=", "%=", "&=", "|=", "^=",
    "+", "-", "*", "/", "%", "<", ">", "=", "!", "&", "|", "^", "~", "?", ":", ".",
)

PUNCTUATION = frozenset("(){}[],;#\\@$`")

_IDENT_START = frozenset("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_")
_IDENT_CONT = _IDENT_START | frozenset("0123456789")
_DIGITS = frozenset("0123456789")


class LexError(ValueError):
    """Unterminated literal or comment; carries the 1-based source line."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class ParseError(ValueError):
    """Structurally unrecoverable input (unbalanced braces/parens)."""


@dataclass(frozen=True)
class Token:
    kind: str  # identifier | keyword | integer-literal | string-literal | char-literal | operator | punctuation | comment | whitespace
    text: str
    line: int


def lex(code: str) -> list[Token]:
    """Tokenize `code` losslessly: concatenating token texts reproduces it."""
    tokens: list[Token] = []
    i = 0
    n = len(code)
    line = 1

    def emit(kind: str, start: int, end: int, at_line: int) -> None:
        tokens.append(Token(kind, code[start:end], at_line))

    while i < n:
        c = code[i]
        start = i
        start_line = line
        if c in " \t\r\n\f\v":
            while i < n and code[i] in " \t\r\n\f\v":
                if code[i] == "\n":
                    line += 1
                i += 1
            emit("whitespace", start, i, start_line)
        elif c == "/" and i + 1 < n and code[i + 1] == "/":
            while i < n and code[i] != "\n":
                i += 1
            emit("comment", start, i, start_line)
        elif c == "/" and i + 1 < n and code[i + 1] == "*":
            i += 2
            while True:
                if i + 1 >= n:
                    raise LexError("unterminated block comment", start_line)
                if code[i] == "*" and code[i + 1] == "/":
                    i += 2
                    break
                if code[i] == "\n":
                    line += 1
                i += 1
            emit("comment", start, i, start_line)
        elif c == '"' or c == "'":
            quote = c
            i += 1
            while True:
                if i >= n or code[i] == "\n":
                    kind = "string" if quote == '"' else "char"
                    raise LexError(f"unterminated {kind} literal", start_line)
                if code[i] == "\\" and i + 1 < n:
                    i += 2
                    continue
                if code[i] == quote:
                    i += 1
                    break
                i += 1
            emit("string-literal" if quote == '"' else "char-literal", start, i, start_line)
        elif c in _DIGITS or (c == "." and i + 1 < n and code[i + 1] in _DIGITS):
            # Maximal numeric literal (C pp-number): covers hex, octal,
            # suffixes, and float forms; all filed under integer-literal.
            i += 1
            while i < n:
                ch = code[i]
                if ch in _IDENT_CONT or ch == ".":
                    i += 1
                elif ch in "+-" and code[i - 1] in "eEpP":
                    i += 1
                else:
                    break
            emit("integer-literal", start, i, start_line)
        elif c in _IDENT_START:
            i += 1
            while i < n and code[i] in _IDENT_CONT:
                i += 1
            text = code[start:i]
            emit("keyword" if text in KEYWORDS else "identifier", start, i, start_line)
        else:
            for op in OPERATORS:
                if code.startswith(op, i):
                    i += len(op)
                    emit("operator", start, i, start_line)
                    break
            else:
                i += 1
                emit("punctuation", start, i, start_line)
    return tokens


def significant(tokens: list[Token]) -> list[Token]:
    """Drop whitespace and comment tokens."""
    return [t for t in tokens if t.kind not in ("whitespace", "comment")]


# ---------------------------------------------------------------------------
# Expressions


@dataclass(frozen=True)
class IntLit:
    value: int


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str  # prefix: ! ~ - + * & ++ --; postfix: post++ post--
    operand: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple["Expr", ...]


@dataclass(frozen=True)
class Ternary:
    cond: "Expr"
    then: "Expr"
    other: "Expr"


@dataclass(frozen=True)
class OpaqueExpr:
    texts: tuple[str, ...]


Expr = IntLit | Var | Unary | Binary | Call | Ternary | OpaqueExpr


# ---------------------------------------------------------------------------
# Statements


@dataclass(frozen=True)
class Span:
    """Covered token range [lo, hi) in the significant-token list."""

    lo: int
    hi: int


@dataclass(frozen=True)
class Block:
    stmts: tuple["Stmt", ...]
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class If:
    cond: Expr
    then: "Stmt"
    orelse: "Stmt | None"
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class While:
    cond: Expr
    body: "Stmt"
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class DoWhile:
    body: "Stmt"
    cond: Expr
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class For:
    init: "Stmt | None"  # Decl or ExprStmt
    cond: Expr | None
    step: Expr | None
    body: "Stmt"
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Break:
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Continue:
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Return:
    expr: Expr | None
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class ExprStmt:
    expr: Expr
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Decl:
    type_tokens: tuple[str, ...]
    names: tuple[str, ...]
    init: Expr | None  # only when a single name is declared
    span: Span | None = field(default=None, compare=False)


@dataclass(frozen=True)
class Opaque:
    texts: tuple[str, ...]
    span: Span | None = field(default=None, compare=False)


Stmt = Block | If | While | DoWhile | For | Break | Continue | Return | ExprStmt | Decl | Opaque


@dataclass(frozen=True)
class StmtTree:
    """Parsed function: raw header token texts plus the structured body."""

    header: tuple[str, ...]
    root: Block
    tokens: tuple[Token, ...] | None = field(default=None, compare=False)


# ---------------------------------------------------------------------------
# Expression parsing (all-or-nothing per region: any unsupported construct
# makes the whole region one OpaqueExpr)

_ASSIGN_OPS = frozenset(["=", "+=", "-=", "*=", "/=", "%=", "<<=", ">>=", "&=", "|=", "^="])
_BINARY_LEVELS = (
    ("||",),
    ("&&",),
    ("|",),
    ("^",),
    ("&",),
    ("==", "!="),
    ("<", "<=", ">", ">="),
    ("<<", ">>"),
    ("+", "-"),
    ("*", "/", "%"),
)
_PREFIX_OPS = frozenset(["!", "~", "-", "+", "*", "&", "++", "--"])


class _ExprFail(Exception):
    pass


class _ExprParser:
    def __init__(self, toks: list[Token]):
        self.toks = toks
        self.pos = 0

    def peek(self) -> Token | None:
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def take(self) -> Token:
        if self.pos >= len(self.toks):
            raise _ExprFail()
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def expect(self, text: str) -> None:
        t = self.peek()
        if t is None or t.text != text:
            raise _ExprFail()
        self.pos += 1

    def parse(self, allow_comma: bool) -> Expr:
        e = self.assignment()
        while allow_comma and (t := self.peek()) is not None and t.text == ",":
            self.pos += 1
            e = Binary(",", e, self.assignment())
        return e

    def assignment(self) -> Expr:
        e = self.ternary()
        t = self.peek()
        if t is not None and t.text in _ASSIGN_OPS:
            self.pos += 1
            return Binary(t.text, e, self.assignment())
        return e

    def ternary(self) -> Expr:
        e = self.binary(0)
        t = self.peek()
        if t is not None and t.text == "?":
            self.pos += 1
            then = self.assignment()
            self.expect(":")
            other = self.assignment()
            return Ternary(e, then, other)
        return e

    def binary(self, level: int) -> Expr:
        if level >= len(_BINARY_LEVELS):
            return self.unary()
        ops = _BINARY_LEVELS[level]
        e = self.binary(level + 1)
        while (t := self.peek()) is not None and t.text in ops:
            self.pos += 1
            e = Binary(t.text, e, self.binary(level + 1))
        return e

    def unary(self) -> Expr:
        t = self.peek()
        if t is not None and t.kind == "operator" and t.text in _PREFIX_OPS:
            self.pos += 1
            return Unary(t.text, self.unary())
        return self.postfix()

    def postfix(self) -> Expr:
        e = self.primary()
        while (t := self.peek()) is not None:
            if t.text == "(" and isinstance(e, Var):
                self.pos += 1
                args: list[Expr] = []
                if (nxt := self.peek()) is not None and nxt.text == ")":
                    self.pos += 1
                else:
                    args.append(self.assignment())
                    while (nxt := self.peek()) is not None and nxt.text == ",":
                        self.pos += 1
                        args.append(self.assignment())
                    self.expect(")")
                e = Call(e.name, tuple(args))
            elif t.text == "[":
                self.pos += 1
                idx = self.parse(allow_comma=True)
                self.expect("]")
                e = Binary("[]", e, idx)
            elif t.text in (".", "->"):
                self.pos += 1
                name = self.take()
                if name.kind != "identifier":
                    raise _ExprFail()
                e = Binary(t.text, e, Var(name.text))
            elif t.text in ("++", "--"):
                self.pos += 1
                e = Unary("post" + t.text, e)
            else:
                break
        return e

    def primary(self) -> Expr:
        t = self.take()
        if t.kind == "identifier":
            return Var(t.text)
        if t.kind == "integer-literal":
            value = _int_value(t.text)
            if value is None:
                raise _ExprFail()
            return IntLit(value)
        if t.kind == "char-literal":
            value = _char_value(t.text)
            if value is None:
                raise _ExprFail()
            return IntLit(value)
        if t.text == "(":
            e = self.parse(allow_comma=True)
            self.expect(")")
            return e
        raise _ExprFail()


_CHAR_ESCAPES = {"n": 10, "t": 9, "r": 13, "0": 0, "\\": 92, "'": 39, '"': 34, "a": 7, "b": 8, "f": 12, "v": 11}


def _char_value(text: str) -> int | None:
    inner = text[1:-1]
    if len(inner) == 1:
        return ord(inner)
    if len(inner) == 2 and inner[0] == "\\" and inner[1] in _CHAR_ESCAPES:
        return _CHAR_ESCAPES[inner[1]]
    return None


def _int_value(text: str) -> int | None:
    t = text.rstrip("uUlL")
    try:
        return int(t, 0)
    except ValueError:
        return None


def parse_expr_region(toks: list[Token]) -> Expr:
    """Parse a delimited token run as one expression, or fall back to opaque."""
    if not toks:
        return OpaqueExpr(())
    p = _ExprParser(toks)
    try:
        e = p.parse(allow_comma=True)
    except _ExprFail:
        return OpaqueExpr(tuple(t.text for t in toks))
    if p.pos != len(toks):
        return OpaqueExpr(tuple(t.text for t in toks))
    return e


# ---------------------------------------------------------------------------
# Statement parsing


class _Backtrack(Exception):
    pass


_OPEN = {"(": ")", "[": "]", "{": "}"}
_CLOSE = {")": "(", "]": "[", "}": "{"}


class _StmtParser:
    def __init__(self, toks: list[Token]):
        self.toks = toks
        self.pos = 0

    def peek(self) -> Token | None:
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def at(self, text: str) -> bool:
        t = self.peek()
        return t is not None and t.text == text

    def expect(self, text: str) -> None:
        if not self.at(text):
            raise _Backtrack()
        self.pos += 1

    def find_match(self, open_pos: int) -> int:
        """Index of the token matching the bracket at open_pos."""
        depth = 0
        for i in range(open_pos, len(self.toks)):
            text = self.toks[i].text
            if text in _OPEN:
                depth += 1
            elif text in _CLOSE:
                depth -= 1
                if depth == 0:
                    return i
        raise _Backtrack()

    def parse_block(self) -> Block:
        lo = self.pos
        self.expect("{")
        stmts: list[Stmt] = []
        while not self.at("}"):
            if self.peek() is None:
                raise _Backtrack()
            stmts.append(self.parse_stmt())
        self.pos += 1
        return Block(tuple(stmts), Span(lo, self.pos))

    def parse_stmt(self) -> Stmt:
        start = self.pos
        t = self.peek()
        if t is None:
            raise _Backtrack()
        try:
            if t.text == "{":
                return self.parse_block()
            if t.text == "if":
                return self.parse_if()
            if t.text == "while":
                return self.parse_while()
            if t.text == "do":
                return self.parse_do()
            if t.text == "for":
                return self.parse_for()
            if t.text == "break":
                self.pos += 1
                self.expect(";")
                return Break(Span(start, self.pos))
            if t.text == "continue":
                self.pos += 1
                self.expect(";")
                return Continue(Span(start, self.pos))
            if t.text == "return":
                return self.parse_return()
            if t.text == "#":
                return self.opaque_directive()
            if t.text in TYPE_KEYWORDS:
                return self.parse_decl()
            if t.text == ";":
                self.pos += 1
                return Opaque((";",), Span(start, self.pos))
            return self.parse_expr_stmt()
        except _Backtrack:
            self.pos = start
            return self.opaque_run()

    def paren_region(self) -> list[Token]:
        if not self.at("("):
            raise _Backtrack()
        close = self.find_match(self.pos)
        region = self.toks[self.pos + 1 : close]
        self.pos = close + 1
        return region

    def region_to_semicolon(self) -> list[Token]:
        depth = 0
        out: list[Token] = []
        while True:
            t = self.peek()
            if t is None:
                raise _Backtrack()
            if depth == 0 and t.text == ";":
                self.pos += 1
                return out
            if t.text in _OPEN:
                depth += 1
            elif t.text in _CLOSE:
                depth -= 1
                if depth < 0:
                    raise _Backtrack()
            out.append(t)
            self.pos += 1

    def parse_if(self) -> If:
        lo = self.pos
        self.pos += 1
        cond = parse_expr_region(self.paren_region())
        then = self.parse_stmt()
        orelse = None
        if self.at("else"):
            self.pos += 1
            orelse = self.parse_stmt()
        return If(cond, then, orelse, Span(lo, self.pos))

    def parse_while(self) -> While:
        lo = self.pos
        self.pos += 1
        cond = parse_expr_region(self.paren_region())
        body = self.parse_stmt()
        return While(cond, body, Span(lo, self.pos))

    def parse_do(self) -> DoWhile:
        lo = self.pos
        self.pos += 1
        body = self.parse_stmt()
        self.expect("while")
        cond = parse_expr_region(self.paren_region())
        self.expect(";")
        return DoWhile(body, cond, Span(lo, self.pos))

    def parse_for(self) -> For:
        lo = self.pos
        self.pos += 1
        header = self.paren_region()
        splits = _split_top_level(header, ";")
        if len(splits) != 3:
            raise _Backtrack()
        init_toks, cond_toks, step_toks = splits
        init: Stmt | None = None
        if init_toks:
            sub = _StmtParser(init_toks + [Token("punctuation", ";", init_toks[-1].line)])
            if init_toks[0].text in TYPE_KEYWORDS:
                init = sub.parse_decl()
            else:
                init = ExprStmt(parse_expr_region(init_toks))
            if isinstance(init, Decl) and sub.pos != len(sub.toks):
                raise _Backtrack()
        cond = parse_expr_region(cond_toks) if cond_toks else None
        step = parse_expr_region(step_toks) if step_toks else None
        body = self.parse_stmt()
        return For(init, cond, step, body, Span(lo, self.pos))

    def parse_return(self) -> Return:
        lo = self.pos
        self.pos += 1
        region = self.region_to_semicolon()
        expr = parse_expr_region(region) if region else None
        return Return(expr, Span(lo, self.pos))

    def parse_decl(self) -> Decl:
        lo = self.pos
        type_tokens: list[str] = []
        while (t := self.peek()) is not None and t.text in TYPE_KEYWORDS:
            type_tokens.append(t.text)
            self.pos += 1
        names: list[str] = []
        init: Expr | None = None
        while True:
            t = self.peek()
            if t is None or t.kind != "identifier":
                raise _Backtrack()
            names.append(t.text)
            self.pos += 1
            if self.at("="):
                if len(names) > 1:
                    raise _Backtrack()  # init only on a sole declarator
                self.pos += 1
                region = self.region_to_semicolon()
                if any(tok.text == "," for tok in region):
                    raise _Backtrack()
                init = parse_expr_region(region)
                return Decl(tuple(type_tokens), tuple(names), init, Span(lo, self.pos))
            if self.at(","):
                self.pos += 1
                continue
            if self.at(";"):
                self.pos += 1
                return Decl(tuple(type_tokens), tuple(names), None, Span(lo, self.pos))
            raise _Backtrack()

    def parse_expr_stmt(self) -> ExprStmt:
        lo = self.pos
        region = self.region_to_semicolon()
        if not region:
            raise _Backtrack()
        expr = parse_expr_region(region)
        if isinstance(expr, OpaqueExpr):
            raise _Backtrack()  # let the opaque run keep its ';'
        return ExprStmt(expr, Span(lo, self.pos))

    def opaque_directive(self) -> Opaque:
        lo = self.pos
        line = self.toks[self.pos].line
        while (t := self.peek()) is not None and t.line == line:
            self.pos += 1
        return Opaque(tuple(t.text for t in self.toks[lo : self.pos]), Span(lo, self.pos))

    def opaque_run(self) -> Opaque:
        """Consume a balanced run: up to a top-level ';', or through a
        balanced `{...}` group (covers switch, labels with blocks, etc.)."""
        lo = self.pos
        depth = 0
        while True:
            t = self.peek()
            if t is None:
                if depth == 0 and self.pos > lo:
                    break
                raise ParseError("unbalanced braces or parentheses")
            if depth == 0 and t.text == "}":
                break  # end of the enclosing block
            if t.text in _OPEN:
                depth += 1
                self.pos += 1
                continue
            if t.text in _CLOSE:
                depth -= 1
                self.pos += 1
                if depth == 0 and t.text == "}":
                    break
                if depth < 0:
                    raise ParseError("unbalanced braces or parentheses")
                continue
            self.pos += 1
            if depth == 0 and t.text == ";":
                break
        if self.pos == lo:
            raise ParseError("unbalanced braces or parentheses")
        return Opaque(tuple(tok.text for tok in self.toks[lo : self.pos]), Span(lo, self.pos))


def _split_top_level(toks: list[Token], sep: str) -> list[list[Token]]:
    parts: list[list[Token]] = [[]]
    depth = 0
    for t in toks:
        if t.text in _OPEN:
            depth += 1
        elif t.text in _CLOSE:
            depth -= 1
        if depth == 0 and t.text == sep:
            parts.append([])
        else:
            parts[-1].append(t)
    return parts


def _check_balance(toks: list[Token]) -> None:
    stack: list[str] = []
    for t in toks:
        if t.text in _OPEN:
            stack.append(t.text)
        elif t.text in _CLOSE:
            if not stack or stack.pop() != _CLOSE[t.text]:
                raise ParseError(f"unbalanced '{t.text}' at line {t.line}")
    if stack:
        raise ParseError(f"unbalanced '{stack[-1]}'")


def parse_function(code: str) -> StmtTree:
    """Parse one function definition, or a bare block / statement list.

    Control flow is structured; anything unrecognized becomes an Opaque node
    over a balanced token run.  Raises ParseError only for unbalanced
    braces/parentheses (LexError for bad literals).
    """
    toks = significant(lex(code))
    _check_balance(toks)
    header: tuple[str, ...] = ()
    body = toks
    # A function definition: a signature run (no top-level ';', not starting
    # with a statement keyword, ending in ')') before the first top-level '{'.
    stmt_keywords = frozenset(
        ["if", "while", "for", "do", "switch", "return", "break", "continue", "goto", "else"]
    )
    depth = 0
    saw_semicolon = False
    for i, t in enumerate(toks):
        if t.text == "(":
            depth += 1
        elif t.text == ")":
            depth -= 1
        elif t.text == ";" and depth == 0:
            saw_semicolon = True
        elif t.text == "{" and depth == 0:
            if (
                i > 0
                and toks[i - 1].text == ")"
                and not saw_semicolon
                and toks[0].text not in stmt_keywords
            ):
                header = tuple(tok.text for tok in toks[:i])
                body = toks[i:]
            break
    p = _StmtParser(body)
    if p.at("{"):
        root = p.parse_block()
        if p.peek() is None:
            return StmtTree(header, root, tuple(body))
        p = _StmtParser(body)  # trailing tokens after '}': parse as a bare list
    stmts: list[Stmt] = []
    while p.peek() is not None:
        stmts.append(p.parse_stmt())
    return StmtTree(header, Block(tuple(stmts), Span(0, len(body))), tuple(body))


# ---------------------------------------------------------------------------
# Rendering

_NO_SPACE_BEFORE = frozenset([",", ";", ")", "]"])
_NO_SPACE_AFTER = frozenset(["(", "["])
_WORDISH = _IDENT_CONT | frozenset(".")
_OPCHARS = frozenset("+-*/%<>=!&|^~?:.")


def _join_tokens(texts: tuple[str, ...] | list[str]) -> str:
    """Join token texts with spacing that re-lexes to the same tokens."""
    out: list[str] = []
    prev = ""
    for text in texts:
        if out:
            need = True
            if text in _NO_SPACE_BEFORE or prev in _NO_SPACE_AFTER:
                need = False
            # never let adjacent tokens merge into one
            if not need and prev and (
                (prev[-1] in _WORDISH and text[0] in _WORDISH)
                or (prev[-1] in _OPCHARS and text[0] in _OPCHARS)
            ):
                need = True
            if need:
                out.append(" ")
        out.append(text)
        prev = text
    return "".join(out)


_PREC = {",": 1, "?:": 3, "||": 4, "&&": 5, "|": 6, "^": 7, "&": 8,
         "==": 9, "!=": 9, "<": 10, "<=": 10, ">": 10, ">=": 10,
         "<<": 11, ">>": 11, "+": 12, "-": 12, "*": 13, "/": 13, "%": 13}
_ASSIGN_PREC = 2
_UNARY_PREC = 14
_POSTFIX_PREC = 15


def _expr_prec(e: Expr) -> int:
    if isinstance(e, Binary):
        if e.op in _ASSIGN_OPS:
            return _ASSIGN_PREC
        if e.op in ("[]", ".", "->"):
            return _POSTFIX_PREC
        return _PREC[e.op]
    if isinstance(e, Ternary):
        return 3
    if isinstance(e, Unary):
        return _POSTFIX_PREC if e.op.startswith("post") else _UNARY_PREC
    if isinstance(e, OpaqueExpr):
        return 0
    return 16  # atoms


def render_expr(e: Expr) -> str:
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, OpaqueExpr):
        return _join_tokens(e.texts)
    if isinstance(e, Unary):
        if e.op.startswith("post"):
            return f"{_child(e.operand, _POSTFIX_PREC)}{e.op[4:]}"
        sep = " " if e.op in ("++", "--", "-", "+") else ""
        return f"{e.op}{sep}{_child(e.operand, _UNARY_PREC)}"
    if isinstance(e, Binary):
        if e.op == "[]":
            return f"{_child(e.left, _POSTFIX_PREC)}[{render_expr(e.right)}]"
        if e.op in (".", "->"):
            return f"{_child(e.left, _POSTFIX_PREC)}{e.op}{render_expr(e.right)}"
        prec = _expr_prec(e)
        if e.op in _ASSIGN_OPS:  # right-associative
            return f"{_child(e.left, prec + 1)} {e.op} {_child(e.right, prec)}"
        if e.op == ",":
            return f"{_child(e.left, prec)}, {_child(e.right, prec + 1)}"
        return f"{_child(e.left, prec)} {e.op} {_child(e.right, prec + 1)}"
    if isinstance(e, Ternary):
        return f"{_child(e.cond, 4)} ? {render_expr(e.then)} : {_child(e.other, 3)}"
    if isinstance(e, Call):
        return f"{e.name}({', '.join(render_expr(a) for a in e.args)})"
    raise TypeError(f"unknown expr {e!r}")


def _child(e: Expr, min_prec: int) -> str:
    text = render_expr(e)
    if _expr_prec(e) < min_prec or isinstance(e, OpaqueExpr):
        return f"({text})"
    return text


def _render_stmt(s: Stmt, indent: int, out: list[str]) -> None:
    pad = "    " * indent

    def branch(st: Stmt) -> None:
        if isinstance(st, Block):
            out[-1] += " {"
            for inner in st.stmts:
                _render_stmt(inner, indent + 1, out)
            out.append(pad + "}")
        else:
            _render_stmt(st, indent + 1, out)

    if isinstance(s, Block):
        if not s.stmts:
            out.append(pad + "{ }")
            return
        out.append(pad + "{")
        for inner in s.stmts:
            _render_stmt(inner, indent + 1, out)
        out.append(pad + "}")
    elif isinstance(s, If):
        out.append(pad + f"if ({render_expr(s.cond)})")
        branch(s.then)
        if s.orelse is not None:
            if isinstance(s.orelse, If):
                mark = len(out)
                out.append(pad + "else")
                _render_stmt(s.orelse, indent, out)
                out[mark] = out[mark] + " " + out[mark + 1].lstrip()
                del out[mark + 1]
                return
            out.append(pad + "else")
            branch(s.orelse)
    elif isinstance(s, While):
        out.append(pad + f"while ({render_expr(s.cond)})")
        branch(s.body)
    elif isinstance(s, DoWhile):
        out.append(pad + "do")
        branch(s.body)
        out[-1] += f" while ({render_expr(s.cond)});"
    elif isinstance(s, For):
        init = ""
        if isinstance(s.init, Decl):
            init = _decl_text(s.init)[:-1].rstrip()  # drop trailing ';'
        elif isinstance(s.init, ExprStmt):
            init = render_expr(s.init.expr)
        cond = render_expr(s.cond) if s.cond is not None else ""
        step = render_expr(s.step) if s.step is not None else ""
        out.append(pad + f"for ({init}; {cond}; {step})")
        branch(s.body)
    elif isinstance(s, Break):
        out.append(pad + "break;")
    elif isinstance(s, Continue):
        out.append(pad + "continue;")
    elif isinstance(s, Return):
        if s.expr is None:
            out.append(pad + "return;")
        else:
            out.append(pad + f"return {render_expr(s.expr)};")
    elif isinstance(s, ExprStmt):
        out.append(pad + render_expr(s.expr) + ";")
    elif isinstance(s, Decl):
        out.append(pad + _decl_text(s))
    elif isinstance(s, Opaque):
        out.append(pad + _join_tokens(s.texts))
    else:
        raise TypeError(f"unknown stmt {s!r}")


def _decl_text(d: Decl) -> str:
    base = " ".join(d.type_tokens)
    if d.init is not None:
        return f"{base} {d.names[0]} = {render_expr(d.init)};"
    return f"{base} {', '.join(d.names)};"


def render(tree: StmtTree) -> str:
    """Deterministic pretty-printer; reparsing yields a structurally equal tree."""
    lines: list[str] = []
    if tree.header:
        lines.append(_join_tokens(tree.header))
    if not tree.root.stmts:
        lines.append("{ }")
    else:
        lines.append("{")
        for s in tree.root.stmts:
            _render_stmt(s, 1, lines)
        lines.append("}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Tree utilities shared by metrics / augment / minieval


def child_stmts(s: Stmt) -> list[Stmt]:
    if isinstance(s, Block):
        return list(s.stmts)
    if isinstance(s, If):
        return [s.then] + ([s.orelse] if s.orelse is not None else [])
    if isinstance(s, (While, DoWhile)):
        return [s.body]
    if isinstance(s, For):
        return ([s.init] if s.init is not None else []) + [s.body]
    return []


def walk_stmts(s: Stmt):
    """Yield s and all statements beneath it, pre-order (source order)."""
    yield s
    for c in child_stmts(s):
        yield from walk_stmts(c)


def stmt_exprs(s: Stmt) -> list[Expr]:
    """Expressions attached directly to one statement node."""
    if isinstance(s, If):
        return [s.cond]
    if isinstance(s, (While, DoWhile)):
        return [s.cond]
    if isinstance(s, For):
        return [e for e in (s.cond, s.step) if e is not None]
    if isinstance(s, Return):
        return [s.expr] if s.expr is not None else []
    if isinstance(s, ExprStmt):
        return [s.expr]
    if isinstance(s, Decl):
        return [s.init] if s.init is not None else []
    return []


def walk_exprs(e: Expr):
    yield e
    if isinstance(e, Unary):
        yield from walk_exprs(e.operand)
    elif isinstance(e, Binary):
        yield from walk_exprs(e.left)
        yield from walk_exprs(e.right)
    elif isinstance(e, Ternary):
        yield from walk_exprs(e.cond)
        yield from walk_exprs(e.then)
        yield from walk_exprs(e.other)
    elif isinstance(e, Call):
        for a in e.args:
            yield from walk_exprs(a)


def tree_exprs(tree: StmtTree):
    for s in walk_stmts(tree.root):
        for e in stmt_exprs(s):
            yield from walk_exprs(e)


def expr_is_opaque_free(e: Expr) -> bool:
    return not any(isinstance(sub, OpaqueExpr) for sub in walk_exprs(e))


def span_lines(tree: StmtTree, s: Stmt) -> tuple[int, int]:
    """1-based (first, last) source line covered by a parsed statement."""
    if tree.tokens is None or s.span is None:
        raise ValueError("statement has no recorded token span")
    toks = tree.tokens[s.span.lo : s.span.hi]
    return toks[0].line, toks[-1].line

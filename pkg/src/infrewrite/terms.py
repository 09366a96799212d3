"""Rational terms as canonical (bisimulation-minimal) term graphs.

A finite or infinite term with finitely many distinct subterms is stored as a
finite graph whose cycles encode the infinite branches.  Every :class:`Term`
is kept in canonical form: no two nodes are bisimilar and nodes are numbered
in depth-first preorder from the root (node 0), children left to right.  Two
terms therefore denote the same infinite tree exactly when they compare
equal, which keeps equality O(1) after hashing.

Concrete syntax::

    term ::= IDENT | IDENT '(' term {',' term} ')' | 'rec' IDENT '.' term

``rec x . C(x)`` denotes the solution of ``x = C(x)``.  Binder names must be
guarded: they may only occur strictly below a function symbol of their body.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Hashable, Iterable, Iterator, Mapping, NamedTuple, Union


class TermError(ValueError):
    """Base class for malformed terms and term text."""


class TermSyntaxError(TermError):
    pass


class UnguardedBinderError(TermSyntaxError):
    pass


class ArityError(TermError):
    pass


class PositionError(TermError):
    pass


class Fun(NamedTuple):
    symbol: str
    children: tuple


class Var(NamedTuple):
    name: str


Label = Union[Fun, Var]
Position = tuple  # 1-based child indices, () is the root


def _key(label: Label) -> tuple:
    if isinstance(label, Var):
        return ("v", label.name)
    return ("f", label.symbol, len(label.children))


class Symbol(NamedTuple):
    name: str
    arity: int


class Signature:
    """A finite set of function symbols with fixed arities."""

    def __init__(self, symbols: Iterable[Symbol] | Mapping[str, int] = ()):
        if isinstance(symbols, Mapping):
            symbols = [Symbol(n, a) for n, a in symbols.items()]
        self._arity: dict[str, int] = {}
        for sym in symbols:
            name, arity = sym
            if not name:
                raise ValueError("symbol name must be nonempty")
            if arity < 0:
                raise ValueError(f"negative arity for {name}")
            if name in self._arity:
                raise ValueError(f"duplicate symbol {name}")
            self._arity[name] = arity

    def arity(self, name: str) -> int:
        return self._arity[name]

    def __contains__(self, name: object) -> bool:
        return name in self._arity

    def __iter__(self) -> Iterator[Symbol]:
        return (Symbol(n, a) for n, a in sorted(self._arity.items()))

    def __len__(self) -> int:
        return len(self._arity)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Signature) and self._arity == other._arity

    def as_dict(self) -> dict[str, int]:
        return dict(self._arity)

    def __repr__(self) -> str:
        inner = ", ".join(f"{n}/{a}" for n, a in sorted(self._arity.items()))
        return f"Signature({inner})"


@dataclass(frozen=True)
class TermGraph:
    """An arbitrary (not necessarily minimal) term graph.

    ``labels`` maps node keys to :class:`Fun` (whose ``children`` are node
    keys) or :class:`Var`.  Node keys may be any hashable values.
    """

    labels: Mapping[Hashable, Label]
    root: Hashable

    def reachable(self) -> list:
        seen = {self.root}
        order = [self.root]
        stack = [self.root]
        while stack:
            node = stack.pop()
            label = self.labels[node]
            if isinstance(label, Fun):
                for child in label.children:
                    if child not in seen:
                        seen.add(child)
                        order.append(child)
                        stack.append(child)
        return order


class Term:
    """An immutable canonical rational term.

    ``nodes[i]`` is the label of node ``i``; node 0 is the root.  Construct
    terms with :func:`parse_term`, :meth:`Term.fun`, :meth:`Term.var` or
    :func:`canonicalize`; the raw constructor trusts its input.
    """

    __slots__ = ("nodes", "_hash", "__dict__")

    def __init__(self, nodes: tuple):
        self.nodes = nodes
        self._hash = hash(nodes)

    @classmethod
    def fun(cls, symbol: str, *args: Term) -> Term:
        labels: dict = {"root": Fun(symbol, tuple((i, 0) for i in range(len(args))))}
        for i, arg in enumerate(args):
            for j, label in enumerate(arg.nodes):
                labels[(i, j)] = _retag(label, i)
        return canonicalize(TermGraph(labels, "root"))

    @classmethod
    def var(cls, name: str) -> Term:
        return cls((Var(name),))

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if not isinstance(other, Term):
            return NotImplemented
        return self._hash == other._hash and self.nodes == other.nodes

    def __hash__(self) -> int:
        return self._hash

    def __len__(self) -> int:
        return len(self.nodes)

    def __repr__(self) -> str:
        return f"Term({print_term(self)!r})"

    def __str__(self) -> str:
        return print_term(self)

    @property
    def label(self) -> Label:
        return self.nodes[0]

    @property
    def is_var(self) -> bool:
        return isinstance(self.nodes[0], Var)

    @property
    def head(self) -> str | None:
        """Root function symbol, or None for a variable."""
        label = self.nodes[0]
        return label.symbol if isinstance(label, Fun) else None

    @property
    def arity(self) -> int:
        label = self.nodes[0]
        return len(label.children) if isinstance(label, Fun) else 0

    @cached_property
    def args(self) -> tuple:
        label = self.nodes[0]
        if isinstance(label, Var):
            return ()
        return tuple(self.node_term(c) for c in label.children)

    def node_term(self, index: int) -> Term:
        """The canonical term rooted at node ``index``."""
        return self._node_terms[index]

    @cached_property
    def _node_terms(self) -> list:
        out: list = [self]
        for i in range(1, len(self.nodes)):
            out.append(Term(_renumber(self.nodes, i)[0]))
        return out

    def subterms(self) -> list:
        """All distinct subterms (one per node), node order."""
        return list(self._node_terms)

    def graph(self) -> TermGraph:
        return TermGraph(dict(enumerate(self.nodes)), 0)


def _retag(label: Label, tag) -> Label:
    if isinstance(label, Var):
        return label
    return Fun(label.symbol, tuple((tag, c) for c in label.children))


def _renumber(nodes, root, resolve=None) -> tuple:
    """Depth-first preorder renumbering of the part reachable from ``root``.

    Returns ``(new_nodes, mapping)`` where ``mapping`` sends old keys to new
    indices.  ``nodes`` is indexable by node key.
    """
    mapping: dict = {}
    order: list = []
    stack = [root]
    while stack:
        node = stack.pop()
        if node in mapping:
            continue
        mapping[node] = len(order)
        order.append(node)
        label = nodes[node]
        if isinstance(label, Fun):
            for child in reversed(label.children):
                if child not in mapping:
                    stack.append(child)
    new_nodes = []
    for node in order:
        label = nodes[node]
        if isinstance(label, Fun):
            label = Fun(label.symbol, tuple(mapping[c] for c in label.children))
        new_nodes.append(label)
    return tuple(new_nodes), mapping


def canonicalize(g: TermGraph) -> Term:
    """Minimize ``g`` by partition refinement and number it canonically."""
    keys = g.reachable()
    labels = g.labels
    block: dict = {}
    ids: dict = {}
    for k in keys:
        block[k] = ids.setdefault(_key(labels[k]), len(ids))
    count = len(ids)
    while True:
        ids = {}
        new_block = {}
        for k in keys:
            label = labels[k]
            if isinstance(label, Fun):
                sig = (block[k], tuple(block[c] for c in label.children))
            else:
                sig = (block[k],)
            new_block[k] = ids.setdefault(sig, len(ids))
        block = new_block
        if len(ids) == count:
            break
        count = len(ids)
    quotient: dict = {}
    for k in keys:
        b = block[k]
        if b not in quotient:
            label = labels[k]
            if isinstance(label, Fun):
                label = Fun(label.symbol, tuple(block[c] for c in label.children))
            quotient[b] = label
    nodes, _ = _renumber(quotient, block[g.root])
    return Term(nodes)


# -- concrete syntax ---------------------------------------------------------

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+|\#[^\n]*)
  | (?P<binder>%[0-9]+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<arrow>->)
  | (?P<punct>[(),.;])
    """,
    re.VERBOSE,
)


class Token(NamedTuple):
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list:
    tokens = []
    pos = 0
    line, line_start = 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise TermSyntaxError(
                f"unexpected character {text[pos]!r} at {line}:{pos - line_start + 1}"
            )
        kind = m.lastgroup
        if kind != "ws":
            tok_text = m.group()
            if kind == "punct" or kind == "arrow":
                kind = tok_text
            elif kind == "ident" and tok_text == "rec":
                kind = "rec"
            tokens.append(Token(kind, tok_text, line, pos - line_start + 1))
        else:
            nl = m.group().count("\n")
            if nl:
                line += nl
                line_start = m.start() + m.group().rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class TermParser:
    """Recursive-descent parser over a token list.

    ``arities`` is shared across every term parsed by one parser, so symbols
    used in several terms (e.g. all rules of a TRS) must agree.  With
    ``closed=True`` only symbols already in ``arities`` are accepted.
    """

    def __init__(self, tokens, arities=None, variables=(), closed=False):
        self.tokens = tokens
        self.pos = 0
        self.arities: dict[str, int] = dict(arities or {})
        self.variables = frozenset(variables)
        self.closed = closed

    @property
    def peek(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str) -> Token:
        tok = self.advance()
        if tok.kind != kind:
            shown = tok.text or "end of input"
            raise TermSyntaxError(f"expected {kind!r} but found {shown!r} at {tok.line}:{tok.col}")
        return tok

    def at_end(self) -> bool:
        return self.peek.kind == "eof"

    def parse_term(self) -> Term:
        self._labels: dict = {}
        self._alias: dict = {}
        root = self._term({})
        labels = {k: v for k, v in self._labels.items()}
        for k, label in labels.items():
            if isinstance(label, Fun):
                labels[k] = Fun(label.symbol, tuple(self._resolve(c) for c in label.children))
        return canonicalize(TermGraph(labels, self._resolve(root)))

    def _resolve(self, key):
        while key in self._alias:
            key = self._alias[key]
        return key

    def _fresh(self):
        return len(self._labels) + len(self._alias)

    def _term(self, binders: dict):
        # binders: name -> [placeholder key, guarded flag]
        tok = self.advance()
        if tok.kind == "rec":
            name_tok = self.advance()
            if name_tok.kind not in ("ident", "binder"):
                raise TermSyntaxError(f"expected binder name after 'rec' at {name_tok.line}:{name_tok.col}")
            self.expect(".")
            placeholder = ("rec", self._fresh(), name_tok.text)
            self._alias[placeholder] = None  # reserve
            inner = dict(binders)
            inner[name_tok.text] = (placeholder, False)
            body = self._term(inner)
            self._alias[placeholder] = body
            return body
        if tok.kind == "binder":
            if tok.text not in binders:
                raise TermSyntaxError(f"unbound name {tok.text} at {tok.line}:{tok.col}")
            return self._reference(tok, binders)
        if tok.kind != "ident":
            shown = tok.text or "end of input"
            raise TermSyntaxError(f"expected a term but found {shown!r} at {tok.line}:{tok.col}")
        name = tok.text
        if self.peek.kind == "(":
            if name in binders or name in self.variables:
                raise ArityError(f"{name} is a variable and cannot take arguments ({tok.line}:{tok.col})")
            self.advance()
            guarded = {n: (p, True) for n, (p, _) in binders.items()}
            children = [self._term(guarded)]
            while self.peek.kind == ",":
                self.advance()
                children.append(self._term(guarded))
            self.expect(")")
            return self._function(tok, children)
        if name in binders:
            return self._reference(tok, binders)
        if name in self.variables:
            key = self._fresh()
            self._labels[key] = Var(name)
            return key
        return self._function(tok, [])

    def _reference(self, tok, binders):
        placeholder, guarded = binders[tok.text]
        if not guarded:
            raise UnguardedBinderError(
                f"binder {tok.text} occurs unguarded at {tok.line}:{tok.col}"
            )
        return placeholder

    def _function(self, tok, children):
        name, arity = tok.text, len(children)
        known = self.arities.get(name)
        if known is None:
            if self.closed:
                raise TermSyntaxError(f"unknown symbol or variable {name} at {tok.line}:{tok.col}")
            self.arities[name] = arity
        elif known != arity:
            raise ArityError(
                f"symbol {name} used with {arity} arguments but has arity {known} ({tok.line}:{tok.col})"
            )
        key = self._fresh()
        self._labels[key] = Fun(name, tuple(children))
        return key


def parse_term(text: str, sig: Signature | None = None, vars: Iterable[str] = ()) -> Term:
    """Parse one term.

    If ``sig`` is given, every function symbol must be declared there with
    the same arity and any other identifier must be in ``vars``.  Without a
    signature, arities are inferred and must be used consistently;
    identifiers not in ``vars`` are constants.
    """
    parser = TermParser(
        tokenize(text),
        arities=sig.as_dict() if sig is not None else None,
        variables=vars,
        closed=sig is not None,
    )
    term = parser.parse_term()
    if not parser.at_end():
        tok = parser.peek
        raise TermSyntaxError(f"trailing input {tok.text!r} at {tok.line}:{tok.col}")
    return term


def _reaches(nodes, sources, target, blocked) -> bool:
    seen = set(blocked)
    stack = [s for s in sources if s not in seen]
    while stack:
        n = stack.pop()
        if n == target:
            return True
        if n in seen:
            continue
        seen.add(n)
        label = nodes[n]
        if isinstance(label, Fun):
            stack.extend(c for c in label.children if c not in seen)
    return False


def print_term(t: Term) -> str:
    """Render ``t``; ``rec`` binders appear exactly where a cycle re-enters."""
    nodes = t.nodes
    counter = [0]

    def render(n, ancestors: dict) -> str:
        if n in ancestors:
            return ancestors[n]
        label = nodes[n]
        if isinstance(label, Var):
            return label.name
        if not label.children:
            return label.symbol
        binder = None
        if _reaches(nodes, label.children, n, ancestors):
            binder = f"%{counter[0]}"
            counter[0] += 1
        inner = dict(ancestors)
        inner[n] = binder
        body = f"{label.symbol}({', '.join(render(c, inner) for c in label.children)})"
        return f"rec {binder} . {body}" if binder else body

    return render(0, {})


# -- observations ------------------------------------------------------------


def _as_term(t) -> Term:
    return canonicalize(t) if isinstance(t, TermGraph) else t


def bisimilar(s, t) -> bool:
    """Equality of the infinite unfoldings.

    Accepts canonical terms or raw :class:`TermGraph` values.  On canonical
    terms a bisimulation between the roots exists iff the minimal graphs are
    identical, so this is a structural comparison after canonicalization.
    """
    return _as_term(s) == _as_term(t)


def _same_label(a: Label, b: Label) -> bool:
    return _key(a) == _key(b)


def first_difference(s: Term, t: Term) -> float:
    """The first tree level at which ``s`` and ``t`` differ (inf if none)."""
    if s == t:
        return math.inf
    seen = {(0, 0)}
    frontier = [(0, 0)]
    level = 0
    while frontier:
        nxt = []
        for a, b in frontier:
            la, lb = s.nodes[a], t.nodes[b]
            if not _same_label(la, lb):
                return level
            if isinstance(la, Fun):
                for pair in zip(la.children, lb.children):
                    if pair not in seen:
                        seen.add(pair)
                        nxt.append(pair)
        frontier = nxt
        level += 1
    return math.inf


def truncated_bisimilar(s: Term, t: Term, d: int) -> bool:
    """Agreement of ``s`` and ``t`` on tree levels ``0 .. d-1``."""
    if d <= 0:
        return True
    # a node pair first reached at level k is re-checked identically at
    # every later level, so the BFS over pairs decides all depths at once
    return first_difference(_as_term(s), _as_term(t)) >= d


def distance(s: Term, t: Term) -> float:
    """Exponent ``n`` of the metric ``2**-n``; ``math.inf`` means distance 0."""
    return first_difference(_as_term(s), _as_term(t))


def metric(s: Term, t: Term) -> float:
    return 2.0 ** -distance(s, t)


def subterm_at(t: Term, p: Iterable[int]) -> Term:
    return t.node_term(node_at(t, p))


def node_at(t: Term, p: Iterable[int]) -> int:
    node = 0
    for depth, i in enumerate(p):
        label = t.nodes[node]
        n = len(label.children) if isinstance(label, Fun) else 0
        if not 1 <= i <= n:
            raise PositionError(f"index {i} at depth {depth} is outside arity {n}")
        node = label.children[i - 1]
    return node


def variables_of(t: Term) -> frozenset:
    return frozenset(l.name for l in t.nodes if isinstance(l, Var))


def apply_substitution(t: Term, sigma: Mapping[str, Term]) -> Term:
    """Graft ``sigma(x)`` in place of every occurrence of variable ``x``."""
    if not any(isinstance(l, Var) and l.name in sigma for l in t.nodes):
        return t
    labels: dict = {}
    redirect: dict = {}
    for i, label in enumerate(t.nodes):
        if isinstance(label, Var) and label.name in sigma:
            redirect[("t", i)] = (label.name, 0)
    for i, label in enumerate(t.nodes):
        key = ("t", i)
        if key in redirect:
            continue
        if isinstance(label, Fun):
            kids = tuple(redirect.get(("t", c), ("t", c)) for c in label.children)
            label = Fun(label.symbol, kids)
        labels[key] = label
    for name in {l.name for l in t.nodes if isinstance(l, Var) and l.name in sigma}:
        for j, label in enumerate(sigma[name].nodes):
            labels[(name, j)] = _retag(label, name)
    root = redirect.get(("t", 0), ("t", 0))
    return canonicalize(TermGraph(labels, root))


def replace_at(t: Term, p: Iterable[int], replacement: Term) -> Term:
    """Replace the subterm at tree position ``p`` only.

    The nodes along ``p`` are copied first, so other tree positions that
    share the addressed node are left untouched.
    """
    p = tuple(p)
    node_at(t, p)
    labels: dict = {("t", i): _retag(l, "t") for i, l in enumerate(t.nodes)}
    node = 0
    for depth, i in enumerate(p):
        label = t.nodes[node]
        kids = [("t", c) for c in label.children]
        kids[i - 1] = ("p", depth + 1)
        labels[("p", depth)] = Fun(label.symbol, tuple(kids))
        node = label.children[i - 1]
    for j, label in enumerate(replacement.nodes):
        labels[("r", j)] = _retag(label, "r")
    top = ("p", len(p))
    labels[top] = labels[("r", 0)]
    root = ("p", 0)
    return canonicalize(TermGraph(labels, root))


def positions_to_depth(t: Term, d: int) -> set:
    """All tree positions of length ``< d``."""
    out = set()
    frontier = [((), 0)]
    for _ in range(d):
        nxt = []
        for pos, node in frontier:
            out.add(pos)
            label = t.nodes[node]
            if isinstance(label, Fun):
                for i, c in enumerate(label.children, start=1):
                    nxt.append((pos + (i,), c))
        frontier = nxt
    return out


def term_depth(t: Term) -> float:
    """Height of the tree unfolding; ``math.inf`` for infinite terms."""
    nodes = t.nodes
    memo: dict = {}
    active: set = set()

    def height(n):
        if n in memo:
            return memo[n]
        if n in active:
            return math.inf
        active.add(n)
        label = nodes[n]
        h = 1
        if isinstance(label, Fun) and label.children:
            h = 1 + max(height(c) for c in label.children)
        active.discard(n)
        memo[n] = h
        return h

    return height(0)


def format_position(p: Position) -> str:
    return ".".join(str(i) for i in p) if p else "ε"


def parse_position(text: str) -> Position:
    text = text.strip()
    if text in ("", "ε", "e", "eps"):
        return ()
    try:
        p = tuple(int(x) for x in text.split("."))
    except ValueError:
        raise PositionError(f"bad position {text!r}") from None
    if any(i < 1 for i in p):
        raise PositionError(f"positions are 1-based: {text!r}")
    return p

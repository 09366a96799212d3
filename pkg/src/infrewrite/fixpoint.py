"""Nested least/greatest fixed points on the relation lattice over a finite universe.

All relations live on a :class:`Universe`, a finite set of canonical terms
closed under immediate subterms, and are stored as dense boolean matrices.
Because the lattice of such matrices is finite and every operator used here
is monotone, Kleene iteration reaches the exact fixed points.

Root steps that leave the universe cannot be represented; they are dropped
and listed in an :class:`EscapeReport`, so computed relations are sound
under-approximations of the unrestricted ones.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, NamedTuple

import numpy as np

from .certificate import (
    Certificate,
    Id,
    IdStep,
    Lift,
    LiftRef,
    Mode,
    Root,
    Split,
)
from .terms import Term, TermParser, TermSyntaxError, tokenize
from .trs import TRS, root_step


class Universe:
    """An ordered, duplicate-free, subterm-closed set of terms."""

    def __init__(self, terms: Iterable[Term]):
        self.terms = tuple(terms)
        self._index = {}
        for i, t in enumerate(self.terms):
            if t in self._index:
                raise ValueError(f"duplicate term {t} in universe")
            self._index[t] = i
        for t in self.terms:
            for child in t.args:
                if child not in self._index:
                    raise ValueError(f"universe is not closed: {child} (child of {t}) is missing")

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def __contains__(self, t) -> bool:
        return t in self._index

    def __getitem__(self, i: int) -> Term:
        return self.terms[i]

    def index(self, t: Term) -> int:
        return self._index[t]

    def __eq__(self, other) -> bool:
        return isinstance(other, Universe) and self.terms == other.terms

    def __hash__(self) -> int:
        return hash(self.terms)

    def __repr__(self) -> str:
        return f"Universe([{', '.join(str(t) for t in self.terms)}])"

    @cached_property
    def lift_table(self) -> list:
        """Groups ``(us, vs, child_us, child_vs)`` of same-head pairs by arity."""
        groups: dict = {}
        for i, s in enumerate(self.terms):
            if s.is_var or s.arity == 0:
                continue
            for j, t in enumerate(self.terms):
                if t.head == s.head and t.arity == s.arity:
                    groups.setdefault(s.arity, []).append((i, j))
        table = []
        for arity, pairs in sorted(groups.items()):
            us = np.array([i for i, _ in pairs], dtype=np.intp)
            vs = np.array([j for _, j in pairs], dtype=np.intp)
            cu = np.array([[self._index[c] for c in self.terms[i].args] for i, _ in pairs], dtype=np.intp)
            cv = np.array([[self._index[c] for c in self.terms[j].args] for _, j in pairs], dtype=np.intp)
            table.append((us, vs, cu, cv))
        return table


def close_universe(seeds: Iterable[Term]) -> Universe:
    """Seeds (deduplicated, in order) followed by their missing subterms."""
    order: list = []
    seen: set = set()
    queue = deque()
    for t in seeds:
        if t not in seen:
            seen.add(t)
            order.append(t)
            queue.append(t)
    while queue:
        t = queue.popleft()
        for sub in t.subterms():
            if sub not in seen:
                seen.add(sub)
                order.append(sub)
    return Universe(order)


def parse_universe(text: str, trs: TRS | None = None, extra_vars=()) -> Universe:
    """One term per line (``#`` comments); the result is closed."""
    arities = trs.signature.as_dict() if trs is not None else {}
    variables = (trs.declared_vars if trs is not None else frozenset()) | frozenset(extra_vars)
    terms = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parser = TermParser(tokenize(line), arities=arities, variables=variables)
        terms.append(parser.parse_term())
        if not parser.at_end():
            raise TermSyntaxError(f"trailing input in universe line {line!r}")
        arities = parser.arities
    return close_universe(terms)


@dataclass(frozen=True, eq=False)
class Relation:
    universe: Universe
    matrix: np.ndarray

    def __post_init__(self):
        n = len(self.universe)
        m = np.array(self.matrix, dtype=bool)
        if m.shape != (n, n):
            raise ValueError(f"matrix shape {m.shape} does not match universe size {n}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @classmethod
    def empty(cls, universe: Universe) -> Relation:
        n = len(universe)
        return cls(universe, np.zeros((n, n), dtype=bool))

    @classmethod
    def full(cls, universe: Universe) -> Relation:
        n = len(universe)
        return cls(universe, np.ones((n, n), dtype=bool))

    @classmethod
    def identity(cls, universe: Universe) -> Relation:
        return cls(universe, np.eye(len(universe), dtype=bool))

    @classmethod
    def from_pairs(cls, universe: Universe, pairs: Iterable[tuple]) -> Relation:
        m = np.zeros((len(universe), len(universe)), dtype=bool)
        for s, t in pairs:
            m[universe.index(s), universe.index(t)] = True
        return cls(universe, m)

    def __contains__(self, pair) -> bool:
        s, t = pair
        if s not in self.universe or t not in self.universe:
            return False
        return bool(self.matrix[self.universe.index(s), self.universe.index(t)])

    def pairs(self) -> list:
        terms = self.universe.terms
        return [(terms[i], terms[j]) for i, j in zip(*np.nonzero(self.matrix))]

    def __len__(self) -> int:
        return int(self.matrix.sum())

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Relation)
            and self.universe == other.universe
            and np.array_equal(self.matrix, other.matrix)
        )

    def __le__(self, other: Relation) -> bool:
        return not np.any(self.matrix & ~other.matrix)

    def __or__(self, other: Relation) -> Relation:
        return Relation(self.universe, self.matrix | other.matrix)

    def __and__(self, other: Relation) -> Relation:
        return Relation(self.universe, self.matrix & other.matrix)

    def inverse(self) -> Relation:
        return Relation(self.universe, self.matrix.T)

    def compose(self, other: Relation) -> Relation:
        """``self ; other``: first self, then other."""
        return Relation(self.universe, _compose(self.matrix, other.matrix))

    def is_reflexive(self) -> bool:
        return bool(np.all(np.diag(self.matrix)))

    def is_transitive(self) -> bool:
        return not np.any(_compose(self.matrix, self.matrix) & ~self.matrix)

    def to_text(self) -> str:
        terms = self.universe.terms
        return "".join(
            f"{terms[i]}  ~>  {terms[j]}\n" for i, j in zip(*np.nonzero(self.matrix))
        )


def _compose(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return (a.astype(np.int32) @ b.astype(np.int32)) > 0


def _closure(m: np.ndarray) -> np.ndarray:
    """Reflexive-transitive closure (Warshall, one rank-1 update per pivot)."""
    m = m.copy()
    for k in range(m.shape[0]):
        m |= np.outer(m[:, k], m[k, :])
    m |= np.eye(m.shape[0], dtype=bool)
    return m


def _lift(universe: Universe, m: np.ndarray) -> np.ndarray:
    out = np.eye(len(universe), dtype=bool)
    for us, vs, cu, cv in universe.lift_table:
        ok = np.all(m[cu, cv], axis=1)
        out[us[ok], vs[ok]] = True
    return out


class Escape(NamedTuple):
    source: Term
    rule_index: int
    result: Term


@dataclass(frozen=True)
class EscapeReport:
    entries: tuple = ()

    def __bool__(self) -> bool:
        return bool(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


def _root_steps(universe: Universe, trs: TRS):
    """Root-step matrix, smallest rule index per edge, and escapes."""
    n = len(universe)
    m = np.zeros((n, n), dtype=bool)
    rule_of: dict = {}
    escapes = []
    for i, u in enumerate(universe.terms):
        for r in range(len(trs.rules)):
            v = root_step(u, trs, r)
            if v is None:
                continue
            if v in universe:
                j = universe.index(v)
                m[i, j] = True
                rule_of.setdefault((i, j), r)
            else:
                escapes.append(Escape(u, r, v))
    return m, rule_of, EscapeReport(tuple(escapes))


def root_step_relation(universe: Universe, trs: TRS) -> tuple:
    m, _, escapes = _root_steps(universe, trs)
    return Relation(universe, m), escapes


def lift_relation(r: Relation) -> Relation:
    return Relation(r.universe, _lift(r.universe, r.matrix))


def rtc_relation(r: Relation) -> Relation:
    return Relation(r.universe, _closure(r.matrix))


class FixpointError(RuntimeError):
    pass


def _cap(universe: Universe) -> int:
    return len(universe) ** 2 + 1


def gfp_relation(universe: Universe, trs: TRS, mode: Mode | str) -> Relation:
    """Bi-infinite rewriting or infinitary equational reasoning on ``universe``.

    Iterates ``y <- (base | lift(y))*`` downward from the full relation, where
    ``base`` is the root-step relation (``biinf``) or its symmetric closure
    (``eqinf``).
    """
    mode = Mode(mode)
    if mode is Mode.IRED:
        raise ValueError("use lfp_ired for the ired relation")
    base, _, _ = _root_steps(universe, trs)
    if mode is Mode.EQINF:
        base = base | base.T
    y = np.ones((len(universe), len(universe)), dtype=bool)
    for _ in range(_cap(universe)):
        ny = _closure(base | _lift(universe, y))
        if np.array_equal(ny, y):
            return Relation(universe, y)
        y = ny
    raise FixpointError("greatest fixed point did not stabilize within the lattice height")


def _inner_gfp(universe: Universe, prefix: np.ndarray) -> np.ndarray:
    """``nu y. prefix ; lift(y)``, downward from the full relation."""
    y = np.ones_like(prefix)
    for _ in range(_cap(universe)):
        ny = _compose(prefix, _lift(universe, y))
        if np.array_equal(ny, y):
            return y
        y = ny
    raise FixpointError("inner greatest fixed point did not stabilize")


@dataclass(frozen=True, eq=False)
class IredFixpoint:
    """The least fixed point together with its Kleene stages.

    ``stages[k]`` is the k-th outer approximation (``stages[0]`` is empty);
    the last stage is the fixed point.
    """

    universe: Universe
    trs: TRS
    stages: tuple
    root_steps: np.ndarray = field(repr=False)
    rule_of: dict = field(repr=False)
    escapes: EscapeReport = EscapeReport()

    @property
    def relation(self) -> Relation:
        return Relation(self.universe, self.stages[-1])

    def stage_of(self, s: Term, t: Term) -> int | None:
        i, j = self.universe.index(s), self.universe.index(t)
        for k, stage in enumerate(self.stages):
            if stage[i, j]:
                return k
        return None

    def prefix(self, k: int) -> np.ndarray:
        """``(root steps | lift(stage k))*``."""
        return _closure(self.root_steps | _lift(self.universe, self.stages[k]))

    def witness(self, s: Term, t: Term) -> tuple:
        """A shortest decomposition of ``(s, t)`` at its first stage ``k``.

        Returns ``(k, path, last)``: ``path`` is a list of ``(kind, i, j)``
        edges with kind ``'root'`` or ``'lift'`` (lifts over stage ``k-1``),
        from ``s`` to some ``w``; ``last`` is ``(w, t)``, related by
        ``lift(stage k)``.
        """
        k = self.stage_of(s, t)
        if k is None:
            raise KeyError(f"({s}, {t}) is not in the relation")
        uni = self.universe
        si, ti = uni.index(s), uni.index(t)
        below = _lift(uni, self.stages[k - 1])
        final = _lift(uni, self.stages[k])
        pred = {si: None}
        queue = deque([si])
        while queue:
            u = queue.popleft()
            if final[u, ti]:
                path = []
                while pred[u] is not None:
                    p, kind = pred[u]
                    path.append((kind, p, u))
                    u = p
                path.reverse()
                w = path[-1][2] if path else si
                return k, path, (w, ti)
            for v in range(len(uni)):
                if v in pred or v == u:
                    continue
                if self.root_steps[u, v]:
                    pred[v] = (u, "root")
                elif below[u, v]:
                    pred[v] = (u, "lift")
                else:
                    continue
                queue.append(v)
        raise FixpointError(f"no decomposition found for ({s}, {t}) at stage {k}")


def ired_fixpoint(universe: Universe, trs: TRS) -> IredFixpoint:
    """``mu x. nu y. (root steps | lift(x))* ; lift(y)`` with its stages."""
    steps, rule_of, escapes = _root_steps(universe, trs)
    n = len(universe)
    x = np.zeros((n, n), dtype=bool)
    stages = [x]
    for _ in range(_cap(universe)):
        prefix = _closure(steps | _lift(universe, x))
        nx = _inner_gfp(universe, prefix)
        if np.array_equal(nx, x):
            for s in stages:
                s.setflags(write=False)
            return IredFixpoint(universe, trs, tuple(stages), steps, rule_of, escapes)
        x = nx
        stages.append(x)
    raise FixpointError("least fixed point did not stabilize within the lattice height")


def lfp_ired(universe: Universe, trs: TRS) -> Relation:
    return ired_fixpoint(universe, trs).relation


def ired_operator(universe: Universe, trs: TRS, x: Relation) -> Relation:
    """The outer operator ``x -> nu y. (root steps | lift(x))* ; lift(y)``."""
    steps, _, _ = _root_steps(universe, trs)
    prefix = _closure(steps | _lift(universe, x.matrix))
    return Relation(universe, _inner_gfp(universe, prefix))


def check_post_fixed_point(universe: Universe, trs: TRS, x: Relation, r: Relation) -> bool:
    """Whether ``r <= (root steps | lift(x))* ; lift(r)``."""
    steps, _, _ = _root_steps(universe, trs)
    rhs = _compose(_closure(steps | _lift(universe, x.matrix)), _lift(universe, r.matrix))
    return not np.any(r.matrix & ~rhs)


def extract_certificate(universe: Universe, trs: TRS, s: Term, t: Term,
                        fixpoint: IredFixpoint | None = None) -> Certificate:
    """Build a valid ``ired`` certificate for a pair of the least fixed point.

    Each pair gets one Split node built from its shortest decomposition at
    its first stage.  Lifts before the last step relate pairs of strictly
    smaller stage and are marked; the final lift stays unmarked and may
    point back into the graph, so only unmarked edges close cycles.
    """
    fp = fixpoint if fixpoint is not None else ired_fixpoint(universe, trs)
    if s not in universe or t not in universe:
        raise KeyError(f"({s}, {t}) is not in the universe")
    if fp.stage_of(s, t) is None:
        raise KeyError(f"({s}, {t}) is not in the relation")
    terms = universe.terms
    nodes: dict = {}
    split_id: dict = {}
    lift_id: dict = {}
    pending: deque = deque()
    id_node = [None]

    _counter = itertools.count()

    def split_for(i, j):
        if (i, j) not in split_id:
            split_id[(i, j)] = next(_counter)
            pending.append((i, j))
        return split_id[(i, j)]

    def child_for(i, j):
        if i == j:
            if id_node[0] is None:
                id_node[0] = next(_counter)
                nodes[id_node[0]] = Id()
            return id_node[0]
        return split_for(i, j)

    def lift_for(i, j):
        if (i, j) not in lift_id:
            nid = next(_counter)
            lift_id[(i, j)] = nid
            kids = [
                child_for(universe.index(a), universe.index(b))
                for a, b in zip(terms[i].args, terms[j].args)
            ]
            nodes[nid] = Lift(kids)
        return lift_id[(i, j)]

    root = split_for(universe.index(s), universe.index(t))
    while pending:
        i, j = pending.popleft()
        _, path, (w, _) = fp.witness(terms[i], terms[j])
        seq = [terms[i]]
        steps = []
        for kind, a, b in path:
            if kind == "root":
                steps.append(Root(fp.rule_of[(a, b)]))
            else:
                steps.append(LiftRef(lift_for(a, b), True))
            seq.append(terms[b])
        if w == j:
            steps.append(IdStep())
        else:
            steps.append(LiftRef(lift_for(w, j), False))
        seq.append(terms[j])
        nodes[split_id[(i, j)]] = Split(seq, steps)
    return Certificate(Mode.IRED, nodes, root)

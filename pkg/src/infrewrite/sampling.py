"""Random signatures, terms, TRSs, universes and certificates for testing.

Everything takes an explicit :class:`random.Random` so runs are reproducible.
"""

from __future__ import annotations

import itertools
import random

from .certificate import Certificate, Id, IdStep, Lift, LiftRef, Mode, Root, Split
from .fixpoint import Universe, close_universe
from .terms import Fun, Signature, Term, TermGraph, Var, apply_substitution, canonicalize
from .trs import TRS, Rule, RuleError, match_root, root_step

SYMBOL_NAMES = "fghCab"
VAR_NAMES = ("x", "y")


def random_signature(rng: random.Random, max_symbols: int = 3, max_arity: int = 2,
                     need_function: bool = False) -> Signature:
    """At least one constant, so finite terms always exist."""
    n = rng.randint(2 if need_function else 1, max_symbols)
    names = rng.sample(SYMBOL_NAMES, n)
    arities = {name: rng.randint(0, max_arity) for name in names}
    arities[names[0]] = 0
    if need_function and all(a == 0 for a in arities.values()):
        arities[names[1]] = rng.randint(1, max_arity)
    return Signature(arities)


def random_graph(rng: random.Random, sig: Signature, n_nodes: int,
                 variables=(), cyclic: bool = True, var_prob: float = 0.25) -> TermGraph:
    """A term graph on ``n_nodes`` nodes rooted at 0, not necessarily minimal.

    With ``cyclic=False`` children always have larger indices, so the term
    is finite.  Nodes without room for children become constants or
    variables.
    """
    symbols = list(sig)
    constants = [s for s in symbols if s.arity == 0]
    labels = {}
    for i in range(n_nodes):
        later = list(range(i + 1, n_nodes))
        targets = list(range(n_nodes)) if cyclic else later
        if variables and i > 0 and rng.random() < var_prob:
            labels[i] = Var(rng.choice(list(variables)))
            continue
        choices = [s for s in symbols if s.arity == 0 or targets]
        if not choices:
            labels[i] = Var(rng.choice(list(variables))) if variables else Fun(constants[0].name, ())
            continue
        sym = rng.choice(choices)
        labels[i] = Fun(sym.name, tuple(rng.choice(targets) for _ in range(sym.arity)))
    return TermGraph(labels, 0)


def random_term(rng: random.Random, sig: Signature, max_nodes: int = 4,
                variables=(), cyclic_prob: float = 0.4) -> Term:
    n = rng.randint(1, max_nodes)
    cyclic = rng.random() < cyclic_prob
    return canonicalize(random_graph(rng, sig, n, variables, cyclic))


def random_rule(rng: random.Random, sig: Signature, variables=VAR_NAMES) -> Rule:
    while True:
        lhs = random_term(rng, sig, 3, variables, cyclic_prob=0.15)
        if lhs.is_var:
            continue
        lvars = tuple(sorted({label.name for label in lhs.nodes if isinstance(label, Var)}))
        rhs = random_term(rng, sig, 4, lvars, cyclic_prob=0.4)
        try:
            return Rule(lhs, rhs)
        except RuleError:
            continue


def random_trs(rng: random.Random, sig: Signature | None = None, max_rules: int = 4) -> TRS:
    sig = sig or random_signature(rng)
    rules = [random_rule(rng, sig) for _ in range(rng.randint(1, max_rules))]
    return TRS(sig, tuple(rules), frozenset(VAR_NAMES))


def random_universe(rng: random.Random, sig: Signature, trs: TRS, max_size: int = 8) -> Universe:
    """A closed universe grown from random seeds and their root-step successors."""
    members: list = []

    def try_add(t):
        candidate = close_universe(members + [t])
        if len(candidate) <= max_size:
            members[:] = list(candidate)
            return True
        return False

    goal = rng.randint(2, max_size)
    for _ in range(12):
        if len(members) >= goal:
            break
        try_add(random_term(rng, sig, 4))
    frontier = list(members)
    for _ in range(6):
        if not frontier:
            break
        u = frontier.pop(rng.randrange(len(frontier)))
        for i in range(len(trs.rules)):
            v = root_step(u, trs, i)
            if v is not None and v not in members and try_add(v):
                frontier.append(v)
    return close_universe(members)


def random_instance(rng: random.Random, max_size: int = 8) -> tuple:
    """``(trs, universe)`` within the test size limits."""
    sig = random_signature(rng)
    trs = random_trs(rng, sig)
    return trs, random_universe(rng, sig, trs, max_size)


# -- certificates ------------------------------------------------------------


class _Builder:
    """Grows an ``ired`` certificate from a source term.

    Targets of splits that are still open (reachable through unmarked final
    lifts only) may be referenced before they are known; they live in a
    symbolic term graph and are solved together once the outermost open
    split is finished.  Back references are only made along unmarked final
    lifts, so marked edges never close a cycle.
    """

    def __init__(self, rng: random.Random, trs: TRS, max_nodes: int):
        self.rng = rng
        self.trs = trs
        self.max_nodes = max_nodes
        self.nodes: dict = {}
        self.sources: dict = {}
        self.labels: dict = {}
        self.target_key: dict = {}
        self.targets: dict = {}
        self._tags = itertools.count()
        self.id_node = None

    def new_id(self):
        return len(self.nodes)

    def room(self) -> int:
        return self.max_nodes - len(self.nodes)

    def embed(self, t: Term):
        tag = next(self._tags)
        for i, label in enumerate(t.nodes):
            if isinstance(label, Fun):
                label = Fun(label.symbol, tuple((tag, c) for c in label.children))
            self.labels[(tag, i)] = label
        return (tag, 0)

    def get_id(self):
        if self.id_node is None:
            self.id_node = self.new_id()
            self.nodes[self.id_node] = Id()
        return self.id_node

    def marked_lift(self, u: Term):
        """A marked lift from ``u``; returns ``(lift node, new term)`` or None."""
        if u.is_var or u.arity == 0 or self.room() < 2:
            return None
        lid = self.new_id()
        self.nodes[lid] = None
        children, args = [], []
        for arg in u.args:
            if self.room() >= 1 and self.rng.random() < 0.5:
                sid = self.split(arg, open_=())
                if sid is not None:
                    children.append(sid)
                    args.append(self.targets[sid])
                    continue
            children.append(self.get_id())
            args.append(arg)
        self.nodes[lid] = Lift(tuple(children))
        return lid, Term.fun(u.head, *args)

    def split(self, u: Term, open_: tuple):
        """Build a split from ``u``; returns its id (target in ``targets`` once solved)."""
        if self.room() < 1:
            return None
        sid = self.new_id()
        self.nodes[sid] = None
        self.sources[sid] = u
        terms, steps = [u], []
        for _ in range(self.rng.randint(0, 3)):
            cur = terms[-1]
            roll = self.rng.random()
            applicable = [i for i, r in enumerate(self.trs.rules) if match_root(r.lhs, cur) is not None]
            if applicable and roll < 0.6:
                i = self.rng.choice(applicable)
                terms.append(root_step(cur, self.trs, i))
                steps.append(Root(i))
            else:
                made = self.marked_lift(cur)
                if made is None:
                    continue
                lid, nxt = made
                terms.append(nxt)
                steps.append(LiftRef(lid, True))
        last = terms[-1]
        open_ = open_ + (sid,)
        if last.is_var or last.arity == 0 or self.room() < 1 or self.rng.random() < 0.15:
            steps.append(IdStep())
            self.nodes[sid] = Split(tuple(terms + [last]), tuple(steps))
            self.target_key[sid] = self.embed(last)
        else:
            lid = self.new_id()
            self.nodes[lid] = None
            children, keys = [], []
            for arg in last.args:
                back = [o for o in open_ if self.sources[o] == arg]
                roll = self.rng.random()
                if back and roll < 0.5:
                    o = self.rng.choice(back)
                    children.append(o)
                    keys.append(("T", o))
                    continue
                if roll < 0.8 and self.room() >= 1:
                    cid = self.split(arg, open_)
                    if cid is not None:
                        children.append(cid)
                        keys.append(self.target_key[cid])
                        continue
                children.append(self.get_id())
                keys.append(self.embed(arg))
            self.nodes[lid] = Lift(tuple(children))
            steps.append(LiftRef(lid, False))
            self.labels[("T", sid)] = Fun(last.head, tuple(keys))
            self.target_key[sid] = ("T", sid)
            # the target term is filled in once every open split is solved
            self.nodes[sid] = (tuple(terms), tuple(steps))
        if len(open_) == 1:
            self.solve()
        return sid

    def solve(self):
        for nid, node in list(self.nodes.items()):
            if nid in self.targets or nid not in self.target_key:
                continue
            target = canonicalize(TermGraph(self.labels, self.target_key[nid]))
            self.targets[nid] = target
            if isinstance(node, tuple):
                terms, steps = node
                self.nodes[nid] = Split(terms + (target,), steps)


def random_certificate(rng: random.Random, trs: TRS, source: Term, max_nodes: int = 6) -> Certificate | None:
    """A candidate ``ired`` certificate from ``source``, or None if it got too big."""
    b = _Builder(rng, trs, max_nodes)
    root = b.split(source, open_=())
    if root is None or len(b.nodes) > max_nodes:
        return None
    if any(not isinstance(n, (Split, Lift, Id)) for n in b.nodes.values()):
        return None
    return Certificate(Mode.IRED, dict(b.nodes), root)


def random_source(rng: random.Random, trs: TRS, tries: int = 5) -> Term:
    """A ground term, often an instance of some left-hand side.

    Terms with a non-constant head are preferred, since only those admit lifts.
    """
    sig = trs.signature
    for _ in range(tries):
        if trs.rules and rng.random() < 0.5:
            rule = rng.choice(trs.rules)
            sigma = {label.name: random_term(rng, sig, 3) for label in rule.lhs.nodes if isinstance(label, Var)}
            t = apply_substitution(rule.lhs, sigma)
        else:
            t = random_term(rng, sig, 4)
        if t.arity > 0:
            return t
    return t


def random_variant(rng: random.Random, g: TermGraph, max_copies: int = 3) -> TermGraph:
    """A bisimilar graph: nodes are duplicated and edges re-pointed among copies."""
    keys = g.reachable()
    copies = {k: rng.randint(1, max_copies) for k in keys}
    labels = {}
    for k in keys:
        label = g.labels[k]
        for c in range(copies[k]):
            if isinstance(label, Fun):
                label_c = Fun(label.symbol, tuple((ch, rng.randrange(copies[ch])) for ch in label.children))
            else:
                label_c = label
            labels[(k, c)] = label_c
    return TermGraph(labels, (g.root, rng.randrange(copies[g.root])))

"""Rewrite rules over rational terms: matching, steps, redexes, replay."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .terms import (
    Fun,
    Signature,
    Term,
    TermError,
    TermParser,
    TermSyntaxError,
    Var,
    apply_substitution,
    node_at,
    positions_to_depth,
    replace_at,
    term_depth,
    tokenize,
    variables_of,
)


class RuleError(TermError):
    pass


class StepError(ValueError):
    pass


class ReplayError(StepError):
    def __init__(self, index: int, reason: str):
        super().__init__(f"step {index}: {reason}")
        self.index = index
        self.reason = reason


@dataclass(frozen=True)
class Rule:
    lhs: Term
    rhs: Term

    def __post_init__(self):
        if self.lhs.is_var:
            raise RuleError(f"left-hand side {self.lhs} is a variable")
        extra = variables_of(self.rhs) - variables_of(self.lhs)
        if extra:
            raise RuleError(f"right-hand side variables {sorted(extra)} do not occur on the left")

    def __str__(self) -> str:
        return f"{self.lhs} -> {self.rhs}"


@dataclass(frozen=True)
class TRS:
    signature: Signature
    rules: tuple
    declared_vars: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "rules", tuple(self.rules))
        object.__setattr__(self, "declared_vars", frozenset(self.declared_vars))

    def __len__(self) -> int:
        return len(self.rules)

    @classmethod
    def from_rules(cls, rules: Iterable[Rule], declared_vars: Iterable[str] = ()) -> TRS:
        """Build a TRS, inferring the signature from the rule terms."""
        rules = tuple(rules)
        arities: dict[str, int] = {}
        for rule in rules:
            for side in (rule.lhs, rule.rhs):
                for label in side.nodes:
                    if isinstance(label, Fun):
                        known = arities.setdefault(label.symbol, len(label.children))
                        if known != len(label.children):
                            raise RuleError(f"inconsistent arity for {label.symbol}")
        found = set(declared_vars)
        for rule in rules:
            found |= variables_of(rule.lhs)
        return cls(Signature(arities), rules, frozenset(found))

    def term_parser(self, text: str, extra_vars: Iterable[str] = ()) -> TermParser:
        return TermParser(
            tokenize(text),
            arities=self.signature.as_dict(),
            variables=self.declared_vars | frozenset(extra_vars),
        )

    def parse(self, text: str, extra_vars: Iterable[str] = ()) -> Term:
        """Parse a term over this TRS's variables; new symbols are allowed."""
        parser = self.term_parser(text, extra_vars)
        term = parser.parse_term()
        if not parser.at_end():
            tok = parser.peek
            raise TermSyntaxError(f"trailing input {tok.text!r} at {tok.line}:{tok.col}")
        return term

    def __str__(self) -> str:
        head = f"vars {' '.join(sorted(self.declared_vars))} ;\n" if self.declared_vars else ""
        return head + "".join(f"{rule} ;\n" for rule in self.rules)


@dataclass(frozen=True)
class RewriteStep:
    position: tuple
    rule_index: int
    substitution: Mapping[str, Term] | None = field(default=None, compare=False)


def parse_trs(text: str) -> TRS:
    """Parse ``[vars x y ... ;] (lhs -> rhs ;)*`` with ``#`` comments."""
    tokens = tokenize(text)
    variables: list[str] = []
    pos = 0
    if tokens[0].kind == "ident" and tokens[0].text == "vars":
        pos = 1
        while tokens[pos].kind == "ident":
            variables.append(tokens[pos].text)
            pos += 1
        if tokens[pos].kind != ";":
            tok = tokens[pos]
            raise TermSyntaxError(f"expected ';' after variable list at {tok.line}:{tok.col}")
        pos += 1
    parser = TermParser(tokens, variables=variables)
    parser.pos = pos
    rules = []
    while not parser.at_end():
        start = parser.peek
        lhs = parser.parse_term()
        parser.expect("->")
        rhs = parser.parse_term()
        parser.expect(";")
        try:
            rules.append(Rule(lhs, rhs))
        except RuleError as exc:
            raise RuleError(f"rule at {start.line}:{start.col}: {exc}") from None
    return TRS(Signature(parser.arities), tuple(rules), frozenset(variables))


def _match_nodes(pattern: Term, subject: Term, p0: int, s0: int):
    """Coinductive simultaneous traversal; returns ``{var: subject node}``."""
    binding: dict[str, int] = {}
    seen = {(p0, s0)}
    stack = [(p0, s0)]
    while stack:
        pn, sn = stack.pop()
        pl = pattern.nodes[pn]
        if isinstance(pl, Var):
            bound = binding.get(pl.name)
            if bound is None:
                binding[pl.name] = sn
            elif bound != sn and subject.node_term(bound) != subject.node_term(sn):
                return None
            continue
        sl = subject.nodes[sn]
        if not isinstance(sl, Fun) or sl.symbol != pl.symbol or len(sl.children) != len(pl.children):
            return None
        for pair in zip(pl.children, sl.children):
            if pair not in seen:
                seen.add(pair)
                stack.append(pair)
    return binding


def match_root(pattern: Term, subject: Term) -> dict | None:
    """A substitution ``sigma`` with ``pattern sigma == subject``, or None.

    Visited (pattern node, subject node) pairs are assumed to match when met
    again, which is exactly the coinductive reading on cyclic patterns.
    Repeated variables are compared by bisimilarity of their bindings.
    """
    binding = _match_nodes(pattern, subject, 0, 0)
    if binding is None:
        return None
    return {name: subject.node_term(n) for name, n in binding.items()}


def _rule(trs: TRS, rule_index: int) -> Rule:
    if not 0 <= rule_index < len(trs.rules):
        raise StepError(f"no rule with index {rule_index}")
    return trs.rules[rule_index]


def root_step(t: Term, trs: TRS, rule_index: int) -> Term | None:
    rule = _rule(trs, rule_index)
    sigma = match_root(rule.lhs, t)
    if sigma is None:
        return None
    return apply_substitution(rule.rhs, sigma)


def step_at(t: Term, p: Sequence[int], trs: TRS, rule_index: int) -> Term:
    """Contract the redex at tree position ``p`` with the given rule."""
    p = tuple(p)
    rule = _rule(trs, rule_index)
    sub = t.node_term(node_at(t, p))
    sigma = match_root(rule.lhs, sub)
    if sigma is None:
        raise StepError(f"rule {rule_index} does not match at position {p}")
    return replace_at(t, p, apply_substitution(rule.rhs, sigma))


def redex_rules(t: Term, trs: TRS) -> list:
    """For every node of ``t``, the indices of rules matching at that node."""
    return [
        [i for i, rule in enumerate(trs.rules) if _match_nodes(rule.lhs, t, 0, n) is not None]
        for n in range(len(t.nodes))
    ]


def find_redexes(t: Term, trs: TRS, depth_bound: int) -> list:
    """All ``(position, rule_index)`` with ``len(position) < depth_bound``."""
    per_node = redex_rules(t, trs)
    out = []
    for p in positions_to_depth(t, depth_bound):
        for i in per_node[node_at(t, p)]:
            out.append((p, i))
    out.sort()
    return out


def is_normal_form(t: Term, trs: TRS) -> bool:
    return not any(
        _match_nodes(rule.lhs, t, 0, n) is not None
        for n in range(len(t.nodes))
        for rule in trs.rules
    )


def _is_linear(lhs: Term) -> bool:
    nodes = lhs.nodes
    preds: dict[int, list] = {i: [] for i in range(len(nodes))}
    for i, label in enumerate(nodes):
        if isinstance(label, Fun):
            for c in label.children:
                preds[c].append(i)
    for v, label in enumerate(nodes):
        if not isinstance(label, Var):
            continue
        # nodes that can reach v
        up = {v}
        stack = [v]
        while stack:
            n = stack.pop()
            for m in preds[n]:
                if m not in up:
                    up.add(m)
                    stack.append(m)
        # a cycle among them gives infinitely many occurrences
        paths: dict[int, int] = {}
        state: dict[int, int] = {}

        def count(n):
            if n == v:
                return 1
            if state.get(n) == 1:
                raise _Cyclic
            if n in paths:
                return paths[n]
            state[n] = 1
            total = 0
            for c in nodes[n].children:
                if c in up:
                    total += count(c)
            state[n] = 2
            paths[n] = total
            return total

        try:
            if count(0) != 1:
                return False
        except _Cyclic:
            return False
    return True


class _Cyclic(Exception):
    pass


def is_left_linear(trs: TRS) -> bool:
    return all(_is_linear(rule.lhs) for rule in trs.rules)


def has_finite_lhs(trs: TRS) -> bool:
    return all(term_depth(rule.lhs) != float("inf") for rule in trs.rules)


def replay(t: Term, steps: Iterable[RewriteStep], trs: TRS) -> Term:
    """Apply ``steps`` in order, checking any recorded substitutions."""
    for index, step in enumerate(steps):
        try:
            rule = _rule(trs, step.rule_index)
            sub = t.node_term(node_at(t, step.position))
        except (StepError, TermError) as exc:
            raise ReplayError(index, str(exc)) from None
        sigma = match_root(rule.lhs, sub)
        if sigma is None:
            raise ReplayError(index, f"rule {step.rule_index} does not match at {step.position}")
        if step.substitution is not None:
            for name, value in step.substitution.items():
                if sigma.get(name) != value:
                    raise ReplayError(index, f"recorded binding for {name} does not match")
        t = replace_at(t, step.position, apply_substitution(rule.rhs, sigma))
    return t

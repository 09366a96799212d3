"""Finite prefixes of compressed reductions from ``ired`` certificates.

For a left-linear TRS with finite left-hand sides, a valid ``ired``
certificate for ``s ->> t`` is turned into an ordinary finite reduction from
``s`` whose end term agrees with ``t`` on the first ``d`` tree levels.

The realization works backwards from the required output depth.  A root step
with rule ``l -> r`` needs its source to agree with the certificate's term to
``d + pattern_depth(l)`` levels: then ``l`` still matches (left-linearity,
finite ``l``) and the contractum agrees to ``d`` levels.  A lift needs one
level more than its children.  Unmarked final lifts lower the requirement by
one on every pass, and marked lifts never lie on a cycle, so the recursion
is finite.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .certificate import (
    Certificate,
    Id,
    InvalidCertificate,
    LiftRef,
    Mode,
    Root,
    Split,
    Verdict,
    check_certificate,
)
from .terms import Fun, Term, Var, apply_substitution, format_position, term_depth
from .trs import TRS, RewriteStep, Rule, match_root, is_left_linear, replay


class CompressionError(ValueError):
    pass


class NonLeftLinear(CompressionError):
    pass


class InfiniteLhs(CompressionError):
    pass


def pattern_depth(rule: Rule) -> int:
    """One more than the longest non-variable position of the left-hand side."""
    lhs = rule.lhs
    if term_depth(lhs) == float("inf"):
        raise InfiniteLhs(f"left-hand side {lhs} is infinite")
    memo: dict = {}

    def deepest(n):
        if n not in memo:
            label = lhs.nodes[n]
            if isinstance(label, Var):
                memo[n] = -1
            else:
                memo[n] = max((1 + deepest(c) for c in label.children), default=0)
        return memo[n]

    # deepest() of a function node counts edges to its deepest function
    # descendant; a variable child contributes 1 + (-1) = 0
    return 1 + deepest(0)


@dataclass(frozen=True)
class CompressedPrefix:
    steps: tuple
    result: Term

    def depth_counts(self) -> Counter:
        """Number of steps per position length."""
        return Counter(len(step.position) for step in self.steps)

    def to_text(self) -> str:
        lines = [f"{format_position(s.position)}\t{s.rule_index}" for s in self.steps]
        lines.append(f"result: {self.result}")
        return "\n".join(lines) + "\n"


class _Realizer:
    def __init__(self, cert: Certificate, trs: TRS):
        self.cert = cert
        self.trs = trs
        self.depth = [pattern_depth(rule) for rule in trs.rules]
        self._need: dict = {}

    def requirements(self, nid: int, m: int) -> list:
        """Agreement depth needed before each term of Split ``nid`` to reach ``m``."""
        node = self.cert.nodes[nid]
        reqs = [0] * len(node.terms)
        reqs[-1] = m
        for i in range(len(node.steps) - 1, -1, -1):
            after = reqs[i + 1]
            step = node.steps[i]
            if after == 0:
                reqs[i] = 0
            elif isinstance(step, Root):
                reqs[i] = after + self.depth[step.rule]
            elif isinstance(step, LiftRef):
                reqs[i] = self.lift_need(step.node, after)
            else:
                reqs[i] = after
        return reqs

    def need(self, nid: int, m: int) -> int:
        if m == 0:
            return 0
        key = (nid, m)
        if key not in self._need:
            self._need[key] = self.requirements(nid, m)[0]
        return self._need[key]

    def lift_need(self, nid: int, q: int) -> int:
        node = self.cert.nodes[nid]
        if isinstance(node, Id) or q == 0:
            return q
        needs = [q - 1]
        for cid in node.children:
            child = self.cert.nodes[cid]
            if isinstance(child, Split):
                needs.append(self.need(cid, q - 1))
        return 1 + max(needs)

    def realize(self, nid: int, c: Term, m: int, prefix: tuple, out: list) -> Term:
        """Rewrite ``c`` (at ``prefix``) so it agrees with the split's target to ``m`` levels.

        ``c`` must agree with the split's source to ``need(nid, m)`` levels.
        """
        if m == 0:
            return c
        node = self.cert.nodes[nid]
        reqs = self.requirements(nid, m)
        for i, step in enumerate(node.steps):
            q = reqs[i + 1]
            if q == 0:
                break
            if isinstance(step, Root):
                rule = self.trs.rules[step.rule]
                sigma = match_root(rule.lhs, c)
                if sigma is None:
                    raise AssertionError(f"rule {step.rule} lost its match at {prefix}")
                out.append(RewriteStep(prefix, step.rule, sigma))
                c = apply_substitution(rule.rhs, sigma)
            elif isinstance(step, LiftRef):
                c = self.realize_lift(step.node, c, q, prefix, out)
        return c

    def realize_lift(self, nid: int, c: Term, q: int, prefix: tuple, out: list) -> Term:
        node = self.cert.nodes[nid]
        if isinstance(node, Id):
            return c
        label = c.label
        args = list(c.args)
        changed = False
        for j, cid in enumerate(node.children):
            if isinstance(self.cert.nodes[cid], Split):
                new = self.realize(cid, args[j], q - 1, prefix + (j + 1,), out)
                changed = changed or new != args[j]
                args[j] = new
        if not changed:
            return c
        assert isinstance(label, Fun)
        return Term.fun(label.symbol, *args)


def compress_prefix(cert: Certificate, trs: TRS, d: int) -> CompressedPrefix:
    """A finite reduction from the certificate's source agreeing with its target to depth ``d``."""
    if not is_left_linear(trs):
        raise NonLeftLinear("the TRS is not left-linear")
    for rule in trs.rules:
        pattern_depth(rule)
    if cert.mode is not Mode.IRED:
        raise InvalidCertificate(Verdict(False, "ModeViolation", cert.root, "compression needs an ired certificate"))
    verdict = check_certificate(cert, trs)
    if not verdict:
        raise InvalidCertificate(verdict)
    if d < 0:
        raise ValueError("depth must be non-negative")
    realizer = _Realizer(cert, trs)
    source = cert.nodes[cert.root].terms[0]
    steps: list = []
    result = realizer.realize(cert.root, source, d, (), steps)
    return CompressedPrefix(tuple(steps), result)


def verify_prefix(cert: Certificate, trs: TRS, prefix: CompressedPrefix) -> Term:
    """Replay the steps from the certificate's source; returns the end term."""
    source = cert.nodes[cert.root].terms[0]
    return replay(source, prefix.steps, trs)

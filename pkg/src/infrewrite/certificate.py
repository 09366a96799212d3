"""Finite, possibly cyclic proof certificates and their checker.

A certificate is a graph of judgment nodes:

* ``Split(terms, steps)`` proves ``terms[0]`` rewrites to ``terms[-1]``
  through the listed single steps, ``steps[i]`` relating ``terms[i]`` to
  ``terms[i+1]``;
* ``Lift(children)`` proves ``f(s1..sn)`` rewrites below the root to
  ``f(t1..tn)``, child ``j`` proving ``sj`` to ``tj``; the endpoints come
  from the place where the node is used;
* ``Id()`` proves a term related to itself.

Back-references make the graph cyclic, which is how infinite (regular)
derivations are written down.  Markers sit on ``LiftRef`` edges.  In
``ired`` mode a marked edge may not lie on a cycle: an infinite ascending
path through a regular proof tree meets infinitely many markers exactly when
some marked edge can be revisited.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from typing import Mapping, NamedTuple, Union

from .terms import TermError, apply_substitution
from .trs import TRS, match_root


class Mode(enum.Enum):
    IRED = "ired"
    BIINF = "biinf"
    EQINF = "eqinf"


class Root(NamedTuple):
    rule: int


class RootRev(NamedTuple):
    rule: int


class LiftRef(NamedTuple):
    node: int
    marked: bool = False


class IdStep(NamedTuple):
    pass


StepItem = Union[Root, RootRev, LiftRef, IdStep]


@dataclass(frozen=True)
class Split:
    terms: tuple
    steps: tuple

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        object.__setattr__(self, "steps", tuple(self.steps))


@dataclass(frozen=True)
class Lift:
    children: tuple

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))


@dataclass(frozen=True)
class Id:
    pass


JudgmentNode = Union[Split, Lift, Id]


@dataclass(frozen=True)
class Certificate:
    mode: Mode
    nodes: Mapping[int, JudgmentNode]
    root: int

    def __post_init__(self):
        object.__setattr__(self, "nodes", dict(sorted(self.nodes.items())))

    def terms(self) -> list:
        """Every term written in a Split node."""
        return [t for node in self.nodes.values() if isinstance(node, Split) for t in node.terms]

    def with_mode(self, mode: Mode, clear_markers: bool = False) -> Certificate:
        nodes = {}
        for nid, node in self.nodes.items():
            if clear_markers and isinstance(node, Split):
                node = Split(
                    node.terms,
                    [LiftRef(s.node, False) if isinstance(s, LiftRef) else s for s in node.steps],
                )
            nodes[nid] = node
        return Certificate(mode, nodes, self.root)


class CertificateFormatError(ValueError):
    pass


class InvalidCertificate(ValueError):
    """Raised by operations that require a valid certificate."""

    def __init__(self, verdict: Verdict):
        super().__init__(str(verdict))
        self.verdict = verdict


REASONS = ("BadStep", "HeadMismatch", "ArityMismatch", "ModeViolation", "MarkedCycle", "DanglingRef")


@dataclass(frozen=True)
class Verdict:
    valid: bool
    reason: str | None = None
    node: int | None = None
    detail: str = ""

    def __bool__(self) -> bool:
        return self.valid

    def __str__(self) -> str:
        if self.valid:
            return "valid"
        return f"invalid: {self.reason} at node {self.node}"


VALID = Verdict(True)


class _Fail(Exception):
    def __init__(self, reason, node, detail=""):
        self.verdict = Verdict(False, reason, node, detail)


# -- parsing and serialization ----------------------------------------------

_STEP_FIELDS = {
    "root": {"kind", "rule"},
    "rootrev": {"kind", "rule"},
    "lift": {"kind", "node", "marked"},
    "id": {"kind"},
}
_NODE_FIELDS = {
    "split": {"id", "kind", "terms", "steps"},
    "lift": {"id", "kind", "children"},
    "id": {"id", "kind"},
}


def _require(cond, message):
    if not cond:
        raise CertificateFormatError(message)


def _int(value, what):
    _require(isinstance(value, int) and not isinstance(value, bool), f"{what} must be an integer")
    return value


def _fields(obj, allowed, required, what):
    _require(isinstance(obj, dict), f"{what} must be an object")
    unknown = set(obj) - allowed
    _require(not unknown, f"unknown field(s) {sorted(unknown)} in {what}")
    missing = required - set(obj)
    _require(not missing, f"missing field(s) {sorted(missing)} in {what}")


def _parse_step(obj, mode, where):
    _require(isinstance(obj, dict) and obj.get("kind") in _STEP_FIELDS, f"bad step in {where}")
    kind = obj["kind"]
    allowed = _STEP_FIELDS[kind]
    required = allowed - {"marked"}
    _fields(obj, allowed, required, f"step in {where}")
    if kind == "root":
        return Root(_int(obj["rule"], "rule"))
    if kind == "rootrev":
        _require(mode is Mode.EQINF, f"rootrev step in {mode.value} certificate ({where})")
        return RootRev(_int(obj["rule"], "rule"))
    if kind == "lift":
        marked = obj.get("marked", False)
        _require(isinstance(marked, bool), f"marked must be a boolean ({where})")
        _require(not marked or mode is Mode.IRED, f"marked lift in {mode.value} certificate ({where})")
        return LiftRef(_int(obj["node"], "node"), marked)
    return IdStep()


def certificate_from_data(data, trs: TRS, extra_vars=()) -> Certificate:
    _fields(data, {"mode", "root", "nodes"}, {"mode", "root", "nodes"}, "certificate")
    try:
        mode = Mode(data["mode"])
    except ValueError:
        raise CertificateFormatError(f"unknown mode {data['mode']!r}") from None
    root = _int(data["root"], "root")
    _require(isinstance(data["nodes"], list), "nodes must be a list")
    nodes: dict[int, JudgmentNode] = {}
    for obj in data["nodes"]:
        _require(isinstance(obj, dict) and obj.get("kind") in _NODE_FIELDS, "bad node kind")
        allowed = _NODE_FIELDS[obj["kind"]]
        _fields(obj, allowed, allowed, f"node {obj.get('id')}")
        nid = _int(obj["id"], "node id")
        _require(nid not in nodes, f"duplicate node id {nid}")
        where = f"node {nid}"
        if obj["kind"] == "split":
            _require(isinstance(obj["terms"], list) and isinstance(obj["steps"], list), f"bad split {nid}")
            terms = []
            for text in obj["terms"]:
                _require(isinstance(text, str), f"terms must be strings ({where})")
                try:
                    terms.append(trs.parse(text, extra_vars))
                except TermError as exc:
                    raise CertificateFormatError(f"{where}: {exc}") from None
            steps = [_parse_step(s, mode, where) for s in obj["steps"]]
            _require(len(terms) == len(steps) + 1, f"{where}: need exactly one more term than steps")
            nodes[nid] = Split(terms, steps)
        elif obj["kind"] == "lift":
            _require(isinstance(obj["children"], list), f"bad children in {where}")
            nodes[nid] = Lift([_int(c, "child") for c in obj["children"]])
        else:
            nodes[nid] = Id()
    _require(root in nodes, f"root {root} is not a node")
    _require(isinstance(nodes[root], Split), "root must be a split node")
    for nid, node in nodes.items():
        refs = []
        if isinstance(node, Split):
            refs = [s.node for s in node.steps if isinstance(s, LiftRef)]
        elif isinstance(node, Lift):
            refs = list(node.children)
        for ref in refs:
            _require(ref in nodes, f"node {nid} refers to missing node {ref}")
    return Certificate(mode, nodes, root)


def parse_certificate(text: str, trs: TRS, extra_vars=()) -> Certificate:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CertificateFormatError(f"not valid JSON: {exc}") from None
    return certificate_from_data(data, trs, extra_vars)


def _step_data(step):
    if isinstance(step, Root):
        return {"kind": "root", "rule": step.rule}
    if isinstance(step, RootRev):
        return {"kind": "rootrev", "rule": step.rule}
    if isinstance(step, LiftRef):
        return {"kind": "lift", "node": step.node, "marked": step.marked}
    return {"kind": "id"}


def certificate_to_data(cert: Certificate) -> dict:
    nodes = []
    for nid, node in cert.nodes.items():
        if isinstance(node, Split):
            nodes.append({
                "id": nid,
                "kind": "split",
                "terms": [str(t) for t in node.terms],
                "steps": [_step_data(s) for s in node.steps],
            })
        elif isinstance(node, Lift):
            nodes.append({"id": nid, "kind": "lift", "children": list(node.children)})
        else:
            nodes.append({"id": nid, "kind": "id"})
    return {"mode": cert.mode.value, "root": cert.root, "nodes": nodes}


def dump_certificate(cert: Certificate) -> str:
    return json.dumps(certificate_to_data(cert), indent=2, ensure_ascii=False)


# -- checking ----------------------------------------------------------------


def reference_edges(cert: Certificate) -> list:
    """Edges ``(source, target, marked)`` of the reference graph."""
    edges = []
    for nid, node in cert.nodes.items():
        if isinstance(node, Split):
            for step in node.steps:
                if isinstance(step, LiftRef):
                    edges.append((nid, step.node, step.marked))
        elif isinstance(node, Lift):
            for child in node.children:
                edges.append((nid, child, False))
    return edges


def _reachable(cert: Certificate, start: int) -> set:
    succ: dict = {}
    for a, b, _ in reference_edges(cert):
        succ.setdefault(a, []).append(b)
    seen = {start}
    stack = [start]
    while stack:
        n = stack.pop()
        for m in succ.get(n, ()):
            if m not in seen:
                seen.add(m)
                stack.append(m)
    return seen


def _check_structure(cert: Certificate, live):
    if cert.root not in cert.nodes:
        raise _Fail("DanglingRef", cert.root, "root node missing")
    if not isinstance(cert.nodes[cert.root], Split):
        raise _Fail("BadStep", cert.root, "root is not a split node")
    for nid in sorted(live):
        node = cert.nodes.get(nid)
        if node is None:
            continue
        if isinstance(node, Split):
            if len(node.terms) != len(node.steps) + 1:
                raise _Fail("BadStep", nid, "term count must be step count + 1")
            for step in node.steps:
                if isinstance(step, LiftRef):
                    target = cert.nodes.get(step.node)
                    if target is None:
                        raise _Fail("DanglingRef", nid, f"missing node {step.node}")
                    if isinstance(target, Split):
                        raise _Fail("BadStep", nid, f"lift step refers to split node {step.node}")
        elif isinstance(node, Lift):
            for child in node.children:
                target = cert.nodes.get(child)
                if target is None:
                    raise _Fail("DanglingRef", nid, f"missing node {child}")
                if isinstance(target, Lift):
                    raise _Fail("BadStep", nid, f"lift child {child} is itself a lift node")


def _check_mode(cert: Certificate, live):
    mode = cert.mode
    for nid in sorted(live):
        node = cert.nodes[nid]
        if not isinstance(node, Split):
            continue
        for step in node.steps:
            if isinstance(step, RootRev) and mode is not Mode.EQINF:
                raise _Fail("ModeViolation", nid, "reversed root step outside eqinf")
            if isinstance(step, LiftRef) and step.marked and mode is not Mode.IRED:
                raise _Fail("ModeViolation", nid, "marked lift outside ired")
        if mode is Mode.IRED:
            if not node.steps:
                raise _Fail("ModeViolation", nid, "ired split needs at least one step")
            *body, last = node.steps
            for step in body:
                if isinstance(step, LiftRef) and not step.marked:
                    raise _Fail("ModeViolation", nid, "non-final lift must be marked")
            if not (isinstance(last, IdStep) or (isinstance(last, LiftRef) and not last.marked)):
                raise _Fail("ModeViolation", nid, "final step must be an unmarked lift or id")


def _check_root_step(trs, rule, source, target, nid):
    if not 0 <= rule < len(trs.rules):
        raise _Fail("BadStep", nid, f"no rule {rule}")
    r = trs.rules[rule]
    sigma = match_root(r.lhs, source)
    if sigma is None or apply_substitution(r.rhs, sigma) != target:
        raise _Fail("BadStep", nid, f"{source} -> {target} is not a root step of rule {rule}")


def _check_use(cert, nid, u, v):
    """Node ``nid`` (a Lift or Id node) used to relate ``u`` to ``v``."""
    node = cert.nodes[nid]
    if isinstance(node, Id):
        if u != v:
            raise _Fail("BadStep", nid, f"id node relates distinct terms {u} and {v}")
        return
    if u.head is None or v.head is None or u.head != v.head:
        raise _Fail("HeadMismatch", nid, f"{u} and {v} do not share a head symbol")
    if u.arity != len(node.children) or v.arity != len(node.children):
        raise _Fail("ArityMismatch", nid, f"{len(node.children)} children for arity {u.arity}")
    for cid, s, t in zip(node.children, u.args, v.args):
        child = cert.nodes[cid]
        if isinstance(child, Id):
            if s != t:
                raise _Fail("BadStep", nid, f"id child {cid} relates distinct terms {s} and {t}")
        elif child.terms[0] != s or child.terms[-1] != t:
            raise _Fail("BadStep", nid, f"child {cid} does not prove {s} to {t}")


def _check_local(cert: Certificate, trs: TRS, live):
    for nid in sorted(live):
        node = cert.nodes[nid]
        if not isinstance(node, Split):
            continue
        for i, step in enumerate(node.steps):
            u, v = node.terms[i], node.terms[i + 1]
            if isinstance(step, Root):
                _check_root_step(trs, step.rule, u, v, nid)
            elif isinstance(step, RootRev):
                _check_root_step(trs, step.rule, v, u, nid)
            elif isinstance(step, IdStep):
                if u != v:
                    raise _Fail("BadStep", nid, f"id step relates distinct terms {u} and {v}")
            else:
                _check_use(cert, step.node, u, v)


def _check_markers(cert: Certificate, live):
    for a, b, marked in reference_edges(cert):
        if marked and a in live and a in _reachable(cert, b):
            raise _Fail("MarkedCycle", b, f"marked edge {a} -> {b} lies on a cycle")


def check_certificate(cert: Certificate, trs: TRS) -> Verdict:
    """Check every node reachable from the root; first failure wins.

    Checks run in this order: references, mode discipline, local steps and
    lift uses (by node id), marker well-foundedness.
    """
    try:
        live = _reachable(cert, cert.root) if cert.root in cert.nodes else set()
        _check_structure(cert, live)
        _check_mode(cert, live)
        _check_local(cert, trs, live)
        if cert.mode is Mode.IRED:
            _check_markers(cert, live)
    except _Fail as fail:
        return fail.verdict
    return VALID


def endpoints(cert: Certificate) -> tuple:
    root = cert.nodes.get(cert.root)
    if not isinstance(root, Split) or not root.terms:
        raise CertificateFormatError("root is not a split node")
    return root.terms[0], root.terms[-1]


def _sccs(nodes, succ):
    """Tarjan's algorithm, iterative; returns ``{node: component id}``."""
    index: dict = {}
    low: dict = {}
    comp: dict = {}
    stack: list = []
    on_stack: set = set()
    counter = 0
    ncomp = 0
    for start in nodes:
        if start in index:
            continue
        work = [(start, iter(succ.get(start, ())))]
        index[start] = low[start] = counter
        counter += 1
        stack.append(start)
        on_stack.add(start)
        while work:
            n, it = work[-1]
            advanced = False
            for m in it:
                if m not in index:
                    index[m] = low[m] = counter
                    counter += 1
                    stack.append(m)
                    on_stack.add(m)
                    work.append((m, iter(succ.get(m, ()))))
                    advanced = True
                    break
                if m in on_stack:
                    low[n] = min(low[n], index[m])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[n])
            if low[n] == index[n]:
                while True:
                    m = stack.pop()
                    on_stack.discard(m)
                    comp[m] = ncomp
                    if m == n:
                        break
                ncomp += 1
    return comp


def nesting_depth(cert: Certificate, trs: TRS | None = None) -> int:
    """Largest number of marked edges on any path from the root.

    When ``trs`` is given the certificate is checked first; otherwise only
    the marker discipline is verified.
    """
    if trs is not None:
        verdict = check_certificate(cert, trs)
        if not verdict:
            raise InvalidCertificate(verdict)
    live = _reachable(cert, cert.root)
    edges = [(a, b, m) for a, b, m in reference_edges(cert) if a in live]
    succ: dict = {}
    for a, b, _ in edges:
        succ.setdefault(a, []).append(b)
    comp = _sccs(sorted(live), succ)
    dag: dict = {}
    for a, b, marked in edges:
        if comp[a] == comp[b]:
            if marked:
                raise InvalidCertificate(Verdict(False, "MarkedCycle", b))
            continue
        dag.setdefault(comp[a], []).append((comp[b], 1 if marked else 0))
    memo: dict = {}

    def longest(c):
        if c not in memo:
            memo[c] = max((w + longest(d) for d, w in dag.get(c, ())), default=0)
        return memo[c]

    return longest(comp[cert.root])

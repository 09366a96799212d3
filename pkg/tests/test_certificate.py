import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from infrewrite import (
    Certificate,
    CertificateFormatError,
    Id,
    IdStep,
    Lift,
    LiftRef,
    Mode,
    Root,
    RootRev,
    Split,
    check_certificate,
    dump_certificate,
    endpoints,
    nesting_depth,
    parse_certificate,
    parse_term,
)
from infrewrite.certificate import _check_markers
from infrewrite.sampling import random_certificate, random_signature, random_source, random_trs

from conftest import data_path, load_cert, load_trs
from oracles import marked_cycle_brute, max_marked_on_paths

COMEGA = parse_term("rec x . C(x)")
P = parse_term


def test_fig1(ex11):
    cert = load_cert("fig1.cert", ex11)
    assert check_certificate(cert, ex11)
    assert endpoints(cert) == (P("a"), COMEGA)
    assert nesting_depth(cert) == 0


def test_fig2(ex12):
    cert = load_cert("fig2.cert", ex12)
    assert check_certificate(cert, ex12)
    assert endpoints(cert) == (P("f(a, b)"), P("D"))
    assert nesting_depth(cert) == 1
    marked = [s for node in cert.nodes.values() if isinstance(node, Split)
              for s in node.steps if isinstance(s, LiftRef) and s.marked]
    assert len(marked) == 1


def test_fig3_has_marked_cycle(ex13):
    verdict = check_certificate(load_cert("fig3.cert", ex13), ex13)
    assert not verdict
    assert (verdict.reason, verdict.node) == ("MarkedCycle", 1)
    assert str(verdict) == "invalid: MarkedCycle at node 1"


def test_fig3_is_bi_infinite(ex13):
    cert = load_cert("fig3_biinf.cert", ex13)
    assert check_certificate(cert, ex13)
    erased = load_cert("fig3.cert", ex13).with_mode(Mode.BIINF, clear_markers=True)
    assert check_certificate(erased, ex13)
    assert endpoints(cert) == (COMEGA, P("a"))


def test_fig4(ex42):
    top = load_cert("fig4_top.cert", ex42)
    assert check_certificate(top, ex42)
    assert endpoints(top) == (P("a"), P("b"))
    bottom = load_cert("fig4_bottom.cert", ex42)
    assert check_certificate(bottom, ex42)
    assert endpoints(bottom) == (P("C(a)"), COMEGA)


def test_fig4_needs_eqinf(ex42):
    text = data_path("fig4_top.cert").read_text().replace('"eqinf"', '"biinf"')
    with pytest.raises(CertificateFormatError):
        parse_certificate(text, ex42)


def test_nesting_depth_two():
    trs = load_trs("nest2.trs")
    cert = load_cert("nest2.cert", trs)
    assert check_certificate(cert, trs)
    assert nesting_depth(cert) == 2
    assert max_marked_on_paths(cert) == 2


def test_marked_lift_outside_ired_rejected(ex13):
    text = data_path("fig3.cert").read_text().replace('"ired"', '"biinf"')
    with pytest.raises(CertificateFormatError):
        parse_certificate(text, ex13)


@pytest.mark.parametrize("mutate", [
    lambda d: d.update(extra=1),
    lambda d: d["nodes"][0].update(colour="red"),
    lambda d: d["nodes"][0]["steps"][0].update(why="because"),
    lambda d: d.update(root=7),
    lambda d: d["nodes"][1].update(children=[9]),
    lambda d: d["nodes"][0]["terms"].append("rec x . x"),
    lambda d: d.update(mode="other"),
])
def test_format_errors(ex11, mutate):
    data = json.loads(data_path("fig1.cert").read_text())
    mutate(data)
    with pytest.raises(CertificateFormatError):
        parse_certificate(json.dumps(data), ex11)


def test_dump_round_trip(ex12):
    cert = load_cert("fig2.cert", ex12)
    assert parse_certificate(dump_certificate(cert), ex12) == cert


# -- failure reasons -----------------------------------------------------------


def _cert(mode, nodes, root=0):
    return Certificate(mode, nodes, root)


def test_bad_root_step(ex11):
    cert = _cert(Mode.IRED, {0: Split((P("a"), P("C(C(a))"), P("C(C(a))")), (Root(0), IdStep()))})
    v = check_certificate(cert, ex11)
    assert (v.reason, v.node) == ("BadStep", 0)


def test_head_mismatch(ex11):
    cert = _cert(Mode.IRED, {
        0: Split((P("C(a)"), P("D(a)")), (LiftRef(1),)),
        1: Lift((2,)),
        2: Id(),
    })
    v = check_certificate(cert, ex11)
    assert (v.reason, v.node) == ("HeadMismatch", 1)


def test_arity_mismatch(ex11):
    cert = _cert(Mode.IRED, {
        0: Split((P("C(a)"), P("C(a)")), (LiftRef(1),)),
        1: Lift((2, 2)),
        2: Id(),
    })
    v = check_certificate(cert, ex11)
    assert (v.reason, v.node) == ("ArityMismatch", 1)


def test_dangling_reference(ex11):
    cert = _cert(Mode.IRED, {0: Split((P("C(a)"), P("C(a)")), (LiftRef(5),))})
    v = check_certificate(cert, ex11)
    assert (v.reason, v.node) == ("DanglingRef", 0)


def test_ired_needs_final_lift_or_id(ex11):
    cert = _cert(Mode.IRED, {0: Split((P("a"), P("C(a)")), (Root(0),))})
    assert check_certificate(cert, ex11).reason == "ModeViolation"
    assert check_certificate(cert.with_mode(Mode.BIINF), ex11)


def test_ired_needs_marked_inner_lifts(ex11):
    cert = _cert(Mode.IRED, {
        0: Split((P("C(a)"), P("C(C(a))"), P("C(C(a))")), (LiftRef(1), IdStep())),
        1: Lift((2,)),
        2: Split((P("a"), P("C(a)"), P("C(a)")), (Root(0), IdStep())),
    })
    assert check_certificate(cert, ex11).reason == "ModeViolation"
    fixed = _cert(Mode.IRED, {**cert.nodes, 0: Split(cert.nodes[0].terms, (LiftRef(1, True), IdStep()))})
    assert check_certificate(fixed, ex11)
    assert nesting_depth(fixed) == 1


def test_empty_split_only_outside_ired(ex11):
    cert = _cert(Mode.BIINF, {0: Split((P("a"),), ())})
    assert check_certificate(cert, ex11)
    assert check_certificate(cert.with_mode(Mode.IRED), ex11).reason == "ModeViolation"


def test_id_node_requires_equal_endpoints(ex11):
    cert = _cert(Mode.IRED, {0: Split((P("a"), P("C(a)")), (LiftRef(1),)), 1: Id()})
    assert check_certificate(cert, ex11).reason == "BadStep"


def test_rootrev(ex42):
    cert = _cert(Mode.EQINF, {0: Split((P("f(a)"), P("a")), (RootRev(0),))})
    assert check_certificate(cert, ex42)


# -- properties on generated certificates ------------------------------------


def _sample(seed):
    rng = random.Random(seed)
    trs = random_trs(rng, random_signature(rng, need_function=True))
    for _ in range(20):
        cert = random_certificate(rng, trs, random_source(rng, trs), max_nodes=8)
        if cert is not None:
            return trs, cert
    return trs, None


def _perturb(cert, rng):
    """Flip a random lift marker, which may or may not close a marked cycle."""
    nodes = dict(cert.nodes)
    splits = [(nid, n) for nid, n in nodes.items() if isinstance(n, Split)
              and any(isinstance(s, LiftRef) for s in n.steps)]
    if not splits:
        return cert
    nid, node = rng.choice(splits)
    idx = rng.choice([i for i, s in enumerate(node.steps) if isinstance(s, LiftRef)])
    steps = list(node.steps)
    steps[idx] = LiftRef(steps[idx].node, not steps[idx].marked)
    nodes[nid] = Split(node.terms, tuple(steps))
    return Certificate(cert.mode, nodes, cert.root)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**9))
def test_marked_cycle_iff_brute_force(seed):
    trs, cert = _sample(seed)
    if cert is None:
        return
    rng = random.Random(seed)
    for _ in range(3):
        cert = _perturb(cert, rng)
    # the marker pass alone, so mode violations do not mask it
    try:
        _check_markers(cert, set(cert.nodes))
        flagged = False
    except Exception:
        flagged = True
    assert flagged == marked_cycle_brute(cert)
    if not flagged:
        assert nesting_depth(cert) == max_marked_on_paths(cert)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10**9))
def test_generated_certificates_are_valid(seed):
    trs, cert = _sample(seed)
    if cert is None:
        return
    assert check_certificate(cert, trs)
    marked = sum(1 for n in cert.nodes.values() if isinstance(n, Split)
                 for s in n.steps if isinstance(s, LiftRef) and s.marked)
    assert nesting_depth(cert) <= marked
    erased = cert.with_mode(Mode.BIINF, clear_markers=True)
    assert check_certificate(erased, trs)
    assert check_certificate(erased.with_mode(Mode.EQINF), trs)
    assert check_certificate(cert, trs) == check_certificate(cert, trs)


def test_nesting_depth_rejects_invalid(ex13):
    from infrewrite import InvalidCertificate

    cert = load_cert("fig3.cert", ex13)
    with pytest.raises(InvalidCertificate):
        nesting_depth(cert)
    with pytest.raises(InvalidCertificate):
        nesting_depth(load_cert("fig1.cert", ex13), ex13)

"""Checking cyclic proof certificates for infinitary reductions."""

from pathlib import Path

from infrewrite import Mode, check_certificate, endpoints, nesting_depth, parse_certificate, parse_trs

DATA = Path(__file__).resolve().parent.parent / "data"


def load(cert, trs):
    rules = parse_trs((DATA / trs).read_text())
    return parse_certificate((DATA / cert).read_text(), rules), rules


# a -> C(a) reaches the infinite tower in omega steps: one root step, then
# the same argument again under C.  The loop goes through an unmarked final lift.
cert, trs = load("fig1.cert", "ex11.trs")
s, t = endpoints(cert)
print(f"{s} ->> {t}: {check_certificate(cert, trs)}, nesting depth {nesting_depth(cert)}")

# f(a, b) first rewrites both arguments to the tower, then applies f(x, x) -> D.
# The lift before the root step is marked: it must not recur forever.
cert, trs = load("fig2.cert", "ex12.trs")
s, t = endpoints(cert)
print(f"{s} ->> {t}: {check_certificate(cert, trs)}, nesting depth {nesting_depth(cert)}")

# With C(a) -> a, the tower would "reduce" to a only through infinitely nested
# marked lifts.  As a reduction this is rejected; as a bi-infinite rewrite it is fine.
cert, trs = load("fig3.cert", "ex13.trs")
print("ired :", check_certificate(cert, trs))
print("biinf:", check_certificate(cert.with_mode(Mode.BIINF, clear_markers=True), trs))

# Equational reasoning below the root can relate a and b.
cert, trs = load("fig4_top.cert", "ex42.trs")
s, t = endpoints(cert)
print(f"{s} = {t} (eqinf): {check_certificate(cert, trs)}")

"""Computing the reduction relations exactly over a finite universe of terms."""

from infrewrite import (
    Mode,
    check_certificate,
    dump_certificate,
    extract_certificate,
    gfp_relation,
    lfp_ired,
    nesting_depth,
    parse_trs,
    parse_universe,
    root_step_relation,
    rtc_relation,
)

trs = parse_trs("""
vars x ;
f(x, x) -> D ;
a -> C(a) ;
b -> C(b) ;
""")

universe = parse_universe("""
f(a, b)
f(rec x . C(x), rec x . C(x))
D
""", trs)
print(f"universe of {len(universe)} terms:", ", ".join(map(str, universe)))
_, escapes = root_step_relation(universe, trs)
for e in escapes:
    print(f"  root step {e.source} -> {e.result} leaves the universe")
print("  f(a, b) ->> D derivable here?", (universe[0], trs.parse("D")) in lfp_ired(universe, trs))

# Adding the intermediate terms closes the gap.
universe = parse_universe("\n".join(map(str, universe)) + "\nC(a)\nC(b)\n", trs)
print(f"\nuniverse of {len(universe)} terms, escapes: {len(root_step_relation(universe, trs)[1])}")
red = lfp_ired(universe, trs)
print("reductions (reflexive pairs omitted):")
for s, t in red.pairs():
    if s != t:
        print(f"  {s}  ->>  {t}")

# Every pair comes with a checkable certificate.
s, t = universe[0], trs.parse("D")
cert = extract_certificate(universe, trs, s, t)
print(f"\ncertificate for {s} ->> {t}: {check_certificate(cert, trs)},"
      f" {len(cert.nodes)} nodes, nesting depth {nesting_depth(cert)}")
print(dump_certificate(cert)[:300], "...")

# Equational closure is strictly larger than joinability by reductions.
eq_trs = parse_trs("a -> f(a) ; b -> f(b) ; C(b) -> C(C(a)) ;")
eq_universe = parse_universe("f(a)\nrec x . f(x)\nf(b)\nC(a)\nC(b)\nC(C(a))\nrec x . C(x)\n", eq_trs)
eq = gfp_relation(eq_universe, eq_trs, Mode.EQINF)
r = lfp_ired(eq_universe, eq_trs)
pair = (eq_trs.parse("C(a)"), eq_trs.parse("rec x . C(x)"))
print("\nC(a) = C^omega:", pair in eq, "  joinable by reductions:", pair in rtc_relation(r.inverse().compose(r)))

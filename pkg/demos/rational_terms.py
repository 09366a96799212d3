"""Rational terms: parsing, canonical forms, and how far apart two terms are."""

from infrewrite import bisimilar, distance, metric, parse_term, print_term, truncated_bisimilar

# The infinite tower C(C(C(...))) has a single distinct subterm, itself.
tower = parse_term("rec x . C(x)")
print("tower:", print_term(tower), "with", len(tower.nodes), "node")

# Unfolding it twice or three times gives the same tree, hence the same canonical graph.
for text in ["rec x . C(C(x))", "C(rec y . C(C(C(y))))"]:
    other = parse_term(text)
    print(f"{text:28} bisimilar: {bisimilar(tower, other)}  printed: {print_term(other)}")

# Finite approximations approach the tower level by level.
approx = parse_term("a")
for n in range(5):
    print(f"C^{n}(a): first difference at level {distance(approx, tower)},"
          f" metric {metric(approx, tower)}, agrees to depth {n}: {truncated_bisimilar(approx, tower, n)}")
    approx = parse_term(f"C({print_term(approx)})")

# A binder that is not under a function symbol has no unique solution.
try:
    parse_term("rec x . x")
except ValueError as exc:
    print("rejected:", exc)

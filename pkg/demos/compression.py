"""Turning a certificate into ordinary finite reductions, one depth at a time."""

from pathlib import Path

from infrewrite import NonLeftLinear, compress_prefix, parse_certificate, parse_trs, truncated_bisimilar
from infrewrite.terms import format_position

DATA = Path(__file__).resolve().parent.parent / "data"

trs = parse_trs((DATA / "omega2.trs").read_text())
cert = parse_certificate((DATA / "f2.cert").read_text(), trs)
target = cert.nodes[cert.root].terms[-1]
print("target:", target)

for d in (1, 2, 4, 6):
    out = compress_prefix(cert, trs, d)
    where = " ".join(format_position(s.position) for s in out.steps)
    print(f"depth {d}: {len(out.steps):2} steps [{where}] -> {out.result}"
          f"  agrees to {d}: {truncated_bisimilar(out.result, target, d)}")

# Steps per depth settle once the requested depth passes them.
print("steps per position length at d=8:", dict(sorted(compress_prefix(cert, trs, 8).depth_counts().items())))

# f(x, x) -> D needs both arguments to be equal in the limit, which no
# finite prefix achieves.
ex12 = parse_trs((DATA / "ex12.trs").read_text())
try:
    compress_prefix(parse_certificate((DATA / "fig2.cert").read_text(), ex12), ex12, 3)
except NonLeftLinear as exc:
    print("fig2:", type(exc).__name__, "-", exc)

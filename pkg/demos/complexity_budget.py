"""
Operation counts
================

Real multiplications and FLOPs per sample for the three predistorters.
The formula counts every multiplication; the calibrated counts drop the
trivial ones (products with constants that reduce to shifts or adds).
"""
from splinedpd import complexity

rows = [("sph", 2, 3), ("sph", 3, 3), ("sph", 4, 3), ("smp", 2, 4), ("smp", 3, 4),
        ("smp", 4, 4), ("mp", 11, 4)]

print(f"{'kind':5s} {'P':>3s} {'M':>3s} {'formula':>8s} {'mults':>6s} {'FLOPs':>6s}")
for kind, order, memory in rows:
    r = complexity.report(kind, order, memory)
    print(f"{kind:5s} {order:3d} {memory:3d} {r.main_path_formula:8d} "
          f"{r.main_path_published:6d} {r.flops_main:6d}")

# learning cost grows quadratically with the MP term count
for memory in (2, 4, 6):
    print(f"MP P=11 M={memory}: learning mults {complexity.complexity_formula('mp', 11, memory)[1]}")

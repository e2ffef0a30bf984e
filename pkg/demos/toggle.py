"""Two toggle switches described by successor state axioms.

Run with ``python3 demos/toggle.py``.
"""
from pathlib import Path

from actionlogic import sitcalc
from actionlogic.logic import parse_formula as F

theory = sitcalc.parse_ssa_theory((Path(__file__).parent / "data" / "toggle.ssa").read_text())
print(theory)
print()

for query in ("U_a after T_a", "U_a after T_a, T_a", "U_a & U_b after T_a, T_b, T_a"):
    regressed = sitcalc.regress(sitcalc.parse_regress_query(query), theory)
    print(f"{query:<32} regresses to {regressed}")

print()
print("U_a -> [T_a][T_a] U_a:", sitcalc.holds_after(F("U_a"), ["T_a", "T_a"], F("U_a"), theory))
print("U_a -> [T_a] U_a:     ", sitcalc.holds_after(F("U_a"), ["T_a"], F("U_a"), theory))
for a in theory.actions:
    print(a, sitcalc.to_assignments(a, theory))

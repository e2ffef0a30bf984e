"""Going out with or without an umbrella, in an action description language.

Run with ``python3 demos/go_out.py``.
"""
from pathlib import Path

from actionlogic import actionlang, logic
from actionlogic.logic import parse_formula as F

domain = actionlang.parse_domain((Path(__file__).parent / "data" / "goout.dom").read_text())
theory = actionlang.compile("Go-out", domain)
print("transition formula:", logic.compact(theory.sigma))

for belief in ("Rain & -Umbrella & Dry", "Rain & Umbrella & Dry", "Dry"):
    after = actionlang.progress_formula(F(belief), theory)
    print(f"progress({belief}) = {logic.compact(after)}")

goal = F("Outside & Dry")
print("weakly regressed goal:", logic.compact(actionlang.regress_weak_formula(goal, theory)))
print("strongly regressed goal:", logic.compact(actionlang.regress_strong_formula(goal, theory)))

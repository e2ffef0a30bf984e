"""Updating a fruit bowl: exactly one of apple or banana, then the banana is eaten.

Run with ``python3 demos/fruit.py``.
"""
from actionlogic import logic, update
from actionlogic.logic import parse_formula as F

K = F("(banana & -apple) | (apple & -banana)")
phi = F("-banana")
atoms = [logic.Atom("apple"), logic.Atom("banana")]

for name, op in update.OPERATORS.items():
    print(f"{name:<5} {logic.compact(op(K, phi, atoms=atoms))}")

# revising would instead conclude that the apple is there
print("revision-like", logic.compact(update.REVISION_LIKE(K, phi, atoms=atoms)))
print()
print(update.check_postulates("pma", 2))

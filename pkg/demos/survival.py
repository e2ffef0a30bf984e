"""A fluent that decays over time, then a small two-slice network.

Run with ``python3 demos/survival.py``.
"""
from pathlib import Path

from actionlogic import bayes
from actionlogic.core import ProbBelief

sm = bayes.SurvivalModel(rate=0.3)
for hours in (0, 1, 2, 5, 10):
    print(f"P(alive after {hours:>2}h) = {bayes.survive(1.0, sm, hours):.4f}")

rates = bayes.EventRates(p_make_true=0.05, p_make_false=0.02)
print("with events, one step from 0.8:", round(bayes.persist_with_events(0.8, rates, sm), 4))
print()

net = bayes.parse_dbn((Path(__file__).parent / "data" / "survival.dbn").read_text())
print(net)
b = ProbBelief({s: 1.0 for s in net.space.states if s["Alive"] and s["Seen"]})
for step in range(1, 4):
    b = bayes.dbn_step(b, net)
    print(f"step {step}: P(Alive) = {bayes.marginal(b, 'Alive'):.4f}  P(Seen) = {bayes.marginal(b, 'Seen'):.4f}")

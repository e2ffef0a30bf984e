"""A computer that sometimes fails to shut down, watched through a noisy light.

Run with ``python3 demos/shutdown.py``.
"""
from actionlogic import core
from actionlogic.core import ProbBelief, StochasticAction

STATES = ["c_on", "c_stand_by", "c_off"]

shut_down = StochasticAction("shut_down", {
    "c_on": {"c_on": 0.1, "c_off": 0.9},
    "c_stand_by": {"c_stand_by": 0.3, "c_off": 0.7},
    "c_off": {"c_off": 1.0},
})

# the power light is on unless the machine is off, but it flickers sometimes
light = core.EpistemicAction("look", prob_model={
    "c_on": {"lit": 0.95, "dark": 0.05},
    "c_stand_by": {"lit": 0.8, "dark": 0.2},
    "c_off": {"lit": 0.1, "dark": 0.9},
})


def show(label, b):
    cells = ", ".join(f"{s}={b.prob(s):.3f}" for s in STATES)
    print(f"{label:<28} {cells}")


b = ProbBelief({"c_on": 0.6, "c_stand_by": 0.4})
show("before", b)
show("after shut_down", core.progress_prob(b, shut_down))
show("after shut_down, light lit", core.filter_prob(b, shut_down, "lit", light))
show("after shut_down, light dark", core.filter_prob(b, shut_down, "dark", light))

# the binary view only keeps the support
print("possible after shut_down:", sorted(core.progress(b.support(), shut_down.support_relation())))

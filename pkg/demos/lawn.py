"""A lawn that turns up wet with nobody acting: explaining it with events.

Run with ``python3 demos/lawn.py``.
"""
from pathlib import Path

from actionlogic import actionlang, cli, core
from actionlogic.errors import Inconsistent

DATA = Path(__file__).parent / "data"
domain = actionlang.parse_domain((DATA / "lawn.dom").read_text())
scenario, sensors, exogenous = cli.parse_scenario((DATA / "lawn.scn").read_text(), domain)
model = {name: actionlang.enumerate_transitions(actionlang.compile(name, domain)) for name in domain.actions}
model.update(sensors)

result = core.run_scenario(scenario, model)
print("consistent without events:", result.consistent)

try:
    explanations = core.extrapolate(scenario, [model[n] for n in exogenous], model)
except Inconsistent as exc:
    print("no explanation:", exc)
else:
    for e in explanations:
        events = ", ".join(f"{name} between t={t} and t={t + 1}" for t, name in e.events)
        print("explanation:", events)

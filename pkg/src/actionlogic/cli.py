"""Command-line front end.

Every verb prints one result: plain text by default, or with
``--format structured`` a single JSON line ``{"verb", "command", "status",
"payload"}``.  Exit codes: 0 success, 1 the request has no answer under the
model (inconsistent observation, inexecutable action, ...), 2 malformed
input or usage.

Scenario files (``scenario`` / ``extrapolate``)::

    initial: -Wet
    step: do Water observe Wet
    step:                      # nothing recorded at this time point
    step: observe -Wet
    exogenous: Rain

Markov chain files (``chain``) over named states::

    states: c_on c_stand_by c_off
    action shut_down {
      c_on -> c_on 0.1, c_off 0.9
    }
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path

from . import actionlang, bayes, core, logic, sitcalc, update
from .errors import ActionLogicError, DomainError, Inconsistent, ParseError, ResolutionError

VERBS = ("compile", "progress", "regress-weak", "regress-strong", "filter", "abduce", "scenario",
         "extrapolate", "regress-ssa", "valid", "assignments", "modularity", "update",
         "check-postulates", "dbn-step", "chain")


class UsageError(ActionLogicError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------------------
# input helpers

def _read(path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None


def _formula(text, what="formula") -> logic.Formula:
    try:
        return logic.parse_formula(text)
    except ParseError as e:
        raise ParseError(f"{what}: {e.message}", e.line, e.column) from None


def _check_fluents(phi, domain):
    for a in phi.atoms():
        if a.name not in domain.fluents:
            raise ResolutionError(f"undeclared fluent {a.name!r}")


def _belief_states(domain, phi) -> frozenset:
    _check_fluents(phi, domain)
    # states breaking a static law are not possible worlds
    return domain.space().models(logic.conj(phi, domain.static_formula()))


def _explicit_model(domain) -> dict:
    return {name: actionlang.enumerate_transitions(actionlang.compile(name, domain))
            for name in domain.actions}


def _sensor(space, phi) -> core.EpistemicAction:
    """Perfect sensor reporting whether ``phi`` holds."""
    return core.EpistemicAction.from_function(
        f"observe {phi}", space.states, lambda s: "yes" if s.satisfies(phi) else "no")


def parse_scenario(text, domain):
    """Scenario file into ``(Scenario, sensor model, exogenous names)``."""
    initial, steps, exogenous, sensors = logic.TOP, [], [], {}
    space = domain.space()
    step_re = re.compile(r"^(?:do\s+(?P<action>\S+))?\s*(?:observe\s+(?P<obs>.+))?$")
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, rest = line.partition(":")
        rest = rest.strip()
        if not sep or key.strip() not in ("initial", "step", "exogenous"):
            raise ParseError(f"unrecognized scenario line {line!r}", number, 1)
        key = key.strip()
        if key == "initial":
            initial = logic.parse_formula(rest, number)
            _check_fluents(initial, domain)
        elif key == "exogenous":
            exogenous.extend(n for n in re.split(r"[\s,]+", rest) if n)
        else:
            m = step_re.match(rest)
            if m is None:
                raise ParseError("expected 'step: [do A] [observe <formula>]'", number, 1)
            action, obs, sensor = m.group("action"), None, None
            if action is not None:
                domain.action(action)
            if m.group("obs"):
                phi = logic.parse_formula(m.group("obs"), number)
                _check_fluents(phi, domain)
                sensor = f"observe {phi}"
                sensors[sensor] = _sensor(space, phi)
                obs = "yes"
            steps.append(core.Step(action, obs, sensor))
    for name in exogenous:
        domain.action(name)
    states = space.models(initial)
    if not states:
        raise Inconsistent("the initial belief is unsatisfiable")
    return core.Scenario(states, steps), sensors, exogenous


def parse_chain(text):
    """Markov chain file into ``(states, {name: StochasticAction})``."""
    states, actions = [], {}
    current, rows = None, {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("states:"):
            states.extend(line[len("states:"):].split())
            continue
        m = re.match(r"^action\s+(\S+)\s*\{$", line)
        if m:
            current, rows = m.group(1), {}
            continue
        if line == "}":
            if current is None:
                raise ParseError("unmatched '}'", number, 1)
            actions[current] = core.StochasticAction(current, rows, states)
            current = None
            continue
        m = re.match(r"^(\S+)\s*->\s*(.+)$", line)
        if m is None or current is None:
            raise ParseError(f"unrecognized line {line!r}", number, 1)
        row = {}
        for item in m.group(2).split(","):
            parts = item.split()
            if len(parts) != 2:
                raise ParseError(f"expected '<state> <probability>', found {item.strip()!r}", number, 1)
            try:
                row[parts[0]] = float(parts[1])
            except ValueError:
                raise ParseError(f"bad probability {parts[1]!r}", number, 1) from None
        for s in [m.group(1), *row]:
            if s not in states:
                raise ResolutionError(f"undeclared state {s!r}", number)
        rows[m.group(1)] = row
    if current is not None:
        raise ParseError(f"action {current} is not closed", None)
    return states, actions


def _distribution(text, keys):
    """``key: p, key: p``; a bare key means probability 1."""
    mass = {}
    for item in text.split(","):
        key, sep, p = item.rpartition(":")
        if not sep:
            key, p = p, "1"
        key = key.strip()
        if key not in keys:
            raise ResolutionError(f"unknown state {key!r}")
        try:
            mass[key] = mass.get(key, 0.0) + float(p)
        except ValueError:
            raise ParseError(f"bad probability {p.strip()!r}") from None
    return mass


def _dbn_belief(text, space):
    """Entries ``formula: p``; each mass is spread uniformly over the formula's models."""
    mass = {}
    for item in text.split(","):
        key, sep, p = item.rpartition(":")
        if not sep:
            key, p = p, "1"
        phi = _formula(key.strip(), "belief")
        for a in phi.atoms():
            if a.name not in space.fluents:
                raise ResolutionError(f"undeclared fluent {a.name!r}")
        states = space.models(phi)
        if not states:
            raise Inconsistent(f"belief entry {key.strip()} has no model")
        try:
            share = float(p) / len(states)
        except ValueError:
            raise ParseError(f"bad probability {p.strip()!r}") from None
        for s in states:
            mass[s] = mass.get(s, 0.0) + share
    return core.ProbBelief(mass)


# ---------------------------------------------------------------------------
# output helpers

def _show(phi, args, atoms=None) -> str:
    if args.canonical:
        return logic.to_text(logic.canonical(phi, atoms))
    return logic.to_text(logic.compact(phi, atoms))


def _show_states(states, domain, args) -> str:
    space = domain.space()
    if not states:
        return logic.to_text(logic.BOTTOM)
    return _show(space.formula(states), args, space.atoms())


def _dist_payload(b) -> list:
    out = []
    for s in core._canonical_order(b.support()):
        label = s.literals() if isinstance(s, core.State) else s
        out.append({"state": label, "p": b.prob(s)})
    return out


def _dist_text(b) -> str:
    lines = []
    for entry in _dist_payload(b):
        label = entry["state"]
        label = "{" + ", ".join(label) + "}" if isinstance(label, list) else label
        lines.append(f"{label}: {entry['p']:.12g}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# verbs; each returns (payload, text)

def _domain(args):
    return actionlang.parse_domain(_read(args.domain))


def cmd_compile(args):
    domain = _domain(args)
    names = [args.action] if args.action else list(domain.actions)
    payload, lines = {}, []
    for name in names:
        theory = actionlang.compile(name, domain)
        entry = {"sigma": _show(theory.sigma, args)}
        lines.append(f"{name}: {entry['sigma']}")
        if args.transitions:
            relation = actionlang.enumerate_transitions(theory)
            entry["transitions"] = [{"from": s.literals(), "to": [t.literals() for t in sorted(relation(s))]}
                                    for s in sorted(relation.states)]
            for item in entry["transitions"]:
                targets = "; ".join("{" + ", ".join(t) + "}" for t in item["to"]) or "(inexecutable)"
                lines.append(f"  {{{', '.join(item['from'])}}} -> {targets}")
        payload[name] = entry
    return payload, "\n".join(lines)


def _symbolic(args, fn, source):
    domain = _domain(args)
    phi = _formula(getattr(args, source), source)
    _check_fluents(phi, domain)
    theory = actionlang.compile(args.action, domain)
    result = fn(phi, theory)
    text = _show(result, args, [logic.Atom(f) for f in domain.fluents] if args.canonical else None)
    return {"formula": text}, text


def cmd_progress(args):
    return _symbolic(args, actionlang.progress_formula, "belief")


def cmd_regress_weak(args):
    return _symbolic(args, actionlang.regress_weak_formula, "goal")


def cmd_regress_strong(args):
    return _symbolic(args, actionlang.regress_strong_formula, "goal")


def cmd_filter(args):
    domain = _domain(args)
    phi = _formula(args.belief, "belief")
    obs = _formula(args.observe, "observation")
    _check_fluents(phi, domain)
    _check_fluents(obs, domain)
    predicted = phi
    if args.action:
        predicted = actionlang.progress_formula(phi, actionlang.compile(args.action, domain))
    result = logic.conj(predicted, obs)
    if not logic.is_satisfiable(result):
        raise Inconsistent(f"observation {obs} is impossible")
    text = _show(result, args, [logic.Atom(f) for f in domain.fluents] if args.canonical else None)
    return {"formula": text}, text


def cmd_abduce(args):
    domain = _domain(args)
    before = _belief_states(domain, _formula(args.belief, "belief"))
    after = _belief_states(domain, _formula(args.target, "target"))
    model = _explicit_model(domain)
    names = args.candidates.split(",") if args.candidates else sorted(model)
    for n in names:
        domain.action(n)
    found = sorted(a.name for a in core.abduce(before, after, [model[n] for n in names]))
    return {"actions": found}, " ".join(found) if found else "(none)"


def cmd_scenario(args):
    domain = _domain(args)
    scenario, sensors, _ = parse_scenario(_read(args.scenario), domain)
    model = {**_explicit_model(domain), **sensors}
    result = core.run_scenario(scenario, model)
    trajectory = [_show_states(b, domain, args) for b in result.trajectory]
    if not result.consistent:
        raise Inconsistent(f"the scenario is inconsistent at time {result.inconsistent_at}")
    text = "\n".join(f"{t}: {phi}" for t, phi in enumerate(trajectory))
    return {"trajectory": trajectory}, text


def cmd_extrapolate(args):
    domain = _domain(args)
    scenario, sensors, exogenous = parse_scenario(_read(args.scenario), domain)
    if args.exogenous:
        exogenous = args.exogenous.split(",")
        for n in exogenous:
            domain.action(n)
    if not exogenous:
        raise UsageError("no exogenous events given (use --exogenous or an 'exogenous:' line)")
    explicit = _explicit_model(domain)
    model = {**explicit, **sensors}
    found = core.extrapolate(scenario, [explicit[n] for n in exogenous], model)
    payload, lines = [], []
    for e in found:
        final = _show_states(e.final, domain, args)
        payload.append({"events": [list(ev) for ev in e.events], "final": final})
        events = ", ".join(f"{name}@{t}" for t, name in e.events) or "(none)"
        lines.append(f"{events}: {final}")
    return {"explanations": payload}, "\n".join(lines)


def _theory(args):
    return sitcalc.parse_ssa_theory(_read(args.theory))


def cmd_regress_ssa(args):
    theory = _theory(args)
    phi = sitcalc.parse_regress_query(args.formula)
    result = sitcalc.strip_situation(sitcalc.regress(phi, theory))
    text = _show(result, args, [logic.Atom(f) for f in theory.fluents] if args.canonical else None)
    return {"formula": text, "situation": str(sitcalc.S0)}, text


def cmd_valid(args):
    theory = _theory(args)
    phi0, actions, psi = sitcalc.parse_valid_query(args.query)
    verdict = sitcalc.holds_after(phi0, actions, psi, theory)
    return {"valid": verdict}, "valid" if verdict else "not valid"


def cmd_assignments(args):
    theory = _theory(args)
    names = [args.action] if args.action else list(theory.actions)
    payload, lines = {}, []
    for name in names:
        result = sitcalc.to_assignments(name, theory)
        payload[name] = {f: _show(phi, args) for f, phi in result.assignments.items()}
        body = ", ".join(f"{f} := {t}" for f, t in payload[name].items())
        lines.append(f"{name}: {{{' ' + body + ' ' if body else ''}}}")
    return payload, "\n".join(lines)


def cmd_modularity(args):
    laws = sitcalc.modularity_of_domain(_domain(args))
    texts = sorted(_show(law, args) for law in laws)
    return {"modular": not texts, "laws": texts}, "\n".join(texts) if texts else "modular"


def cmd_update(args):
    op = update.get_operator(args.op)
    base, phi = _formula(args.base, "base"), _formula(args.by, "update")
    result = op(base, phi)
    text = _show(result, args)
    return {"operator": op.name, "formula": text}, text


def cmd_check_postulates(args):
    report = update.check_postulates(args.op, args.n, args.mode, args.samples, args.seed)
    payload = {"operator": report.operator, "atoms": [str(a) for a in report.atoms],
               "mode": report.mode, "results": report.records()}
    return payload, str(report)


def cmd_dbn_step(args):
    net = bayes.parse_dbn(_read(args.network))
    b = _dbn_belief(args.belief, net.space)
    for _ in range(args.steps):
        b = bayes.dbn_step(b, net)
    return {"distribution": _dist_payload(b)}, _dist_text(b)


def cmd_chain(args):
    states, actions = parse_chain(_read(args.chain))
    if args.action not in actions:
        raise ResolutionError(f"undeclared action {args.action!r}")
    b = core.ProbBelief(_distribution(args.belief, states))
    b = bayes.chain_progress(b, actions[args.action], args.steps)
    return {"distribution": _dist_payload(b)}, _dist_text(b)


# ---------------------------------------------------------------------------
# argument parsing

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="actionlogic", description="Belief progression, regression and update over propositional fluents.")
    parser.add_argument("--format", choices=("text", "structured"), default="text")
    parser.add_argument("--canonical", action="store_true",
                        help="print formulas as canonical DNF over sorted atoms")
    sub = parser.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    def verb(name, fn, help):
        p = sub.add_parser(name, help=help)
        p.set_defaults(fn=fn)
        # accept the global flags after the verb too
        p.add_argument("--format", choices=("text", "structured"), default=argparse.SUPPRESS)
        p.add_argument("--canonical", action="store_true", default=argparse.SUPPRESS)
        return p

    p = verb("compile", cmd_compile, "two-slice theory of an action")
    p.add_argument("--domain", required=True)
    p.add_argument("--action")
    p.add_argument("--transitions", action="store_true", help="also list the transition relation")
    for name, fn, source in (("progress", cmd_progress, "belief"),
                             ("regress-weak", cmd_regress_weak, "goal"),
                             ("regress-strong", cmd_regress_strong, "goal")):
        p = verb(name, fn, f"symbolic {name.replace('-', ' ')}")
        p.add_argument("--domain", required=True)
        p.add_argument(f"--{source}", required=True)
        p.add_argument("--action", required=True)
    p = verb("filter", cmd_filter, "progress then keep what a perfect observation allows")
    p.add_argument("--domain", required=True)
    p.add_argument("--belief", required=True)
    p.add_argument("--action")
    p.add_argument("--observe", required=True)
    p = verb("abduce", cmd_abduce, "actions that can explain a transition")
    p.add_argument("--domain", required=True)
    p.add_argument("--belief", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--candidates", help="comma separated action names (default: all)")
    p = verb("scenario", cmd_scenario, "filter along a scenario")
    p.add_argument("--domain", required=True)
    p.add_argument("--scenario", required=True)
    p = verb("extrapolate", cmd_extrapolate, "minimal exogenous events explaining a scenario")
    p.add_argument("--domain", required=True)
    p.add_argument("--scenario", required=True)
    p.add_argument("--exogenous", help="comma separated action names")
    p = verb("regress-ssa", cmd_regress_ssa, "regress a situation formula to S0")
    p.add_argument("--theory", required=True)
    p.add_argument("--formula", required=True)
    p = verb("valid", cmd_valid, "decide phi0 -> [A1]...[An] psi")
    p.add_argument("--theory", required=True)
    p.add_argument("--query", required=True)
    p = verb("assignments", cmd_assignments, "assignment actions induced by the axioms")
    p.add_argument("--theory", required=True)
    p.add_argument("--action")
    p = verb("modularity", cmd_modularity, "static laws implied by the effect laws")
    p.add_argument("--domain", required=True)
    p = verb("update", cmd_update, "belief update")
    p.add_argument("--op", choices=sorted(update.OPERATORS), default="pma")
    p.add_argument("--base", required=True)
    p.add_argument("--by", required=True)
    p = verb("check-postulates", cmd_check_postulates, "check U1-U9 for an update operator")
    p.add_argument("--op", choices=sorted(update.OPERATORS), default="pma")
    p.add_argument("--n", type=int, default=2, choices=(1, 2, 3))
    p.add_argument("--mode", choices=("exhaustive", "sampled"), default="exhaustive")
    p.add_argument("--samples", type=int, default=20000)
    p.add_argument("--seed", type=int, default=0)
    p = verb("dbn-step", cmd_dbn_step, "exact step(s) of a two-slice network")
    p.add_argument("--network", required=True)
    p.add_argument("--belief", required=True, help="'formula: p, ...' (a bare formula has mass 1)")
    p.add_argument("--steps", type=int, default=1)
    p = verb("chain", cmd_chain, "k steps of a Markov chain")
    p.add_argument("--chain", required=True)
    p.add_argument("--action", required=True)
    p.add_argument("--belief", required=True, help="'state: p, ...'")
    p.add_argument("--steps", type=int, default=1)
    return parser


def _emit(fmt, record, text, stream):
    if fmt == "structured":
        stream.write(json.dumps(record, sort_keys=True) + "\n")
    elif text is not None:
        stream.write(text + "\n")


def _attach_negative_values(argv):
    """``--belief -p`` into ``--belief=-p``: formulas may start with ``-``."""
    out, i = [], 0
    while i < len(argv):
        a = argv[i]
        if (a.startswith("--") and "=" not in a and i + 1 < len(argv)
                and argv[i + 1].startswith("-") and not argv[i + 1].startswith("--")):
            out.append(f"{a}={argv[i + 1]}")
            i += 2
            continue
        out.append(a)
        i += 1
    return out


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    argv = list(sys.argv[1:] if argv is None else argv)
    fmt = "structured" if "structured" in argv and "--format" in argv else "text"
    verb = next((a for a in argv if a in VERBS), None)
    record = {"verb": verb, "command": argv}
    try:
        args = build_parser().parse_args(_attach_negative_values(argv))
        fmt = args.format
        payload, text = args.fn(args)
    except DomainError as e:
        code, kind, message = 1, type(e).__name__, str(e)
    except (ParseError, UsageError) as e:
        code, kind, message = 2, type(e).__name__, str(e)
    except ValueError as e:
        # malformed content caught by a constructor (bad probabilities and the like)
        code, kind, message = 2, "InvalidInput", str(e)
    else:
        record.update(status="ok", payload=payload)
        _emit(fmt, record, text, stdout)
        return 0
    record.update(status="error", payload={"kind": kind, "message": message})
    if fmt == "structured":
        _emit(fmt, record, None, stdout)
    else:
        stderr.write(f"error ({kind}): {message}\n")
    return code


def main():
    sys.exit(run())

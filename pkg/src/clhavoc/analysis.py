"""Syntactic SID analyses: profile fixpoint, PCR restrictions, size metrics.

The progressing check accepts state atoms attached to the allocated first
parameter (the component-in-state shorthand) and compares the passed-variable
equation modulo the equalities that tie variables to the first parameter, so
that base rules written with a repeated head parameter classify the same way
as their normalized form.
"""

from __future__ import annotations

from dataclasses import dataclass

from .logic import (Comp, Emp, Eq, Exists, Inter, Neq, Pred, SID, SepConj,
                    StateAtom, Var, atoms_of, prenex, var_text)


def formula_size(f) -> int:
    """Number of symbol occurrences needed to write the formula down."""
    if isinstance(f, Emp):
        return 1
    if isinstance(f, Comp):
        return 2
    if isinstance(f, (Eq, Neq, StateAtom)):
        return 3
    if isinstance(f, Inter):
        return 1 + 2 * len(f.bindings)
    if isinstance(f, Pred):
        return 1 + len(f.args)
    if isinstance(f, SepConj):
        return sum(formula_size(p) for p in f.parts) + len(f.parts) - 1
    if isinstance(f, Exists):
        return 1 + len(f.vars) + formula_size(f.body)
    raise TypeError(f)


def sid_metrics(sid: SID) -> tuple[int, int, int, int]:
    """(size, maxarity, maxinter, maxpreds), with max over the empty set = 0."""
    size = sum(formula_size(r.body) + len(r.params) + 1 for r in sid.rules)
    maxarity = max((len(r.params) for r in sid.rules), default=0)
    maxinter = 0
    maxpreds = 0
    for r in sid.rules:
        preds = 0
        for a in atoms_of(r.body):
            if isinstance(a, Inter):
                maxinter = max(maxinter, len(a.bindings))
            if isinstance(a, Pred):
                preds += 1
        maxpreds = max(maxpreds, preds)
    return size, maxarity, maxinter, maxpreds


def profile(sid: SID) -> dict[str, frozenset[int]]:
    """Greatest fixpoint of the parameter-propagation constraint.

    Position i survives in profile(B) only if every occurrence of B in a rule
    body passes a caller-profile parameter at position i.
    """
    prof: dict[str, set[int]] = {p: set(range(1, sid.arity(p) + 1))
                                 for p in sid.predicates}
    changed = True
    while changed:
        changed = False
        for rule in sid.rules:
            params = rule.params
            for atom in atoms_of(rule.body):
                if not isinstance(atom, Pred):
                    continue
                for i in sorted(prof[atom.name]):
                    y = atom.args[i - 1]
                    if not any(params[j - 1] == y for j in prof[rule.head]):
                        prof[atom.name].discard(i)
                        changed = True
    return {p: frozenset(s) for p, s in prof.items()}


@dataclass(frozen=True)
class RulePcr:
    head: str
    index: int
    progressing: bool
    connected: bool
    erestricted: bool
    reasons: tuple[str, ...]

    @property
    def pcr(self) -> bool:
        return self.progressing and self.connected and self.erestricted


@dataclass(frozen=True)
class PcrReport:
    rules: tuple[RulePcr, ...]

    @property
    def progressing(self) -> bool:
        return all(r.progressing for r in self.rules)

    @property
    def connected(self) -> bool:
        return all(r.connected for r in self.rules)

    @property
    def erestricted(self) -> bool:
        return all(r.erestricted for r in self.rules)

    @property
    def sid_pcr(self) -> bool:
        return all(r.pcr for r in self.rules)


def _x1_closure(x1: Var, eqs: list[tuple[Var, Var]]) -> set[Var]:
    cls = {x1}
    changed = True
    while changed:
        changed = False
        for a, b in eqs:
            if a in cls and b not in cls:
                cls.add(b)
                changed = True
            if b in cls and a not in cls:
                cls.add(a)
                changed = True
    return cls


def check_pcr(sid: SID) -> PcrReport:
    """Per-rule progressing / connected / e-restricted classification."""
    prof = profile(sid)
    rows = []
    for idx, rule in enumerate(sid.rules):
        binders, atoms = prenex(rule.body)
        preds = [a for a in atoms if isinstance(a, Pred)]
        qpf = [a for a in atoms if not isinstance(a, Pred)]
        reasons: list[str] = []

        comps = [a for a in qpf if isinstance(a, Comp)]
        inters = [a for a in qpf if isinstance(a, Inter)]
        states = [a for a in qpf if isinstance(a, StateAtom)]
        eqs = [(a.left, a.right) for a in qpf if isinstance(a, Eq)]
        neqs = [a for a in qpf if isinstance(a, Neq)]

        progressing = True
        if not rule.params:
            progressing = False
            reasons.append("P: no parameters, so no allocated comp(x1)")
        else:
            x1 = rule.params[0]
            if len(comps) != 1 or comps[0].var != x1:
                progressing = False
                reasons.append("P: body must allocate exactly comp(x1)")
            if any(a.var != x1 for a in states):
                progressing = False
                reasons.append("P: state atom on a variable other than x1")
            if progressing:
                cls = _x1_closure(x1, eqs)
                zvars = {z for pa in preds for z in pa.args}
                rhs = set(rule.params[1:]) | set(binders)
                if zvars - cls != rhs - cls:
                    progressing = False
                    only_rhs = sorted(var_text(v) for v in (rhs - cls) - zvars)
                    only_z = sorted(var_text(v) for v in (zvars - cls) - rhs)
                    reasons.append("P: passed variables differ from parameters+existentials"
                                   f" (unpassed={only_rhs}, stray={only_z})")

        anchors = set()
        if rule.params:
            anchors.add(rule.params[0])
            anchors |= {rule.params[i - 1] for i in prof[rule.head]}
        connected = True
        for l, pa in enumerate(preds, start=1):
            if not pa.args:
                connected = False
                reasons.append(f"C: predicate atom #{l} has no first argument")
                continue
            z1 = pa.args[0]
            if not any(z1 in {v for v, _ in it.bindings}
                       and anchors & {v for v, _ in it.bindings} for it in inters):
                connected = False
                reasons.append(f"C: no interaction atom links predicate atom #{l}'s "
                               "first argument to x1 or a profile parameter")

        profparams = {rule.params[i - 1] for i in prof[rule.head]} if rule.params else set()
        erestricted = True
        for a in neqs:
            if not ({a.left, a.right} & profparams):
                erestricted = False
                reasons.append(f"R: disequality {var_text(a.left)} != {var_text(a.right)} "
                               "avoids all profile parameters")

        rows.append(RulePcr(rule.head, idx, progressing, connected, erestricted,
                            tuple(reasons)))
    return PcrReport(tuple(rows))


def render_pcr_table(sid: SID, report: PcrReport) -> str:
    """Stable text table: one row per rule plus profile and metrics lines."""
    prof = profile(sid)
    lines = ["rule  head                 P C R"]
    for row in report.rules:
        flags = " ".join("y" if b else "n"
                         for b in (row.progressing, row.connected, row.erestricted))
        lines.append(f"{row.index:<5} {row.head:<20} {flags}")
        for reason in row.reasons:
            lines.append(f"      - {reason}")
    lines.append(f"sid: progressing={'y' if report.progressing else 'n'} "
                 f"connected={'y' if report.connected else 'n'} "
                 f"e-restricted={'y' if report.erestricted else 'n'} "
                 f"pcr={'y' if report.sid_pcr else 'n'}")
    for p in sid.predicates:
        members = ",".join(map(str, sorted(prof[p]))) or "-"
        lines.append(f"profile {p}: {{{members}}}")
    size, maxarity, maxinter, maxpreds = sid_metrics(sid)
    lines.append(f"metrics: size={size} maxarity={maxarity} "
                 f"maxinter={maxinter} maxpreds={maxpreds}")
    return "\n".join(lines) + "\n"


def degree_sample(sid: SID, pred: str, depth: int) -> int:
    """Maximum degree over all bounded models; an empirical lower bound only."""
    from .oracle import enumerate_models
    from .core import degree
    best = 0
    for model in enumerate_models(sid, sid.atom(pred), depth).models():
        best = max(best, degree(model.config))
    return best

"""Brute-force ground truth at desk scale.

Models of a predicate atom are enumerated from its complete unfoldings: the
equalities fix a base partition of the variables, the remaining classes are
optionally merged (a store may identify variables that no atom separates),
and unpinned carrier ids range over the behavior's states.  Model sets are
kept canonical up to a component renaming that also rewrites the store.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

from .core import Behavior, Configuration, Interaction, step
from .logic import (Atom, Comp, Eq, Formula, Inter, Neq, Pred, SID,
                    StateAtom, Var, eval_bounded, exists, free_vars, prenex,
                    unfold_formula, var_text)


# ---------------------------------------------------------------------------
# canonical forms

def _signatures(g: Configuration, nu: Mapping[Var, str]) -> dict[str, tuple]:
    ids = sorted(g.carrier)
    rho = g.state_map
    sig = {c: (c in g.components, rho[c],
               tuple(sorted((i.itype, pos) for i in g.interactions
                            for pos, cid in enumerate(i.components) if cid == c)),
               tuple(sorted(var_text(v) for v, cid in nu.items() if cid == c)))
           for c in ids}
    # one refinement round over interaction neighborhoods
    for _ in range(2):
        sig = {c: (sig[c], tuple(sorted(tuple(sig[d] for d in i.components)
                                        for i in g.interactions if c in i.components)))
               for c in ids}
    return sig


def canonical_model(g: Configuration, nu: Mapping[Var, str]) -> tuple:
    """Least serialized form over all id renamings compatible with signatures."""
    sig = _signatures(g, nu)
    groups: dict[tuple, list[str]] = {}
    for c in sorted(g.carrier):
        groups.setdefault(sig[c], []).append(c)
    ordered_groups = [groups[k] for k in sorted(groups)]

    best: tuple | None = None
    for perm_choice in itertools.product(*[itertools.permutations(grp)
                                           for grp in ordered_groups]):
        order = [c for grp in perm_choice for c in grp]
        ren = {c: f"m{i}" for i, c in enumerate(order)}
        key = (
            tuple(sorted(ren[c] for c in g.components)),
            tuple(sorted(tuple((ren[c], p) for c, p in i.bindings)
                         for i in g.interactions)),
            tuple(sorted((ren[c], q) for c, q in g.state_pairs)),
            tuple(sorted((var_text(v), ren[c]) for v, c in nu.items())),
        )
        if best is None or key < best:
            best = key
    assert best is not None
    return best


def rename_model(g: Configuration, nu: Mapping[Var, str],
                 ren: Mapping[str, str]) -> tuple[Configuration, dict[Var, str]]:
    g2 = Configuration.make(
        (ren[c] for c in g.components),
        (Interaction(tuple((ren[c], p) for c, p in i.bindings)) for i in g.interactions),
        {ren[c]: q for c, q in g.state_pairs})
    return g2, {v: ren[c] for v, c in nu.items()}


@dataclass
class Model:
    config: Configuration
    store: dict[Var, str]
    provenance: str


class ModelSet:
    """Models deduplicated by canonical key; iteration order is by key."""

    def __init__(self) -> None:
        self.entries: dict[tuple, Model] = {}

    def add(self, g: Configuration, nu: Mapping[Var, str], provenance: str) -> bool:
        key = canonical_model(g, nu)
        if key in self.entries:
            return False
        self.entries[key] = Model(g, dict(nu), provenance)
        return True

    def keys(self) -> list[tuple]:
        return sorted(self.entries)

    def models(self) -> list[Model]:
        return [self.entries[k] for k in self.keys()]

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, key: tuple) -> bool:
        return key in self.entries


# ---------------------------------------------------------------------------
# model enumeration for predicate-free formulas

def _base_classes(allvars: list[Var], eqs: list[tuple[Var, Var]]) -> list[set[Var]]:
    idx = {v: i for i, v in enumerate(allvars)}
    parent = list(range(len(allvars)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for a, b in eqs:
        ra, rb = find(idx[a]), find(idx[b])
        if ra != rb:
            parent[ra] = rb
    by_root: dict[int, set[Var]] = {}
    for v, i in idx.items():
        by_root.setdefault(find(i), set()).add(v)
    return [by_root[r] for r in sorted(by_root)]


def enumerate_pf_models(binders: Sequence[Var], atoms: Sequence[Atom],
                        free: Sequence[Var],
                        states: Iterable[str]) -> Iterator[tuple[Configuration, dict[Var, str]]]:
    """All models of an exists-prefixed qpf formula, up to component renaming.

    Yields (configuration, store) pairs whose carrier covers the store range;
    junk existentials (classes touching no spatial atom and no free variable)
    are dropped, since the infinite pool always satisfies them.
    """
    states = sorted(states)
    comp_atoms: list[Var] = []
    inter_atoms: list[Inter] = []
    state_atoms: list[StateAtom] = []
    eqs: list[tuple[Var, Var]] = []
    neqs: list[tuple[Var, Var]] = []
    for a in atoms:
        if isinstance(a, Comp):
            comp_atoms.append(a.var)
        elif isinstance(a, Inter):
            inter_atoms.append(a)
        elif isinstance(a, StateAtom):
            state_atoms.append(a)
        elif isinstance(a, Eq):
            eqs.append((a.left, a.right))
        elif isinstance(a, Neq):
            neqs.append((a.left, a.right))
        elif isinstance(a, Pred):
            raise ValueError("formula still contains predicate atoms")

    allvars: dict[Var, None] = {}
    for v in list(free) + list(binders):
        allvars.setdefault(v)
    for a in atoms:
        for v in sorted(free_vars(a)):
            allvars.setdefault(v)
    classes = _base_classes(list(allvars), eqs)

    cls_of: dict[Var, int] = {}
    for ci, cls in enumerate(classes):
        for v in cls:
            cls_of[v] = ci

    comp_classes: list[int] = []
    seen_comp: set[int] = set()
    for v in comp_atoms:
        ci = cls_of[v]
        if ci in seen_comp:
            return  # two component atoms forced equal: unsatisfiable
        seen_comp.add(ci)
        comp_classes.append(ci)
    other_classes = [ci for ci in range(len(classes)) if ci not in seen_comp]

    neq_cls = []
    for a, b in neqs:
        ca, cb = cls_of[a], cls_of[b]
        if ca == cb:
            return  # x != x
        neq_cls.append((ca, cb))

    ncomp = len(comp_classes)

    # enumerate merges: each non-component class joins a component bucket, an
    # earlier absent bucket, or opens a fresh absent bucket (restricted growth)
    def merges(i: int, assign: dict[int, int], nabs: int) -> Iterator[dict[int, int]]:
        if i == len(other_classes):
            yield assign
            return
        ci = other_classes[i]
        for b in range(ncomp + nabs + 1):
            yield from merges(i + 1, {**assign, ci: b},
                              nabs + (1 if b == ncomp + nabs else 0))

    for assign in merges(0, {}, 0):
        bucket = {ci: k for k, ci in enumerate(comp_classes)}
        bucket.update(assign)
        yield from _instantiate(bucket, cls_of, inter_atoms, state_atoms,
                                neq_cls, free, states, ncomp)


def _instantiate(bucket, cls_of, inter_atoms, state_atoms, neq_cls, free,
                 states, ncomp):
    def bucket_of_var(v: Var) -> int:
        return bucket[cls_of[v]]

    for ca, cb in neq_cls:
        if bucket[ca] == bucket[cb]:
            return

    # interactions: within-atom distinct, across atoms distinct
    tuples = []
    for a in inter_atoms:
        t = tuple((bucket_of_var(v), p) for v, p in a.bindings)
        comps = [b for b, _ in t]
        if len(set(comps)) != len(comps):
            return
        tuples.append(t)
    if len(set(tuples)) != len(tuples):
        return

    pins: dict[int, str] = {}
    for a in state_atoms:
        b = bucket_of_var(a.var)
        if pins.setdefault(b, a.state) != a.state:
            return

    present = set(range(ncomp))
    relevant = set(present)
    for t in tuples:
        relevant |= {b for b, _ in t}
    relevant |= {bucket_of_var(v) for v in free}

    # junk buckets (absent, untouched by interactions and store) are sound to
    # drop: the infinite pool supplies them in any pinned state
    buckets = sorted(relevant)
    names = {b: f"n{b}" for b in buckets}
    unpinned = [b for b in buckets if b not in pins]
    for choice in itertools.product(states, repeat=len(unpinned)):
        rho = {names[b]: q for b, q in pins.items() if b in relevant}
        rho.update({names[b]: q for b, q in zip(unpinned, choice)})
        g = Configuration.make(
            (names[b] for b in present),
            (Interaction(tuple((names[b], p) for b, p in t)) for t in tuples),
            rho)
        nu = {v: names[bucket_of_var(v)] for v in free}
        yield g, nu


def enumerate_models(sid: SID, atom: Pred, depth: int) -> ModelSet:
    """Canonical models of a predicate atom over all complete unfoldings."""
    ms = ModelSet()
    free = list(atom.args)
    for k, (formula, complete) in enumerate(unfold_formula(sid, atom, depth)):
        if not complete:
            continue
        binders, atoms = prenex(formula)
        for g, nu in enumerate_pf_models(binders, atoms, free, sid.behavior.states):
            ms.add(g, nu, provenance=f"unfolding#{k}")
    return ms


def enumerate_formula_models(formula: Formula, free: Sequence[Var],
                             behavior: Behavior) -> ModelSet:
    """Canonical models of a predicate-free formula."""
    ms = ModelSet()
    binders, atoms = prenex(formula)
    for g, nu in enumerate_pf_models(binders, atoms, free, behavior.states):
        ms.add(g, nu, provenance="formula")
    return ms


# ---------------------------------------------------------------------------
# havoc invariance, entailment, reduction cross-validation

@dataclass
class Counterexample:
    config: Configuration
    store: dict[Var, str]
    interaction: Interaction | None
    successor: Configuration | None


@dataclass
class HavocReport:
    invariant: bool
    depth: int
    models: int
    counterexample: Counterexample | None


def _model_order(ms: ModelSet) -> list[tuple[tuple, Model]]:
    keyed = [(k, ms.entries[k]) for k in ms.keys()]
    return sorted(keyed, key=lambda kv: (len(kv[1].config.components), kv[0]))


def havoc_invariant_bounded(sid: SID, pred: str, depth: int) -> HavocReport:
    """Check closure of the bounded model set under single steps.

    One step suffices: multi-step closure follows inductively once every
    one-step successor stays in the model set.
    """
    atom = sid.atom(pred)
    ms = enumerate_models(sid, atom, depth)
    for _, model in _model_order(ms):
        for inter in sorted(model.config.interactions, key=repr):
            for g2 in sorted(step(sid.behavior, model.config, inter),
                             key=lambda c: c.state_pairs):
                if not eval_bounded(g2, model.store, atom, sid, depth):
                    return HavocReport(False, depth, len(ms),
                                       Counterexample(model.config, model.store,
                                                      inter, g2))
    return HavocReport(True, depth, len(ms), None)


@dataclass
class EntailReport:
    holds: bool
    depth: int
    lhs_models: int
    counterexample: Counterexample | None


def entails_bounded(sid: SID, lhs: str, rhs: str, depth: int) -> EntailReport:
    """Does every bounded model of lhs satisfy rhs (bounded)?"""
    na, nb = sid.arity(lhs), sid.arity(rhs)
    if nb < na:
        raise ValueError(f"{rhs} has smaller arity than {lhs}")
    rhs_formula = exists(tuple(Var(f"x{i}") for i in range(na + 1, nb + 1)),
                         sid.atom(rhs))
    ms = enumerate_models(sid, sid.atom(lhs), depth)
    for _, model in _model_order(ms):
        if not eval_bounded(model.config, model.store, rhs_formula, sid, depth):
            return EntailReport(False, depth, len(ms),
                                Counterexample(model.config, model.store, None, None))
    return EntailReport(True, depth, len(ms), None)


@dataclass
class CrossReport:
    equal: bool
    depth: int
    left_size: int
    right_size: int
    left_only: list[tuple]
    right_only: list[tuple]


def cross_validate_reduction(sid: SID, pred: str, depth: int,
                             result) -> CrossReport:
    """Set-equality between one-step successors of the predicate's bounded
    models (all stepped components present) and the bounded models of the
    derived target predicates, modulo component renaming."""
    atom = sid.atom(pred)
    left: dict[tuple, None] = {}
    for _, model in _model_order(enumerate_models(sid, atom, depth)):
        for inter in sorted(model.config.interactions, key=repr):
            if not all(c in model.config.components for c in inter.components):
                continue
            for g2 in step(sid.behavior, model.config, inter):
                left.setdefault(canonical_model(g2, model.store))
    right: dict[tuple, None] = {}
    for target in result.targets:
        for _, model in _model_order(enumerate_models(result.derived_sid,
                                                      result.derived_sid.atom(target),
                                                      depth)):
            right.setdefault(canonical_model(model.config, model.store))
    left_only = sorted(k for k in left if k not in right)
    right_only = sorted(k for k in right if k not in left)
    return CrossReport(not left_only and not right_only, depth,
                       len(left), len(right), left_only, right_only)

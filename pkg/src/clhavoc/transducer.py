"""The interaction-typed havoc transducer and its image computation.

A transducer state is a partition of the type's tracking variables: the
node parameters param(1..maxarity) plus one begin/end marker per position of
the interaction type.  begin(i) enters the state when the component atom
serving position i is rewritten, end(i) when the fired interaction atom is
guessed; both stay visible afterwards, even as singletons, because their
presence is what rules out consuming the same walk twice.  A run accepts when
every begin(i) has been proven equal to end(i).

The product with the rule automaton is built on the fly: only transducer
states reachable from the SID's own trees are ever materialized.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

from .core import Behavior
from .eqform import EqFormula
from .logic import (Comp, Eq, Inter, SID, StateAtom, Var, atoms_of,
                    beginvar, childparam, endvar, param)
from .automata import AlphabetSymbol, TaTransition, TreeAutomaton


class ArityMismatch(ValueError):
    pass


InteractionType = tuple[str, ...]


def interaction_types(sid: SID) -> frozenset[InteractionType]:
    """All ordered port tuples of interaction atoms occurring in the rules."""
    out = set()
    for rule in sid.rules:
        for a in atoms_of(rule.body):
            if isinstance(a, Inter):
                out.add(tuple(p for _, p in a.bindings))
    return frozenset(out)


def ttvars(tau: InteractionType, maxarity: int) -> frozenset[Var]:
    vs = {param(i) for i in range(1, maxarity + 1)}
    vs |= {beginvar(i) for i in range(1, len(tau) + 1)}
    vs |= {endvar(i) for i in range(1, len(tau) + 1)}
    return frozenset(vs)


def state_ok(phi: EqFormula, n: int) -> bool:
    """The non-entailment conditions on transducer states."""
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            if i != j and (phi.entails(beginvar(i), beginvar(j))
                           or phi.entails(endvar(i), endvar(j))
                           or phi.entails(beginvar(i), endvar(j))):
                return False
    return True


def is_final(phi: EqFormula, n: int) -> bool:
    return all(phi.entails(beginvar(i), endvar(i)) for i in range(1, n + 1))


@dataclass(frozen=True)
class Witness:
    """The choices behind one transducer transition, for tracing."""

    tau: InteractionType
    rewrites: tuple[tuple[int, Var, str, str], ...]  # (position, var, q, q')
    fired_atom: int | None                           # atom index of the guessed interaction


def _canonical_state(phi: EqFormula) -> EqFormula:
    # singleton parameter classes carry no information; marker singletons do
    keep = []
    for cls in phi.classes:
        if len(cls) > 1 or next(iter(cls)).name in ("%begin", "%end"):
            keep.append(cls)
    return EqFormula(frozenset(keep))


def transducer_step(tau: InteractionType, alpha: AlphabetSymbol,
                    child_states: Sequence[EqFormula], behavior: Behavior,
                    maxarity: int) -> list[tuple[AlphabetSymbol, EqFormula, Witness]]:
    """All transitions (alpha, alpha')(child_states) -> state for the type tau.

    Enumerates the choice of rewritten component atoms (one per fresh walk
    position, each backed by a behavior transition over the matching port),
    the optional guess of the fired interaction atom, and discards any result
    that would merge distinct walk markers.
    """
    n = len(tau)
    h = alpha.rank
    if len(child_states) != h:
        raise ArityMismatch(f"symbol of rank {h} given {len(child_states)} child states")
    if alpha.arities[0] > maxarity:
        raise ArityMismatch(f"symbol arity {alpha.arities[0]} exceeds maxarity {maxarity}")

    begin_sets = [{i for i in range(1, n + 1) if beginvar(i) in st.vars}
                  for st in child_states]
    end_sets = [{i for i in range(1, n + 1) if endvar(i) in st.vars}
                for st in child_states]
    for s1, s2 in itertools.combinations(begin_sets, 2):
        if s1 & s2:
            return []
    if sum(1 for s in end_sets if s) > 1:
        return []
    used_begin = set().union(*begin_sets) if begin_sets else set()
    ends_present = any(end_sets)

    # rewrite candidates: variables carrying both a component and a state atom
    state_idx: dict[Var, list[int]] = {}
    comp_vars: set[Var] = set()
    fired_candidates: list[int] = []
    eq_pairs: list[tuple[Var, Var]] = []
    for idx, a in enumerate(alpha.atoms):
        if isinstance(a, Comp):
            comp_vars.add(a.var)
        elif isinstance(a, StateAtom):
            state_idx.setdefault(a.var, []).append(idx)
        elif isinstance(a, Inter) and tuple(p for _, p in a.bindings) == tau:
            fired_candidates.append(idx)
        elif isinstance(a, Eq):
            eq_pairs.append((a.left, a.right))
    candidates: dict[Var, str] = {}
    for v in sorted(comp_vars):
        states = {alpha.atoms[i].state for i in state_idx.get(v, [])}
        if len(states) == 1:
            candidates[v] = states.pop()

    avail = [i for i in range(1, n + 1) if i not in used_begin]

    # base conjunction shared by all choices: child states with their
    # parameters rebased onto this node's childparam variables, plus the
    # equalities of the symbol itself
    base_pairs: list[tuple[Var, Var]] = list(eq_pairs)
    base_vars: set[Var] = set()
    for a in alpha.atoms:
        if isinstance(a, Eq):
            base_vars |= {a.left, a.right}
    for l, st in enumerate(child_states, start=1):
        al = alpha.arities[l]
        ren = {param(j): childparam(l, j) for j in range(1, al + 1)}
        stray = [v for v in st.vars if v.name == "%in" and v not in ren]
        if stray:
            raise ArityMismatch(f"child state mentions parameter beyond arity {al}")
        st_r = st.rename(ren)
        base_vars |= st_r.vars
        for cls in st_r.classes:
            first = next(iter(cls))
            base_pairs.extend((first, v) for v in cls)

    keepvars = ttvars(tau, maxarity)
    results: list[tuple[AlphabetSymbol, EqFormula, Witness]] = []

    def emit(rewrites: list[tuple[int, Var, str, str]], fired: int | None) -> None:
        pairs = list(base_pairs)
        vars_all = set(base_vars)
        for i, xi, _, _ in rewrites:
            pairs.append((beginvar(i), xi))
            vars_all |= {beginvar(i), xi}
        if fired is not None:
            atom = alpha.atoms[fired]
            for pos, (z, _) in enumerate(atom.bindings, start=1):
                pairs.append((endvar(pos), z))
                vars_all |= {endvar(pos), z}
        conj = EqFormula.make(vars_all, pairs)
        phi = _canonical_state(conj.qelim(conj.vars - keepvars))
        if not state_ok(phi, n):
            return
        out_atoms = list(alpha.atoms)
        for _, xi, q, q2 in rewrites:
            slot = state_idx[xi][0]
            out_atoms[slot] = StateAtom(xi, q2)
        out = AlphabetSymbol(alpha.exvars, tuple(out_atoms), alpha.arities)
        results.append((out, phi,
                        Witness(tau, tuple((i, xi, q, q2) for i, xi, q, q2 in rewrites),
                                fired)))

    def choose(idx: int, chosen: list[tuple[int, Var, str, str]],
               used_vars: set[Var]) -> None:
        # every subset of available positions, each mapped to a distinct
        # rewritable variable with an enabled behavior transition
        fired_opts: list[int | None] = [None]
        if not ends_present:
            fired_opts += fired_candidates
        for fired in fired_opts:
            emit(chosen, fired)
        for k in range(idx, len(avail)):
            i = avail[k]
            port = tau[i - 1]
            for xi in sorted(set(candidates) - used_vars):
                q = candidates[xi]
                for q2 in behavior.targets(q, port):
                    chosen.append((i, xi, q, q2))
                    choose(k + 1, chosen, used_vars | {xi})
                    chosen.pop()

    choose(0, [], set())
    return results


@dataclass(frozen=True)
class ProductState:
    base: object
    phi: EqFormula
    tau: InteractionType


@dataclass
class ImageResult:
    automaton: TreeAutomaton
    witnesses: dict[TaTransition, tuple[Witness, ...]]
    per_tau_states: dict[InteractionType, int]


def image(ta: TreeAutomaton, root_state: object, sid: SID,
          behavior: Behavior) -> ImageResult:
    """Image of the trees accepted at root_state under the union transducer.

    One product component per interaction type occurring in the SID; states
    are (rule-automaton state, transducer state) pairs discovered from the
    leaves up.  Final states pair root_state with an accepting partition.
    """
    maxarity = max((sid.arity(p) for p in sid.predicates), default=0)
    taus = sorted(interaction_types(sid))
    transitions: dict[TaTransition, list[Witness]] = {}
    discovered: dict[ProductState, None] = {}
    finals: list[ProductState] = []

    for tau in taus:
        n = len(tau)
        by_base: dict[object, list[EqFormula]] = {}
        done: set[tuple[int, tuple[EqFormula, ...]]] = set()
        changed = True
        while changed:
            changed = False
            for ti, tr in enumerate(ta.transitions):
                pools = [by_base.get(c, []) for c in tr.children]
                if any(not p for p in pools):
                    continue
                for combo in itertools.product(*pools):
                    key = (ti, combo)
                    if key in done:
                        continue
                    done.add(key)
                    child_phis = list(combo)
                    for out_sym, phi, wit in transducer_step(
                            tau, tr.symbol, child_phis, behavior, maxarity):
                        ps = ProductState(tr.result, phi, tau)
                        if ps not in discovered:
                            discovered[ps] = None
                            by_base.setdefault(tr.result, []).append(phi)
                            changed = True
                            if tr.result == root_state and is_final(phi, n):
                                finals.append(ps)
                        kids = tuple(ProductState(c, combo[l], tau)
                                     for l, c in enumerate(tr.children))
                        ptr = TaTransition(out_sym, kids, ps)
                        transitions.setdefault(ptr, []).append(wit)

    product = TreeAutomaton.make(transitions, finals=finals, states=tuple(discovered))
    per_tau = {tau: sum(1 for s in discovered if s.tau == tau) for tau in taus}
    return ImageResult(product, {tr: tuple(ws) for tr, ws in transitions.items()}, per_tau)

"""Ranked trees over formula-labeled alphabets and the SID <-> TA translations.

An alphabet symbol packages a predicate-free formula over canonical variables
(param/childparam families plus positional existentials) with an arity tuple
(a0, a1..ah).  Trees of symbols denote characteristic formulas whose variables
are superscripted by node addresses; a tree automaton over such symbols
recognizes exactly the unfolding trees of a SID.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Iterator, Sequence

from .core import Behavior
from .logic import (Atom, Comp, Emp, Eq, Formula, Inter, Neq, Pred, Rule,
                    SID, StateAtom, Var, boundvar, childparam, exists,
                    free_vars, nodeex, nodevar, param, prenex, sep,
                    substitute, var_text)


class BadAddress(KeyError):
    """Address outside the tree domain."""


class NonNormalizableRule(ValueError):
    """Rule body cannot be brought into exists-prefix qpf * predicates form."""


class NotSidCompatible(ValueError):
    """Tree automaton states carry inconsistent arity annotations."""


Address = tuple[int, ...]


@dataclass(frozen=True)
class AlphabetSymbol:
    """A predicate-free formula with canonical variables plus an arity tuple."""

    exvars: tuple[Var, ...]
    atoms: tuple[Atom, ...]
    arities: tuple[int, ...]

    @property
    def rank(self) -> int:
        return len(self.arities) - 1

    def body(self) -> Formula:
        return exists(self.exvars, sep(*self.atoms))


def make_symbol(binders: Sequence[Var], atoms: Sequence[Atom],
                arities: Sequence[int]) -> AlphabetSymbol:
    """Canonicalize binder names positionally and validate the variable layout."""
    binders = tuple(binders)
    ren = {b: boundvar(k) for k, b in enumerate(binders, start=1)}
    if len(ren) != len(binders):
        raise ValueError("duplicate existential binders")
    catoms = tuple(substitute(a, ren) for a in atoms)
    arities = tuple(arities)
    a0, rest = arities[0], arities[1:]
    expected = {param(i) for i in range(1, a0 + 1)}
    expected |= {childparam(l, i) for l, al in enumerate(rest, start=1)
                 for i in range(1, al + 1)}
    fv = set()
    for a in catoms:
        fv |= free_vars(a)
    fv -= set(ren.values())
    # a parameter may be unused (leaf rules often ignore trailing parameters),
    # but no variable outside the announced layout may occur
    extra = fv - expected
    if extra:
        raise ValueError(f"symbol variables exceed arities {arities}: "
                         f"{sorted(var_text(v) for v in extra)}")
    return AlphabetSymbol(tuple(ren[b] for b in binders), catoms, arities)


def symbol_text(sym: AlphabetSymbol) -> str:
    from .logic import var_text as vt

    def atom_text(a: Atom) -> str:
        if isinstance(a, Emp):
            return "emp"
        if isinstance(a, Comp):
            return f"comp({vt(a.var)})"
        if isinstance(a, StateAtom):
            return f"state({vt(a.var)}:{a.state})"
        if isinstance(a, Inter):
            return "<" + ", ".join(f"{vt(v)}.{p}" for v, p in a.bindings) + ">"
        if isinstance(a, Eq):
            return f"{vt(a.left)}={vt(a.right)}"
        if isinstance(a, Neq):
            return f"{vt(a.left)}!={vt(a.right)}"
        if isinstance(a, Pred):
            return f"{a.name}({', '.join(vt(v) for v in a.args)})"
        raise TypeError(a)

    prefix = ""
    if sym.exvars:
        prefix = "E " + ",".join(vt(v) for v in sym.exvars) + " . "
    body = " * ".join(atom_text(a) for a in sym.atoms) or "emp"
    return f"<{prefix}{body} | {','.join(map(str, sym.arities))}>"


@dataclass(frozen=True)
class Tree:
    """A finite prefix-closed, rank-complete map from addresses to symbols."""

    labels: tuple[tuple[Address, AlphabetSymbol], ...]

    def __post_init__(self) -> None:
        dom = dict(self.labels)
        if len(dom) != len(self.labels):
            raise ValueError("duplicate addresses")
        if () not in dom:
            raise ValueError("tree has no root")
        for u, sym in dom.items():
            if u and u[:-1] not in dom:
                raise ValueError(f"domain not prefix-closed at {u}")
            children = {v[-1] for v in dom if len(v) == len(u) + 1 and v[:-1] == u}
            if children != set(range(1, sym.rank + 1)):
                raise ValueError(f"node {u} has children {sorted(children)}, "
                                 f"rank {sym.rank}")

    @staticmethod
    def node(sym: AlphabetSymbol, *children: "Tree") -> "Tree":
        if len(children) != sym.rank:
            raise ValueError(f"symbol of rank {sym.rank} given {len(children)} children")
        labels: list[tuple[Address, AlphabetSymbol]] = [((), sym)]
        for l, ch in enumerate(children, start=1):
            labels.extend(((l, *u), s) for u, s in ch.labels)
        return Tree(tuple(sorted(labels)))

    @property
    def dom(self) -> tuple[Address, ...]:
        return tuple(u for u, _ in self.labels)

    def label(self, u: Address) -> AlphabetSymbol:
        for v, s in self.labels:
            if v == u:
                return s
        raise BadAddress(u)

    def subtree(self, u: Address) -> "Tree":
        if u not in self.dom:
            raise BadAddress(u)
        k = len(u)
        return Tree(tuple(sorted((v[k:], s) for v, s in self.labels if v[:k] == u)))

    def size(self) -> int:
        return len(self.labels)


def _node_substitution(sym: AlphabetSymbol, addr: Address) -> dict[Var, Var]:
    sub = {param(j): nodevar(addr, j) for j in range(1, sym.arities[0] + 1)}
    for l, al in enumerate(sym.arities[1:], start=1):
        sub.update({childparam(l, j): nodevar((*addr, l), j)
                    for j in range(1, al + 1)})
    sub.update({v: nodeex(addr, k) for k, v in enumerate(sym.exvars, start=1)})
    return sub


def char_formula(t: Tree, u: Address = ()) -> Formula:
    """Quantifier- and predicate-free characteristic formula of the subtree at u.

    Every variable is superscripted by the absolute address of the node that
    introduces it, so formulas of sibling subtrees share no variables except
    through the explicit childparam equalities of the parent symbol.
    """
    sub = t.subtree(u)
    parts: list[Formula] = []
    for w, sym in sub.labels:
        mapping = _node_substitution(sym, u + w)
        parts.extend(substitute(a, mapping) for a in sym.atoms)
    return sep(*parts)


def char_formula_closed(t: Tree, u: Address = ()) -> Formula:
    """The existentially closed characteristic formula: only the root
    parameters x_j^u remain free."""
    sub = t.subtree(u)
    binders: list[Var] = []
    for w, sym in sub.labels:
        addr = u + w
        if w != ():
            binders.extend(nodevar(addr, j) for j in range(1, sym.arities[0] + 1))
        binders.extend(nodeex(addr, k) for k in range(1, len(sym.exvars) + 1))
    return exists(binders, char_formula(t, u))


# ---------------------------------------------------------------------------
# tree automata

@dataclass(frozen=True)
class TaTransition:
    symbol: AlphabetSymbol
    children: tuple[object, ...]
    result: object


@dataclass(frozen=True)
class TreeAutomaton:
    states: tuple[object, ...]
    finals: frozenset
    transitions: tuple[TaTransition, ...]

    @staticmethod
    def make(transitions: Iterable[TaTransition], finals: Iterable = (),
             states: Iterable = ()) -> "TreeAutomaton":
        transitions = tuple(transitions)
        ordered: dict[object, None] = {}
        for s in states:
            ordered.setdefault(s)
        for tr in transitions:
            for s in tr.children:
                ordered.setdefault(s)
            ordered.setdefault(tr.result)
        return TreeAutomaton(tuple(ordered), frozenset(finals), transitions)

    @property
    def alphabet(self) -> frozenset[AlphabetSymbol]:
        return frozenset(tr.symbol for tr in self.transitions)


def sid_to_ta(sid: SID) -> tuple[TreeAutomaton, dict[str, object]]:
    """One symbol and transition per rule, one state per defined predicate.

    The symbol appends the childparam equalities that record how the rule
    passes variables to its predicate atoms; structurally equal symbols are
    shared across rules.
    """
    transitions: list[TaTransition] = []
    symcache: dict[AlphabetSymbol, AlphabetSymbol] = {}
    for rule in sid.rules:
        binders, atoms = prenex(rule.body)
        preds = [a for a in atoms if isinstance(a, Pred)]
        qpf = [a for a in atoms if not isinstance(a, Pred)]
        mapping = {x: param(j) for j, x in enumerate(rule.params, start=1)}
        body = [substitute(a, mapping) for a in qpf]
        for l, pa in enumerate(preds, start=1):
            for i, z in enumerate(pa.args, start=1):
                body.append(Eq(childparam(l, i), mapping.get(z, z)))
        arities = [len(rule.params)] + [sid.arity(p.name) for p in preds]
        sym = make_symbol(binders, body, arities)
        sym = symcache.setdefault(sym, sym)
        transitions.append(TaTransition(sym, tuple(p.name for p in preds), rule.head))
    ta = TreeAutomaton.make(transitions, states=tuple(sid.predicates))
    return ta, {p: p for p in sid.predicates}


def is_sid_compatible(ta: TreeAutomaton) -> bool:
    """Each state must be annotated with one arity across all its occurrences."""
    arity: dict[object, int] = {}
    for tr in ta.transitions:
        slots = [(tr.result, tr.symbol.arities[0])]
        slots += list(zip(tr.children, tr.symbol.arities[1:]))
        for s, a in slots:
            if arity.setdefault(s, a) != a:
                return False
    return True


def ta_to_sid(ta: TreeAutomaton, behavior: Behavior,
              name_of: Callable[[object], str] = str) -> SID:
    """One rule per transition, instantiating childparams with fresh variables."""
    if not is_sid_compatible(ta):
        raise NotSidCompatible("states carry inconsistent arities")
    rules = []
    for tr in ta.transitions:
        sym = tr.symbol
        a0, rest = sym.arities[0], sym.arities[1:]
        params = tuple(Var(f"x{i}") for i in range(1, a0 + 1))
        mapping: dict[Var, Var] = {param(i): v for i, v in enumerate(params, start=1)}
        binders: list[Var] = []
        for k, b in enumerate(sym.exvars, start=1):
            nb = Var(f"z{k}")
            mapping[b] = nb
            binders.append(nb)
        childargs: list[tuple[Var, ...]] = []
        for l, al in enumerate(rest, start=1):
            args = tuple(Var(f"y{l}_{i}") for i in range(1, al + 1))
            childargs.append(args)
            for i, v in enumerate(args, start=1):
                mapping[childparam(l, i)] = v
                binders.append(v)
        parts = [substitute(a, mapping) for a in sym.atoms]
        parts += [Pred(name_of(q), childargs[l]) for l, q in enumerate(tr.children)]
        rules.append(Rule(name_of(tr.result), params, exists(binders, sep(*parts))))
    return SID(tuple(rules), behavior)


def ta_membership(ta: TreeAutomaton, t: Tree, state: object) -> bool:
    """Standard bottom-up run existence."""
    return state in _reachable_states(ta, t)[()]


def _reachable_states(ta: TreeAutomaton, t: Tree) -> dict[Address, set]:
    by_symbol: dict[AlphabetSymbol, list[TaTransition]] = {}
    for tr in ta.transitions:
        by_symbol.setdefault(tr.symbol, []).append(tr)
    out: dict[Address, set] = {}
    for u, sym in sorted(t.labels, key=lambda x: (-len(x[0]), x[0])):
        got: set = set()
        for tr in by_symbol.get(sym, []):
            if all(tr.children[l - 1] in out[(*u, l)] for l in range(1, sym.rank + 1)):
                got.add(tr.result)
        out[u] = got
    return out


def ta_trim(ta: TreeAutomaton) -> TreeAutomaton:
    """Drop non-productive states; with final states, also drop useless ones."""
    productive: set = set()
    changed = True
    while changed:
        changed = False
        for tr in ta.transitions:
            if tr.result not in productive and all(c in productive for c in tr.children):
                productive.add(tr.result)
                changed = True
    keep = productive
    if ta.finals:
        useful = set(ta.finals) & productive
        changed = True
        while changed:
            changed = False
            for tr in ta.transitions:
                if tr.result in useful and all(c in productive for c in tr.children):
                    for c in tr.children:
                        if c not in useful:
                            useful.add(c)
                            changed = True
        keep = useful
    transitions = tuple(tr for tr in ta.transitions
                        if tr.result in keep and all(c in keep for c in tr.children))
    states = tuple(s for s in ta.states if s in keep)
    return TreeAutomaton(states, frozenset(s for s in ta.finals if s in keep), transitions)


def enumerate_trees(ta: TreeAutomaton, state: object, max_nodes: int) -> list[Tree]:
    """All trees of at most max_nodes nodes accepted at `state` (brute force)."""
    by_result: dict[object, list[TaTransition]] = {}
    for tr in ta.transitions:
        by_result.setdefault(tr.result, []).append(tr)

    def gen(q: object, budget: int) -> Iterator[tuple[Tree, int]]:
        for tr in by_result.get(q, []):
            h = tr.symbol.rank
            if budget < 1 + h:
                continue
            if h == 0:
                yield Tree.node(tr.symbol), 1
                continue
            for combo in _child_combos(tr.children, budget - 1):
                trees, size = combo
                yield Tree.node(tr.symbol, *trees), size + 1

    def _child_combos(children: tuple, budget: int) -> Iterator[tuple[list[Tree], int]]:
        if not children:
            yield [], 0
            return
        head, rest = children[0], children[1:]
        min_rest = len(rest)
        for t0, s0 in gen(head, budget - min_rest):
            for ts, s in _child_combos(rest, budget - s0):
                yield [t0] + ts, s0 + s

    seen: dict[Tree, None] = {}
    for t, _ in gen(state, max_nodes):
        seen.setdefault(t)
    return list(seen)


def dump_ta(ta: TreeAutomaton, name_of: Callable[[object], str] = str) -> str:
    lines = [f"states: {', '.join(name_of(s) for s in ta.states)}"]
    if ta.finals:
        finals = sorted(name_of(s) for s in ta.finals)
        lines.append(f"finals: {', '.join(finals)}")
    for tr in ta.transitions:
        kids = ", ".join(name_of(c) for c in tr.children)
        lines.append(f"  {symbol_text(tr.symbol)}({kids}) -> {name_of(tr.result)}")
    return "\n".join(lines) + "\n"

"""Configuration logic: syntax, inductive definitions, satisfaction, unfolding.

Formulas are immutable trees over six atom kinds plus separating conjunction
and existential quantification.  Satisfaction of predicate-free formulas is
decided by bijective matching: component atoms must cover the present
components exactly once, interaction atoms the interactions, while state and
(dis)equality atoms hold on empty sub-configurations and only constrain the
store and the state table.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

from .core import Behavior, Configuration, Interaction


class UnboundVariable(KeyError):
    """A free variable of the evaluated formula is missing from the store."""


class UndefinedPredicate(ValueError):
    """A predicate atom refers to a name with no defining rule."""


# ---------------------------------------------------------------------------
# variables

@dataclass(frozen=True, order=True)
class Var:
    """A logical variable; the tag distinguishes canonical indexed families."""

    name: str
    tag: tuple[int, ...] = ()


def param(j: int) -> Var:
    """Canonical parameter variable of an alphabet symbol (left-hand side)."""
    return Var("%in", (j,))


def childparam(l: int, j: int) -> Var:
    """Canonical variable for position j of the l-th child predicate atom."""
    return Var("%out", (l, j))


def beginvar(i: int) -> Var:
    """Walk marker: the component atom of walk i has been consumed."""
    return Var("%begin", (i,))


def endvar(i: int) -> Var:
    """Walk marker: the fired interaction atom binds position i."""
    return Var("%end", (i,))


def boundvar(k: int) -> Var:
    """Canonical existential binder of an alphabet symbol."""
    return Var("%y", (k,))


def nodevar(addr: tuple[int, ...], j: int) -> Var:
    """Characteristic-formula parameter x_j superscripted with a tree address."""
    return Var("%x", (*addr, j))


def nodeex(addr: tuple[int, ...], j: int) -> Var:
    """Characteristic-formula existential y_j superscripted with an address."""
    return Var("%ya", (*addr, j))


def var_text(v: Var) -> str:
    """Stable printable name, for debug dumps and partition rendering."""
    if v.name == "%in":
        return f"p{v.tag[0]}"
    if v.name == "%out":
        return f"c{v.tag[0]}_{v.tag[1]}"
    if v.name == "%begin":
        return f"b{v.tag[0]}"
    if v.name == "%end":
        return f"e{v.tag[0]}"
    if v.name == "%y":
        return f"y{v.tag[0]}"
    if v.name in ("%x", "%ya"):
        addr = ".".join(map(str, v.tag[:-1])) or "eps"
        base = "x" if v.name == "%x" else "y"
        return f"{base}{v.tag[-1]}^{addr}"
    if v.tag:
        return f"{v.name}_{'_'.join(map(str, v.tag))}"
    return v.name


# ---------------------------------------------------------------------------
# formulas

@dataclass(frozen=True)
class Emp:
    pass


@dataclass(frozen=True)
class Comp:
    var: Var


@dataclass(frozen=True)
class StateAtom:
    var: Var
    state: str


@dataclass(frozen=True)
class Inter:
    bindings: tuple[tuple[Var, str], ...]


@dataclass(frozen=True)
class Eq:
    left: Var
    right: Var


@dataclass(frozen=True)
class Neq:
    left: Var
    right: Var


@dataclass(frozen=True)
class Pred:
    name: str
    args: tuple[Var, ...]


@dataclass(frozen=True)
class SepConj:
    parts: tuple["Formula", ...]


@dataclass(frozen=True)
class Exists:
    vars: tuple[Var, ...]
    body: "Formula"


Formula = Emp | Comp | StateAtom | Inter | Eq | Neq | Pred | SepConj | Exists
Atom = Emp | Comp | StateAtom | Inter | Eq | Neq | Pred


def sep(*parts: Formula) -> Formula:
    """Flattened separating conjunction; emp units are dropped."""
    flat: list[Formula] = []
    for p in parts:
        if isinstance(p, SepConj):
            flat.extend(p.parts)
        elif not isinstance(p, Emp):
            flat.append(p)
    if not flat:
        return Emp()
    if len(flat) == 1:
        return flat[0]
    return SepConj(tuple(flat))


def exists(vars: Sequence[Var], body: Formula) -> Formula:
    vars = tuple(vars)
    if not vars:
        return body
    if isinstance(body, Exists):
        return Exists(vars + body.vars, body.body)
    return Exists(vars, body)


def comp_in(x: Var, q: str) -> Formula:
    """The component-in-state shorthand: comp(x) * state(x, q)."""
    return sep(Comp(x), StateAtom(x, q))


def free_vars(f: Formula) -> frozenset[Var]:
    if isinstance(f, (Emp,)):
        return frozenset()
    if isinstance(f, Comp):
        return frozenset([f.var])
    if isinstance(f, StateAtom):
        return frozenset([f.var])
    if isinstance(f, Inter):
        return frozenset(v for v, _ in f.bindings)
    if isinstance(f, (Eq, Neq)):
        return frozenset([f.left, f.right])
    if isinstance(f, Pred):
        return frozenset(f.args)
    if isinstance(f, SepConj):
        out: frozenset[Var] = frozenset()
        for p in f.parts:
            out |= free_vars(p)
        return out
    if isinstance(f, Exists):
        return free_vars(f.body) - set(f.vars)
    raise TypeError(f)


def _map_var(mapping: Mapping[Var, Var], v: Var) -> Var:
    return mapping.get(v, v)


def substitute(f: Formula, mapping: Mapping[Var, Var]) -> Formula:
    """Simultaneous, capture-avoiding substitution of free occurrences."""
    if isinstance(f, Emp):
        return f
    if isinstance(f, Comp):
        return Comp(_map_var(mapping, f.var))
    if isinstance(f, StateAtom):
        return StateAtom(_map_var(mapping, f.var), f.state)
    if isinstance(f, Inter):
        return Inter(tuple((_map_var(mapping, v), p) for v, p in f.bindings))
    if isinstance(f, Eq):
        return Eq(_map_var(mapping, f.left), _map_var(mapping, f.right))
    if isinstance(f, Neq):
        return Neq(_map_var(mapping, f.left), _map_var(mapping, f.right))
    if isinstance(f, Pred):
        return Pred(f.name, tuple(_map_var(mapping, v) for v in f.args))
    if isinstance(f, SepConj):
        return SepConj(tuple(substitute(p, mapping) for p in f.parts))
    if isinstance(f, Exists):
        inner = {k: v for k, v in mapping.items() if k not in f.vars}
        targets = set(inner.values())
        binders = list(f.vars)
        body = f.body
        if targets & set(binders):
            # rename binders that would capture a substituted variable
            taken = {v.name for v in targets | free_vars(f.body) | set(binders)}
            renames: dict[Var, Var] = {}
            for i, b in enumerate(binders):
                if b in targets:
                    k = 0
                    while f"{b.name}~{k}" in taken:
                        k += 1
                    nb = Var(f"{b.name}~{k}", b.tag)
                    taken.add(nb.name)
                    renames[b] = nb
                    binders[i] = nb
            body = substitute(body, renames)
        return Exists(tuple(binders), substitute(body, inner))
    raise TypeError(f)


def atoms_of(f: Formula) -> Iterator[Atom]:
    """Leaf atoms of a formula in syntactic order (quantifiers transparent)."""
    if isinstance(f, SepConj):
        for p in f.parts:
            yield from atoms_of(p)
    elif isinstance(f, Exists):
        yield from atoms_of(f.body)
    else:
        yield f


def prenex(f: Formula, counter: itertools.count | None = None,
           prefix: str = "%q") -> tuple[tuple[Var, ...], tuple[Atom, ...]]:
    """Pull every existential to the front, freshly renaming all binders."""
    if counter is None:
        counter = itertools.count()
    binders: list[Var] = []

    def walk(g: Formula, env: dict[Var, Var]) -> list[Atom]:
        if isinstance(g, Exists):
            env = dict(env)
            for b in g.vars:
                nb = Var(prefix, (next(counter),))
                env[b] = nb
                binders.append(nb)
            return walk(g.body, env)
        if isinstance(g, SepConj):
            out: list[Atom] = []
            for p in g.parts:
                out.extend(walk(p, env))
            return out
        if isinstance(g, Emp):
            return []
        return [substitute(g, env)]

    atoms = walk(f, {})
    return tuple(binders), tuple(atoms)


# ---------------------------------------------------------------------------
# rules and SIDs

@dataclass(frozen=True)
class Rule:
    head: str
    params: tuple[Var, ...]
    body: Formula

    def __post_init__(self) -> None:
        if len(set(self.params)) != len(self.params):
            raise ValueError(f"rule for {self.head}: parameters must be distinct")
        extra = free_vars(self.body) - set(self.params)
        if extra:
            raise ValueError(f"rule for {self.head}: unbound body variables "
                             f"{sorted(var_text(v) for v in extra)}")


@dataclass(frozen=True)
class SID:
    """A finite set of inductive definitions over a fixed behavior."""

    rules: tuple[Rule, ...]
    behavior: Behavior

    def __post_init__(self) -> None:
        arities: dict[str, int] = {}
        for r in self.rules:
            prev = arities.setdefault(r.head, len(r.params))
            if prev != len(r.params):
                raise ValueError(f"{r.head} defined with arities {prev} and {len(r.params)}")
        for r in self.rules:
            for a in atoms_of(r.body):
                if isinstance(a, Pred):
                    if a.name not in arities:
                        raise UndefinedPredicate(f"{a.name} used in {r.head} but never defined")
                    if len(a.args) != arities[a.name]:
                        raise ValueError(f"{a.name} used with arity {len(a.args)}, "
                                         f"defined with {arities[a.name]}")
                if isinstance(a, StateAtom) and a.state not in self.behavior.states:
                    raise ValueError(f"undeclared state {a.state!r} in rule for {r.head}")
                if isinstance(a, Inter):
                    for _, p in a.bindings:
                        if p not in self.behavior.ports:
                            raise ValueError(f"undeclared port {p!r} in rule for {r.head}")

    @property
    def predicates(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for r in self.rules:
            seen.setdefault(r.head)
        return tuple(seen)

    def arity(self, name: str) -> int:
        for r in self.rules:
            if r.head == name:
                return len(r.params)
        raise UndefinedPredicate(name)

    def rules_of(self, name: str) -> tuple[Rule, ...]:
        return tuple(r for r in self.rules if r.head == name)

    def atom(self, name: str) -> Pred:
        """The predicate atom over canonical parameters x1..xN."""
        return Pred(name, tuple(Var(f"x{i}") for i in range(1, self.arity(name) + 1)))


# ---------------------------------------------------------------------------
# satisfaction of predicate-free formulas

def _classes_of(vars: Iterable[Var], eqs: Iterable[tuple[Var, Var]]) -> dict[Var, int]:
    index: dict[Var, int] = {}
    parent: list[int] = []

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def slot(v: Var) -> int:
        if v not in index:
            index[v] = len(parent)
            parent.append(len(parent))
        return find(index[v])

    for v in vars:
        slot(v)
    for a, b in eqs:
        ra, rb = slot(a), slot(b)
        if ra != rb:
            parent[ra] = rb
    return {v: find(i) for v, i in index.items()}


def eval_pf(g: Configuration, nu: Mapping[Var, str], f: Formula) -> bool:
    """Does (g, nu) satisfy the predicate-free formula f?

    Existential witnesses outside g are drawn from the infinite pool of
    absent components: any required state is available on a fresh id.
    """
    binders, atoms = prenex(f)
    fv = free_vars(f)
    missing = [v for v in fv if v not in nu]
    if missing:
        raise UnboundVariable(f"store misses {sorted(var_text(v) for v in missing)}")

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
            raise ValueError("eval_pf applied to a formula with predicate atoms")

    if len(comp_atoms) != len(g.components) or len(inter_atoms) != len(g.interactions):
        return False

    allvars = set(binders) | fv
    for a in atoms:
        allvars |= free_vars(a)
    slot_of = _classes_of(allvars, eqs)

    assign: dict[int, str] = {}
    for v in fv:
        s = slot_of[v]
        if s in assign and assign[s] != nu[v]:
            return False
        assign[s] = nu[v]

    state_req: dict[int, str] = {}
    for a in state_atoms:
        s = slot_of[a.var]
        if state_req.setdefault(s, a.state) != a.state:
            return False
    neq_slots = []
    for x, y in neqs:
        sx, sy = slot_of[x], slot_of[y]
        if sx == sy:
            return False
        neq_slots.append((sx, sy))

    comp_slots = [slot_of[v] for v in comp_atoms]
    if len(set(comp_slots)) != len(comp_slots):
        return False

    rho = g.state_map

    def ok_value(s: int, cid: str) -> bool:
        if s in state_req:
            if cid not in rho or rho[cid] != state_req[s]:
                return False
        for a, b in neq_slots:
            if a == s and b in assign and assign[b] == cid:
                return False
            if b == s and a in assign and assign[a] == cid:
                return False
        return True

    for s, cid in assign.items():
        if not ok_value(s, cid):
            return False

    def put(s: int, cid: str, trail: list[int]) -> bool:
        if s in assign:
            return assign[s] == cid
        if not ok_value(s, cid):
            return False
        assign[s] = cid
        trail.append(s)
        return True

    inters = sorted(g.interactions, key=repr)
    comps = sorted(g.components)

    def match_inters(k: int, used: set[Interaction]) -> bool:
        if k == len(inter_atoms):
            return match_comps(0, set())
        atom = inter_atoms[k]
        ports = tuple(p for _, p in atom.bindings)
        for cand in inters:
            if cand in used or cand.itype != ports:
                continue
            trail: list[int] = []
            good = all(put(slot_of[v], cid, trail)
                       for (v, _), cid in zip(atom.bindings, cand.components))
            if good and match_inters(k + 1, used | {cand}):
                return True
            for s in trail:
                del assign[s]
        return False

    def match_comps(k: int, used: set[str]) -> bool:
        if k == len(comp_slots):
            return len(used) == len(comps) and finalize()
        s = comp_slots[k]
        if s in assign:
            cid = assign[s]
            if cid in used or cid not in g.components:
                return False
            return match_comps(k + 1, used | {cid})
        for cid in comps:
            if cid in used:
                continue
            trail: list[int] = []
            if put(s, cid, trail) and match_comps(k + 1, used | {cid}):
                return True
            for st in trail:
                del assign[st]
        return False

    def finalize() -> bool:
        # remaining slots are spatially unconstrained: the infinite pool of
        # absent components supplies a distinct witness in any required state
        return True

    return match_inters(0, set())


def eval_qpf(g: Configuration, nu: Mapping[Var, str], f: Formula) -> bool:
    """Satisfaction of a quantifier- and predicate-free formula."""
    def check(h: Formula) -> None:
        if isinstance(h, Exists):
            raise ValueError("eval_qpf applied to a quantified formula")
        if isinstance(h, SepConj):
            for p in h.parts:
                check(p)
    check(f)
    return eval_pf(g, nu, f)


# ---------------------------------------------------------------------------
# unfolding

@dataclass(frozen=True)
class _Pending:
    atom: Pred
    budget: int


def unfold_formula(sid: SID, f: Formula, depth: int) -> list[tuple[Formula, bool]]:
    """All partial unfoldings of f, each predicate atom expanded to height <= depth.

    Results are (formula, complete) pairs in deterministic leftmost-innermost
    order; complete means no predicate atom remains.
    """
    counter = itertools.count()
    binders0, atoms0 = prenex(f, counter, prefix="%u")
    defined = set(sid.predicates)

    def wrap(items: Sequence[object]) -> list[object]:
        out: list[object] = []
        for a in items:
            if isinstance(a, Pred):
                if a.name not in defined:
                    raise UndefinedPredicate(a.name)
                out.append(_Pending(a, depth))
            else:
                out.append(a)
        return out

    results: list[tuple[Formula, bool]] = []
    stack: list[tuple[tuple[Var, ...], list[object]]] = [(binders0, wrap(atoms0))]
    while stack:
        binders, items = stack.pop()
        pend_at = next((i for i, a in enumerate(items) if isinstance(a, _Pending)), None)
        plain = [a.atom if isinstance(a, _Pending) else a for a in items]
        formula = exists(binders, sep(*plain))
        results.append((formula, pend_at is None))
        if pend_at is None:
            continue
        pend = items[pend_at]
        if pend.budget == 0:
            continue
        successors = []
        for rule in sid.rules_of(pend.atom.name):
            rbinders, ratoms = prenex(rule.body, counter, prefix="%u")
            mapping = dict(zip(rule.params, pend.atom.args))
            spliced: list[object] = []
            for a in ratoms:
                a2 = substitute(a, mapping)
                if isinstance(a2, Pred):
                    spliced.append(_Pending(a2, pend.budget - 1))
                else:
                    spliced.append(a2)
            successors.append((binders + rbinders,
                               items[:pend_at] + spliced + items[pend_at + 1:]))
        stack.extend(reversed(successors))
    return results


def unfold(sid: SID, atom: Pred, depth: int) -> list[tuple[Formula, bool]]:
    """Partial and complete unfoldings of a single predicate atom."""
    if atom.name not in sid.predicates:
        raise UndefinedPredicate(atom.name)
    return unfold_formula(sid, atom, depth)


def eval_bounded(g: Configuration, nu: Mapping[Var, str], f: Formula,
                 sid: SID, depth: int) -> bool:
    """True iff some complete unfolding of f at height <= depth is satisfied.

    Sound for satisfaction; a False answer only rules out models arising
    from unfoldings within the depth bound.
    """
    if not any(isinstance(a, Pred) for a in atoms_of(f)):
        return eval_pf(g, nu, f)
    for formula, complete in unfold_formula(sid, f, depth):
        if complete and eval_pf(g, nu, formula):
            return True
    return False

"""End-to-end reduction of havoc invariance to entailment instances.

The pipeline translates the SID into its rule automaton, computes the image
under the union of the interaction-typed transducers, trims, and translates
back.  Each accepting product state yields one target predicate of the same
arity as the checked predicate; havoc invariance holds iff every emitted
entailment `target |= predicate` holds over the combined definitions.
"""

from __future__ import annotations

from dataclasses import dataclass

from .analysis import check_pcr
from .automata import sid_to_ta, ta_to_sid, ta_trim
from .logic import (Comp, Eq, Inter, Neq, Pred, Rule, SID, StateAtom, Var,
                    free_vars, prenex, var_text)
from .transducer import ProductState, image, interaction_types


class TightnessNotEstablished(RuntimeError):
    """The reduction precondition has no PCR proof and no explicit waiver."""


@dataclass
class ReductionResult:
    predicate: str
    base_sid: SID
    derived_sid: SID
    targets: tuple[str, ...]
    entailments: tuple[tuple[str, str], ...]
    combined_sid: SID
    tightness: str
    state_names: dict[ProductState, str]
    stats: dict
    witnesses: dict


def reduce_havoc_to_entailment(sid: SID, pred: str,
                               assume_tight: bool = False) -> ReductionResult:
    """Build the derived SID and the entailment instances for one predicate.

    Tightness of the predicate is the semantic precondition; the only
    automatic proof is the PCR check.  Callers may assert tightness
    explicitly, which is recorded in the result.
    """
    if pred not in sid.predicates:
        raise KeyError(f"unknown predicate {pred!r}")
    report = check_pcr(sid)
    if report.sid_pcr:
        tightness = "pcr"
    elif assume_tight:
        tightness = "assumed"
    else:
        raise TightnessNotEstablished(
            f"SID is not PCR, so tightness of {pred} is unproven; "
            "pass assume_tight to proceed")

    ta, _ = sid_to_ta(sid)
    info = image(ta, pred, sid, sid.behavior)
    trimmed = ta_trim(info.automaton)

    def state_key(s: ProductState) -> tuple:
        return (s.tau, str(s.base), s.phi.render(var_text))

    ordered = sorted(trimmed.states, key=state_key)
    taken = set(sid.predicates)
    names: dict[ProductState, str] = {}
    for idx, s in enumerate(ordered, start=1):
        name = f"{s.base}__h{idx}"
        while name in taken:
            name += "_"
        taken.add(name)
        names[s] = name

    derived = ta_to_sid(trimmed, sid.behavior, lambda s: names[s])
    targets = tuple(sorted(names[s] for s in trimmed.finals))
    for t in targets:
        assert derived.arity(t) == sid.arity(pred)
    combined = SID(sid.rules + derived.rules, sid.behavior)
    entailments = tuple((t, pred) for t in targets)
    stats = {
        "interaction_types": ["(" + ",".join(tau) + ")" for tau in
                              sorted(interaction_types(sid))],
        "product_states": len(trimmed.states),
        "product_transitions": len(trimmed.transitions),
        "product_alphabet": len(trimmed.alphabet),
        "targets": len(targets),
        "per_type_states": {"(" + ",".join(t) + ")": n
                            for t, n in sorted(info.per_tau_states.items())},
    }
    return ReductionResult(pred, sid, derived, targets, entailments, combined,
                           tightness, names, stats, info.witnesses)


def manifest_dict(result: ReductionResult) -> dict:
    """Plain-data report for the manifest file; fully deterministic."""
    return {
        "predicate": result.predicate,
        "tightness": result.tightness,
        "targets": list(result.targets),
        "entailments": [f"{a} |= {b}" for a, b in result.entailments],
        "states": {name: {"base": str(s.base),
                          "type": "(" + ",".join(s.tau) + ")",
                          "partition": s.phi.render(var_text)}
                   for s, name in sorted(result.state_names.items(),
                                         key=lambda kv: kv[1])},
        "stats": result.stats,
    }


# ---------------------------------------------------------------------------
# class equivalence (rule-wise body equivalence modulo state atoms)

def _norm_body(rule: Rule, sid: SID):
    from .logic import substitute
    pmap = {p: Var(f"x{i}") for i, p in enumerate(rule.params, start=1)}
    binders, atoms = prenex(substitute(rule.body, pmap))
    preds = [a for a in atoms if isinstance(a, Pred)]
    qpf = [a for a in atoms if not isinstance(a, (Pred, StateAtom))]
    eqs = [a for a in qpf if isinstance(a, Eq)]
    rest = [a for a in qpf if not isinstance(a, Eq)]

    # collapse existentials through equalities; free variables are kept
    classes: dict[Var, set[Var]] = {}

    def cls(v: Var) -> set[Var]:
        return classes.setdefault(v, {v})

    for a in eqs:
        ca, cb = cls(a.left), cls(a.right)
        if ca is not cb:
            ca |= cb
            for v in cb:
                classes[v] = ca
    bset = set(binders)
    rep: dict[Var, Var] = {}
    canon_eqs: list[tuple[Var, Var]] = []
    done: set[frozenset[Var]] = set()
    for v, c in classes.items():
        key = frozenset(c)
        if key in done:
            continue
        done.add(key)
        freevs = sorted(c - bset)
        r = freevs[0] if freevs else sorted(c)[0]
        for w in c:
            rep[w] = r
        for w in freevs[1:]:
            canon_eqs.append((r, w))

    def r(v: Var) -> Var:
        return rep.get(v, v)

    out_atoms: list = []
    for a in rest:
        if isinstance(a, Comp):
            out_atoms.append(Comp(r(a.var)))
        elif isinstance(a, Inter):
            out_atoms.append(Inter(tuple((r(v), p) for v, p in a.bindings)))
        elif isinstance(a, Neq):
            out_atoms.append(Neq(*sorted((r(a.left), r(a.right)))))
        else:
            out_atoms.append(a)
    out_atoms.extend(Eq(x, y) for x, y in sorted(canon_eqs))
    live = set()
    for a in out_atoms:
        live |= free_vars(a)
    kept_binders = tuple(sorted({r(b) for b in binders if r(b) in live} & bset))
    pred_heads = tuple((p.name, len(p.args)) for p in preds)
    return kept_binders, tuple(out_atoms), pred_heads


def _atoms_match(atoms1, atoms2, binders1, binders2) -> bool:
    """Multiset equality of atom lists under a bijection of the binders."""
    if len(atoms1) != len(atoms2):
        return False
    if len(binders1) != len(binders2):
        return False

    def match(i: int, used: set[int], bij: dict[Var, Var], inv: dict[Var, Var]) -> bool:
        if i == len(atoms1):
            return True
        a = atoms1[i]
        for j, b in enumerate(atoms2):
            if j in used or type(a) is not type(b):
                continue
            pairs = _var_pairs(a, b)
            if pairs is None:
                continue
            added = []
            ok = True
            for x, y in pairs:
                bx, by = x in set(binders1), y in set(binders2)
                if bx != by:
                    ok = False
                    break
                if not bx:
                    if x != y:
                        ok = False
                        break
                    continue
                if bij.get(x, y) != y or inv.get(y, x) != x:
                    ok = False
                    break
                if x not in bij:
                    bij[x] = y
                    inv[y] = x
                    added.append((x, y))
            if ok and match(i + 1, used | {j}, bij, inv):
                return True
            for x, y in added:
                del bij[x]
                del inv[y]
        return False

    return match(0, set(), {}, {})


def _var_pairs(a, b):
    if isinstance(a, Comp):
        return [(a.var, b.var)]
    if isinstance(a, Inter):
        if len(a.bindings) != len(b.bindings):
            return None
        if tuple(p for _, p in a.bindings) != tuple(p for _, p in b.bindings):
            return None
        return list(zip((v for v, _ in a.bindings), (v for v, _ in b.bindings)))
    if isinstance(a, (Eq, Neq)):
        return [(a.left, b.left), (a.right, b.right)]
    return []


@dataclass
class ClassEquivResult:
    verdict: str  # "equivalent" | "inequivalent" | "unknown"
    pairing: list[tuple[int, int]] | None
    relation: list[tuple[str, str]] | None


def class_equiv(d1: SID, d2: SID) -> ClassEquivResult:
    """Decide Def.-class equivalence by canonical rule matching.

    Searches a rule pairing in both directions together with an
    arity-preserving predicate correspondence; complete for SIDs whose rule
    bodies differ by state renaming plus equalities on quantified variables,
    which covers everything the reduction emits.
    """
    norm1 = [_norm_body(r, d1) for r in d1.rules]
    norm2 = [_norm_body(r, d2) for r in d2.rules]

    def rule_candidates(i: int, r1: Rule, source, targets, norms1, norms2):
        b1, a1, ph1 = norms1[i]
        out = []
        for j, r2 in enumerate(targets.rules):
            b2, a2, ph2 = norms2[j]
            if len(r1.params) != len(r2.params) or len(ph1) != len(ph2):
                continue
            if any(n1 != n2 for (_, n1), (_, n2) in zip(ph1, ph2)):
                continue
            if _atoms_match(a1, a2, b1, b2):
                constraints = [(r1.head, r2.head)]
                constraints += [(p1, p2) for (p1, _), (p2, _) in zip(ph1, ph2)]
                out.append((j, constraints))
        return out

    cand1 = [rule_candidates(i, r, d1, d2, norm1, norm2) for i, r in enumerate(d1.rules)]
    cand2 = [rule_candidates(j, r, d2, d1, norm2, norm1) for j, r in enumerate(d2.rules)]
    if any(not c for c in cand1) or any(not c for c in cand2):
        return ClassEquivResult("inequivalent", None, None)

    arity = {}
    for sid, side in ((d1, "1"), (d2, "2")):
        for p in sid.predicates:
            arity[(side, p)] = sid.arity(p)

    parent: dict[tuple, tuple] = {}

    def find(x):
        parent.setdefault(x, x)
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x, y) -> bool:
        rx, ry = find(x), find(y)
        if rx == ry:
            return True
        if arity.get(rx, arity.get(ry)) != arity.get(ry, arity.get(rx)):
            return False
        parent[rx] = ry
        return True

    steps = 0
    pairing: list[tuple[int, int]] = []

    def solve(k: int) -> bool:
        nonlocal steps
        steps += 1
        if steps > 200000:
            raise TimeoutError
        all_c = cand1 + cand2
        if k == len(all_c):
            return True
        saved = dict(parent)
        for j, constraints in all_c[k]:
            ok = True
            for p1, p2 in constraints:
                side1, side2 = ("1", "2") if k < len(cand1) else ("2", "1")
                if not union((side1, p1), (side2, p2)):
                    ok = False
                    break
            if ok:
                if k < len(cand1):
                    pairing.append((k, j))
                if solve(k + 1):
                    return True
                if k < len(cand1):
                    pairing.pop()
            parent.clear()
            parent.update(saved)
        return False

    for p in arity:
        find(p)
    try:
        if solve(0):
            rel = sorted({(str(a[1]), str(b[1]))
                          for a, b in ((x, find(x)) for x in list(parent))
                          if a != b})
            return ClassEquivResult("equivalent", list(pairing), rel)
        return ClassEquivResult("inequivalent", None, None)
    except TimeoutError:
        return ClassEquivResult("unknown", None, None)

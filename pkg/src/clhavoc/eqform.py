"""Separating conjunctions of equalities, represented as variable partitions.

The variable set is recorded explicitly: a variable may sit in a singleton
class, which carries no equality but still counts as occurring.  Transducer
states rely on that distinction, because a begin/end marker must stay visible
even after every variable it was equated with has been projected away.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from .logic import Var


@dataclass(frozen=True)
class EqFormula:
    """A partition of a finite variable set, closed under =-reasoning."""

    classes: frozenset[frozenset[Var]]

    def __post_init__(self) -> None:
        seen: set[Var] = set()
        for cls in self.classes:
            if not cls:
                raise ValueError("empty class")
            if seen & cls:
                raise ValueError("classes overlap")
            seen |= cls

    @staticmethod
    def make(vars: Iterable[Var] = (), pairs: Iterable[tuple[Var, Var]] = ()) -> "EqFormula":
        """Partition generated by `pairs` over `vars` plus the pair variables."""
        parent: dict[Var, Var] = {}

        def find(v: Var) -> Var:
            parent.setdefault(v, v)
            while parent[v] != v:
                parent[v] = parent[parent[v]]
                v = parent[v]
            return v

        for v in vars:
            find(v)
        for a, b in pairs:
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[ra] = rb
        groups: dict[Var, set[Var]] = {}
        for v in parent:
            groups.setdefault(find(v), set()).add(v)
        return EqFormula(frozenset(frozenset(g) for g in groups.values()))

    @property
    def vars(self) -> frozenset[Var]:
        return frozenset(v for cls in self.classes for v in cls)

    def class_of(self, v: Var) -> frozenset[Var] | None:
        for cls in self.classes:
            if v in cls:
                return cls
        return None

    def entails(self, x: Var, y: Var) -> bool:
        """True iff x = y holds in every model of the partition."""
        if x == y:
            return True
        cx = self.class_of(x)
        return cx is not None and y in cx

    def conjoin(self, other: "EqFormula") -> "EqFormula":
        """Join of the two partitions: transitive closure of their union."""
        pairs = []
        for cls in list(self.classes) + list(other.classes):
            first = next(iter(cls))
            pairs.extend((first, v) for v in cls)
        return EqFormula.make(self.vars | other.vars, pairs)

    def qelim(self, drop: Iterable[Var]) -> "EqFormula":
        """Existentially project away `drop`; kept singletons survive."""
        dropped = set(drop)
        out = []
        for cls in self.classes:
            kept = cls - dropped
            if kept:
                out.append(frozenset(kept))
        return EqFormula(frozenset(out))

    def restrict(self, keep: Iterable[Var]) -> "EqFormula":
        return self.qelim(self.vars - set(keep))

    def rename(self, mapping: Mapping[Var, Var]) -> "EqFormula":
        """Apply an injective-on-classes variable renaming."""
        return EqFormula.make(
            (mapping.get(v, v) for v in self.vars),
            [(mapping.get(a, a), mapping.get(b, b))
             for cls in self.classes for a in [next(iter(cls))] for b in cls])

    def add_vars(self, vars: Iterable[Var]) -> "EqFormula":
        extra = [frozenset([v]) for v in vars if self.class_of(v) is None]
        return EqFormula(self.classes | frozenset(extra))

    def render(self, var_text) -> str:
        parts = sorted("=".join(sorted(var_text(v) for v in cls)) for cls in self.classes)
        return "{" + " | ".join(parts) + "}"


EMPTY_EQ = EqFormula(frozenset())

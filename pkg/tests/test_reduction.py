"""The havoc-to-entailment pipeline and class equivalence."""

import json

import pytest

from clhavoc.core import Behavior
from clhavoc.frontend import Query, SystemFile, parse_system, render_system
from clhavoc.logic import Rule, SID, Var, comp_in
from clhavoc.oracle import cross_validate_reduction, entails_bounded
from clhavoc.reduction import (TightnessNotEstablished, class_equiv,
                               manifest_dict, reduce_havoc_to_entailment)


@pytest.fixture(scope="module")
def ring_reduction(ring):
    return reduce_havoc_to_entailment(ring.sid, "Ring_1_1", assume_tight=True)


@pytest.fixture(scope="module")
def tll_reduction(tll):
    return reduce_havoc_to_entailment(tll.sid, "Root", assume_tight=True)


def test_gate_requires_tightness_evidence(ring):
    with pytest.raises(TightnessNotEstablished):
        reduce_havoc_to_entailment(ring.sid, "Ring_1_1")


def test_pcr_sid_unlocks_gate(pcring):
    result = reduce_havoc_to_entailment(pcring.sid, "PcRing_1_1")
    assert result.tightness == "pcr"


def test_targets_have_matching_arity(ring_reduction, tll_reduction, pcring):
    for result in (ring_reduction, tll_reduction,
                   reduce_havoc_to_entailment(pcring.sid, "PcRing_1_1")):
        base_arity = result.base_sid.arity(result.predicate)
        for t in result.targets:
            assert result.derived_sid.arity(t) == base_arity


def test_ring_entailments_hold(ring, ring_reduction):
    assert ring_reduction.targets
    for lhs, rhs in ring_reduction.entailments:
        assert entails_bounded(ring_reduction.combined_sid, lhs, rhs, 4).holds


def test_th_reduction_entailment_fails(bad):
    result = reduce_havoc_to_entailment(bad.sid, "TH", assume_tight=True)
    assert result.targets
    held = [entails_bounded(result.combined_sid, lhs, rhs, 1).holds
            for lhs, rhs in result.entailments]
    assert not all(held)


def test_no_interaction_atoms_vacuous():
    sid = SID((Rule("A", (Var("x1"),), comp_in(Var("x1"), "q")),),
              Behavior.make(["p"], ["q"], []))
    result = reduce_havoc_to_entailment(sid, "A")
    assert result.targets == ()
    assert result.entailments == ()


def test_cross_validation_ring(ring, ring_reduction):
    cross = cross_validate_reduction(ring.sid, "Ring_1_1", 3, ring_reduction)
    assert cross.equal, (cross.left_only, cross.right_only)


def test_cross_validation_pcring_bare_comp_boundary(pcring):
    """The rewrite needs a component atom with a state pin; pcRing anchors the
    chain on a parameter, so successors whose only witness unfolding ends in
    the bare-comp base rule are missed by the image.  The image side stays
    sound: it never produces a model that is not a one-step successor."""
    result = reduce_havoc_to_entailment(pcring.sid, "PcRing_1_1")
    cross = cross_validate_reduction(pcring.sid, "PcRing_1_1", 3, result)
    assert cross.right_only == []
    assert cross.left_only  # the documented under-approximation


def test_cross_validation_no_interactions():
    sid = SID((Rule("A", (Var("x1"),), comp_in(Var("x1"), "q")),),
              Behavior.make(["p"], ["q"], []))
    result = reduce_havoc_to_entailment(sid, "A")
    cross = cross_validate_reduction(sid, "A", 2, result)
    assert cross.equal
    assert cross.left_size == cross.right_size == 0


def test_manifest_is_deterministic(ring_reduction):
    a = json.dumps(manifest_dict(ring_reduction), sort_keys=True)
    b = json.dumps(manifest_dict(ring_reduction), sort_keys=True)
    assert a == b
    m = manifest_dict(ring_reduction)
    assert m["predicate"] == "Ring_1_1"
    assert m["tightness"] == "assumed"
    assert set(m["targets"]) <= set(m["states"])


def test_namespaces_disjoint(ring_reduction):
    base = set(ring_reduction.base_sid.predicates)
    derived = set(ring_reduction.derived_sid.predicates)
    assert not base & derived


# ---------------------------------------------------------------------------
# class equivalence

def test_class_equiv_identity(ring):
    res = class_equiv(ring.sid, ring.sid)
    assert res.verdict == "equivalent"
    assert res.pairing


def test_class_equiv_ring_reduction(ring, ring_reduction):
    res = class_equiv(ring.sid, ring_reduction.derived_sid)
    assert res.verdict == "equivalent"
    assert len(res.pairing) == len(ring.sid.rules)


def test_class_equiv_tll_reduction(tll, tll_reduction):
    res = class_equiv(tll.sid, tll_reduction.derived_sid)
    assert res.verdict == "equivalent"


def test_class_equiv_detects_port_change(ring):
    text = render_system(SystemFile(ring.behavior, ring.sid, {}, []))
    altered = text.replace("<x.out, y.in> * Chain_1_1", "<x.in, y.out> * Chain_1_1")
    assert altered != text
    other = parse_system(altered)
    assert class_equiv(ring.sid, other.sid).verdict == "inequivalent"


def test_class_equiv_ignores_states(ring):
    text = render_system(SystemFile(ring.behavior, ring.sid, {}, []))
    swapped = (text.replace(": H", ": @").replace(": T", ": H")
               .replace(": @", ": T"))
    other = parse_system(swapped)
    assert class_equiv(ring.sid, other.sid).verdict == "equivalent"


# ---------------------------------------------------------------------------
# emitted file round trip

def test_reduced_file_reparses_and_rereduces(ring, ring_reduction, tmp_path):
    queries = [Query("entail", lhs, rhs) for lhs, rhs in ring_reduction.entailments]
    out = SystemFile(ring.behavior, ring_reduction.combined_sid, {}, queries)
    text = render_system(out)
    back = parse_system(text)
    assert back.sid.predicates == ring_reduction.combined_sid.predicates
    again = reduce_havoc_to_entailment(back.sid, "Ring_1_1", assume_tight=True)
    assert again.stats["product_states"] == ring_reduction.stats["product_states"]
    assert again.stats["product_transitions"] == ring_reduction.stats["product_transitions"]
    assert len(again.targets) == len(ring_reduction.targets)
    assert class_equiv(ring_reduction.derived_sid, again.derived_sid).verdict == "equivalent"

import pytest

from clhavoc.frontend import ParseError, parse_system, render_system
from clhavoc.logic import Pred

from conftest import FIXTURES


def corpus():
    return sorted(FIXTURES.glob("*.clsys"))


def test_ring_expansion_arithmetic(ring):
    # 4 Ring instances + 2 q-variants x 4 Chain instances + 3 base rules
    assert len(ring.sid.rules) == 4 + 8 + 3
    assert len(ring.sid.predicates) == 8
    assert "Chain_0_1" in ring.sid.predicates
    assert ring.sid.arity("Ring_1_1") == 0


def test_macro_guard_clamps_at_zero(ring):
    # Chain_0_t recursion via q=H stays at h'=max(-1,0)=0
    heads = [r for r in ring.sid.rules_of("Chain_0_1")]
    rec = [r for r in heads if any(isinstance(a, Pred) for a in _atoms(r.body))]
    callees = {a.name for r in rec for a in _atoms(r.body) if isinstance(a, Pred)}
    assert callees == {"Chain_0_1", "Chain_0_0"}


def _atoms(f):
    from clhavoc.logic import atoms_of
    return list(atoms_of(f))


def test_wider_instantiation_arithmetic():
    text = """
    behavior { ports in, out; states H, T;
               trans T -out-> H; trans H -in-> T; }
    sid {
      Ring[h=0..2, t=0..2]() <- exists x, y . <x.out, y.in> * Chain[h, t](y, x);
      Chain[h=0..2, t=0..2](x, y) <- exists z . comp(x : H) * <x.out, z.in> * Chain[max(h-1, 0), t](z, y);
      Chain[h=0..2, t=0..2](x, y) <- exists z . comp(x : T) * <x.out, z.in> * Chain[h, max(t-1, 0)](z, y);
      Chain[0, 1](x, y) <- x = y * comp(x : T);
      Chain[1, 0](x, y) <- x = y * comp(x : H);
      Chain[0, 0](x, y) <- x = y * comp(x);
    }
    """
    sf = parse_system(text)
    assert len(sf.sid.rules) == 9 + 9 * 2 + 3
    assert len(sf.sid.predicates) == 9 + 9


def test_empty_sid_is_valid():
    sf = parse_system("behavior { ports p; states q; } sid { }")
    assert sf.sid.rules == ()


def test_tll_parses_to_four_rules(tll_original):
    assert len(tll_original.sid.rules) == 4
    assert tll_original.sid.predicates == ("Root", "Node")


def test_inner_exists_requires_parens():
    ok = ("behavior { ports p; states q; } "
          "sid { A(x) <- comp(x) * (exists y . comp(y) * x != y); }")
    assert len(parse_system(ok).sid.rules) == 1
    with pytest.raises(ParseError):
        parse_system("behavior { ports p; states q; } "
                     "sid { A(x) <- comp(x) * exists y . comp(y); }")


def test_missing_comma_is_a_syntax_error():
    text = "behavior { ports in, out; states q; } sid { A(x, y) <- <x.out y.in>; }"
    with pytest.raises(ParseError) as err:
        parse_system(text)
    assert "','" in str(err.value) or "'>'" in str(err.value)


def test_error_carries_position():
    with pytest.raises(ParseError) as err:
        parse_system("behavior { ports p; states q; }\nsid { A() <- $; }")
    assert err.value.line == 2


def test_arity_mismatch_rejected():
    text = ("behavior { ports p; states q; } "
            "sid { A(x) <- comp(x); B() <- exists z . comp(z) * A(z, z); }")
    with pytest.raises(ParseError):
        parse_system(text)


def test_undeclared_state_rejected():
    with pytest.raises(ParseError):
        parse_system("behavior { ports p; states q; } sid { A(x) <- comp(x : bogus); }")


def test_undefined_predicate_rejected():
    with pytest.raises(ParseError):
        parse_system("behavior { ports p; states q; } sid { A(x) <- B(x); }")


def test_duplicate_rule_params_rejected():
    with pytest.raises(ParseError):
        parse_system("behavior { ports p; states q; } sid { A(x, x) <- comp(x); }")


@pytest.mark.parametrize("path", corpus(), ids=lambda p: p.name)
def test_parse_render_parse_fixpoint(path):
    sf1 = parse_system(path.read_text())
    text1 = render_system(sf1)
    sf2 = parse_system(text1)
    assert render_system(sf2) == text1


@pytest.mark.parametrize("path", corpus(), ids=lambda p: p.name)
def test_render_deterministic(path):
    a = render_system(parse_system(path.read_text()))
    b = render_system(parse_system(path.read_text()))
    assert a == b


def test_configs_parse(ring):
    g = ring.configs["ring3"]
    assert len(g.components) == 3
    assert len(g.interactions) == 3
    assert g.state_map["c3"] == "T"


def test_query_names_must_be_defined():
    text = ("behavior { ports p; states q; } sid { A(x) <- comp(x); } "
            "query invariant Bogus;")
    with pytest.raises(ParseError):
        parse_system(text)

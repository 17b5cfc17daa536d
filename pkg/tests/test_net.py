import pytest

from crnjoin.errors import NetworkError, ParseError
from crnjoin.net import (ZERO, Complex, GlueKind, Model, OneWayFlowSpec, classify_glue, is_output_connectable,
                         is_strongly_connected, join_by_new_reaction, join_one_way_flow, join_replacing,
                         network_from_dict, parse_file, parse_model, parse_network, reaction, union)


def test_flow_chain_counts():
    n = parse_network("0 -> X1 [u1]; X1 <-> X2 [k12,k21]; X2 -> 0 [k20]")
    assert n.species == ("X1", "X2")
    assert len(n.reactions) == 4
    # 0, X1 and X2: three distinct complexes
    assert set(n.complexes) == {ZERO, Complex.of("X1"), Complex.of("X2")}


def test_complex_coefficients():
    n = parse_network("A + B -> 3A + C [k]")
    (r,) = n.reactions
    assert r.reactant.coeffs == {"A": 1, "B": 1}
    assert r.product.coeffs == {"A": 3, "C": 1}
    assert n.species == ("A", "B", "C")


@pytest.mark.parametrize("text,fragment", [
    ("X1 -> X1 [k]", "reactant equals product"),
    ("X1 -> X2 [k]; X2 -> X3 [k]", "duplicate rate label"),
    ("X1 => X2 [k]", "expected '->'"),
    ("X1 -> X2", "missing rate label"),
    ("X1 <-> X2 [k]", "expected 2 rate label"),
    ("X1 -> X2 [k1]; X1 -> X2 [k2]", "duplicate reaction"),
])
def test_parse_errors(text, fragment):
    with pytest.raises(ParseError) as err:
        parse_network(text)
    assert fragment in str(err.value)


def test_parse_error_position():
    with pytest.raises(ParseError) as err:
        parse_network("X1 -> X2 [a]\n  X2 -> $ [b]")
    assert err.value.line == 2
    assert err.value.column > 1


def test_comments_and_outputs():
    pf = parse_file("# header\n0 -> X1 [u1]  # inflow\nX1 -> 0 [a01]\noutput X1\n")
    assert pf.outputs == ("X1",)
    assert pf.model().inputs == ("X1",)


def test_output_must_be_species():
    with pytest.raises(ParseError):
        parse_file("X1 -> 0 [a]; output X9")


def test_dsl_roundtrip():
    n = parse_network("0 <-> A [k1,k2]; 2A -> 3A [k3]; B + A -> 2B [k4]")
    assert parse_network(n.to_dsl()) == n
    assert network_from_dict(n.to_dict()) == n


def test_union_shared_reaction():
    n1 = parse_network("0 -> A [k1]; A -> B [k2]")
    n2 = parse_network("A -> B [k2]; B <-> C [k3,k4]")
    n = union(n1, n2)
    assert n.to_dsl() == parse_network("0 -> A [k1]; A -> B [k2]; B <-> C [k3,k4]").to_dsl()


def test_union_idempotent():
    n = parse_network("0 -> A [k1]; A -> B [k2]")
    assert union(n, n) == n


def test_union_glued_over_reaction():
    n1 = parse_network("X3 -> X1 + X3 [k1]; X4 -> X2 [k2]")
    n2 = parse_network("X4 -> X2 [k2]; X2 -> X1 + X2 [k3]")
    assert len(union(n1, n2).reactions) == 3


def test_union_label_clash():
    with pytest.raises(NetworkError):
        union(parse_network("A -> B [k]"), parse_network("B -> C [k]"))
    with pytest.raises(NetworkError):
        union(parse_network("A -> B [k1]"), parse_network("A -> B [k2]"))


@pytest.mark.parametrize("t1,t2,kind", [
    ("A -> B [k1]", "C -> D [k2]", GlueKind.SPECIES_DISJOINT),
    ("A -> 0 [k1]", "0 -> A + C [k2]", GlueKind.COMPLEX_DISJOINT),
    ("X1 -> X2 [k1]", "X2 -> X1 [k2]", GlueKind.OVER_COMPLEXES),
    ("A -> B [k1]", "A -> B [k1]; B -> C [k2]", GlueKind.OVER_REACTIONS),
])
def test_classify_glue(t1, t2, kind):
    assert classify_glue(parse_network(t1), parse_network(t2)) is kind


def test_join_by_new_reaction():
    n1 = parse_network("A -> 0 [k1]; 2A -> 3A [k2]; 4A -> 3A [k3]")
    n2 = parse_network("6A -> 5A [k4]; 7A -> 8A [k5]; 9A -> 8A [k6]")
    n = join_by_new_reaction(n1, n2, Complex.of({"A": 4}), Complex.of({"A": 5}), "k7")
    assert len(n.reactions) == 7
    with pytest.raises(NetworkError):
        join_by_new_reaction(n1, n2, Complex.of({"A": 5}), Complex.of({"A": 6}))


def test_join_replacing():
    n1 = parse_network("0 -> X1 [u1]; X1 -> 0 [a01]")
    n2 = parse_network("0 -> X2 [u2]; X2 -> 0 [a02]")
    n = join_replacing(n1, n2, [reaction("X1 -> 0 [a01]")], [reaction("X1 -> X2 [a21]")])
    assert {str(r) for r in n.reactions} == {"0 -> X1 [u1]", "0 -> X2 [u2]", "X2 -> 0 [a02]", "X1 -> X2 [a21]"}


M1 = parse_model("0 -> X1 [u1]; X1 <-> X2 [a21,a12]; X2 -> 0 [a02]", ["X1"])
M2 = parse_model("0 -> X3 [u3]; X3 -> 0 [a03]", ["X3"])


def test_scenario_1_replaces_leak_and_inflow():
    g = join_one_way_flow(M1, M2, OneWayFlowSpec.of(1, {"X2": "X3"}))
    assert {str(r) for r in g.reactions} == {
        "0 -> X1 [u1]", "X1 -> X2 [a21]", "X2 -> X1 [a12]", "X2 -> X3 [a02]", "X3 -> 0 [a03]"}
    assert g.inputs == ("X1",)
    assert g.outputs == ("X1", "X3")


def test_scenario_2_keeps_inflow():
    g = join_one_way_flow(M1, M2, OneWayFlowSpec.of(2, {"X2": "X3"}))
    assert set(g.inputs) == {"X1", "X3"}
    assert g.network.find(Complex.of("X2"), ZERO) is None


def test_scenario_3_adds_fresh_reaction():
    g = join_one_way_flow(M1, M2, OneWayFlowSpec.of(3, {"X1": "X3"}))
    new = g.network.find(Complex.of("X1"), Complex.of("X3"))
    assert new is not None and new.label not in M1.network.labels + M2.network.labels
    assert len(g.reactions) == len(M1.reactions) + len(M2.reactions) + 1


def test_scenario_4_drops_inflow():
    g = join_one_way_flow(M1, M2, OneWayFlowSpec.of(4, {"X1": "X3"}))
    assert g.inputs == ("X1",)


def test_scenario_requirements():
    with pytest.raises(NetworkError):
        join_one_way_flow(M1, M2, OneWayFlowSpec.of(1, {"X1": "X3"}))  # X1 has no leak
    with pytest.raises(NetworkError):
        OneWayFlowSpec.of(5, {"X1": "X3"})
    with pytest.raises(NetworkError):
        OneWayFlowSpec.of(1, {})
    with pytest.raises(NetworkError):
        join_one_way_flow(M1, M1, OneWayFlowSpec.of(3, {"X1": "X2"}))


def test_model_inputs_are_inflow_species():
    m = parse_model("0 -> X2 [u2]; X2 -> X1 [a12]; X1 -> 0 [a01]", ["X1"])
    assert m.inputs == ("X2",)
    with pytest.raises(NetworkError):
        Model(m.network, ())


def test_connectivity():
    n = parse_network("0 -> X1 [u]; X1 <-> X2 [a,b]; X2 -> 0 [c]")
    assert is_strongly_connected(n)
    assert not is_strongly_connected(parse_network("X1 -> X2 [a]"))
    assert is_output_connectable(parse_model("X1 -> X2 [a]", ["X2"]))
    assert not is_output_connectable(parse_model("X1 -> X2 [a]", ["X1"]))

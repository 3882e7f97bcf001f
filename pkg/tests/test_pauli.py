from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import pauli_matrix, stabilizer_product_matrix
from trapbench.graph import Graph, grid_graph
from trapbench.pauli import (
    PauliString,
    commutes,
    detection_fraction,
    graph_stabilizer,
    stabilizer_generator,
)

PATH2 = Graph(2, frozenset({(0, 1)}))
SINGLE = Graph(1, frozenset())


def paulis(n):
    return st.builds(
        PauliString,
        st.just(n),
        st.integers(0, 2**n - 1),
        st.integers(0, 2**n - 1),
        st.integers(0, 3),
    )


def test_parse_and_print_round_trip():
    for text in ("+XZI", "-iYY", "+iZ", "-IXYZ"):
        assert str(PauliString.parse(text)) == text
    assert PauliString.parse("XZ") == PauliString.parse("+XZ")


def test_parse_rejects_garbage():
    for bad in ("", "+", "XQ", "*X", "+-X"):
        with pytest.raises(ValueError):
            PauliString.parse(bad)


def test_single_vertex_generator_is_x():
    assert graph_stabilizer(SINGLE, {0}) == PauliString.parse("+X")


def test_path_generator():
    assert graph_stabilizer(PATH2, {0}) == PauliString.parse("+XZ")


def test_path_full_subset_is_plus_yy():
    assert graph_stabilizer(PATH2, {0, 1}) == PauliString.parse("+YY")


def test_empty_subset_rejected():
    with pytest.raises(ValueError):
        graph_stabilizer(PATH2, set())


def test_commutes_examples():
    x, z = PauliString.parse("X"), PauliString.parse("Z")
    assert commutes(x, x)
    assert not commutes(x, z)
    assert not commutes(PauliString.parse("XZ"), PauliString.parse("ZZ"))


def test_commutes_length_mismatch():
    with pytest.raises(ValueError):
        commutes(PauliString.parse("X"), PauliString.parse("XX"))


def test_detection_fraction_examples():
    assert detection_fraction(PATH2, PauliString.identity(2)) == 0
    assert detection_fraction(PATH2, PauliString.parse("ZI")) == Fraction(1, 2)
    assert detection_fraction(PATH2, graph_stabilizer(PATH2, {0, 1})) == 0


def test_detection_fraction_refuses_large_graphs():
    big = grid_graph(3, 5)
    with pytest.raises(ValueError):
        detection_fraction(big, PauliString.single(15, 0, "X"))


@given(paulis(3), paulis(3), paulis(3))
def test_multiplication_associative(a, b, c):
    assert (a * b) * c == a * (b * c)


@given(paulis(3))
def test_identity_is_two_sided(a):
    e = PauliString.identity(3)
    assert e * a == a and a * e == a


@given(paulis(3), paulis(3))
def test_product_matches_dense_matrices(a, b):
    dense = pauli_matrix(str(a)) @ pauli_matrix(str(b))
    assert np.allclose(pauli_matrix(str(a * b)), dense)


@given(paulis(4), paulis(4))
def test_commutes_symmetric_and_matches_matrices(a, b):
    assert commutes(a, b) == commutes(b, a)
    ma, mb = pauli_matrix(str(a)), pauli_matrix(str(b))
    assert commutes(a, b) == np.allclose(ma @ mb, mb @ ma)
    assert commutes(a, a) and commutes(a, PauliString.identity(4))


GRIDS = [(1, 1), (1, 2), (1, 3), (2, 2), (2, 3), (3, 3)]


@settings(max_examples=60)
@given(st.sampled_from(GRIDS), st.data())
def test_stabilizer_sign_matches_dense_product(dims, data):
    g = grid_graph(*dims)
    n = g.n_vertices
    subset = data.draw(st.sets(st.integers(0, n - 1), min_size=1))
    p = graph_stabilizer(g, subset)
    assert p.is_hermitian
    assert np.allclose(pauli_matrix(str(p)), stabilizer_product_matrix(*dims, subset))


@settings(max_examples=60)
@given(st.sampled_from(GRIDS), st.data())
def test_subset_homomorphism(dims, data):
    g = grid_graph(*dims)
    n = g.n_vertices
    a = data.draw(st.sets(st.integers(0, n - 1), min_size=1))
    b = data.draw(st.sets(st.integers(0, n - 1), min_size=1))
    prod = graph_stabilizer(g, a) * graph_stabilizer(g, b)
    if a == b:
        assert prod.is_identity and prod.phase == 0
    else:
        sym = graph_stabilizer(g, a ^ b)
        assert (prod.x, prod.z) == (sym.x, sym.z)
        assert prod.phase in (sym.phase, (sym.phase + 2) % 4)


def test_generators_pairwise_commute():
    g = grid_graph(3, 3)
    gens = [stabilizer_generator(g, v) for v in g.vertices]
    assert all(commutes(p, q) for p in gens for q in gens)


@settings(max_examples=80, deadline=None)
@given(st.sampled_from([(1, 2), (1, 4), (2, 2), (2, 3), (2, 5), (3, 3)]), st.data())
def test_detection_is_half_off_the_group(dims, data):
    g = grid_graph(*dims)
    n = g.n_vertices
    err = data.draw(paulis(n))
    in_group = any(
        (s.x, s.z) == (err.x, err.z)
        for k in range(1, 2**n)
        for s in [graph_stabilizer(g, {v for v in range(n) if (k >> v) & 1})]
    )
    frac = detection_fraction(g, err)
    if err.x == 0 and err.z == 0 or in_group:
        assert frac == 0
    else:
        assert frac == Fraction(1, 2)

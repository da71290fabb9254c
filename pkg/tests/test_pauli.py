import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from hamsim.errors import CapacityError, DegenerateInputError, DimensionError
from hamsim.pauli import (
    Hamiltonian,
    PauliString,
    all_paulis,
    alpha_comm,
    c1_prefactor,
    commutes,
    nested_commutator_norm,
    normalize,
    pauli_mul,
)

labels = st.integers(1, 4).flatmap(lambda n: st.text("IXYZ", min_size=n, max_size=n))


def _pair(n):
    word = st.text("IXYZ", min_size=n, max_size=n)
    return st.tuples(word, word)


pairs = st.integers(1, 4).flatmap(_pair)
triples = st.integers(1, 3).flatmap(lambda n: st.tuples(*[st.text("IXYZ", min_size=n, max_size=n)] * 3))


class TestPauliString:
    def test_label_round_trip(self):
        for lbl in ("X", "IZ", "XYZI", "YYY"):
            assert PauliString.from_label(lbl).label == lbl

    def test_qubit_zero_is_most_significant(self):
        np.testing.assert_allclose(PauliString.from_label("XI").to_matrix(), oracles.pauli("XI"))

    def test_weight_and_support(self):
        p = PauliString.from_label("XIZY")
        assert p.weight == 3
        assert p.support == (0, 2, 3)

    def test_bad_label(self):
        with pytest.raises(ValueError):
            PauliString.from_label("XQ")
        with pytest.raises(ValueError):
            PauliString.from_label("")

    def test_mask_too_wide(self):
        with pytest.raises(DimensionError):
            PauliString(2, x_mask=4)

    def test_all_paulis_count(self):
        assert len(all_paulis(2)) == 16
        assert all_paulis(2)[0].is_identity()
        assert len(all_paulis(3, support=(1,))) == 4

    @given(labels)
    def test_matrix_matches_kron(self, lbl):
        np.testing.assert_allclose(PauliString.from_label(lbl).to_matrix(), oracles.pauli(lbl), atol=0)


class TestProducts:
    @pytest.mark.parametrize(
        "a, b, phase, label",
        [("X", "X", 1, "I"), ("X", "Y", 1j, "Z"), ("ZZ", "XI", 1j, "YZ")],
    )
    def test_examples(self, a, b, phase, label):
        ph, p = pauli_mul(PauliString.from_label(a), PauliString.from_label(b))
        assert ph == phase
        assert p.label == label

    def test_width_mismatch(self):
        with pytest.raises(DimensionError):
            pauli_mul(PauliString.from_label("X"), PauliString.from_label("XX"))

    @pytest.mark.parametrize("a, b, expected", [("X", "Y", False), ("XX", "ZZ", True), ("XI", "IZ", True)])
    def test_commutes_examples(self, a, b, expected):
        assert commutes(PauliString.from_label(a), PauliString.from_label(b)) is expected

    @given(pairs)
    def test_product_matches_matrices(self, ab):
        a, b = (PauliString.from_label(x) for x in ab)
        ph, p = pauli_mul(a, b)
        np.testing.assert_allclose(ph * p.to_matrix(), oracles.pauli(ab[0]) @ oracles.pauli(ab[1]), atol=1e-12)

    @given(pairs)
    def test_commutation_matches_matrices(self, ab):
        a, b = (oracles.pauli(x) for x in ab)
        expected = np.allclose(a @ b, b @ a)
        assert commutes(*(PauliString.from_label(x) for x in ab)) is expected

    @given(triples)
    def test_associativity(self, abc):
        a, b, c = (PauliString.from_label(x) for x in abc)
        p1, ab = pauli_mul(a, b)
        p2, left = pauli_mul(ab, c)
        p3, bc = pauli_mul(b, c)
        p4, right = pauli_mul(a, bc)
        assert left == right
        assert p1 * p2 == pytest.approx(p3 * p4)

    @given(labels)
    def test_self_inverse(self, lbl):
        p = PauliString.from_label(lbl)
        ph, q = pauli_mul(p, p)
        assert ph == 1 and q.is_identity()


class TestHamiltonian:
    def test_parse_and_text_round_trip(self, pauli2):
        assert Hamiltonian.parse(pauli2.to_text()).to_text() == pauli2.to_text()

    def test_dense_matrix(self, heis3):
        from conftest import HEIS3_TERMS

        np.testing.assert_allclose(heis3.to_matrix(), oracles.hamiltonian(HEIS3_TERMS), atol=1e-14)

    def test_normalize_example(self):
        beta, p = normalize(Hamiltonian.from_terms([(3.0, "X"), (-1.0, "Z")]))
        assert beta == 4.0
        np.testing.assert_allclose(p, [0.75, 0.25])

    def test_zero_coefficient_rejected(self):
        with pytest.raises(DegenerateInputError):
            Hamiltonian.from_terms([(0.0, "X")])

    def test_mixed_widths_rejected(self):
        with pytest.raises(DimensionError):
            Hamiltonian.from_terms([(1.0, "X"), (1.0, "XX")])

    @given(st.lists(st.floats(-5, 5).filter(lambda c: abs(c) > 1e-3), min_size=1, max_size=5))
    def test_normalize_invariants(self, coeffs):
        h = Hamiltonian.from_terms([(c, "Z") for c in coeffs])
        beta, p = normalize(h)
        assert beta == pytest.approx(sum(abs(c) for c in coeffs))
        assert p.sum() == pytest.approx(1.0)
        assert np.all(p > 0)


class TestCommutators:
    def test_pair_norm(self, pauli2):
        assert nested_commutator_norm((0, 1), pauli2) == 2.0

    def test_depth_two(self, pauli2):
        assert nested_commutator_norm((0, 1, 0), pauli2) == 4.0

    def test_alpha_comm_k1(self, pauli2):
        assert alpha_comm(pauli2, 1) == 4.0

    def test_c1_example(self, pauli2):
        assert c1_prefactor(pauli2) == pytest.approx(1.0)
        assert c1_prefactor(pauli2, "triangle") == pytest.approx(1.0)

    def test_index_out_of_range(self, pauli2):
        with pytest.raises(IndexError):
            nested_commutator_norm((0, 5), pauli2)

    def test_odd_order_rejected(self, pauli2):
        with pytest.raises(ValueError):
            alpha_comm(pauli2, 3)

    def test_capacity_guard(self):
        h = Hamiltonian.from_terms([(1.0, "X" * 1 + "I" * 2 + lbl) for lbl in ("XX", "YY", "ZZ", "XY", "YX", "ZX")] * 10)
        with pytest.raises(CapacityError):
            alpha_comm(h, 8)

    @pytest.mark.parametrize("k", [1, 2])
    def test_alpha_comm_matches_dense_enumeration(self, heis3, k):
        mats = [heis3.term_matrix(i) for i in range(heis3.L)]
        total = 0.0
        for idx in itertools.product(range(heis3.L), repeat=k + 1):
            c = mats[idx[0]]
            for i in idx[1:]:
                c = mats[i] @ c - c @ mats[i]
            total += np.linalg.norm(c, 2)
        assert alpha_comm(heis3, k) == pytest.approx(total, rel=1e-12)

    def test_c1_matches_dense(self, heis3):
        mats = [heis3.term_matrix(i) for i in range(heis3.L)]
        expect = 0.5 * sum(
            np.linalg.norm(sum(mats[l + 1 :]) @ mats[l] - mats[l] @ sum(mats[l + 1 :]), 2) for l in range(heis3.L - 1)
        )
        assert c1_prefactor(heis3) == pytest.approx(expect, rel=1e-12)
        assert c1_prefactor(heis3, "triangle") >= expect - 1e-12

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from coadapt.pauli import (PauliSum, PauliTerm, commutator, commutes, inverse_permutation, pauli_mul,
                           remap_qubit_indices)

from conftest import kron_sum, kron_word

RNG = np.random.default_rng(11)

words4 = st.text(alphabet="IXYZ", min_size=4, max_size=4)


def random_sum(n, k, hermitian=True):
    words = {"".join(RNG.choice(list("IXYZ"), n)): RNG.normal() for _ in range(k)}
    if not hermitian:
        words = {w: 1j * c for w, c in words.items()}
    return PauliSum.from_words(words)


def test_single_qubit_products():
    t = pauli_mul(PauliTerm.from_word("IX"), PauliTerm.from_word("IY"))
    assert t.word == "IZ" and t.coeff == 1j
    t = pauli_mul(PauliTerm.from_word("Z"), PauliTerm.from_word("Z"))
    assert t.word == "I" and t.coeff == 1


def test_xy_times_yx_is_zz():
    t = pauli_mul(PauliTerm.from_word("YX"), PauliTerm.from_word("XY"))
    assert t.word == "ZZ"
    np.testing.assert_allclose(t.coeff * kron_word("ZZ"), kron_word("YX") @ kron_word("XY"), atol=1e-12)


@given(words4, words4)
def test_product_matches_dense(a, b):
    t = pauli_mul(PauliTerm.from_word(a, 0.3), PauliTerm.from_word(b, -1.1j))
    np.testing.assert_allclose(t.coeff * kron_word(t.word), 0.3 * -1.1j * kron_word(a) @ kron_word(b), atol=1e-12)


@given(words4, words4, words4)
def test_product_is_associative(a, b, c):
    ta, tb, tc = (PauliTerm.from_word(w) for w in (a, b, c))
    left, right = (ta * tb) * tc, ta * (tb * tc)
    assert left.word == right.word
    assert abs(left.coeff - right.coeff) < 1e-12


@given(words4, words4)
def test_commutes_matches_dense(a, b):
    A, B = kron_word(a), kron_word(b)
    assert commutes(PauliTerm.from_word(a), PauliTerm.from_word(b)) == (np.abs(A @ B - B @ A).max() < 1e-12)


def test_commutes_examples():
    assert commutes(PauliTerm.from_word("XXXY"), PauliTerm.from_word("XXYX"))
    assert not commutes(PauliTerm.from_word("X"), PauliTerm.from_word("Y"))
    assert commutes(PauliTerm.from_word("XYZX"), PauliTerm.from_word("IIII"))


def test_size_mismatch_raises():
    with pytest.raises(ValueError):
        pauli_mul(PauliTerm.from_word("X"), PauliTerm.from_word("XX"))
    with pytest.raises(ValueError):
        commutes(PauliTerm.from_word("X"), PauliTerm.from_word("XX"))
    with pytest.raises(ValueError):
        commutator(PauliSum.from_words({"X": 1}), PauliSum.from_words({"XX": 1}))


def test_invalid_symbol():
    with pytest.raises(ValueError):
        PauliTerm.from_word("XQ")


def test_commutator_examples():
    c = commutator(PauliSum.from_words({"Z": 1}), PauliSum.from_words({"X": 1}))
    assert c.words() == {"Y": 2j}
    h = random_sum(3, 5)
    assert len(commutator(h, h)) == 0
    c = commutator(PauliSum.from_words({"IZ": 1}), PauliSum.from_words({"YX": 1}))
    assert c.words() == {"YY": 2j}


def test_commutator_matches_dense():
    for _ in range(20):
        h, a = random_sum(4, 6), random_sum(4, 6, hermitian=False)
        H, A = h.to_dense(), a.to_dense()
        np.testing.assert_allclose(commutator(h, a).to_dense(), H @ A - A @ H, atol=1e-12)
        assert commutator(h, a).is_hermitian(1e-12)


def test_dense_matches_kron_oracle():
    for _ in range(10):
        s = random_sum(4, 8) + random_sum(4, 3, hermitian=False)
        np.testing.assert_allclose(s.to_dense(), kron_sum(s.words()), atol=1e-12)


def test_dedup_tolerance_and_hermiticity():
    s = PauliSum.from_words({"XZ": 1.0, "ZX": 5e-15})
    assert s.words() == {"XZ": 1.0}
    s = PauliSum.from_words({"XZ": 1.0}) - PauliSum.from_words({"XZ": 1.0})
    assert len(s) == 0
    assert PauliSum.from_words({"XY": 0.5}).is_hermitian()
    assert PauliSum.from_words({"XY": 0.5j}).is_antihermitian()
    assert not PauliSum.from_words({"XY": 0.5 + 0.1j}).is_hermitian()


def test_remap_examples():
    s = PauliSum.from_words({"ZIX": 1.0})  # word[q]: X on qubit 2, Z on qubit 0
    out = remap_qubit_indices(s, (2, 1, 0))
    assert out.words() == {"XIZ": 1.0}
    assert remap_qubit_indices(s, (0, 1, 2)) == s
    with pytest.raises(ValueError):
        remap_qubit_indices(s, (0, 0, 1))


def test_remap_round_trip_and_spectrum():
    for _ in range(10):
        s = random_sum(6, 10)
        perm = tuple(RNG.permutation(6))
        assert remap_qubit_indices(remap_qubit_indices(s, perm), inverse_permutation(perm)).allclose(s)
    for _ in range(10):
        s = random_sum(4, 8)
        perm = tuple(RNG.permutation(4))
        np.testing.assert_allclose(np.linalg.eigvalsh(remap_qubit_indices(s, perm).to_dense()),
                                   np.linalg.eigvalsh(s.to_dense()), atol=1e-10)

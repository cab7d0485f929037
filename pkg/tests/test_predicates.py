import itertools
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from logicnet import (
    DomainError,
    Predicate,
    PredicateFamily,
    Universe,
    all_false,
    all_true,
    at_least_k_of_family,
    at_least_k_true,
    atom,
    atoms_family,
    combine,
    relevant_variables,
)
from logicnet.predicates import from_truth_values


def brute_force_at_least_k(k, n):
    """Independent popcount oracle: table string with input index 0 first."""
    return "".join("1" if bin(x).count("1") >= k else "0" for x in range(2**n))


class TestUniverse:
    def test_size(self):
        assert Universe(0).size == 1
        assert Universe(3).size == 8

    def test_cap_enforced(self):
        with pytest.raises(DomainError):
            Universe(21)
        with pytest.raises(DomainError):
            Universe(-1)

    def test_atom_mask_out_of_range(self):
        with pytest.raises(DomainError, match="atom index 3"):
            Universe(2).atom_mask(3)


class TestAtom:
    def test_atom1_n2(self):
        assert atom(1, Universe(2)).to_bitstring() == "0101"

    def test_atom2_n2(self):
        assert atom(2, Universe(2)).to_bitstring() == "0011"

    def test_atom_depends_on_one_coordinate(self):
        assert relevant_variables(atom(2, Universe(3))) == {2}

    def test_atom_depth_zero(self):
        assert atom(1, Universe(1)).depth == 0

    def test_index_out_of_range(self):
        with pytest.raises(DomainError, match="atom index 5"):
            atom(5, Universe(3))


class TestCombine:
    def test_and(self):
        u = Universe(2)
        assert combine("and", [atom(1, u), atom(2, u)]).to_bitstring() == "0001"

    def test_not_of_constant(self):
        u = Universe(2)
        assert combine("not", [all_false(u)]).to_bitstring() == "1111"

    def test_xor(self):
        u = Universe(2)
        assert combine("xor", [atom(1, u), atom(2, u)]).to_bitstring() == "0110"

    def test_depth_is_max_of_operands(self):
        u = Universe(3)
        deep = at_least_k_true(2, u)
        assert combine("or", [atom(1, u), deep]).depth == 2

    def test_universe_mismatch(self):
        with pytest.raises(DomainError, match="share one universe"):
            combine("and", [atom(1, Universe(2)), atom(1, Universe(3))])

    def test_arity_errors(self):
        u = Universe(2)
        with pytest.raises(DomainError):
            combine("not", [atom(1, u), atom(2, u)])
        with pytest.raises(DomainError):
            combine("and", [atom(1, u)])

    def test_unknown_kind(self):
        with pytest.raises(DomainError):
            combine("nand", [atom(1, Universe(2)), atom(2, Universe(2))])

    @given(st.integers(0, 15), st.integers(0, 15))
    def test_and_or_are_pointwise_min_max(self, bits_p, bits_q):
        u = Universe(2)
        p = Predicate(u, bits_p, 0, "p")
        q = Predicate(u, bits_q, 0, "q")
        conj = combine("and", [p, q]).to_array()
        disj = combine("or", [p, q]).to_array()
        np.testing.assert_array_equal(conj, np.minimum(p.to_array(), q.to_array()))
        np.testing.assert_array_equal(disj, np.maximum(p.to_array(), q.to_array()))


class TestAtLeastKTrue:
    def test_vacuous_threshold(self):
        assert at_least_k_true(0, Universe(2)).to_bitstring() == "1111"

    def test_equals_conjunction_at_k_equals_n(self):
        assert at_least_k_true(2, Universe(2)).to_bitstring() == "0001"

    def test_k2_n3_against_popcount_oracle(self):
        expected = brute_force_at_least_k(2, 3)
        assert expected == "00010111"
        assert at_least_k_true(2, Universe(3)).to_bitstring() == expected

    def test_above_n_is_all_zeros(self):
        assert at_least_k_true(4, Universe(3)).to_bitstring() == "0" * 8

    def test_depth_is_two(self):
        assert at_least_k_true(2, Universe(3)).depth == 2

    def test_negative_k_rejected(self):
        with pytest.raises(DomainError):
            at_least_k_true(-1, Universe(2))

    @given(st.integers(1, 5), st.integers(0, 6))
    def test_monotone_in_inputs(self, n, k):
        p = at_least_k_true(k, Universe(n))
        for x in range(2**n):
            for i in range(n):
                if not x & (1 << i):
                    assert p.value(x) <= p.value(x | (1 << i))

    @settings(max_examples=30)
    @given(st.integers(1, 5), st.integers(0, 6))
    def test_symmetric_under_permutations(self, n, k):
        p = at_least_k_true(k, Universe(n))
        table = p.to_array()
        for perm in itertools.permutations(range(n)):
            for x in range(2**n):
                y = 0
                for i in range(n):
                    if x & (1 << i):
                        y |= 1 << perm[i]
                assert table[x] == table[y]

    @given(st.integers(1, 6), st.integers(1, 7))
    def test_threshold_implies_weaker_threshold(self, n, k):
        u = Universe(n)
        stronger = at_least_k_true(k, u).to_array()
        weaker = at_least_k_true(k - 1, u).to_array()
        assert np.all(stronger <= weaker)

    @given(st.integers(1, 6))
    def test_all_atoms_relevant(self, n):
        u = Universe(n)
        for k in range(1, n + 1):
            assert relevant_variables(at_least_k_true(k, u)) == set(range(1, n + 1))


class TestAtLeastKOfFamily:
    def test_vacuous(self):
        fam = atoms_family(Universe(2))
        assert at_least_k_of_family(0, fam).to_bitstring() == "1111"

    def test_threshold_beyond_family_size(self):
        fam = atoms_family(Universe(2))
        assert at_least_k_of_family(4, fam).to_bitstring() == "0000"

    def test_count_against_brute_force(self):
        u = Universe(2)
        members = (atom(1, u), atom(2, u), combine("and", [atom(1, u), atom(2, u)]))
        fam = PredicateFamily(members, "mixed")
        got = at_least_k_of_family(2, fam)
        expected = "".join(
            "1" if sum(m.value(x) for m in members) >= 2 else "0" for x in range(4)
        )
        assert expected == "0001"
        assert got.to_bitstring() == expected

    def test_members_count_by_identity(self):
        u = Universe(2)
        fam = PredicateFamily((atom(1, u), Predicate(u, atom(1, u).bits, 0, "copy")))
        # two members with identical tables both count toward the threshold
        assert at_least_k_of_family(2, fam).to_bitstring() == atom(1, u).to_bitstring()

    def test_depth_adds_two(self):
        u = Universe(3)
        fam = PredicateFamily((at_least_k_true(1, u),), "deep")
        assert at_least_k_of_family(1, fam).depth == 4

    def test_empty_family_rejected(self):
        with pytest.raises(DomainError):
            at_least_k_of_family(1, PredicateFamily(()))


class TestRelevantVariables:
    def test_xor_depends_on_both(self):
        u = Universe(2)
        assert relevant_variables(combine("xor", [atom(1, u), atom(2, u)])) == {1, 2}

    def test_constant_depends_on_nothing(self):
        assert relevant_variables(all_true(Universe(3))) == set()

    def test_threshold_by_flip_oracle(self):
        p = at_least_k_true(2, Universe(3))
        flips = set()
        for i in range(3):
            for x in range(8):
                if p.value(x) != p.value(x ^ (1 << i)):
                    flips.add(i + 1)
        assert flips == {1, 2, 3}
        assert relevant_variables(p) == flips


class TestFamilies:
    def test_mixed_universe_rejected(self):
        with pytest.raises(DomainError):
            PredicateFamily((atom(1, Universe(2)), atom(1, Universe(3))))

    def test_duplicate_names_rejected(self):
        u = Universe(2)
        with pytest.raises(DomainError, match="unique"):
            PredicateFamily((atom(1, u), atom(1, u)))


class TestSerialization:
    def test_record_roundtrip_bit_exact(self):
        p = at_least_k_true(2, Universe(3))
        back = Predicate.from_json(p.to_json())
        assert back == p

    @given(st.integers(0, 4), st.integers(0, 2**16 - 1))
    def test_roundtrip_random_tables(self, n, raw_bits):
        u = Universe(n)
        p = Predicate(u, raw_bits & u.full_mask, 3, "q")
        assert Predicate.from_record(p.to_record()) == p

    def test_record_fields(self):
        rec = atom(1, Universe(2)).to_record()
        assert set(rec) == {"n_atoms", "depth", "table_hex", "label"}
        assert rec["table_hex"] == "a"

    def test_malformed_record(self):
        with pytest.raises(DomainError):
            Predicate.from_record({"n_atoms": 2})

    def test_file_roundtrip(self, tmp_path):
        from logicnet import load_predicates, save_predicates

        u = Universe(2)
        preds = [atom(1, u), atom(2, u), combine("xor", [atom(1, u), atom(2, u)])]
        path = tmp_path / "preds.json"
        save_predicates(path, preds)
        fam = load_predicates(path)
        assert fam.member_names() == ("x1", "x2", "xor(x1,x2)")
        assert [m.bits for m in fam] == [p.bits for p in preds]

    def test_table_length_always_matches_universe(self):
        for n in range(0, 6):
            u = Universe(n)
            for p in (all_true(u), at_least_k_true(1, u)):
                assert len(p.to_bitstring()) == u.size
        with pytest.raises(DomainError):
            Predicate(Universe(1), 0b100, 0, "too wide")


def test_from_truth_values_matches_value():
    u = Universe(3)
    flags = [bool(x % 3 == 0) for x in range(8)]
    p = from_truth_values(u, flags, 1, "every-third")
    assert [p.value(x) for x in range(8)] == flags

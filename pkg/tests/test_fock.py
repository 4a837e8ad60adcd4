from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from egoe.fock import (
    CapacityError,
    SpaceSpec,
    apply_pair_op,
    enumerate_basis,
    occupied,
    pair_list,
    popcount,
    state_from_orbitals,
)


def test_enumerate_n4_m2():
    basis = enumerate_basis(SpaceSpec(4, 2))
    assert [int(s) for s in basis.states] == [0b0011, 0b0101, 0b0110, 0b1001, 0b1010, 0b1100]


def test_enumerate_dimension_924():
    spec = SpaceSpec(12, 6)
    assert spec.dim == 924
    assert len(enumerate_basis(spec)) == 924


def test_vacuum():
    basis = enumerate_basis(SpaceSpec(3, 0))
    assert [int(s) for s in basis.states] == [0]


@pytest.mark.parametrize("n,m", [(5, 2), (6, 3), (7, 7), (9, 4)])
def test_enumeration_matches_combinations(n, m):
    basis = enumerate_basis(SpaceSpec(n, m))
    expected = sorted(state_from_orbitals(c) for c in combinations(range(n), m))
    assert [int(s) for s in basis.states] == expected
    assert all(basis.index(s) == i for i, s in enumerate(basis.states))


def test_capacity_limit():
    with pytest.raises(CapacityError):
        SpaceSpec(64, 2)
    assert SpaceSpec(63, 1).dim == 63


def test_invalid_fermion_count():
    with pytest.raises(ValueError):
        SpaceSpec(4, 5)


def test_pair_op_examples():
    assert apply_pair_op(2, 3, 0, 1, state_from_orbitals([0, 1])) == (1, state_from_orbitals([2, 3]))
    # a†_0 a†_2 a_1 a_3: a_3 acts first and crosses orbital 1
    assert apply_pair_op(0, 2, 3, 1, state_from_orbitals([1, 3])) == (-1, state_from_orbitals([0, 2]))
    assert apply_pair_op(0, 1, 0, 1, state_from_orbitals([2, 3])) is None


def test_pair_op_index_range():
    with pytest.raises(IndexError):
        apply_pair_op(0, 4, 1, 2, 0b0110, n_sp=4)


@settings(max_examples=300, deadline=None)
@given(
    st.integers(4, 10).flatmap(
        lambda n: st.tuples(
            st.just(n),
            st.sets(st.integers(0, n - 1), min_size=2, max_size=n),
            st.lists(st.integers(0, n - 1), min_size=4, max_size=4, unique=True),
        )
    )
)
def test_hermitian_conjugate_round_trip(case):
    n, occ, (i, j, k, l) = case
    i, j = sorted((i, j))
    k, l = sorted((k, l))
    s = state_from_orbitals(occ)
    out = apply_pair_op(i, j, k, l, s, n)
    if out is None:
        return
    phase, s2 = out
    assert popcount(s2) == len(occ)
    back = apply_pair_op(k, l, i, j, s2, n)
    assert back is not None
    assert back[1] == s
    assert phase * back[0] == 1


def test_occupied_helpers():
    assert occupied(0b10110) == (1, 2, 4)
    assert pair_list(4) == [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]

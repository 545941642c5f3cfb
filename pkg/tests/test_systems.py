import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from causal_lens.errors import SpecError
from causal_lens.systems import SubsystemLabel, composite, reorder_permutation


def test_flatten_examples():
    assert composite(("A", 2), ("B", 2)).flatten((1, 0)) == 2
    assert composite(("A", 2), ("B", 3)).flatten((1, 2)) == 5  # 1*3+2
    assert composite().flatten(()) == 0


def test_flatten_out_of_range_reports_position():
    sys2 = composite(("A", 2), ("B", 3))
    with pytest.raises(IndexError, match="component 1"):
        sys2.flatten((0, 3))
    with pytest.raises(IndexError, match="A"):
        sys2.flatten((2, 0))


def test_unique_names_enforced():
    with pytest.raises(SpecError):
        composite(("A", 2), ("A", 3))
    with pytest.raises(SpecError):
        SubsystemLabel("A", 0)


def test_trivial_system():
    triv = composite()
    assert triv.total_dim == 1
    assert triv.unflatten(0) == ()
    assert composite(("I", 1)).total_dim == 1


def test_reorder_swap_of_two_bits():
    sys2 = composite(("A", 2), ("B", 2))
    assert reorder_permutation(sys2, ("B", "A")) == (0, 2, 1, 3)
    assert reorder_permutation(sys2, ("A", "B")) == (0, 1, 2, 3)


def test_reorder_mixed_dims_enumerated():
    # (a, b) at index a*3+b maps to b*2+a, checked on all 6 joint indices
    sys23 = composite(("A", 2), ("B", 3))
    perm = reorder_permutation(sys23, ("B", "A"))
    for a in range(2):
        for b in range(3):
            assert perm[a * 3 + b] == b * 2 + a


def test_reorder_errors():
    sys2 = composite(("A", 2), ("B", 2))
    with pytest.raises(SpecError):
        reorder_permutation(sys2, ("A", "C"))
    with pytest.raises(SpecError):
        reorder_permutation(sys2, ("A", "A"))


@st.composite
def small_systems(draw):
    n = draw(st.integers(min_value=0, max_value=4))
    dims = draw(st.lists(st.integers(min_value=1, max_value=4), min_size=n, max_size=n))
    return composite(*((f"w{k}", d) for k, d in enumerate(dims)))


@settings(max_examples=60)
@given(small_systems(), st.data())
def test_flatten_unflatten_roundtrip(system, data):
    for idx in range(system.total_dim):
        assert system.flatten(system.unflatten(idx)) == idx
    values = tuple(data.draw(st.integers(0, d - 1)) for d in system.dims)
    assert system.unflatten(system.flatten(values)) == values


@settings(max_examples=40)
@given(small_systems(), st.randoms(use_true_random=False))
def test_reorder_then_inverse_is_identity(system, rnd):
    order = list(system.names)
    rnd.shuffle(order)
    forward = reorder_permutation(system, order)
    # inverse order: where each wire of the reordered system came from
    back = reorder_permutation(system.select(order), system.names)
    n = system.total_dim
    assert [back[forward[x]] for x in range(n)] == list(range(n))


def test_swap_twice_is_identity():
    sys2 = composite(("A", 2), ("B", 3))
    ab = reorder_permutation(sys2, ("B", "A"))
    ba = reorder_permutation(sys2.select(("B", "A")), ("A", "B"))
    assert [ba[ab[x]] for x in range(6)] == list(range(6))


def test_strides_and_positions():
    sys3 = composite(("A", 2), ("B", 3), ("C", 4))
    assert sys3.strides == (12, 4, 1)
    assert sys3.position("B") == 1
    assert sys3.subset_positions(("C", "A")) == (0, 2)
    assert sys3.complement(("B",)) == ("A", "C")
    assert sys3.restrict(("C", "B")).names == ("B", "C")
    assert sys3.select(("C", "B")).names == ("C", "B")
    with pytest.raises(SpecError):
        sys3.subset_positions(("A", "A"))
    with pytest.raises(SpecError):
        sys3.position("Z")

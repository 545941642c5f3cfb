import numpy as np
import pytest

from causal_lens import causal, classical, quantum
from causal_lens.causal import (
    check_interaction_without_disturbance,
    embed_on,
    find_witness,
    has_causal_influence,
    hierarchy_report,
    inverse_nosignalling_check,
    memory_decomposition,
    neighbourhood,
    probe_conjugation_matches_evolution,
    replay_witness,
    signalling_relation,
    t_process,
)
from causal_lens.classical import ClassicalChannel, ClassicalInstrument
from causal_lens.errors import SpecError
from causal_lens.quantum import UnitaryChannel
from causal_lens.systems import composite

BITS = composite(("A", 2), ("B", 2))


def bit_channel(fn):
    """Two-bit channel from an explicit (a, b) -> (a', b') rule."""
    table = [fn(a, b)[0] * 2 + fn(a, b)[1] for a in range(2) for b in range(2)]
    return ClassicalChannel(BITS, BITS, tuple(table))


K = bit_channel(lambda a, b: (a, a ^ b))  # controlled-not, control A
XORBACK = bit_channel(lambda a, b: (a ^ b, b))
SWAP = bit_channel(lambda a, b: (b, a))
IDENT = ClassicalChannel.identity(BITS)


# -- probe process -----------------------------------------------------------------


def test_t_process_identity_is_copy_swap():
    tp = t_process(IDENT, ["A"])
    assert tp.probe_copies == ("A_1",)
    assert tp.idle_subset == frozenset({"B"})
    # (a1, a', b') -> (a', a1, b')
    sys3 = tp.channel.input
    for a1 in range(2):
        for ap in range(2):
            for bp in range(2):
                got = tp.channel.apply_values((a1, ap, bp))
                assert got == (ap, a1, bp)
    # extracted factor is the swap of the copy with A'
    assert tp.factor.table == (0, 2, 1, 3)


def test_t_process_cnot_probe_control():
    tp = t_process(K, ["A"])
    # evaluated via K applied twice around the copy swap: (a1,a',b') -> (a', a1, a1^a'^b')
    expected = {
        (a1, ap, bp): (ap, a1, a1 ^ ap ^ bp)
        for a1 in range(2)
        for ap in range(2)
        for bp in range(2)
    }
    for vals, want in expected.items():
        assert tp.channel.apply_values(vals) == want
    assert tp.idle_subset == frozenset()
    assert tp.factor.table == tp.channel.table


def test_t_process_cnot_probe_target():
    tp = t_process(K, ["B"])
    # (b1,a',b') -> (a'^b', a', a'^b1); A' output matches its input pointwise,
    # but the copy output depends on a', so A' is not an identity factor
    for b1 in range(2):
        for ap in range(2):
            for bp in range(2):
                assert tp.channel.apply_values((b1, ap, bp)) == (ap ^ bp, ap, ap ^ b1)
    assert tp.idle_subset == frozenset()


def test_t_process_rejects_unknown_probe():
    with pytest.raises(SpecError):
        t_process(K, ["Z"])


def test_t_process_idle_subset_is_maximal():
    rng = np.random.default_rng(17)
    sys3 = composite(("x", 2), ("y", 2), ("z", 2))
    for _ in range(20):
        u = classical.random_reversible(sys3, rng)
        tp = t_process(u, ["x"])
        assert tp.channel.factors_as_identity(tp.idle_subset) is not None
        for extra in set(tp.outputs) - tp.idle_subset:
            bigger = tp.idle_subset | {extra}
            assert tp.channel.factors_as_identity(bigger) is None


def test_t_process_quantum_matches_classical_on_permutations():
    for u_c, probe in [(K, ["A"]), (K, ["B"]), (SWAP, ["A"])]:
        u_q = quantum.from_classical(u_c)
        tp_c = t_process(u_c, probe)
        tp_q = t_process(u_q, probe)
        assert tp_q.idle_subset == tp_c.idle_subset
        perm = quantum.from_classical(tp_c.channel).matrix
        assert np.max(np.abs(tp_q.channel.matrix - perm)) <= 1e-9


# -- neighbourhoods and influence ---------------------------------------------------


def test_neighbourhoods_of_fixtures():
    assert neighbourhood(K, ["A"]) == {"A", "B"}
    assert neighbourhood(K, ["B"]) == {"A", "B"}
    assert neighbourhood(SWAP, ["A"]) == {"B"}
    assert neighbourhood(IDENT, ["A"]) == {"A"}


def test_causal_influence_cnot():
    assert has_causal_influence(K, ["B"], ["A"])  # no signalling, still influence
    assert has_causal_influence(K, ["B"], ["B"])
    assert not has_causal_influence(IDENT, ["A"], ["B"])


def test_signalling_relation_fixtures():
    assert not signalling_relation(K, ["B"], ["A"])
    assert signalling_relation(quantum.cnot(), ["B"], ["A"])  # kickback
    assert not signalling_relation(IDENT, ["A"], ["B"])


def test_neighbourhood_union_law_classical():
    rng = np.random.default_rng(21)
    sys3 = composite(("x", 2), ("y", 3), ("z", 2))
    for _ in range(25):
        u = classical.random_reversible(sys3, rng)
        singles = {n: neighbourhood(u, [n]) for n in sys3.names}
        for i, j in [("x", "y"), ("y", "z"), ("x", "z")]:
            assert neighbourhood(u, [i, j]) == singles[i] | singles[j]


def test_neighbourhood_union_law_quantum():
    rng = np.random.default_rng(22)
    sys2 = composite(("x", 2), ("y", 2))
    for _ in range(8):
        u = quantum.random_unitary(sys2, rng)
        assert neighbourhood(u, ["x", "y"]) == neighbourhood(u, ["x"]) | neighbourhood(u, ["y"])


def test_probe_commutation_classical():
    rng = np.random.default_rng(23)
    sys3 = composite(("x", 2), ("y", 2), ("z", 3))
    for _ in range(15):
        u = classical.random_reversible(sys3, rng)
        tx = t_process(u, ["x"]).channel
        ty = t_process(u, ["y"]).channel
        common = composite(("x_1", 2), ("y_1", 2)).concat(u.output)
        ex, ey = embed_on(tx, common), embed_on(ty, common)
        assert ex.compose(ey).table == ey.compose(ex).table


def test_probe_commutation_quantum():
    rng = np.random.default_rng(24)
    sys2 = composite(("x", 2), ("y", 2))
    for _ in range(6):
        u = quantum.random_unitary(sys2, rng)
        tx = t_process(u, ["x"]).channel
        ty = t_process(u, ["y"]).channel
        common = composite(("x_1", 2), ("y_1", 2)).concat(u.output)
        ex, ey = embed_on(tx, common), embed_on(ty, common)
        assert np.max(np.abs(ex.compose(ey).matrix - ey.compose(ex).matrix)) <= 1e-9


# -- probe conjugation identity ------------------------------------------------------


def test_probe_conjugation_identity_cnot_constant():
    env = composite(("E", 1))
    inst = ClassicalInstrument.constant(env.concat(composite(("A_1", 2))), env.concat(composite(("A_1", 2))), 0)
    assert probe_conjugation_matches_evolution(K, ["A"], inst)


def test_probe_conjugation_identity_random_sweep():
    rng = np.random.default_rng(31)
    for _ in range(25):
        n_wires = rng.integers(2, 4)
        dims = [int(rng.integers(2, 4)) for _ in range(n_wires)]
        sys_n = composite(*((f"w{k}", d) for k, d in enumerate(dims)))
        u = classical.random_reversible(sys_n, rng)
        probe = [f"w{rng.integers(0, n_wires)}"]
        d_probe = sys_n.parts[sys_n.position(probe[0])].dim
        d_env = int(rng.integers(1, 4))
        joint = composite(("E", d_env), ("P", d_probe))
        if rng.random() < 0.5:
            table = tuple(int(v) for v in rng.integers(0, joint.total_dim, joint.total_dim))
            inst = ClassicalInstrument.from_function(joint, joint, table)
        else:
            inst = ClassicalInstrument.atom(
                joint, joint, int(rng.integers(0, joint.total_dim)), int(rng.integers(0, joint.total_dim))
            )
        assert probe_conjugation_matches_evolution(u, probe, inst)


# -- memory decomposition -------------------------------------------------------------


def test_memory_cnot_from_target_exists():
    dec = memory_decomposition(K, ["B"], ["A"])
    assert dec is not None
    assert dec.env.dims == (2,)
    # v copies its input: x -> (x, x); w xors: (y, e) -> y ^ e
    assert dec.v.table == (0, 3)
    assert dec.w.table == (0, 1, 1, 0)


def test_memory_cnot_from_control_missing():
    assert memory_decomposition(K, ["A"], ["B"]) is None  # A signals B'


def test_memory_identity():
    dec = memory_decomposition(IDENT, ["A"], ["B"])
    assert dec is not None
    # v(y) = (y, y), w(x, e) = x
    assert dec.v.table == (0, 3)
    assert dec.w.table == (0, 0, 1, 1)


def test_memory_classical_matches_nosignalling_on_random():
    rng = np.random.default_rng(41)
    sys2 = composite(("A", 2), ("B", 3))
    for _ in range(40):
        u = classical.random_reversible(sys2, rng)
        dec = memory_decomposition(u, ["A"], ["B"])
        assert (dec is not None) == (not u.signals(["A"], ["B"]))


def test_memory_quantum_cnot():
    u = quantum.cnot()
    assert memory_decomposition(u, ["A"], ["B"]) is None  # quantum CNOT signals both ways
    dec = memory_decomposition(quantum.UnitaryChannel.identity(BITS), ["A"], ["B"])
    assert dec is not None
    rho = np.array([[0.5, 0.5], [0.5, 0.5]], dtype=complex)
    out = dec.v.apply(rho)
    assert out.shape == (4, 4)
    assert abs(np.trace(out) - 1) <= 1e-9


def test_memory_quantum_product_channel():
    rng = np.random.default_rng(42)
    va = quantum.random_unitary(composite(("A", 2)), rng)
    vb = quantum.random_unitary(composite(("B", 2)), rng)
    u = va.tensor(vb)
    dec = memory_decomposition(u, ["A"], ["B"])
    assert dec is not None
    sigma = dec.v.apply(np.eye(2, dtype=complex) / 2)
    kept = sigma.reshape(2, 2, 2, 2)
    target_marginal = np.trace(kept, axis1=0, axis2=2)
    assert np.max(np.abs(target_marginal - vb.matrix @ (np.eye(2) / 2) @ vb.matrix.conj().T)) <= 1e-9


# -- hierarchy -----------------------------------------------------------------------


def test_hierarchy_cnot_target_to_control():
    rep = hierarchy_report(K, ["B"], ["A"])
    assert (rep.causal_influence, rep.memory_decomposable, rep.signalling) == (True, True, False)
    assert rep.consistent
    assert rep.witness is not None and replay_witness(K, rep.witness)


def test_hierarchy_identity():
    rep = hierarchy_report(IDENT, ["A"], ["B"])
    assert (rep.causal_influence, rep.memory_decomposable, rep.signalling) == (False, True, False)
    assert rep.consistent and rep.witness is None


def test_hierarchy_swap():
    rep = hierarchy_report(SWAP, ["A"], ["B"])
    assert (rep.causal_influence, rep.memory_decomposable, rep.signalling) == (True, False, True)
    assert rep.consistent


def test_hierarchy_chain_random_classical():
    rng = np.random.default_rng(43)
    for _ in range(30):
        dims = [int(rng.integers(2, 4)) for _ in range(int(rng.integers(2, 4)))]
        sys_n = composite(*((f"w{k}", d) for k, d in enumerate(dims)))
        u = classical.random_reversible(sys_n, rng)
        frm = [f"w{rng.integers(0, len(dims))}"]
        others = [n for n in sys_n.names]
        to = [others[int(rng.integers(0, len(others)))]]
        rep = hierarchy_report(u, frm, to)
        assert rep.consistent
        assert rep.memory_decomposable == (not rep.signalling)  # classical collapse


def test_hierarchy_quantum_collapse_smoke():
    rng = np.random.default_rng(44)
    for _ in range(10):
        u = quantum.random_unitary(BITS, rng)
        for frm in ("A", "B"):
            for to in ("A", "B"):
                rep = hierarchy_report(u, [frm], [to])
                assert rep.consistent
                assert rep.causal_influence == rep.signalling  # quantum collapse


# -- interaction without disturbance ---------------------------------------------------


def test_niwd_xor_feedback_is_witness():
    res = check_interaction_without_disturbance(XORBACK)
    assert res.premise_holds and not res.factorizes
    assert res.verdict == "interaction-without-disturbance witness"
    assert res.forced_influence is True


def test_niwd_identity_no_interaction():
    res = check_interaction_without_disturbance(IDENT)
    assert res.verdict == "no-interaction"


def test_niwd_cnot_disturbing():
    res = check_interaction_without_disturbance(K)
    assert res.verdict == "disturbing"
    assert not res.premise_holds


def test_niwd_quantum():
    assert check_interaction_without_disturbance(quantum.cnot()).verdict == "disturbing"
    u = quantum.random_unitary(composite(("A", 2)), np.random.default_rng(3)).tensor(
        UnitaryChannel.identity(composite(("B", 2)))
    )
    assert check_interaction_without_disturbance(u).verdict == "no-interaction"


def test_niwd_forced_influence_on_random_sweep():
    rng = np.random.default_rng(45)
    found_witness_case = 0
    for _ in range(200):
        u = classical.random_reversible(BITS, rng)
        res = check_interaction_without_disturbance(u)
        if res.premise_holds and not res.factorizes:
            found_witness_case += 1
            assert res.forced_influence is True
    assert found_witness_case > 0


def test_niwd_requires_matching_systems():
    with pytest.raises(SpecError):
        check_interaction_without_disturbance(K.with_names(output_names=("A'", "B'")))


# -- inverse no-signalling -------------------------------------------------------------


def test_inverse_nosignalling_cnot_roles():
    assert inverse_nosignalling_check(K, ["B"], ["A"])
    assert inverse_nosignalling_check(IDENT, ["A"], ["B"])


def test_inverse_nosignalling_requires_nosignalling():
    with pytest.raises(SpecError):
        inverse_nosignalling_check(K, ["A"], ["B"])


def test_inverse_nosignalling_random_trits():
    rng = np.random.default_rng(46)
    sys2 = composite(("A", 3), ("B", 3))
    checked = 0
    for _ in range(300):
        u = classical.random_reversible(sys2, rng)
        if not u.signals(["A"], ["B"]):
            checked += 1
            assert inverse_nosignalling_check(u, ["A"], ["B"])
    assert checked > 0


def test_inverse_nosignalling_quantum():
    rng = np.random.default_rng(47)
    va = quantum.random_unitary(composite(("A", 2)), rng)
    vb = quantum.random_unitary(composite(("B", 2)), rng)
    assert inverse_nosignalling_check(va.tensor(vb), ["A"], ["B"])
    assert inverse_nosignalling_check(quantum.UnitaryChannel.identity(BITS), ["A"], ["B"])


# -- witnesses --------------------------------------------------------------------------


def test_witness_cnot_is_constant_zero():
    w = find_witness(K, ["B"], ["A"])
    assert w.kind == "intervention"
    assert w.detail["intervention_class"] == "constant"
    assert w.detail["intervention"] == [0, 0]
    assert w.detail["violation"]["type"] == "independence"
    assert replay_witness(K, w)


def test_witness_swap():
    w = find_witness(SWAP, ["A"], ["B"])
    assert w.kind == "intervention"
    assert w.detail["intervention_class"] == "constant"
    assert replay_witness(SWAP, w)


def test_witness_quantum_cnot_kickback():
    u = quantum.cnot()
    w = find_witness(u, ["B"], ["A"])
    assert w.kind == "factorization-defect"
    assert w.detail["variant"] == "signalling-identity"
    assert replay_witness(u, w)


def test_witness_requires_influence():
    with pytest.raises(SpecError):
        find_witness(IDENT, ["A"], ["B"])

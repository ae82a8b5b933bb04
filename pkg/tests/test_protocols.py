import numpy as np
import pytest

from rspsim.errors import InvalidState, Unsupported
from rspsim.protocols import (
    ChannelSpec,
    TargetState,
    exact_outcome_table,
    run_deterministic_rsp,
    run_nguyen_rsp,
    run_probabilistic_rsp,
    run_protocol,
    success_probability,
)
from rspsim.register import derive_rng


def random_target(d, rng):
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return TargetState.of(v / np.linalg.norm(v))


def random_positive_channel(d, rng):
    v = rng.uniform(0.1, 1.0, size=d)
    return ChannelSpec.of(v / np.linalg.norm(v))


# -- channel / target types -------------------------------------------------


def test_channel_spec_validation():
    with pytest.raises(InvalidState):
        ChannelSpec.of((0.5, 0.5))
    with pytest.raises(InvalidState):
        ChannelSpec.of((1.0,))
    spec = ChannelSpec.from_theta(np.pi / 6)
    assert abs(abs(spec.lambdas[0]) - 0.5) <= 1e-12


def test_target_canonical_form():
    t = TargetState.of((0.6j, 0.8))
    c = t.canonical()
    assert abs(c[0].imag) <= 1e-15 and c[0].real > 0
    a, b, gamma = TargetState.of((0.6, 0.8j)).qubit_params()
    assert abs(a - 0.6) <= 1e-12
    assert abs(b - 0.8) <= 1e-12
    assert abs(gamma - np.pi / 2) <= 1e-12


# -- deterministic protocol ---------------------------------------------------


def test_deterministic_repaired_d3_always_succeeds():
    rng = np.random.default_rng(31)
    channel = ChannelSpec.of(np.array([0.5, 0.5, np.sqrt(0.5)], dtype=complex))
    target = random_target(3, rng)
    for seed in range(6):
        tr = run_deterministic_rsp(channel, target, "repaired", derive_rng(seed))
        assert tr.fidelity >= 1 - 1e-10
        assert tr.success
        a, c = tr.messages[0].outcome
        assert a == c


def test_deterministic_literal_real_target_both_branches():
    channel = ChannelSpec.of((0.6, 0.8))
    target = TargetState.of((0.6, 0.8))
    table = exact_outcome_table("deterministic", channel, target, mode="literal")
    rows = {r.outcome: r for r in table.rows}
    assert set(rows) == {(0, 0), (1, 1)}
    assert abs(rows[(0, 0)].probability - 0.36) <= 1e-12
    assert abs(rows[(1, 1)].probability - 0.64) <= 1e-12
    for r in rows.values():
        assert r.fidelity >= 1 - 1e-12
    # the sigma_z branch saw x0|0> - x1|1> before correction
    pre = np.diag([1.0, -1.0]) @ rows[(1, 1)].bob_state
    np.testing.assert_allclose(pre, [0.6, -0.8], atol=1e-12)


def test_deterministic_product_channel_single_branch():
    table = exact_outcome_table(
        "deterministic", ChannelSpec.of((1.0, 0.0)), TargetState.of((0.6, 0.8j))
    )
    assert [r.outcome for r in table.rows] == [(0, 0)]
    assert abs(table.rows[0].probability - 1.0) <= 1e-12
    assert table.rows[0].fidelity >= 1 - 1e-10
    tr = run_deterministic_rsp(
        ChannelSpec.of((1.0, 0.0)), TargetState.of((0.6, 0.8j)), rng=derive_rng(2)
    )
    assert tr.messages[0].outcome == (0, 0)
    assert tr.success


@pytest.mark.parametrize("d", range(2, 9))
def test_deterministic_success_probability_one_for_all_d(d):
    rng = np.random.default_rng(200 + d)
    for _ in range(3):
        channel = random_positive_channel(d, rng)
        target = random_target(d, rng)
        table = exact_outcome_table("deterministic", channel, target)
        assert abs(success_probability(table) - 1.0) <= 1e-12
        assert abs(sum(r.probability for r in table.rows) - 1.0) <= 1e-12
        for r in table.rows:
            assert r.fidelity >= 1 - 1e-10


def test_deterministic_complex_channel_phases():
    rng = np.random.default_rng(77)
    v = rng.normal(size=4) + 1j * rng.normal(size=4)
    channel = ChannelSpec.of(v / np.linalg.norm(v))
    table = exact_outcome_table("deterministic", channel, random_target(4, rng))
    assert abs(success_probability(table) - 1.0) <= 1e-12


def test_deterministic_run_matches_table_branch():
    channel = ChannelSpec.of((0.6, 0.8))
    target = TargetState.of((1 / np.sqrt(3), np.sqrt(2 / 3) * 1j))
    table = exact_outcome_table("deterministic", channel, target)
    probs = {r.outcome: r.probability for r in table.rows}
    tr = run_deterministic_rsp(channel, target, rng=derive_rng(9))
    outcome = tr.messages[0].outcome
    assert outcome in probs
    assert abs(tr.measurements[0].probability - probs[outcome]) <= 1e-12


def test_deterministic_dimension_mismatch():
    with pytest.raises(InvalidState):
        run_deterministic_rsp(
            ChannelSpec.of((0.6, 0.8)), TargetState.of((1.0, 0.0, 0.0)), rng=derive_rng(0)
        )


def test_literal_mode_requires_qubits():
    rng = np.random.default_rng(5)
    with pytest.raises(Unsupported):
        run_deterministic_rsp(
            random_positive_channel(3, rng), random_target(3, rng), "literal", derive_rng(0)
        )


# -- literal-mode audit -------------------------------------------------------


def test_literal_mode_flags_non_unitary_step():
    target = TargetState.of((1 / np.sqrt(2), 1j / np.sqrt(2)))  # theta = pi/2
    tr = run_deterministic_rsp(
        ChannelSpec.of((0.6, 0.8)), target, "literal", derive_rng(3)
    )
    assert tr.has_non_unitary_step
    flagged = max(s.defect for s in tr.steps if s.non_unitary)
    assert flagged > 1e-6
    assert tr.raw_norm is not None


def test_literal_mode_branch_norms_still_sum_to_one():
    # The printed encoder has unit-norm columns and acts on a state whose
    # sender qudit is correlated with orthogonal partners, so the global
    # norm and the branch probability sum stay exactly 1 even though the
    # operator itself is far from unitary.
    rng = np.random.default_rng(55)
    for _ in range(10):
        x0 = float(rng.uniform(0.35, 0.95))
        th = float(rng.uniform(0.3, np.pi - 0.3))
        x1 = float(np.sqrt(1 - x0 * x0))
        assert x0 * x1 * np.sin(th) > 0.0
        target = TargetState.of((x0, x1 * np.exp(1j * th)))
        channel = random_positive_channel(2, rng)
        tr = run_deterministic_rsp(channel, target, "literal", derive_rng(1))
        assert abs(tr.raw_norm - 1.0) <= 1e-12
        table = exact_outcome_table("deterministic", channel, target, mode="literal")
        assert abs(sum(r.probability for r in table.rows) - 1.0) <= 1e-12


def test_literal_equals_repaired_for_theta0_targets():
    rng = np.random.default_rng(66)
    for _ in range(10):
        x0 = float(rng.uniform(0.0, 1.0))
        target = TargetState.of((x0, np.sqrt(1 - x0 * x0)))
        channel = random_positive_channel(2, rng)
        lit = exact_outcome_table("deterministic", channel, target, mode="literal")
        rep = exact_outcome_table("deterministic", channel, target, mode="repaired")
        assert [r.outcome for r in lit.rows] == [r.outcome for r in rep.rows]
        for a, b in zip(lit.rows, rep.rows):
            assert abs(a.probability - b.probability) <= 1e-12
            assert abs(a.fidelity - b.fidelity) <= 1e-12


# -- probabilistic baseline ---------------------------------------------------


def test_probabilistic_maximal_channel_always_succeeds():
    table = exact_outcome_table(
        "probabilistic", ChannelSpec.maximal(2), TargetState.of((0.6, 0.8j))
    )
    assert abs(success_probability(table) - 1.0) <= 1e-12


def test_probabilistic_success_half_at_pi_over_6():
    table = exact_outcome_table(
        "probabilistic", ChannelSpec.from_theta(np.pi / 6), TargetState.of((0.8, 0.6))
    )
    assert abs(success_probability(table) - 0.5) <= 1e-12


def test_probabilistic_branch_weights():
    table = exact_outcome_table(
        "probabilistic", ChannelSpec.of((0.6, 0.8)), TargetState.of((0.6, 0.8j))
    )
    rows = {r.outcome: r for r in table.rows}
    assert abs(rows[(0,)].probability - 0.72) <= 1e-12
    assert abs(rows[(1,)].probability - 0.28) <= 1e-12
    assert rows[(0,)].fidelity >= 1 - 1e-10
    # abandoned state is |1>, fidelity |x1|^2
    assert abs(rows[(1,)].fidelity - 0.64) <= 1e-12


def test_probabilistic_run_branches():
    channel = ChannelSpec.of((0.6, 0.8))
    target = TargetState.of((0.6, 0.8j))
    seen = set()
    for seed in range(30):
        tr = run_probabilistic_rsp(channel, target, derive_rng(seed))
        c = tr.messages[0].outcome[0]
        seen.add(c)
        if c == 0:
            assert tr.success and tr.fidelity >= 1 - 1e-10
            assert len(tr.messages) == 3
        else:
            assert not tr.success
            assert abs(tr.fidelity - 0.64) <= 1e-12
    assert seen == {0, 1}


def test_probabilistic_alpha_zero_always_fails():
    table = exact_outcome_table(
        "probabilistic", ChannelSpec.of((0.0, 1.0)), TargetState.of((0.6, 0.8))
    )
    assert [r.outcome for r in table.rows] == [(1,)]
    assert abs(table.rows[0].probability - 1.0) <= 1e-12
    assert success_probability(table) == 0.0
    tr = run_probabilistic_rsp(ChannelSpec.of((0.0, 1.0)), TargetState.of((0.6, 0.8)),
                               derive_rng(0))
    assert not tr.success


def test_probabilistic_rejects_alpha_above_beta():
    with pytest.raises(InvalidState):
        run_probabilistic_rsp(
            ChannelSpec.of((0.8, 0.6)), TargetState.of((0.6, 0.8)), derive_rng(0)
        )


def test_probabilistic_complex_channel_phases():
    lam = np.array([0.6 * np.exp(0.4j), 0.8 * np.exp(-1.1j)])
    table = exact_outcome_table(
        "probabilistic", ChannelSpec.of(lam), TargetState.of((0.6, 0.8j))
    )
    rows = {r.outcome: r for r in table.rows}
    assert abs(rows[(0,)].probability - 0.72) <= 1e-12
    assert rows[(0,)].fidelity >= 1 - 1e-10


# -- nguyen baseline ----------------------------------------------------------


def test_nguyen_four_quarter_branches():
    rng = np.random.default_rng(44)
    for _ in range(5):
        table = exact_outcome_table("nguyen", None, random_target(2, rng))
        assert len(table.rows) == 4
        for r in table.rows:
            assert abs(r.probability - 0.25) <= 1e-12
            assert r.fidelity >= 1 - 1e-10
        assert abs(success_probability(table) - 1.0) <= 1e-12


def test_nguyen_trivial_target():
    tr = run_nguyen_rsp(TargetState.of((1.0, 0.0)), derive_rng(8))
    assert tr.success
    np.testing.assert_allclose(np.abs(tr.bob_state), [1.0, 0.0], atol=1e-10)


def test_nguyen_run_all_outcomes_corrected():
    target = TargetState.of((0.28, 0.96j))
    seen = set()
    for seed in range(40):
        tr = run_nguyen_rsp(target, derive_rng(seed))
        assert tr.fidelity >= 1 - 1e-10
        seen.add((tr.messages[0].outcome[0], tr.messages[1].outcome[0]))
    assert seen == {(0, 0), (0, 1), (1, 0), (1, 1)}


# -- transcript hygiene -------------------------------------------------------


def test_messages_carry_only_outcome_indices():
    channel = ChannelSpec.of((0.6, 0.8))
    target = TargetState.of((0.6, 0.8j))
    for protocol in ("deterministic", "probabilistic", "nguyen"):
        tr = run_protocol(protocol, channel, target, rng=derive_rng(12))
        for msg in tr.messages:
            assert all(isinstance(i, int) for i in msg.outcome)
            assert all(isinstance(s, str) for s in msg.subsystems)
        assert "0.6" not in tr.correction and "0.8" not in tr.correction


def test_success_probability_single_row():
    table = exact_outcome_table(
        "deterministic", ChannelSpec.of((1.0, 0.0)), TargetState.of((0.6, 0.8))
    )
    assert success_probability(table) == table.rows[0].probability


def test_run_protocol_rejects_unknown():
    with pytest.raises(InvalidState):
        run_protocol("teleport", None, TargetState.of((1.0, 0.0)))

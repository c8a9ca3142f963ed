import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from satqos.errors import DomainError, NoContactError
from satqos.link import LinkBudget, LinkSettings, transmission_delay
from satqos.qos import (
    FlowSpec,
    LossModelParams,
    TransferResult,
    packet_drop_rate,
    run_qos_session,
    simulate_transfer,
    throughput,
)
from satqos.seeding import packet_stream
from satqos.topology import ContactWindow

PAIR = ("a", "b")
LOSSLESS = LossModelParams(base_loss_prob=0.0, load_coefficient=0.0)


def budget(capacity=1e9, t_trans=0.0):
    return LinkBudget(1000.0, 1.0, 1.0, capacity, t_trans)


def flow(rate=1.2e6, size=12000.0, duration=300.0):
    return FlowSpec("a", "b", size, rate, duration)


def test_throughput_zero_delay_is_bandwidth():
    assert throughput([(10, 0), (5, 0)], 100e6) == 100e6


def test_throughput_single_window():
    assert throughput([(10, 2)], 100e6) == pytest.approx(100e6 * 10 / 12, rel=1e-15)


def test_throughput_two_windows():
    assert throughput([(10, 2), (20, 3)], 1.0) == pytest.approx(30 / 35, rel=1e-15)


@pytest.mark.parametrize("metrics", [[], [(0, 0)], [(0, 5)], [(-1, 2)]])
def test_throughput_domain_errors(metrics):
    with pytest.raises(DomainError):
        throughput(metrics, 1e6)


@given(
    st.lists(st.tuples(st.floats(0.1, 1e3), st.floats(0, 1e3)), min_size=1, max_size=20),
    st.floats(1, 1e9),
    st.floats(1.001, 10),
)
def test_throughput_bounded_and_linear_in_bandwidth(metrics, bw, k):
    tp = throughput(metrics, bw)
    assert tp <= bw * (1 + 1e-12)
    assert throughput(metrics, bw * k) > tp


@pytest.mark.parametrize("lost,delivered,expected", [(0, 100, 0.0), (5, 100, 0.05)])
def test_pdr(lost, delivered, expected):
    assert packet_drop_rate(TransferResult(flow(), delivered, lost, ())) == expected


def test_pdr_undefined_without_deliveries():
    with pytest.raises(DomainError, match="PDR undefined"):
        packet_drop_rate(TransferResult(flow(), 0, 10, ()))


def test_lossless_model_loses_nothing():
    w = [ContactWindow(PAIR, 0, 300)]
    res = simulate_transfer(flow(), w, [budget()], LOSSLESS, seed=7)
    assert res.packets_lost == 0
    assert res.packets_delivered == 30000


def test_total_loss_boundary():
    loss = LossModelParams(base_loss_prob=1.0, load_coefficient=0.0, max_loss_prob=1.0)
    res = simulate_transfer(flow(), [ContactWindow(PAIR, 0, 10)], [budget()], loss, seed=1)
    assert res.packets_delivered == 0 and res.packets_lost == 1000
    with pytest.raises(DomainError):
        packet_drop_rate(res)


def test_empty_windows_give_zero_attempts():
    res = simulate_transfer(flow(), [], [], LOSSLESS, seed=1)
    assert res.packets_attempted == 0 and res.window_metrics == ()


def test_overlapping_windows_rejected():
    w = [ContactWindow(PAIR, 0, 10), ContactWindow(PAIR, 5, 20)]
    with pytest.raises(ValueError):
        simulate_transfer(flow(), w, [budget(), budget()], LOSSLESS, seed=1)


def test_partial_packets_are_not_attempted():
    # 1.5 s at 1 packet/s -> 1 whole packet
    f = FlowSpec("a", "b", 1000.0, 1000.0, 100.0)
    res = simulate_transfer(f, [ContactWindow(PAIR, 0, 1.5)], [budget()], LOSSLESS, seed=0)
    assert res.packets_attempted == 1


def test_windows_clipped_to_flow_interval():
    f = FlowSpec("a", "b", 1000.0, 1000.0, duration_s=50.0, start_s=20.0)
    w = [ContactWindow(PAIR, 0, 30), ContactWindow(PAIR, 60, 80), ContactWindow(PAIR, 100, 110)]
    res = simulate_transfer(f, w, [budget(t_trans=1), budget(t_trans=2), budget(t_trans=3)], LOSSLESS, 0)
    assert res.window_metrics == ((10.0, 1), (10.0, 2))
    assert res.packets_attempted == 20


def brute_force_tally(seed, flow_id, probs):
    """One Python-level draw per packet, in sequence order."""
    rng = packet_stream(seed, flow_id)
    return sum(1 for p in probs if rng.random() < p)


def test_binomial_concentration_and_brute_force_tally():
    f = FlowSpec("a", "b", 1.0, 1000.0, 100.0)  # 10^5 packets
    loss = LossModelParams(base_loss_prob=0.05, load_coefficient=0.0)
    res = simulate_transfer(f, [ContactWindow(PAIR, 0, 100)], [budget()], loss, seed=12345)
    assert res.packets_attempted == 100_000
    assert abs(res.packets_lost / 1e5 - 0.05) <= 0.005
    assert res.packets_lost == brute_force_tally(12345, f.flow_id, [0.05] * 100_000)


def test_stream_continues_across_windows():
    f = FlowSpec("a", "b", 1.0, 100.0, 1000.0)
    loss = LossModelParams(base_loss_prob=0.0, load_coefficient=1.0, max_loss_prob=1.0)
    w = [ContactWindow(PAIR, 0, 30), ContactWindow(PAIR, 50, 90)]
    b = [budget(capacity=400.0), budget(capacity=200.0)]
    res = simulate_transfer(f, w, b, loss, seed=99)
    probs = [0.25] * 3000 + [0.5] * 4000
    assert res.packets_lost == brute_force_tally(99, f.flow_id, probs)


def test_loss_fraction_rises_with_utilization():
    loss = LossModelParams(base_loss_prob=0.01, load_coefficient=0.2, max_loss_prob=0.9)
    f = FlowSpec("a", "b", 1.0, 1000.0, 100.0)
    lo = simulate_transfer(f, [ContactWindow(PAIR, 0, 100)], [budget(capacity=10_000)], loss, 3)
    hi = simulate_transfer(f, [ContactWindow(PAIR, 0, 100)], [budget(capacity=1_000)], loss, 3)
    gap = loss.probability(1.0) - loss.probability(0.1)
    assert hi.packets_lost / 1e5 - lo.packets_lost / 1e5 >= gap - 0.005


@settings(max_examples=50, deadline=None)
@given(
    st.integers(0, 2**64 - 1),
    st.floats(0, 0.5),
    st.lists(st.floats(1, 50), min_size=1, max_size=5),
)
def test_conservation_and_determinism(seed, base, lengths):
    windows, t = [], 0.0
    for length in lengths:
        windows.append(ContactWindow(PAIR, t, t + length))
        t += length + 5
    f = FlowSpec("a", "b", 100.0, 1e4, 1e6)
    loss = LossModelParams(base_loss_prob=base, load_coefficient=0.01, max_loss_prob=0.5)
    budgets = [budget(capacity=2e4)] * len(windows)
    r1 = simulate_transfer(f, windows, budgets, loss, seed)
    r2 = simulate_transfer(f, windows, budgets, loss, seed)
    assert r1 == r2
    expected = sum(int(1e4 * w.duration_s / 100.0 + 1e-9) for w in windows)
    assert r1.packets_delivered + r1.packets_lost == expected


def test_session_identity_composition():
    params = LinkSettings(path_loss_model="constant").with_bandwidth(100e6)
    rep = run_qos_session(
        FlowSpec("a", "b", 12000.0, 1e6, 300.0), params, LOSSLESS, [ContactWindow(PAIR, 0, 300)], [1.0], 5
    )
    # unit loss: t_trans ~ 1.3e-6 s against 300 s connected
    assert rep.throughput_bps == pytest.approx(100e6, rel=1e-8)
    assert rep.packet_drop_rate == 0.0
    assert rep.link["boltzmann"] == 1.380649e-23
    assert rep.seed == 5


def test_session_without_windows():
    params = LinkSettings().with_bandwidth(100e6)
    with pytest.raises(NoContactError, match="no contact windows"):
        run_qos_session(flow(), params, LOSSLESS, [], [], 1)


def test_session_tags_domain_errors_with_pair():
    params = LinkSettings().with_bandwidth(100e6)
    total = LossModelParams(base_loss_prob=1.0, load_coefficient=0.0, max_loss_prob=1.0)
    with pytest.raises(DomainError, match=r"a->b: PDR undefined"):
        run_qos_session(flow(), params, total, [ContactWindow(PAIR, 0, 10)], [1000.0], 1)


def test_master_worker_session_matches_components(example_plan):
    from satqos.pipeline import prepare
    from satqos.testplan import expand_matrix

    ctx = prepare(example_plan)
    run = next(r for r in expand_matrix(example_plan) if r.flow.dst == "sat-02-04" and r.bandwidth_hz == 100e6)
    pair = ("sat-00-00", "sat-02-04")
    windows = ctx.windows[pair]
    distances = ctx.window_distances(pair)
    rep = run_qos_session(run.flow, run.link, run.loss, windows, distances, run.seed_derived, run.run_id)

    budgets = [transmission_delay(run.flow.packet_size_bits, run.link, d) for d in distances]
    res = simulate_transfer(run.flow, windows, budgets, run.loss, run.seed_derived)
    assert rep.throughput_bps == throughput(res.window_metrics, 100e6)
    assert rep.packet_drop_rate == packet_drop_rate(res)
    assert (rep.packets_delivered, rep.packets_lost) == (res.packets_delivered, res.packets_lost)

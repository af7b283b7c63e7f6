import numpy as np
import pytest

import aldc.insdel_compiler as ic

# every recover_blocks call made anywhere in the suite is checked against
# the per-call query allowance; the largest observed ratio is kept for the
# acceptance report
BUDGET_STATS = {"calls": 0, "worst_ratio": 0.0, "constants": set()}


def check_call(res, p, n_tilde):
    bound = p.query_bound(res.b - res.a + 1, n_tilde)
    assert res.queries <= bound, (res.queries, bound)
    window = p.window_len
    assert window <= 2 * p.c_w * p.blk_len
    lo, hi = res.window
    plain = p.n_samples(n_tilde) * window * res.iterations + (hi - lo + 1)
    assert res.queries <= plain, (res.queries, plain)
    BUDGET_STATS["calls"] += 1
    BUDGET_STATS["worst_ratio"] = max(BUDGET_STATS["worst_ratio"], res.queries / bound)
    BUDGET_STATS["constants"].add(round(p.query_constant(), 3))


@pytest.fixture(autouse=True)
def _recover_blocks_budget(monkeypatch):
    original = ic.recover_blocks_batch

    def checked(oracle, intervals, p, rng, l0=1, r0=None, history=None):
        out = original(oracle, intervals, p, rng, l0, r0, history)
        for res in out:
            check_call(res, p, oracle.length)
        return out

    monkeypatch.setattr(ic, "recover_blocks_batch", checked)
    yield


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# measured values the acceptance tests want visible in the run log
REPORT: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not REPORT and not BUDGET_STATS["calls"]:
        return
    terminalreporter.section("acceptance measurements")
    for key, value in REPORT.items():
        terminalreporter.write_line(f"{key}: {value}")
    if BUDGET_STATS["calls"]:
        terminalreporter.write_line(
            f"recover_blocks calls checked against the query budget: {BUDGET_STATS['calls']}, "
            f"worst queries/bound {BUDGET_STATS['worst_ratio']:.4f}, C = {sorted(BUDGET_STATS['constants'])}")

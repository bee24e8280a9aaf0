#!/usr/bin/env python3
"""Regenerates the synthetic 3-ticker dataset and its closed-form NAV fixtures.

Independent of the C++ engine: every NAV below comes from
    NAV(t) = NAV(m) * (cash_w + sum_i w_i * p_i(t) / p_i(m))
between consecutive rebalance days m, with m the first weekday of each month.
"""

import datetime as dt
from pathlib import Path

HERE = Path(__file__).resolve().parent
CAPITAL = 100000.0
TICKERS = ["AAA", "BBB", "CCC"]
N_DAYS = 70


def weekdays(start, n):
    out, d = [], start
    while len(out) < n:
        if d.weekday() < 5:
            out.append(d)
        d += dt.timedelta(days=1)
    return out


def price(ticker, t):
    if ticker == "AAA":
        return 100.0 + t
    if ticker == "BBB":
        return 200.0 - t
    return 50.0 + 5.0 * ((t * 7) % 11)


DAYS = weekdays(dt.date(2023, 1, 2), N_DAYS)
REBALANCE = [i for i, d in enumerate(DAYS) if i == 0 or d.month != DAYS[i - 1].month]

# Scripted agent schedule (already long-only normalized). The 2023-04-03 reply
# sums to 1.2 and is scaled down to 0.5/0.5.
SCRIPTED = {
    "2023-01-02": {"AAA": 0.5, "BBB": 0.5},
    "2023-02-01": {"CCC": 1.0},
    "2023-03-01": {"AAA": 0.25, "CCC": 0.25},
    "2023-04-03": {"AAA": 0.5, "BBB": 0.5},
}
REPLIES = {
    "2023-01-02": "Reasoning: split between the two steadiest names.\nAAA: 0.5\nBBB: 0.5\nCCC: 0\n",
    "2023-02-01": "AAA: 0.3\nBBB: 0.3\n\nRevised final allocation:\nAAA: 0\nBBB: 0\nCCC: 1.0\n",
    "2023-03-01": "aapl: 0.9\nAAA: 0.25\nccc: 0.25\n",
    "2023-04-03": "AAA: 0.6\nBBB: 0.6\nCCC: -0.2\n",
    # First decision of the shorter P1 window in bench_config.json.
    "2023-01-17": "AAA: 0.2\nBBB: 0.3\nCCC: 0.5\n",
}


def nav_path(weights_at):
    """weights_at(day_index) -> dict of weights for each rebalance index."""
    navs = [CAPITAL]
    base_nav, base_t, w = CAPITAL, 0, weights_at(0)
    for t in range(1, N_DAYS):
        if t in REBALANCE:
            base_nav = base_nav * growth(w, base_t, t)
            base_t, w = t, weights_at(t)
            navs.append(base_nav)
        else:
            navs.append(base_nav * growth(w, base_t, t))
    return navs


def growth(w, m, t):
    cash = 1.0 - sum(w.values())
    return cash + sum(wi * price(k, t) / price(k, m) for k, wi in w.items())


def main():
    with open(HERE / "prices.csv", "w", newline="\n") as f:
        f.write("ticker,date,adjusted_close\n")
        for k in TICKERS:
            for t, d in enumerate(DAYS):
                f.write(f"{k},{d.isoformat()},{price(k, t):g}\n")

    equal = {k: 1.0 / 3.0 for k in TICKERS}
    buy_hold = [CAPITAL * growth(equal, 0, t) for t in range(N_DAYS)]
    equal_monthly = nav_path(lambda t: equal)
    scripted = nav_path(lambda t: SCRIPTED[DAYS[t].isoformat()])

    with open(HERE / "expected_nav.csv", "w", newline="\n") as f:
        f.write("date,buy_hold,equal_weight,scripted\n")
        for t, d in enumerate(DAYS):
            f.write(f"{d.isoformat()},{buy_hold[t]!r},{equal_monthly[t]!r},{scripted[t]!r}\n")

    fixtures = HERE / "agent_fixtures"
    fixtures.mkdir(exist_ok=True)
    for day, text in REPLIES.items():
        (fixtures / f"{day}.txt").write_text(text)

    print("rebalance days:", [DAYS[i].isoformat() for i in REBALANCE])
    print("buy_hold %:", (buy_hold[-1] / CAPITAL - 1) * 100)
    print("equal_weight %:", (equal_monthly[-1] / CAPITAL - 1) * 100)
    print("scripted %:", (scripted[-1] / CAPITAL - 1) * 100)


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Download adjusted closes for the reference universe and write the engine's price CSV.

Requires `pip install yfinance pandas`. The window starts well before the first
period so the 100-day moving average and 63-day momentum have full history on
2021-04-01.
"""

import argparse
import hashlib
import json
import pathlib
import sys

TICKERS = ["AAPL", "GOOGL", "MSFT", "NVDA", "TSLA"]


def plain_decimal(value):
    text = repr(value)
    return f"{value:.12f}".rstrip("0") if "e" in text else text


def fetch(tickers, start, end):
    import yfinance as yf

    frame = yf.download(tickers, start=start, end=end, auto_adjust=True, progress=False, group_by="column")
    closes = frame["Close"]
    rows = []
    for ticker in tickers:
        series = closes[ticker].dropna()
        if series.empty:
            sys.exit(f"no data returned for {ticker}")
        for day, value in series.items():
            rows.append((ticker, day.strftime("%Y-%m-%d"), plain_decimal(float(value))))
    rows.sort()
    return rows


def main():
    repo = pathlib.Path(__file__).resolve().parent.parent
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", type=pathlib.Path, default=repo / "data" / "reference_prices.csv")
    parser.add_argument("--start", default="2020-06-01")
    parser.add_argument("--end", default="2025-01-01", help="exclusive")
    parser.add_argument("--pin", type=pathlib.Path, metavar="CONFIG",
                        help="write the file's sha256 into this benchmark config")
    args = parser.parse_args()

    rows = fetch(TICKERS, args.start, args.end)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    text = "ticker,date,adjusted_close\n" + "".join(f"{t},{d},{p}\n" for t, d, p in rows)
    args.out.write_bytes(text.encode())
    digest = hashlib.sha256(text.encode()).hexdigest()
    print(f"wrote {len(rows)} rows to {args.out}")
    print(f"sha256 {digest}")

    if args.pin:
        config = json.loads(args.pin.read_text())
        data = config.get("data")
        path = data["path"] if isinstance(data, dict) else data
        config["data"] = {"path": path, "sha256": digest}
        args.pin.write_text(json.dumps(config, indent=2) + "\n")
        print(f"pinned hash in {args.pin}")


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Write a synthetic 12-asset daily close-price panel.

One market factor plus idiosyncratic noise, geometric Brownian motion on
business days. The output is fully determined by --seed.
"""
import argparse

import numpy as np
import pandas as pd

TICKERS = ["AAA", "BBB", "CCC", "DDD", "EEE", "FFF", "GGG", "HHH", "III", "JJJ", "KKK", "LLL"]


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="data/sample_prices.csv")
    ap.add_argument("--rows", type=int, default=1008)
    ap.add_argument("--seed", type=int, default=20240601)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    d = len(TICKERS)
    beta = rng.uniform(0.6, 1.4, d)
    drift = rng.uniform(-0.0001, 0.0008, d)
    idio = rng.uniform(0.008, 0.02, d)
    start = rng.uniform(20.0, 200.0, d)

    steps = args.rows - 1
    market = rng.normal(0.0, 0.01, steps)
    noise = rng.normal(0.0, 1.0, (steps, d)) * idio
    log_ret = drift + np.outer(market, beta) + noise - 0.5 * (beta**2 * 1e-4 + idio**2)
    prices = start * np.exp(np.vstack([np.zeros(d), np.cumsum(log_ret, axis=0)]))

    dates = pd.bdate_range("2015-01-02", periods=args.rows)
    frame = pd.DataFrame(np.round(prices, 4), index=dates.strftime("%Y-%m-%d"), columns=TICKERS)
    frame.index.name = "date"
    frame.to_csv(args.out, float_format="%.4f")


if __name__ == "__main__":
    main()

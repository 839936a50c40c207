"""Random-relay outage: simulation against the exact and high-SNR expressions.

    python scripts/random_relay_sweep.py --runs 1000000
"""

import argparse

import numpy as np

from swiptrelay import (
    Disc,
    PPPConfig,
    ScenarioParams,
    StrategyKind,
    approx_outage_random,
    exact_outage_random,
    sweep_outage,
)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--runs", type=int, default=200_000)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    disc, ppp = Disc(1.5, 10.0), PPPConfig(1.0)
    base = ScenarioParams(power=1.0, rate=0.1, eta=0.5)
    snr = np.arange(0, 51, 5.0)
    kinds = [StrategyKind.RANDOM_RELAY, StrategyKind.DIRECT_ONLY]
    sweeps = sweep_outage(base, disc, ppp, kinds, snr, runs=args.runs, seed=args.seed)
    rnd, direct = sweeps[StrategyKind.RANDOM_RELAY], sweeps[StrategyKind.DIRECT_ONLY]

    print(f"{'SNR':>5} {'sim':>11} {'stderr':>9} {'exact':>11} {'approx':>11} {'direct':>9}")
    for k, db in enumerate(snr):
        p = base.with_power(10 ** (db / 10))
        ex = exact_outage_random(p, disc, ppp).value
        apx = approx_outage_random(p, disc, ppp).value
        e = rnd.estimates[k]
        print(f"{db:5.0f} {e.p_hat:11.4e} {e.stderr:9.2e} {ex:11.4e} {apx:11.4e} "
              f"{direct.estimates[k].p_hat:9.2e}")


if __name__ == "__main__":
    main()

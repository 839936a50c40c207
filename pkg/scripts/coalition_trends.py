"""Multi-source outage for both payoff kinds, and its dependence on kappa.

    python scripts/coalition_trends.py --draws 10000
"""

import argparse

from swiptrelay import PayoffKind, ScenarioParams, estimate_multi_source_outage, four_source_layout


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--draws", type=int, default=2000)
    ap.add_argument("--relays", type=int, default=8)
    ap.add_argument("--seed", type=int, default=5)
    args = ap.parse_args()

    layout = four_source_layout()
    kinds = [PayoffKind.RELATIVE, PayoffKind.ABSOLUTE]
    print(f"N = {args.relays}, kappa = 0.001")
    print(f"{'SNR':>5} {'relative':>10} {'absolute':>10} {'sweeps':>7}")
    for db in range(10, 41, 5):
        res = estimate_multi_source_outage(layout, ScenarioParams.from_db(db, rate=1.0, eta=1.0),
                                           args.relays, 0.001, kinds, args.draws, args.seed)
        r, a = res[PayoffKind.RELATIVE], res[PayoffKind.ABSOLUTE]
        print(f"{db:5d} {r.outage.p_hat:10.4f} {a.outage.p_hat:10.4f} {r.mean_sweeps:7.2f}")

    print("\nrelative payoff at 30 dB against kappa (matched draws)")
    params = ScenarioParams.from_db(30, rate=1.0, eta=1.0)
    for kappa in (0.001, 0.005, 0.01, 0.05, 0.1, 0.5, 1.0):
        res = estimate_multi_source_outage(layout, params, args.relays, kappa,
                                           [PayoffKind.RELATIVE], args.draws, args.seed)
        print(f"  kappa = {kappa:<6} outage = {res[PayoffKind.RELATIVE].outage.p_hat:.4f}")


if __name__ == "__main__":
    main()

"""Scaled residual n |mu - prediction| per branch for one configuration.

Usage: python scripts/residual_trends.py CONFIG.yaml [--regime L1|AC|Unperturbed] [--variant printed|corrected]
"""
import argparse

from slspec.asymptotics import Regime, predict_pair, residual_table
from slspec.config import load_config
from slspec.eig_solver import SolverOptions, SpectralProblem


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("config")
    ap.add_argument("--regime", choices=[r.value for r in Regime])
    ap.add_argument("--variant", choices=["printed", "corrected"])
    args = ap.parse_args()

    cfg = load_config(args.config)
    q = cfg.potential.build()
    cbc = cfg.bc.canonical
    regime = Regime(args.regime or (cfg.regime if cfg.regime != "auto" else "Unperturbed"))
    variant = args.variant or cfg.variant
    n_min = max(cfg.n_min, 1)
    prob = SpectralProblem(q, cbc, SolverOptions(regime=regime, variant=variant, functions=False))
    eigs = prob.solve(n_min, cfg.n_max, low=False)
    preds = [p for n in range(n_min, cfg.n_max + 1) for p in predict_pair(cbc, regime, q, n, variant)]
    rep = residual_table(eigs, preds)
    print(f"{cbc.describe()}  q = {q.describe()}  regime {regime.value} ({variant})")
    print(f"{'n':>4} {'j':>2} {'n|r|':>14}")
    for row in rep.rows:
        print(f"{row.n:>4} {row.j:>2} {row.n_r:>14.6e}")
    for j, s in rep.slopes.items():
        print(f"branch {j}: log-log slope of n|r| = {s:.3f}")


if __name__ == "__main__":
    main()

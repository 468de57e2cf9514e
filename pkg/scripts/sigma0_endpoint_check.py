"""Compare the two endpoint-term variants of the sigma = 0 AC-regime formulas.

For q = x - 1/2 and both families with sigma = 0, prints n |mu - prediction|
with the endpoint term q(0) + q(1) ("printed") and q(0) - q(1) ("corrected").
Only one of them decays.
"""
from slspec import potential as P
from slspec.asymptotics import Regime, predict_pair, residual_table
from slspec.bc_model import CanonicalBC
from slspec.eig_solver import SolverOptions, SpectralProblem

NS = range(10, 41, 5)


def main():
    q = P.sawtooth()
    for family in ("T1", "T2"):
        cbc = CanonicalBC(family, 0, 2, 1)
        print(f"{family} sigma=0, p=2, r=1, q = x - 1/2")
        for variant in ("printed", "corrected"):
            # branch labels follow the predictions of the variant under test
            opts = SolverOptions(regime=Regime.AC, variant=variant, functions=False)
            eigs = SpectralProblem(q, cbc, opts).solve(min(NS), max(NS), low=False)
            eigs = [e for e in eigs if e.n in NS]
            preds = [p for n in NS for p in predict_pair(cbc, Regime.AC, q, n, variant)]
            rep = residual_table(eigs, preds)
            vals = "  ".join(f"{r.n_r:.2e}" for r in rep.by_branch(1))
            print(f"  {variant:>9}: n|r| (j=1, n={min(NS)}..{max(NS)}): {vals}  slope {rep.slopes[1]:.2f}")


if __name__ == "__main__":
    main()

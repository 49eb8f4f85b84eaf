#!/usr/bin/env python3
"""Random genealogies as marked metric spaces.

Distances are times to the most recent common ancestor, marks are mutated
types.  The coalescent tree is exactly ultrametric; its pair distance is
Exp(1) no matter how many leaves sit around the pair.  The finite-population
dual converges to the coalescent as the population grows, which the panel
gap table at the bottom makes visible.
"""

import argparse

import numpy as np

from mmmspace import (
    CoalescentConfig,
    MarkSpace,
    MoranConfig,
    default_panel,
    evaluate_exact,
    kingman,
    mark_marginal,
    moran,
)


def ultrametric_excess(d):
    return float((d[:, None, :] - np.maximum(d[:, :, None], d[None, :, :])).max())


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--leaves", type=int, default=25)
    ap.add_argument("--theta", type=float, default=1.5)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    tree = kingman(CoalescentConfig(leaves=args.leaves, theta=args.theta, seed=args.seed))
    print(f"{tree.label}: {tree.n} distinct atoms, diameter {tree.distances.max():.3f}")
    print(f"ultrametric excess: {ultrametric_excess(tree.distances):.2e}")
    print(f"mark composition:   {mark_marginal(tree)}")

    pair = np.array(
        [kingman(CoalescentConfig(leaves=2, theta=0.0, seed=s)).distances[0, 1]
         for s in range(4000)]
    )
    print(f"pair distance over 4000 trees: mean {pair.mean():.4f} (Exp(1) says 1.0)")
    print()

    dna = MarkSpace.discrete(("A", "C", "G", "T"))
    panel = default_panel(dna, 2, 5)
    print("median absolute panel gap to a 100-tree coalescent target")
    print("(20 replicates per population; single trees are noisy, the")
    print(" population-size effect shows up column by column):")
    target = np.mean(
        [[evaluate_exact(p, kingman(CoalescentConfig(leaves=200, theta=4.0, seed=s)))
          for p in panel] for s in range(100)],
        axis=0,
    )
    medians = {}
    for population, base in ((10, 35_000), (200, 30_000)):
        gaps = []
        for r in range(20):
            dual = moran(MoranConfig(population=population, horizon=10.0,
                                     theta=4.0, seed=base + r))
            gaps.append([abs(evaluate_exact(p, dual) - t) for p, t in zip(panel, target)])
        medians[population] = np.median(gaps, axis=0)
        cells = "  ".join(f"{v:.4f}" for v in medians[population])
        print(f"  population {population:>4}:  {cells}")
    wins = int((medians[200] < medians[10]).sum())
    print(f"  population 200 is closer in {wins} of {len(panel)} panel coordinates")


if __name__ == "__main__":
    main()

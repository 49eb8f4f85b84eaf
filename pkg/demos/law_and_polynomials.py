#!/usr/bin/env python3
"""What a space looks like through sampled distance matrices.

A two-point space with weights (1/4, 3/4) and distance 1 is small enough
to print everything: the exact order-2 law, a polynomial panel evaluated
both exactly and by Monte Carlo, and the reason products of polynomials
must move to fresh sample indices (E[r12 * r34] is the squared mean,
E[r12 * r23] is not).
"""

import numpy as np

from mmmspace import (
    FiniteMmmSpace,
    MarkSpace,
    Polynomial,
    default_panel,
    distance_monomial,
    evaluate_exact,
    evaluate_mc,
    exact_law,
    multiply,
)


def main():
    marks = MarkSpace.discrete(("a", "b"))
    space = FiniteMmmSpace(
        distances=np.array([[0.0, 1.0], [1.0, 0.0]]),
        weights=np.array([0.25, 0.75]),
        marks=("a", "b"),
        mark_space=marks,
        label="skewed-two-point",
    )

    print(f"space: {space.label}, atoms={space.n}, weights={space.weights.tolist()}")
    print()
    print("exact order-2 law (distance block, marks, probability):")
    law = exact_law(space, 2)
    for s, p in zip(law.samples, law.probs):
        print(f"  r12={s.dist[0, 1]:.1f}  marks={s.marks}  prob={float(p):.4f}")

    print()
    print("panel of polynomials, exact vs Monte Carlo (m=20000, seed=3):")
    for phi in default_panel(marks, 2, 6):
        exact = evaluate_exact(phi, space)
        est, err = evaluate_mc(phi, space, m=20_000, seed=3)
        print(f"  {phi.description:<24} exact={exact:.6f}  mc={est:.6f} +- {err:.6f}")

    # The product of two polynomials integrates over disjoint sample blocks:
    # multiply(r12, r12) is E[r12 * r34], which factorizes into E[r12]^2.
    # Reusing an index breaks the factorization on skewed weights.
    r12 = distance_monomial(0, 1, bound=1.0)
    mean = evaluate_exact(r12, space)
    disjoint = evaluate_exact(multiply(r12, r12), space)
    overlap = Polynomial(
        order=3,
        body=lambda dist, marks: float(dist[0, 1] * dist[1, 2]),
        bound=1.0,
        description="r12*r23",
    )
    print()
    print(f"E[r12]          = {mean:.6f}   (= 3/8)")
    print(f"E[r12 * r34]    = {disjoint:.6f}   (= 9/64, the squared mean)")
    print(f"E[r12 * r23]    = {evaluate_exact(overlap, space):.6f}   (= 12/64, shared index)")


if __name__ == "__main__":
    main()

"""Walk through the candidate scoring criteria on constructed prediction
patterns.

Each candidate owns a block of patches; the current model assigns every
patch a class-probability row. Entropy measures how uncertain those
rows are on average, diversity how much they disagree with each other.
Majority selection (alpha < 1) drops the low-confidence patches before
scoring, which is what makes diversity robust to patch-level label
noise: a candidate whose patches split into two confident camps looks
extremely diverse on the full matrix but nearly uniform on its top
quarter.
"""

import numpy as np

from aftstar import (
    CriteriaConfig,
    classify_pattern,
    diversity,
    dominant_class,
    entropy,
    majority_subset,
    score_candidate,
)


def rows(qs):
    return np.array([[q, 1.0 - q] for q in qs])


def describe(name, P):
    print(f"\n--- {name}")
    print(f"dominant-class probabilities: {np.round(P[:, dominant_class(P)], 2)}")
    print(f"pattern:            {classify_pattern(P)}")
    print(f"entropy (full):     {entropy(P):.4f}")
    print(f"diversity (full):   {diversity(P):.4f}")
    quarter = majority_subset(P, 0.25)
    print(f"entropy (top 1/4):  {entropy(quarter):.4f}")
    print(f"diversity (top 1/4): {diversity(quarter):.4f}")


# Pattern A: all patches sit on the fence - classic uncertainty sampling target.
describe("uncertain candidate (pattern A)", rows([0.48, 0.52, 0.5, 0.51, 0.49, 0.5, 0.47, 0.53]))

# Pattern E: the model is confident and consistent - annotating this teaches nothing.
describe("confident candidate (pattern E)", rows([0.97, 0.96, 0.98, 0.95, 0.97, 0.96, 0.98, 0.97]))

# Pattern C: patches split into two confident camps. This is the signature of
# patch-level label noise; raw diversity chases it, majority selection ignores it.
describe("two-camp candidate (pattern C)", rows([0.95, 0.96, 0.94, 0.97, 0.95, 0.06, 0.05, 0.04]))

print("\nCombined scores under the named criteria (same pattern-C candidate):")
P = rows([0.95, 0.96, 0.94, 0.97, 0.95, 0.06, 0.05, 0.04])
for label, cfg in [
    ("diversity    (alpha=1)  ", CriteriaConfig(lambda1=0.0, lambda2=1.0, alpha=1.0)),
    ("diversity^a  (alpha=1/4)", CriteriaConfig(lambda1=0.0, lambda2=1.0, alpha=0.25)),
    ("entropy      (alpha=1)  ", CriteriaConfig(lambda1=1.0, lambda2=0.0, alpha=1.0)),
    ("entropy^a    (alpha=1/4)", CriteriaConfig(lambda1=1.0, lambda2=0.0, alpha=0.25)),
]:
    s = score_candidate(P, cfg, candidate_id="demo")
    print(f"  {label} -> score {s.score:8.4f} (subset of {s.subset_size} patches)")

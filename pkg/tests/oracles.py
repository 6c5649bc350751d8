"""Independent reference implementations used as test oracles.

Everything here is written as literal direct summation with scalar math,
deliberately sharing no code with the package implementations.
"""

import math


def entropy_direct(P, eps=1e-12):
    m = len(P)
    total = 0.0
    for k in range(len(P[0])):
        for j in range(m):
            p = min(max(P[j][k], eps), 1.0)
            total += p * math.log(p)
    return -total / m


def diversity_direct(P, eps=1e-12):
    m = len(P)
    total = 0.0
    for k in range(len(P[0])):
        for j in range(m):
            for l in range(j, m):
                pj = min(max(P[j][k], eps), 1.0)
                pl = min(max(P[l][k], eps), 1.0)
                total += (pj - pl) * math.log(pj / pl)
    return total


def auc_pairwise(scores, labels):
    pos = [s for s, y in zip(scores, labels) if y == 1]
    neg = [s for s, y in zip(scores, labels) if y == 0]
    wins = 0.0
    for sp in pos:
        for sn in neg:
            if sp > sn:
                wins += 1.0
            elif sp == sn:
                wins += 0.5
    return wins / (len(pos) * len(neg))


def random_prediction_matrix(rng, max_m=8, max_classes=4):
    m = int(rng.integers(1, max_m + 1))
    k = int(rng.integers(2, max_classes + 1))
    raw = rng.random((m, k)) + 1e-6
    return raw / raw.sum(axis=1, keepdims=True)

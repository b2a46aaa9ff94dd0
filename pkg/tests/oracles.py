"""High-precision reference evaluations, written independently of the package."""
import itertools

import mpmath as mp

mp.mp.dps = 50


def lse(v):
    return mp.log(mp.fsum(mp.e ** mp.mpf(x) for x in v))


def softmax(v):
    z = lse(v)
    return [mp.e ** (mp.mpf(x) - z) for x in v]


def listnet(s, y):
    p = softmax(y)
    logq = [mp.mpf(x) - lse(s) for x in s]
    return -mp.fsum(pj * lj for pj, lj in zip(p, logq))


def listnet_grad(s, y):
    return [a - b for a, b in zip(softmax(s), softmax(y))]


def l1_projection_active_set(w, radius):
    """Euclidean projection onto the l1 ball by enumerating supports and sign patterns.

    On a support S with signs sgn, the KKT point is x_S = w_S - theta * sgn with
    theta chosen so that ||x||_1 = radius; the feasible candidate closest to w wins.
    """
    w = [mp.mpf(x) for x in w]
    if mp.fsum(abs(x) for x in w) <= radius:
        return [float(x) for x in w]
    d = len(w)
    best, best_dist = None, None
    for k in range(1, d + 1):
        for S in itertools.combinations(range(d), k):
            sgn = {j: (1 if w[j] >= 0 else -1) for j in S}
            theta = (mp.fsum(abs(w[j]) for j in S) - radius) / k
            if theta < 0:
                continue
            x = [mp.mpf(0)] * d
            ok = True
            for j in S:
                x[j] = w[j] - theta * sgn[j]
                if x[j] * sgn[j] < 0:
                    ok = False
            if not ok:
                continue
            dist = mp.fsum((a - b) ** 2 for a, b in zip(w, x))
            if best is None or dist < best_dist:
                best, best_dist = x, dist
    return [float(x) for x in best]

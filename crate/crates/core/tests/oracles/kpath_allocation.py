"""Independent largest-remainder allocation of k-path points.

Every vertex is kept once; each segment gets one mandatory step, and the
remaining (total - n_vertices) steps are spread proportionally to the
Cartesian segment length, remainders resolved largest-first (ties to the
lower segment index). Prints per-segment step counts.
"""
import sys
import numpy as np

HEX = {
    "G": (0.0, 0.0, 0.0),
    "M": (0.5, 0.0, 0.0),
    "K": (1 / 3, 1 / 3, 0.0),
    "A": (0.0, 0.0, 0.5),
    "L": (0.5, 0.0, 0.5),
    "H": (1 / 3, 1 / 3, 0.5),
}


def reciprocal(a, c):
    lat = np.array([[a, 0, 0], [-a / 2, a * np.sqrt(3) / 2, 0], [0, 0, c]])
    return 2 * np.pi * np.linalg.inv(lat).T  # rows are b_i


def allocate(a, c, labels, total):
    b = reciprocal(a, c)
    pts = [np.array(HEX[l]) @ b for l in labels]
    lengths = [np.linalg.norm(pts[i + 1] - pts[i]) for i in range(len(pts) - 1)]
    extra = total - len(labels)
    quotas = [extra * l / sum(lengths) for l in lengths]
    base = [int(np.floor(q)) for q in quotas]
    rem = extra - sum(base)
    order = sorted(range(len(quotas)), key=lambda i: (-(quotas[i] - base[i]), i))
    for i in order[:rem]:
        base[i] += 1
    return [1 + x for x in base], lengths


if __name__ == "__main__":
    steps, lengths = allocate(3.09, 10.08, "G M K G A L H A".split(), 113)
    print("lengths", [f"{l:.12f}" for l in lengths])
    print("steps", steps, "sum", sum(steps), "points", sum(steps) + 1)
    steps, _ = allocate(3.09, 10.08, "G M K G A L H A".split(), 226)
    print("steps226", steps)
    steps, _ = allocate(3.09, 10.08, "G M".split(), 2)
    print("steps_GM_2", steps)

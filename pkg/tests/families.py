"""Extra seeded density families used only by the tests."""

import numpy as np

from eigenratio.coefficients import Family, Step


def decreasing_smooth(seed: int, count: int) -> list:
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        kind = int(rng.integers(3))
        if kind == 0:
            a = float(rng.uniform(1.0, 4.0))
            out.append(Family("linear", a=a, b=-float(rng.uniform(0.2, 0.9)) * a))
        elif kind == 1:
            out.append(Family("exponential", a=float(rng.uniform(0.5, 4.0)),
                              b=-float(rng.uniform(0.3, 2.5))))
        else:
            # right half of a well centred at 1
            out.append(Family("quadratic-well", x0=1.0, a=float(rng.uniform(0.5, 2.0)),
                              k=float(rng.uniform(0.5, 6.0))))
    return out


def symmetric_wells(seed: int, count: int) -> list:
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        kind = int(rng.integers(4))
        a = float(rng.uniform(0.5, 2.0))
        if kind == 0:
            out.append(Family("quadratic-well", x0=0.5, a=a, k=float(rng.uniform(0.5, 8.0))))
        elif kind == 1:
            out.append(Family("tent", x0=0.5, a=a + 1.0, b=-float(rng.uniform(0.2, 0.9)) * (a + 1.0)))
        elif kind == 2:
            out.append(Family("gaussian-well", x0=0.5, a=a, k=float(rng.uniform(0.2, 0.9)) * a,
                              w=float(rng.uniform(0.1, 0.5))))
        else:
            k = int(rng.integers(2, 5))
            b = np.sort(rng.uniform(0.05, 0.45, k - 1))
            v = np.sort(rng.uniform(0.5, 8.0, k))[::-1]
            out.append(Step(tuple(b) + tuple(1.0 - b[::-1]), tuple(v) + tuple(v[::-1][1:])))
    return out

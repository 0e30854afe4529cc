"""Reference implementations used as independent oracles in tests."""

import numpy as np


def bisect_l(uL, P, rho_min, rhoe_min, iters=60):
    """Largest feasible blend fraction by bisection on the state path.

    Evaluates the constraints directly from uL + l P (no closed-form
    coefficients). The energy constraint is quadratic along the path, so a
    hidden dip can only occur for an upward parabola; a golden-section
    minimization locates it before bisecting the first crossing.
    """
    uL = np.asarray(uL, dtype=float)
    P = np.asarray(P, dtype=float)

    def rho(l):
        return uL[0] + l * P[0]

    def phi(l):
        w = uL + l * P
        m = w[1:-1]
        return w[0] * w[-1] - 0.5 * float(m @ m) - rhoe_min * w[0]

    if rho(1.0) >= rho_min:
        l_rho = 1.0
    else:
        lo, hi = 0.0, 1.0
        for _ in range(iters):
            mid = 0.5 * (lo + hi)
            if rho(mid) >= rho_min:
                lo = mid
            else:
                hi = mid
        l_rho = lo

    # golden-section minimum of phi over [0,1]
    inv = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = 0.0, 1.0
    x1, x2 = b - inv * (b - a), a + inv * (b - a)
    f1, f2 = phi(x1), phi(x2)
    for _ in range(2 * iters):
        if f1 < f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - inv * (b - a)
            f1 = phi(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + inv * (b - a)
            f2 = phi(x2)
    lm = 0.5 * (a + b)

    if phi(1.0) >= 0.0 and phi(lm) >= 0.0:
        l_e = 1.0
    else:
        hi = 1.0 if phi(1.0) < 0.0 else lm
        lo = 0.0
        for _ in range(iters):
            mid = 0.5 * (lo + hi)
            if phi(mid) >= 0.0:
                lo = mid
            else:
                hi = mid
        l_e = lo

    return min(l_rho, l_e, 1.0)

"""Independent shooting oracle for the quadrupole profile.

Integrates the n = 2 ODE with an adaptive high-order integrator, combining a
particular and a homogeneous solution so that the decaying condition holds
at a large radius.  Does not import the package under test.
"""
import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import minimize_scalar


def h_fun(r):
    s = r * r / 4.0
    return s / np.expm1(s) if s > 1e-12 else 1.0 - s / 2.0


def _rhs(r, y, forced):
    phi, dphi = y
    h = h_fun(r)
    src = r * r * h / 2.0 if forced else 0.0
    return [dphi, -dphi / r + (4.0 / r ** 2 - h) * phi - src]


def w2_oracle(r_end=30.0, r0=1e-3):
    # series at the origin: particular ~ -r^4/24, homogeneous ~ r^2
    yp = [-r0 ** 4 / 24.0, -r0 ** 3 / 6.0]
    yh = [r0 ** 2, 2.0 * r0]
    kw = dict(method="DOP853", rtol=1e-13, atol=1e-16, dense_output=True)
    sp = solve_ivp(_rhs, (r0, r_end), yp, args=(True,), **kw)
    sh = solve_ivp(_rhs, (r0, r_end), yh, args=(False,), **kw)
    # decaying branch: r phi' + 2 phi = 0 at r_end
    bp = r_end * sp.y[1, -1] + 2 * sp.y[0, -1]
    bh = r_end * sh.y[1, -1] + 2 * sh.y[0, -1]
    a = -bp / bh

    def w2(r):
        phi = sp.sol(r)[0] + a * sh.sol(r)[0]
        return h_fun(r) * (phi + r * r / 2.0)

    return w2


if __name__ == "__main__":
    w2 = w2_oracle()
    res = minimize_scalar(lambda r: -w2(r), bounds=(1.0, 4.0), method="bounded",
                          options={"xatol": 1e-10})
    print(repr(res.x), repr(-res.fun))
    for r in (0.5, 1.0, 2.0, 4.0, 6.0):
        print(r, repr(w2(r)))

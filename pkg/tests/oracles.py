"""Closed-form and independently computed reference values.

Every function here is derived without the package under test: closed forms,
or direct ODE integration with scipy.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import solve_ivp


def sech_jost(k):
    """Jost function of ``-2 sech^2 x``: ``-ik/(1 - ik)``."""
    k = np.asarray(k, dtype=complex)
    return -1j * k / (1.0 - 1j * k)


def sech_S(k):
    """``S = f(-k)/f(k) = -(1 - ik)/(1 + ik)`` for ``-2 sech^2 x``."""
    k = np.asarray(k, dtype=complex)
    return -(1.0 - 1j * k) / (1.0 + 1j * k)


def sech_F(x):
    """F for ``-2 sech^2 x``: ``2 exp(-x)`` on ``x >= 0`` and zero for ``x < 0``."""
    x = np.asarray(x, dtype=float)
    return np.where(x >= 0, 2.0 * np.exp(-np.abs(x)), 0.0)


def degenerate_kernel(x, y):
    """Kernel solving the Marchenko equation with ``F(x) = 2 exp(-x)``."""
    return -2.0 * np.exp(-(x + y)) / (1.0 + np.exp(-2.0 * x))


def degenerate_potential(x):
    return -2.0 / np.cosh(x) ** 2


def dirichlet_count(q, a: float, n_scan: int = 400) -> int:
    """Number of half-line bound states of a potential supported in ``[0, a]``.

    Shoots ``u(0) = 0, u'(0) = 1`` at energy ``-kappa^2`` and counts sign
    changes of the matching function ``u'(a) + kappa u(a)``, which vanishes
    exactly when ``u`` joins the decaying exterior solution ``exp(-kappa x)``.
    """
    qmin = min(0.0, min(q(x) for x in np.linspace(0, a, 2001)))
    kmax = np.sqrt(-qmin) + 1.0
    kappas = np.linspace(1e-3, kmax, n_scan)

    def match(kappa):
        sol = solve_ivp(lambda x, y: [y[1], (q(x) + kappa * kappa) * y[0]], (0.0, a), [0.0, 1.0],
                        rtol=1e-11, atol=1e-13)
        u, up = sol.y[:, -1]
        return up + kappa * u

    m = np.array([match(k) for k in kappas])
    return int(np.count_nonzero(np.sign(m[:-1]) != np.sign(m[1:])))


def jost_by_shooting(q, k: float, X: float) -> complex:
    """``f(0, k)`` by integrating ``-u'' + q u = k^2 u`` from ``x = X`` (where ``f = e^{ikX}``) back to 0."""
    def rhs(x, y):
        u = y[0] + 1j * y[1]
        up = y[2] + 1j * y[3]
        upp = (q(x) - k * k) * u
        return [up.real, up.imag, upp.real, upp.imag]

    u0 = np.exp(1j * k * X)
    sol = solve_ivp(rhs, (X, 0.0), [u0.real, u0.imag, (1j * k * u0).real, (1j * k * u0).imag],
                    rtol=1e-11, atol=1e-13, method="DOP853")
    y = sol.y[:, -1]
    return complex(y[0], y[1])

"""Independent reference computations used only by the tests.

Nothing here calls into the package's own quadrature, closed forms or
fixed-point iteration: integrals go through scipy, the stationary law is
solved from an explicit truncated transition matrix, and the orphan-rate
equilibrium is bracketed with a root finder.
"""

import math

import numpy as np
from scipy import integrate, optimize


def reward_atoms(c, a, p, e, t):
    """Law of C + a t + E Bern(p) at time t as (value, prob) pairs."""
    base = c + a * t
    if p == 0.0 or e == 0.0:
        return [(base, 1.0)]
    return [(base, 1.0 - p), (base + e, p)]


def hide_prob(c, a, p, e, beta, lam):
    mu = 1.0 - lam

    def g(t):
        return math.exp(-t / mu) / mu * sum(q for v, q in reward_atoms(c, a, p, e, t) if v < beta)

    pts = [x for x in ((beta - c) / a, (beta - c - e) / a) if 0 < x < 60 * mu] if a > 0 and math.isfinite(beta) else []
    val, _ = integrate.quad(g, 0, 60 * mu, points=pts or None, limit=400, epsabs=1e-14, epsrel=1e-13)
    return val


def censored(c, a, p, e, beta, lam):
    """E[(block, linear, bernoulli); published] and E[...; hidden] against Exp(mean 1 - lam)."""
    mu = 1.0 - lam
    pts = [x for x in ((beta - c) / a, (beta - c - e) / a) if 0 < x < 60 * mu] if a > 0 and math.isfinite(beta) else []
    out = []
    for hidden in (False, True):
        row = []
        for comp in range(3):

            def g(t, comp=comp, hidden=hidden):
                s = 0.0
                for v, q in reward_atoms(c, a, p, e, t):
                    if (v < beta) == hidden:
                        bonus = v - c - a * t
                        s += q * (c, a * t, bonus)[comp]
                return math.exp(-t / mu) / mu * s

            row.append(integrate.quad(g, 0, 60 * mu, points=pts or None, limit=400, epsabs=1e-14, epsrel=1e-13)[0])
        out.append(row)
    return np.array(out[0]), np.array(out[1])


def erlang_path_mean(c, a, pe, j, mu):
    """integral of t^j e^{-t/mu} / (j! mu^{j+1}) * (C + pE + a t) dt, by scipy quadrature."""

    def g(t):
        return math.exp(j * math.log(t) - t / mu - math.lgamma(j + 1) - (j + 1) * math.log(mu)) * (c + pe + a * t) if t > 0 else (
            (c + pe) / mu if j == 0 else 0.0
        )

    hi = mu * (j + 1 + 20 * math.sqrt(j + 1) + 40)
    return integrate.quad(g, 0, hi, limit=400, epsabs=1e-13, epsrel=1e-13)[0]


def f_state_sum(c, a, pe, i, alpha, lam):
    """f_i as the explicit sum over the i attacker paths A, HA, HHA, ..."""
    mu = 1.0 - lam
    return sum(alpha * (1 - alpha) ** j * erlang_path_mean(c, a, pe, j, mu) for j in range(i))


def stationary_bruteforce(alpha, h, n_leads=400):
    """Stationary law of the explicit chain, truncated at a lead of ``n_leads``.

    State order: 0, 0', 0'', 1, 2, ..., n_leads.
    """
    n = 3 + n_leads
    P = np.zeros((n, n))
    lead = lambda i: 2 + i  # noqa: E731
    P[0, lead(1)] = alpha * h
    P[0, 0] = 1 - alpha * h
    P[1, 0] = 1.0
    P[2, 0] = 1.0
    P[lead(1), lead(2)] = alpha
    P[lead(1), 1] = 1 - alpha
    P[lead(2), lead(3)] = alpha
    P[lead(2), 2] = 1 - alpha
    for i in range(3, n_leads + 1):
        if i < n_leads:
            P[lead(i), lead(i + 1)] = alpha
        else:
            P[lead(i), lead(i)] = alpha
        P[lead(i), lead(i - 1)] = 1 - alpha
    A = P.T - np.eye(n)
    A[-1, :] = 1.0
    rhs = np.zeros(n)
    rhs[-1] = 1.0
    pi = np.linalg.solve(A, rhs)
    return {"p0": pi[0], "p0_prime": pi[1], "p0_dprime": pi[2], "leads": pi[3:]}


def equilibrium_lambda(alpha, hide):
    """Orphan rate solving lam = orphan(alpha, p1(hide(lam))) by bracketing."""

    def p1(h):
        if h == 0:
            return 0.0
        return 1.0 / (1.0 / (alpha * h) + 1.0 + (1.0 - alpha) / (1.0 - 2.0 * alpha))

    def resid(lam):
        return p1(hide(lam)) * (1 - alpha) * (1 + alpha / (1 - 2 * alpha)) - lam

    if abs(resid(0.0)) < 1e-15:
        return 0.0
    return optimize.brentq(resid, 0.0, 0.5, xtol=1e-15, rtol=1e-15)


def per_event_reward(c, a, p, e, alpha, gamma, beta, lam, n_states=600):
    """Per-event reward summed state by state from scipy integrals, no closed-form tail."""
    h = hide_prob(c, a, p, e, beta, lam)
    pi = stationary_bruteforce(alpha, h, n_leads=n_states) if h > 0 else None
    above, below = censored(c, a, p, e, beta, lam)
    f0 = alpha * above + (alpha**2 + alpha * (1 - alpha) * (alpha + gamma * (1 - alpha))) * below
    if pi is None:
        return f0
    mu = 1.0 - lam
    miss = lambda i: (1 - alpha) ** i  # noqa: E731
    pe = p * e
    # per-component f_i: block and bonus scale with 1-(1-alpha)^i, fees by the path sum
    lin_paths = [alpha * (1 - alpha) ** j * a * mu * (j + 1) for j in range(n_states + 2)]
    lin_cum = np.cumsum(lin_paths)

    def f(i):
        return np.array([c * (1 - miss(i)), lin_cum[i - 1], pe * (1 - miss(i))])

    total = pi["p0"] * f0 + pi["leads"][0] * f(2)
    for i in range(2, n_states):
        total = total + alpha * pi["leads"][i - 2] * f(i)
    return total

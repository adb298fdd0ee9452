"""Brute-force reference evaluations for diagonal spectra.

Everything here is plain scalar arithmetic with long direct sums and dense
grids: no tail models, no operator handles, no shared code with the
production evaluators. These are the oracles used to calibrate the
equivalence-ratio ceilings and to pin expected values in tests.
"""

from __future__ import annotations

import math

import numpy as np

_TERM_FLOOR = 1e-22
_J_SPAN = 500


def _blocks(eigs, absx2, s, re_a, re_b, js):
    """Exact dyadic block magnitudes on a diagonal spectrum (euclidean norm)."""
    with np.errstate(over="ignore", under="ignore"):
        lam = np.exp2(np.asarray(js, dtype=float))[:, None]
        mult2 = np.zeros((len(js), len(eigs)))
        pos = eigs > 0
        mult2[:, pos] = eigs[pos] ** (2 * re_b) * (lam + eigs[pos]) ** (-2 * (re_a + re_b))
        if re_b == 0:
            mult2[:, ~pos] = lam ** (-2 * re_a)
        norms = np.sqrt((mult2 * absx2[None, :]).sum(axis=1))
        return np.exp2(np.asarray(js, dtype=float) * (s + re_a)) * norms


def _floor(peak: float, q: float) -> float:
    # the l_q mass of a dropped term is (b/peak)^q: make the cut q-aware so
    # small q (heavy-tailed aggregation) keeps correspondingly more terms
    if math.isinf(q):
        return peak * _TERM_FLOOR
    return peak * max(10.0 ** (-22.0 / min(q, 1.0)), 1e-280)


def _aggregate(terms, q, tail_low=False, tail_high=False):
    """l_q mass of the listed terms plus empirical geometric remainders at
    the decaying end(s)."""
    terms = np.asarray(terms, dtype=float)
    if math.isinf(q):
        return float(terms.max(initial=0.0))
    total = float((terms ** q).sum())
    for take in (("high",) if tail_high else ()) + (("low",) if tail_low else ()):
        t = terms if take == "high" else terms[::-1]
        if len(t) >= 2 and 0.0 < t[-1] < t[-2]:
            rq = (t[-1] / t[-2]) ** q
            total += t[-1] ** q * rq / (1.0 - rq)
    return float(total ** (1.0 / q))


def sum_part(eigs, x, s, q, k, alpha, beta) -> float:
    """Direct sum over j >= k until the terms are negligible."""
    eigs = np.asarray(eigs, dtype=float)
    absx2 = np.abs(np.asarray(x)) ** 2
    re_a, re_b = complex(alpha).real, complex(beta).real
    js = np.arange(k, k + _J_SPAN)
    b = _blocks(eigs, absx2, s, re_a, re_b, js)
    peak = b.max(initial=0.0)
    if peak > 0:
        keep = np.nonzero(b > _floor(peak, q))[0]
        b = b[: keep[-1] + 1] if keep.size else b[:1]
    return _aggregate(b, q, tail_high=True)


def leading_term(eigs, x, k, alpha) -> float:
    eigs = np.asarray(eigs, dtype=float)
    absx2 = np.abs(np.asarray(x)) ** 2
    re_a = complex(alpha).real
    return float(np.sqrt((absx2 * (2.0 ** k + eigs) ** (-2 * re_a)).sum()))


def inhom_norm(eigs, x, s, q, k=0, alpha=0.0, beta=1.0) -> float:
    return leading_term(eigs, x, k, alpha) + sum_part(eigs, x, s, q, k, alpha, beta)


def homog_norm(eigs, x, s, q, alpha=0.0, beta=1.0) -> float:
    eigs = np.asarray(eigs, dtype=float)
    absx2 = np.abs(np.asarray(x)) ** 2
    re_a, re_b = complex(alpha).real, complex(beta).real
    js = np.arange(-_J_SPAN, _J_SPAN)
    b = _blocks(eigs, absx2, s, re_a, re_b, js)
    peak = b.max(initial=0.0)
    if peak > 0:
        keep = np.nonzero(b > _floor(peak, q))[0]
        if keep.size:
            b = b[keep[0]: keep[-1] + 1]
    return _aggregate(b, q, tail_low=True, tail_high=True)


def breve_norm(eigs, x, s, q, k=0, alpha=0.0, beta=1.0) -> float:
    eigs = np.asarray(eigs, dtype=float)
    absx2 = np.abs(np.asarray(x)) ** 2
    re_a, re_b = complex(alpha).real, complex(beta).real
    js = np.arange(k - _J_SPAN, k + 1)
    b = _blocks(eigs, absx2, s, re_a, re_b, js)
    lead = float(np.sqrt((absx2 * (eigs ** re_b * (2.0 ** k + eigs) ** (-re_b)) ** 2).sum()))
    peak = b.max(initial=0.0)
    if peak > 0:
        keep = np.nonzero(b > _floor(peak, q))[0]
        if keep.size:
            b = b[keep[0]:]
    return lead + _aggregate(b, q, tail_low=True)


def continuous_sum_part(eigs, x, s, q, k, alpha, beta, du=2e-3) -> float:
    """Dense-trapezoid continuous profile integral from 2^k upward."""
    eigs = np.asarray(eigs, dtype=float)
    absx2 = np.abs(np.asarray(x)) ** 2
    re_a, re_b = complex(alpha).real, complex(beta).real
    gap = re_b - s
    top = math.log(max(eigs.max(initial=1.0), 1.0)) + 60.0 / max(gap, 0.25)
    us = np.arange(k * math.log(2.0), top, du)
    lam = np.exp(us)[:, None]
    prof2 = (eigs ** (2 * re_b) * (lam + eigs) ** (-2 * (re_a + re_b)) * absx2[None, :]).sum(axis=1)
    g = np.exp(us * (s + re_a)) * np.sqrt(prof2)
    if math.isinf(q):
        return float(g.max(initial=0.0))
    return float(np.trapezoid(g ** q, us) ** (1.0 / q))


def semigroup_sum_part(eigs, x, s, q, k, beta) -> float:
    eigs = np.asarray(eigs, dtype=float)
    absx2 = np.abs(np.asarray(x)) ** 2
    re_b = complex(beta).real
    js = np.arange(k, k + _J_SPAN)
    t = np.exp2(-js.astype(float))[:, None]
    mult2 = eigs ** (2 * re_b) * np.exp(-2.0 * t * eigs)
    terms = np.exp2(js * (s - re_b)) * np.sqrt((mult2 * absx2[None, :]).sum(axis=1))
    peak = terms.max(initial=0.0)
    if peak > 0:
        keep = np.nonzero(terms > _floor(peak, q))[0]
        terms = terms[: keep[-1] + 1] if keep.size else terms[:1]
    return _aggregate(terms, q, tail_high=True)


def homog_semigroup_part(eigs, x, s, q, beta) -> float:
    eigs = np.asarray(eigs, dtype=float)
    absx2 = np.abs(np.asarray(x)) ** 2
    re_b = complex(beta).real
    js = np.arange(-_J_SPAN, _J_SPAN)
    t = np.exp2(-js.astype(float))[:, None]
    with np.errstate(over="ignore"):
        expf = np.exp(-2.0 * np.minimum(t * eigs, 1e6))
    mult2 = eigs ** (2 * re_b) * expf
    terms = np.exp2(js * (s - re_b)) * np.sqrt((mult2 * absx2[None, :]).sum(axis=1))
    terms = terms[np.isfinite(terms)]
    peak = terms.max(initial=0.0)
    if peak > 0:
        keep = np.nonzero(terms > _floor(peak, q))[0]
        if keep.size:
            terms = terms[: keep[-1] + 1]
    return _aggregate(terms, q, tail_high=True)


def k_functional(eigs, x, alpha, t, n_mu=1200) -> float:
    """Dense mu-scan of the minimizer curve plus the trivial decompositions."""
    eigs = np.asarray(eigs, dtype=float)
    absx2 = np.abs(np.asarray(x)) ** 2
    sig = eigs ** (2 * complex(alpha).real)
    cx = math.sqrt(float((absx2 * sig).sum()))
    nx = math.sqrt(float(absx2.sum()))
    best = min(nx, t * cx)
    mus = np.geomspace(1e-14, 1e14, n_mu)[:, None]
    r = mus * sig[None, :]
    d = np.sqrt((absx2[None, :] * (r / (1.0 + r)) ** 2).sum(axis=1))
    g = np.sqrt((absx2[None, :] * sig[None, :] / (1.0 + r) ** 2).sum(axis=1))
    return float(min(best, (d + t * g).min()))


def interpolation_norm(eigs, x, alpha, theta, q, n_t=1000, n_mu=1000) -> float:
    """Brute t-grid x mu-scan interpolation quasi-norm with analytic tails."""
    eigs = np.asarray(eigs, dtype=float)
    absx2 = np.abs(np.asarray(x)) ** 2
    sig = eigs ** (2 * complex(alpha).real)
    cx = math.sqrt(float((absx2 * sig).sum()))
    nx = math.sqrt(float(absx2.sum()))
    t_star = nx / max(cx, 1e-300)
    us = np.linspace(math.log(t_star) - 28.0, math.log(t_star) + 28.0, n_t)
    ts = np.exp(us)
    mus = np.geomspace(1e-14, 1e14, n_mu)[:, None]
    r = mus * sig[None, :]
    d = np.sqrt((absx2[None, :] * (r / (1.0 + r)) ** 2).sum(axis=1))
    g = np.sqrt((absx2[None, :] * sig[None, :] / (1.0 + r) ** 2).sum(axis=1))
    ks = np.minimum((d[:, None] + ts[None, :] * g[:, None]).min(axis=0),
                    np.minimum(nx, ts * cx))
    prof = np.exp(-theta * us) * ks
    if math.isinf(q):
        return float(prof.max())
    core = float(np.trapezoid(prof ** q, us))
    tail_lo = (cx ** q) * math.exp((1 - theta) * q * us[0]) / ((1 - theta) * q)
    tail_hi = (nx ** q) * math.exp(-theta * q * us[-1]) / (theta * q)
    return (core + tail_lo + tail_hi) ** (1.0 / q)


def power_coeffs(eigs, x, z) -> np.ndarray:
    """A^z x on a diagonal spectrum (principal powers, 0^z = 0 for Re z > 0)."""
    eigs = np.asarray(eigs, dtype=float)
    x = np.asarray(x, dtype=complex)
    out = np.zeros_like(x)
    pos = eigs > 0
    out[pos] = np.exp(complex(z) * np.log(eigs[pos])) * x[pos]
    if complex(z) == 0:
        out[~pos] = x[~pos]
    return out

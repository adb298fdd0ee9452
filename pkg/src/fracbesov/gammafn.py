"""Complex Gamma function (Lanczos approximation) and the Gamma-factor
prefactors used throughout the fractional-power integrals.

The evaluator is self-contained: Lanczos with g = 7 and 9 coefficients,
reflection formula for Re z < 1/2. Accuracy is ~1e-13 relative on the
arguments this package needs (verified against a frozen high-precision
table in the test suite).
"""

from __future__ import annotations

import cmath
import math

_LANCZOS_G = 7.0
# g = 7, 9-term coefficient set.
_LANCZOS_C = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def gamma(z: complex) -> complex:
    """Gamma(z) for complex z off the non-positive integers."""
    z = complex(z)
    if z.real < 0.5:
        if z.imag == 0.0 and z.real == int(z.real):
            raise ZeroDivisionError(f"Gamma pole at z = {z}")
        s = cmath.sin(cmath.pi * z)
        return cmath.pi / (s * gamma(1.0 - z))
    z = z - 1.0
    acc = _LANCZOS_C[0]
    for i in range(1, len(_LANCZOS_C)):
        acc += _LANCZOS_C[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    return math.sqrt(2.0 * math.pi) * t ** (z + 0.5) * cmath.exp(-t) * acc


def balakrishnan_prefactor(alpha: complex, n: int) -> complex:
    """Gamma(n) / (Gamma(alpha) Gamma(n - alpha)); 0 < Re alpha < n."""
    return gamma(n) / (gamma(alpha) * gamma(n - alpha))


def unified_prefactor(z: complex, alpha: complex, beta: complex) -> complex:
    """Gamma(alpha+beta) / (Gamma(alpha+z) Gamma(beta-z)); -Re a < Re z < Re b."""
    return gamma(alpha + beta) / (gamma(alpha + z) * gamma(beta - z))


def reciprocal_beta_prefactor(alpha: complex) -> complex:
    """1 / (Gamma(alpha) Gamma(1 - alpha)), i.e. sin(pi alpha)/pi; 0 < Re alpha < 1."""
    return 1.0 / (gamma(alpha) * gamma(1.0 - alpha))


def composition_bound_constant(alpha: complex, n: int) -> float:
    """C_{alpha,n} = Gamma(Re a) Gamma(n - Re a) / |Gamma(a) Gamma(n - a)|.

    The constant in the uniform bounds for t^a (t+A)^{-a}, A^a (t+A)^{-a}
    and (s+A)^a (t+A)^{-a}. Requires 0 < Re alpha < n.
    """
    a = complex(alpha)
    if not (0.0 < a.real < n):
        raise ValueError(f"need 0 < Re alpha < n, got alpha={alpha}, n={n}")
    num = gamma(a.real) * gamma(n - a.real)
    den = abs(gamma(a) * gamma(n - a))
    return (num / den).real


def moment_constant(alpha: complex, n: int, m_const: float) -> float:
    """Explicit constant in the moment inequality
    ||A^a x|| <= C ||A^n x||^{Re a / n} ||x||^{1 - Re a / n}.

    C = Gamma(n+1)/|Gamma(a) Gamma(n-a)| * M^{Re a} (M+1)^{n-Re a} / (Re a (n-Re a)).
    """
    a = complex(alpha)
    if not (0.0 < a.real < n):
        raise ValueError(f"need 0 < Re alpha < n, got alpha={alpha}, n={n}")
    lead = gamma(n + 1).real / abs(gamma(a) * gamma(n - a))
    return lead * m_const ** a.real * (m_const + 1.0) ** (n - a.real) / (a.real * (n - a.real))

"""Closed-form root finding for monic polynomials of degree 2-4.

The solvers return complex roots with exact conjugate symmetry: complex
roots of real polynomials are produced as conjugate pairs by construction
(quadratic sub-factors always carry real coefficients), so no symmetrisation
pass is needed downstream.
"""

from __future__ import annotations

import cmath
import math

import numpy as np

# Relative discriminant size below which the Ferrari quartic path is
# abandoned for QR iteration on the companion matrix (near-multiple roots
# make the closed form ill-conditioned).
QUARTIC_DISCRIMINANT_CUTOFF = 1e-12


def char_poly(M: np.ndarray) -> np.ndarray:
    """Coefficients [c_0, ..., c_{d-1}] of the monic characteristic polynomial.

    p(x) = x^d + c_{d-1} x^{d-1} + ... + c_0, computed from the power sums
    tr(M^k) via Newton's identities (no eigenvalue solver involved).
    """
    d = M.shape[0]
    power = np.eye(d)
    p = []
    for _ in range(d):
        power = power @ M
        p.append(np.trace(power))
    e = [1.0]
    for k in range(1, d + 1):
        s = sum((-1) ** (i - 1) * e[k - i] * p[i - 1] for i in range(1, k + 1))
        e.append(s / k)
    # x^d - e1 x^{d-1} + e2 x^{d-2} - ...
    coeffs = [(-1) ** (d - k) * e[d - k] for k in range(d)]
    return np.asarray(coeffs, dtype=float)


def solve_quadratic(b: float, c: float) -> list[complex]:
    """Roots of x^2 + b x + c."""
    disc = b * b - 4.0 * c
    scale2 = max(1.0, b * b, abs(c))
    if abs(disc) <= 1e-14 * scale2:
        return [complex(-0.5 * b)] * 2
    if disc >= 0.0:
        s = math.sqrt(disc)
        # avoid cancellation: compute the large-magnitude root first
        q = -0.5 * (b + math.copysign(s, b)) if b != 0.0 else 0.5 * s
        if q == 0.0:
            return [0.0 + 0.0j, -b + 0.0j]
        return [complex(q), complex(c / q)]
    s = math.sqrt(-disc)
    return [complex(-0.5 * b, 0.5 * s), complex(-0.5 * b, -0.5 * s)]


def solve_cubic(b: float, c: float, d: float) -> list[complex]:
    """Roots of x^3 + b x^2 + c x + d."""
    shift = b / 3.0
    p = c - b * b / 3.0
    q = 2.0 * b**3 / 27.0 - b * c / 3.0 + d
    roots: list[complex]
    disc_scale = (q / 2.0) ** 2 + (abs(p) / 3.0) ** 3
    if p == 0.0 and q == 0.0:
        roots = [0.0 + 0.0j] * 3
    elif abs((q / 2.0) ** 2 + (p / 3.0) ** 3) <= 1e-13 * disc_scale:
        # vanishing discriminant: a double root (exact closed form is
        # well conditioned here, unlike the generic branches)
        if abs(p) <= 1e-13 * max(1.0, q ** (2.0 / 3.0) if q > 0 else abs(q) ** (2.0 / 3.0)):
            u = math.copysign(abs(q) ** (1.0 / 3.0), -q)
            roots = [complex(u)] * 3
        else:
            u = -1.5 * q / p
            roots = [complex(u), complex(u), complex(3.0 * q / p)]
    else:
        disc = (q / 2.0) ** 2 + (p / 3.0) ** 3
        if disc > 0.0:
            # one real root; pick the branch without cancellation
            s = math.sqrt(disc)
            w = -q / 2.0 - math.copysign(s, q)
            u = math.copysign(abs(w) ** (1.0 / 3.0), w)
            v = -p / (3.0 * u) if u != 0.0 else 0.0
            t0 = u + v
            # deflate: t^2 + t0 t + (t0^2 + p) has the conjugate pair
            roots = [complex(t0)] + solve_quadratic(t0, t0 * t0 + p)
        else:
            # three real roots (trigonometric form)
            m = 2.0 * math.sqrt(-p / 3.0)
            arg = 3.0 * q / (p * m) if p != 0.0 else 0.0
            theta = math.acos(min(1.0, max(-1.0, arg)))
            roots = [
                complex(m * math.cos((theta - 2.0 * math.pi * k) / 3.0))
                for k in range(3)
            ]
    return [r - shift for r in roots]


def _quartic_discriminant(p: float, q: float, r: float) -> float:
    return (
        256.0 * r**3
        - 128.0 * p**2 * r**2
        + 144.0 * p * q**2 * r
        - 27.0 * q**4
        + 16.0 * p**4 * r
        - 4.0 * p**3 * q**2
    )


def solve_quartic(b: float, c: float, d: float, e: float) -> list[complex]:
    """Roots of x^4 + b x^3 + c x^2 + d x + e.

    Ferrari's method with a depressed-cubic resolvent; near-zero
    discriminant (multiple roots) falls back to QR iteration on the
    companion matrix, which is better conditioned there.
    """
    shift = b / 4.0
    p = c - 3.0 * b * b / 8.0
    q = d - b * c / 2.0 + b**3 / 8.0
    r = e - b * d / 4.0 + b * b * c / 16.0 - 3.0 * b**4 / 256.0

    scale = max(1.0, abs(p) ** 0.5, abs(q) ** (1.0 / 3.0), abs(r) ** 0.25)
    disc = _quartic_discriminant(p, q, r)
    if abs(disc) < QUARTIC_DISCRIMINANT_CUTOFF * scale**12:
        roots = np.roots([1.0, b, c, d, e])
        return [complex(z) for z in roots]

    if abs(q) < 1e-14 * scale**3:
        # biquadratic: y^4 + p y^2 + r
        zs = solve_quadratic(p, r)
        out: list[complex] = []
        for z in zs:
            s = cmath.sqrt(z)
            out.extend([s, -s])
        # biquadratic roots of a real polynomial: conjugate symmetry holds
        return [w - shift for w in out]

    # resolvent 8m^3 + 8p m^2 + (2p^2 - 8r) m - q^2 = 0 has a positive root
    res = solve_cubic(p, (2.0 * p * p - 8.0 * r) / 8.0, -q * q / 8.0)
    m = max(
        (z.real for z in res if abs(z.imag) <= 1e-9 * (1.0 + abs(z)) and z.real > 0.0),
        default=None,
    )
    if m is None or 2.0 * m <= 0.0:
        roots = np.roots([1.0, b, c, d, e])
        return [complex(z) for z in roots]
    s2m = math.sqrt(2.0 * m)
    # y^4 + p y^2 + q y + r = (y^2 + s2m y + t1)(y^2 - s2m y + t2)
    t1 = p / 2.0 + m - q / (2.0 * s2m)
    t2 = p / 2.0 + m + q / (2.0 * s2m)
    out = solve_quadratic(s2m, t1) + solve_quadratic(-s2m, t2)
    return [w - shift for w in out]


def poly_roots(coeffs: np.ndarray) -> list[complex]:
    """Roots of the monic polynomial with low-order coefficients `coeffs`.

    `coeffs` as returned by :func:`char_poly` ([c_0, ..., c_{d-1}]).
    """
    d = len(coeffs)
    if d == 2:
        return solve_quadratic(coeffs[1], coeffs[0])
    if d == 3:
        return solve_cubic(coeffs[2], coeffs[1], coeffs[0])
    if d == 4:
        return solve_quartic(coeffs[3], coeffs[2], coeffs[1], coeffs[0])
    raise ValueError(f"unsupported degree {d}")

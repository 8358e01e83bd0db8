"""Scalar special functions underlying every kernel family.

Gamma, orthonormal Hermite and Laguerre functions (stable normalized
recurrences in the function domain), Bessel J, and a dual-regime modified
Bessel I with an explicit power series below a crossover argument and an
asymptotic expansion above it.  All evaluators accept numpy arrays where
that helps kernel tensor assembly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, jv

from .errors import CapabilityError, DomainError

#: Default ceiling for eigenfunction indices; callers may override per call.
DEFAULT_INDEX_CAP = 200

_SERIES_MAX_TERMS = 400
_ASYM_MAX_TERMS = 60


def gamma(x: float) -> float:
    """Gamma function for positive real arguments."""
    if x <= 0.0:
        raise DomainError(f"gamma requires x > 0, got {x}")
    return math.gamma(x)


# ---------------------------------------------------------------------------
# Hermite functions (orthonormal in L^2(R))
# ---------------------------------------------------------------------------


def hermite_function_table(k_max: int, x, index_cap: int = DEFAULT_INDEX_CAP) -> np.ndarray:
    """All orthonormal Hermite functions h_0..h_{k_max} at the points x.

    Uses the normalized three-term recurrence
        h_{k+1} = sqrt(2/(k+1)) x h_k - sqrt(k/(k+1)) h_{k-1},
    which keeps every intermediate at unit L^2 scale (no factorial overflow).

    Returns an array of shape (k_max+1,) + x.shape.
    """
    if k_max < 0:
        raise DomainError(f"k_max must be >= 0, got {k_max}")
    if k_max > index_cap:
        raise CapabilityError(f"index {k_max} exceeds cap {index_cap}")
    x = np.asarray(x, dtype=float)
    out = np.empty((k_max + 1,) + x.shape, dtype=float)
    out[0] = math.pi ** (-0.25) * np.exp(-0.5 * x * x)
    if k_max >= 1:
        out[1] = math.sqrt(2.0) * x * out[0]
    for k in range(1, k_max):
        out[k + 1] = math.sqrt(2.0 / (k + 1)) * x * out[k] - math.sqrt(k / (k + 1.0)) * out[k - 1]
    return out


def hermite_function(k: int, x, index_cap: int = DEFAULT_INDEX_CAP):
    """Orthonormal Hermite function h_k (eigenfunction of the harmonic oscillator)."""
    table = hermite_function_table(k, x, index_cap=index_cap)
    return table[k]


# ---------------------------------------------------------------------------
# Laguerre-type functions (orthonormal in L^2(0, infty), plain dx)
# ---------------------------------------------------------------------------


def laguerre_function_table(
    k_max: int, alpha: float, x, index_cap: int = DEFAULT_INDEX_CAP
) -> np.ndarray:
    """Orthonormal Laguerre-type functions phi_0..phi_{k_max} on (0, infinity).

    phi_k(x) = (2 k! / Gamma(k+alpha+1/2))^(1/2) e^{-x^2/2} x^alpha L_k^{(alpha-1/2)}(x^2),
    evaluated through the normalized recurrence (u = x^2, nu = alpha - 1/2):

        phi_{k+1} = (2k+nu+1-u)/sqrt((k+1)(k+nu+1)) phi_k
                    - sqrt(k(k+nu)/((k+1)(k+nu+1))) phi_{k-1}.
    """
    if k_max < 0:
        raise DomainError(f"k_max must be >= 0, got {k_max}")
    if k_max > index_cap:
        raise CapabilityError(f"index {k_max} exceeds cap {index_cap}")
    if alpha <= 0.0:
        raise DomainError(f"alpha must be > 0, got {alpha}")
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0.0):
        raise DomainError("laguerre functions require x > 0")
    nu = alpha - 0.5
    u = x * x
    out = np.empty((k_max + 1,) + x.shape, dtype=float)
    # phi_0 in log form: x^alpha can under/overflow for extreme x otherwise.
    log_phi0 = 0.5 * (math.log(2.0) - gammaln(nu + 1.0)) + alpha * np.log(x) - 0.5 * u
    out[0] = np.exp(log_phi0)
    if k_max >= 1:
        out[1] = (nu + 1.0 - u) / math.sqrt(nu + 1.0) * out[0]
    for k in range(1, k_max):
        a = (2.0 * k + nu + 1.0 - u) / math.sqrt((k + 1.0) * (k + nu + 1.0))
        b = math.sqrt(k * (k + nu) / ((k + 1.0) * (k + nu + 1.0)))
        out[k + 1] = a * out[k] - b * out[k - 1]
    return out


def laguerre_function(k: int, alpha: float, x, index_cap: int = DEFAULT_INDEX_CAP):
    """Orthonormal Laguerre-type function phi_k^alpha on the half-line."""
    table = laguerre_function_table(k, alpha, x, index_cap=index_cap)
    return table[k]


# ---------------------------------------------------------------------------
# Bessel J (first kind)
# ---------------------------------------------------------------------------


def bessel_j(nu: float, x):
    """Bessel function of the first kind J_nu, vectorized over x."""
    if nu < -0.5:
        raise DomainError(f"bessel_j supports nu >= -1/2, got {nu}")
    return jv(nu, np.asarray(x, dtype=float))


# ---------------------------------------------------------------------------
# Modified Bessel I: dual-regime evaluation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AsymptoticCoefficients:
    """Bracket coefficients of the large-argument expansion of I_nu.

    values[k] is the k-th coefficient: values[0] = 1 and

        values[k] = (4 nu^2 - 1)(4 nu^2 - 3^2) ... (4 nu^2 - (2k-1)^2) / (4^k k!).

    The expansion reads  sqrt(z) I_nu(z) ~ e^z/sqrt(2 pi) * sum_k (-1)^k values[k] / (2z)^k.
    """

    nu: float
    values: tuple

    @classmethod
    def compute(cls, nu: float, count: int) -> "AsymptoticCoefficients":
        if count < 1:
            raise DomainError("count must be >= 1")
        vals = [1.0]
        acc = 1.0
        for k in range(1, count):
            acc *= (4.0 * nu * nu - (2.0 * k - 1.0) ** 2) / (4.0 * k)
            vals.append(acc)
        return cls(nu=nu, values=tuple(vals))


def bessel_i_crossover(nu: float) -> float:
    """Argument at which I_nu evaluation switches from series to asymptotics."""
    return max(12.0, 2.0 * nu * nu)


def _bessel_i_series(nu: float, z: np.ndarray) -> np.ndarray:
    """Ascending power series of I_nu; all terms positive, no cancellation."""
    out = np.zeros_like(z)
    pos = z > 0.0
    zp = z[pos]
    term = np.exp(nu * np.log(0.5 * zp) - gammaln(nu + 1.0))
    total = term.copy()
    q = 0.25 * zp * zp
    for m in range(1, _SERIES_MAX_TERMS):
        term = term * q / (m * (nu + m))
        total += term
        if np.all(term <= 1e-17 * total):
            break
    out[pos] = total
    if nu == 0.0:
        out[~pos] = 1.0
    return out


def _bessel_i_asym_sum(nu: float, z: np.ndarray) -> np.ndarray:
    """Truncated asymptotic bracket sum with per-element minimal-term stopping."""
    total = np.ones_like(z)
    term = np.ones_like(z)
    active = np.ones(z.shape, dtype=bool)
    for k in range(1, _ASYM_MAX_TERMS):
        ratio = -(4.0 * nu * nu - (2.0 * k - 1.0) ** 2) / (8.0 * k * z)
        new_term = term * ratio
        # stop an element once its terms start growing (divergent tail) or are negligible
        grow = np.abs(new_term) >= np.abs(term)
        active &= ~grow
        add = active & (np.abs(new_term) > 1e-18 * np.abs(total))
        total = np.where(add, total + new_term, total)
        term = np.where(active, new_term, term)
        if not np.any(add):
            break
    return total


def modified_bessel_i(nu: float, z):
    """Modified Bessel function I_nu(z) for nu >= 0, z >= 0.

    Below the crossover max(12, 2 nu^2) the ascending series is summed; above
    it the asymptotic expansion with minimal-term truncation is used.  The two
    regimes agree at the crossover to ~1e-10 relative.
    """
    if nu < 0.0:
        raise DomainError(f"modified_bessel_i requires nu >= 0, got {nu}")
    z_arr = np.asarray(z, dtype=float)
    scalar = z_arr.ndim == 0
    z_arr = np.atleast_1d(z_arr).astype(float)
    if np.any(z_arr < 0.0):
        raise DomainError("modified_bessel_i requires z >= 0")
    zstar = bessel_i_crossover(nu)
    out = np.empty_like(z_arr)
    small = z_arr < zstar
    if np.any(small):
        out[small] = _bessel_i_series(nu, z_arr[small])
    if np.any(~small):
        zl = z_arr[~small]
        out[~small] = np.exp(zl - 0.5 * np.log(2.0 * math.pi * zl)) * _bessel_i_asym_sum(nu, zl)
    return float(out[0]) if scalar else out


def log_modified_bessel_i(nu: float, z):
    """log I_nu(z), stable for large z (no overflow up to z ~ 1e8 and beyond)."""
    if nu < 0.0:
        raise DomainError(f"log_modified_bessel_i requires nu >= 0, got {nu}")
    z_arr = np.asarray(z, dtype=float)
    scalar = z_arr.ndim == 0
    z_arr = np.atleast_1d(z_arr).astype(float)
    if np.any(z_arr <= 0.0):
        raise DomainError("log_modified_bessel_i requires z > 0")
    zstar = bessel_i_crossover(nu)
    out = np.empty_like(z_arr)
    small = z_arr < zstar
    if np.any(small):
        out[small] = np.log(_bessel_i_series(nu, z_arr[small]))
    if np.any(~small):
        zl = z_arr[~small]
        out[~small] = zl - 0.5 * np.log(2.0 * math.pi * zl) + np.log(_bessel_i_asym_sum(nu, zl))
    return float(out[0]) if scalar else out

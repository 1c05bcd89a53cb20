"""Integer-order Bessel functions, two-argument Bessel coefficients, window kernels.

Bessel values come from backward recurrence with normalization (Miller's
scheme): one downward pass yields every order 0..n_max at once, which is
exactly the access pattern of the harmonic sums, and the accuracy is uniform
through the turning-point region n ~ x that the spectra live on.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "AccuracyError",
    "ORDER_CAP",
    "bessel_j_table",
    "bessel_j",
    "bessel_j_prime",
    "GeneralizedBesselCoeffs",
    "generalized_bessel",
    "generalized_bessel_table",
    "window_kernel_T",
    "window_kernel_sinc",
]

ORDER_CAP = 1_000_000

# Threshold that triggers on-the-fly rescaling of the unnormalized recurrence.
_RESCALE_AT = 1e250
_RESCALE_BY = 1e-250


class AccuracyError(RuntimeError):
    """A series or quadrature failed to reach the requested tolerance."""

    def __init__(self, message: str, tail_estimate: float = math.nan):
        super().__init__(message)
        self.tail_estimate = tail_estimate


def _miller_pass(ax: np.ndarray, n_max: int, start: int) -> np.ndarray:
    """One normalized downward recurrence for all orders 0..n_max, ax > 0."""
    npts = ax.shape[0]
    inv = 2.0 / ax
    jp = np.zeros(npts)
    j = np.full(npts, 1e-160)
    norm = np.zeros(npts)
    out = np.zeros((npts, n_max + 1))
    for k in range(start, 0, -1):
        if k <= n_max:
            out[:, k] = j
        if k % 2 == 0:
            norm += 2.0 * j
        jm = (k * inv) * j - jp
        jp = j
        j = jm
        big = np.abs(j) > _RESCALE_AT
        if big.any():
            j[big] *= _RESCALE_BY
            jp[big] *= _RESCALE_BY
            norm[big] *= _RESCALE_BY
            out[big, :] *= _RESCALE_BY
    out[:, 0] = j
    norm += j
    out /= norm[:, None]
    return out


def bessel_j_table(x, n_max: int) -> np.ndarray:
    """J_n(x) for n = 0..n_max, shape x.shape + (n_max+1,).

    Backward recurrence started safely above max(n_max, |x|); the start order
    is raised until two passes agree, so the table is good to ~1e-13 relative
    (near zeros of J_n: absolute) for |x| up to 1e3.
    """
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    if n_max > ORDER_CAP:
        raise ValueError(f"order {n_max} exceeds cap {ORDER_CAP}")
    x = np.asarray(x, dtype=float)
    shape = x.shape
    xf = np.ravel(x)
    ax = np.abs(xf)
    zero = ax < 1e-280
    safe = np.where(zero, 1.0, ax)

    top = max(float(n_max), float(ax.max(initial=0.0)))
    start = int(math.ceil(top)) + 18 + int(2.0 * math.sqrt(top))
    out = _miller_pass(safe, n_max, start)
    for _ in range(4):
        check = _miller_pass(safe, n_max, start + 24)
        scale = np.maximum(np.abs(check).max(axis=1, keepdims=True), 1e-300)
        if np.max(np.abs(check - out) / scale) < 1e-14:
            out = check
            break
        out = check
        start += 24

    if zero.any():
        out[zero, :] = 0.0
        out[zero, 0] = 1.0
    neg = xf < 0.0
    if neg.any() and n_max >= 1:
        out[neg, 1::2] *= -1.0
    return out.reshape(shape + (n_max + 1,))


def bessel_j(n: int, x) -> np.ndarray | float:
    """J_n(x); negative orders via J_{-n}(x) = (-1)^n J_n(x)."""
    if abs(n) > ORDER_CAP:
        raise ValueError(f"order {n} exceeds cap {ORDER_CAP}")
    table = bessel_j_table(x, abs(n))
    val = table[..., abs(n)]
    if n < 0 and n % 2 != 0:
        val = -val
    if np.ndim(x) == 0:
        return float(val)
    return val


def bessel_j_prime(n: int, x) -> np.ndarray | float:
    """dJ_n/dx = (J_{n-1}(x) - J_{n+1}(x)) / 2."""
    m = abs(n)
    table = bessel_j_table(x, m + 1)
    if m == 0:
        val = -table[..., 1]
    else:
        jm1 = table[..., m - 1]
        val = 0.5 * (jm1 - table[..., m + 1])
    if n < 0 and n % 2 != 0:
        val = -val
    if np.ndim(x) == 0:
        return float(val)
    return val


@dataclass(frozen=True)
class GeneralizedBesselCoeffs:
    """A^(0), A^(1), A^(2) at one (n, rho, zeta) with truncation metadata."""

    order: int
    rho: float
    zeta: float
    A0: float
    A1: float
    A2: float
    truncation_order: int
    tail_estimate: float


def _signed_order_table(x: np.ndarray, t_max: int) -> np.ndarray:
    """J_t(x) for t = -t_max..t_max as columns t + t_max."""
    base = bessel_j_table(x, t_max)
    neg = base[..., :0:-1].copy()
    neg[..., (t_max - 1) % 2 :: 2] *= -1.0  # odd |t| columns flip sign
    return np.concatenate([neg, base], axis=-1)


def generalized_bessel(n: int, rho: float, zeta: float, tol: float = 1e-12) -> GeneralizedBesselCoeffs:
    """Two-argument Bessel coefficients A^(0,1,2)_n(rho, zeta).

    A0_n = sum_m J_m(rho) J_{n-2m}(zeta); the sum is truncated once three
    consecutive shells (|m| = const) fall below tol relative to the running
    value. A1 and A2 are the half-sum averages of neighboring A0 orders.
    """
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    m_cap = 4000
    m_lim = int(math.ceil(abs(rho))) + 15
    orders = np.arange(n - 2, n + 3)
    while True:
        t_max = int(max(abs(n) + 2 + 2 * m_lim, 1))
        if t_max > ORDER_CAP or m_lim > m_cap:
            raise AccuracyError(
                f"generalized_bessel did not converge for n={n}, rho={rho}, zeta={zeta}",
                tail_estimate=math.inf,
            )
        jr = _signed_order_table(np.array([rho]), m_lim)[0]
        jz = _signed_order_table(np.array([zeta]), t_max)[0]
        a0 = np.zeros(5)
        shells = np.zeros(m_lim + 1)
        for m in range(-m_lim, m_lim + 1):
            term = jr[m + m_lim] * jz[(orders - 2 * m) + t_max]
            a0 += term
            shells[abs(m)] = max(shells[abs(m)], float(np.max(np.abs(term))))
        scale = max(float(np.max(np.abs(a0))), 1e-300)
        small = shells < tol * scale
        # need three consecutive sub-tolerance shells at the tail
        if m_lim >= 3 and bool(small[-1] and small[-2] and small[-3]):
            tail = float(shells[-3:].sum())
            break
        m_lim += 10
    a0_n = float(a0[2])
    a1_n = 0.5 * float(a0[3] + a0[1])
    a2_n = 0.25 * float(a0[4] + 2.0 * a0[2] + a0[0])
    return GeneralizedBesselCoeffs(
        order=n,
        rho=rho,
        zeta=zeta,
        A0=a0_n,
        A1=a1_n,
        A2=a2_n,
        truncation_order=m_lim,
        tail_estimate=tail,
    )


def generalized_bessel_table(rho, zeta, n_lo: int, n_hi: int, tol: float = 1e-12):
    """Vectorized A^(0,1,2)_n over grids of (rho, zeta), orders n_lo..n_hi.

    rho and zeta must have a common broadcast shape S; returns three arrays of
    shape S + (n_hi - n_lo + 1,). The rho-sum cutoff follows the same
    turning-point rule as the scalar version, applied to max|rho|.
    """
    if n_hi < n_lo:
        raise ValueError("need n_hi >= n_lo")
    rho = np.asarray(rho, dtype=float)
    zeta = np.asarray(zeta, dtype=float)
    rho, zeta = np.broadcast_arrays(rho, zeta)
    shape = rho.shape
    rf = np.ravel(rho)
    zf = np.ravel(zeta)

    m_lim = int(math.ceil(float(np.max(np.abs(rf), initial=0.0)))) + 18
    ns = np.arange(n_lo - 2, n_hi + 3)
    t_max = int(max(abs(n_lo - 2), abs(n_hi + 2)) + 2 * m_lim)
    jr = _signed_order_table(rf, m_lim)
    jz = _signed_order_table(zf, t_max)
    a0 = np.zeros((rf.shape[0], ns.shape[0]))
    for m in range(-m_lim, m_lim + 1):
        cols = (ns - 2 * m) + t_max
        a0 += jr[:, m + m_lim, None] * jz[:, cols]
    a1 = 0.5 * (a0[:, 3:-1] + a0[:, 1:-3])
    a2 = 0.25 * (a0[:, 4:] + 2.0 * a0[:, 2:-2] + a0[:, :-4])
    a0 = a0[:, 2:-2]
    out_shape = shape + (n_hi - n_lo + 1,)
    return a0.reshape(out_shape), a1.reshape(out_shape), a2.reshape(out_shape)


def window_kernel_T(eta, n, delta_phi: float):
    """Fejer-type formation kernel (1 - cos((eta-n) dphi)) / (eta-n)^2.

    Evaluated as 2 sin^2(s dphi / 2) / s^2 to keep precision; the removable
    singularity at eta = n is handled by the series value dphi^2/2.
    """
    if delta_phi <= 0.0:
        raise ValueError("delta_phi must be positive")
    s = np.asarray(eta, dtype=float) - n
    y = s * delta_phi
    small = np.abs(y) < 1e-4
    s_safe = np.where(small, 1.0, s)
    out = 2.0 * np.sin(0.5 * y) ** 2 / s_safe**2
    series = 0.5 * delta_phi**2 * (1.0 - y * y / 12.0)
    out = np.where(small, series, out)
    if np.ndim(eta) == 0:
        return float(out)
    return out


def window_kernel_sinc(eta, n, delta_phi: float):
    """Rate kernel sin((eta-n) dphi) / (eta-n), value dphi at eta = n."""
    if delta_phi <= 0.0:
        raise ValueError("delta_phi must be positive")
    s = np.asarray(eta, dtype=float) - n
    y = s * delta_phi
    small = np.abs(y) < 1e-4
    s_safe = np.where(small, 1.0, s)
    out = np.sin(y) / s_safe
    series = delta_phi * (1.0 - y * y / 6.0)
    out = np.where(small, series, out)
    if np.ndim(eta) == 0:
        return float(out)
    return out

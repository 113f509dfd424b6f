"""Radial Coulomb Green function built from Whittaker functions.

The kernel for partial wave ``l`` at energy ``E = -Z**2 / (2 nu**2)`` is::

    g_l(r, r') = (nu / Z) Gamma(l + 1 - nu) / Gamma(2l + 2)
                 * M_{nu, l+1/2}(2 Z r_< / nu) * W_{nu, l+1/2}(2 Z r_> / nu)

and acts on reduced radial functions ``u = r R``.  ``M`` is summed from its
Kummer series in log space, ``W`` from its asymptotic expansion at large
argument and by inward integration of the Whittaker equation below that.
Both are available exponentially scaled so that products ``M(x<) W(x>)``
never overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.integrate import solve_ivp
from scipy.special import gammaln, loggamma, rgamma

from .quadrature import RadialGrid
from .radial import radial_wavefunction

__all__ = [
    "GreenEnergy",
    "PoleError",
    "RadialGreenKernel",
    "whittaker_M",
    "whittaker_W",
    "green_radial",
    "reduced_green_radial",
    "GridGreen",
    "RICHARDSON_STEPS",
]

#: Relative offsets ``nu = n (1 - eps)`` used to approach a subtracted pole.
RICHARDSON_STEPS = (1e-3, 5e-4, 2.5e-4)
POLE_TOLERANCE = 1e-8
_ASYMPTOTIC_M = 400.0


class PoleError(ArithmeticError):
    """Raised when a kernel is evaluated on an unsubtracted bound-state pole."""


# --------------------------------------------------------------------------
# Whittaker M
# --------------------------------------------------------------------------

def _kummer_log_terms(a: float, b: float, x: np.ndarray, nterms: int):
    k = np.arange(nterms)
    num = a + k
    with np.errstate(divide="ignore"):
        ratio_log = np.log(np.abs(num)) - np.log(b + k) - np.log(k + 1.0)
    sign_step = np.sign(num)
    # term_{k+1} = term_k * (a + k) x / ((b + k)(k + 1))
    with np.errstate(divide="ignore"):
        logx = np.log(x)
    cum = np.concatenate(([0.0], np.cumsum(ratio_log[:-1])))
    sgn = np.concatenate(([1.0], np.cumprod(sign_step[:-1])))
    logt = cum[None, :] + k[None, :] * logx[:, None]
    return logt, sgn


def _whittaker_M_series_scaled(kappa, mu, x):
    """``M(x) exp(-x/2)`` from the Kummer series, summed in log space."""
    a = 0.5 + mu - kappa
    b = 1.0 + 2.0 * mu
    out = np.empty_like(x)
    if x.size == 0:
        return out
    xmax = float(x.max())
    nterms = int(xmax + 12.0 * math.sqrt(xmax) + 60.0)
    if a <= 0 and float(a).is_integer():
        nterms = min(nterms, int(-a) + 1)
    logt, sgn = _kummer_log_terms(a, b, x, nterms)
    shift = logt.max(axis=1)
    s = (sgn[None, :] * np.exp(logt - shift[:, None])).sum(axis=1)
    with np.errstate(divide="ignore"):
        logpref = (mu + 0.5) * np.log(x) - x + shift
    out[:] = s * np.exp(logpref)
    return out


def _whittaker_M_asymptotic_scaled(kappa, mu, x):
    """Leading exponential branch of ``M(x) exp(-x/2)`` for large ``x``."""
    a = 0.5 + mu + kappa
    c = 0.5 - mu + kappa
    total = np.ones_like(x)
    term = np.ones_like(x)
    for k in range(200):
        term = term * (a + k) * (c + k) / ((k + 1.0) * x)
        total = total + term
        if np.all(np.abs(term) < 1e-17 * np.abs(total)):
            break
    pref = math.exp(gammaln(1.0 + 2.0 * mu)) * float(rgamma(0.5 + mu - kappa))
    return pref * np.exp(-kappa * np.log(x)) * total


def whittaker_M(kappa: float, mu: float, x, scaled: bool = False):
    """Whittaker function regular at the origin.

    Parameters
    ----------
    kappa, mu : float
        Whittaker parameters; ``2 mu + 1`` must not be a non-positive integer.
    x : float or array_like
        Positive argument.
    scaled : bool, default False
        Return ``M(x) exp(-x/2)``, which stays finite for large ``x``.

    Returns
    -------
    float or ndarray
    """
    if (2.0 * mu + 1.0) <= 0 and float(2.0 * mu + 1.0).is_integer():
        raise ValueError("2*mu + 1 must not be a non-positive integer")
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(xa < 0):
        raise ValueError("x must be non-negative")
    out = np.empty_like(xa)
    small = xa <= _ASYMPTOTIC_M
    out[small] = _whittaker_M_series_scaled(kappa, mu, xa[small])
    if np.any(~small):
        out[~small] = _whittaker_M_asymptotic_scaled(kappa, mu, xa[~small])
    if not scaled:
        with np.errstate(over="raise"):
            out = out * np.exp(0.5 * xa)
    return out if np.ndim(x) else float(out[0])


# --------------------------------------------------------------------------
# Whittaker W
# --------------------------------------------------------------------------

def _w_asymptotic_coeffs(kappa, mu, nmax=400):
    a = 0.5 + mu - kappa
    c = 0.5 - mu - kappa
    coeffs = [1.0]
    for k in range(nmax):
        coeffs.append(coeffs[-1] * (a + k) * (c + k) / (k + 1.0) * -1.0)
        if coeffs[-1] == 0.0:
            break
    return np.array(coeffs)


def _w_asymptotic(kappa, mu, x, coeffs):
    """Scaled ``W e^{x/2}`` and its log-derivative-ready derivative."""
    k = np.arange(len(coeffs))
    pw = np.power.outer(np.atleast_1d(x), -k.astype(float))
    terms = coeffs[None, :] * pw
    s = terms.sum(axis=1)
    ds = (terms * (-k)[None, :]).sum(axis=1) / x
    xk = np.exp(kappa * np.log(x))
    ws = xk * s
    # d/dx [x^kappa S(x)]
    dws = xk * (kappa / x * s + ds)
    return ws, dws


@lru_cache(maxsize=64)
def _asymptotic_start(kappa: float, mu: float) -> tuple[float, int]:
    """Smallest x (and term count) at which the asymptotic series is exact."""
    a = 0.5 + mu - kappa
    c = 0.5 - mu - kappa
    x = 30.0
    while True:
        term, best = 1.0, 1.0
        for k in range(600):
            term *= abs((a + k) * (c + k) / ((k + 1.0) * x))
            best = min(best, term)
            if term == 0.0 or term < 1e-17:
                return x, k + 2
            if term > best * 1e3:
                break
        x *= 1.5


def _w_inward(kappa, mu, x, x0, coeffs):
    """Integrate the Whittaker equation from ``x0`` down to each ``x``."""
    xs, inverse = np.unique(np.asarray(x, dtype=float), return_inverse=True)
    t_eval = np.log(xs[::-1])
    w0, dw0 = _w_asymptotic(kappa, mu, np.array([x0]), coeffs)
    ex = math.exp(-0.5 * x0)
    y0 = [w0[0] * ex, x0 * ex * (dw0[0] - 0.5 * w0[0])]
    c0 = 0.25 - mu * mu

    def rhs(t, y):
        xx = math.exp(t)
        return [y[1], y[1] - (-0.25 * xx * xx + kappa * xx + c0) * y[0]]

    sol = solve_ivp(
        rhs,
        (math.log(x0), float(t_eval[-1])),
        y0,
        method="DOP853",
        t_eval=t_eval,
        rtol=1e-13,
        atol=1e-300,
    )
    if not sol.success:
        raise ArithmeticError(f"Whittaker W integration failed: {sol.message}")
    out = (sol.y[0] * np.exp(0.5 * xs[::-1]))[::-1]
    return out[inverse.ravel()]


def whittaker_W(kappa: float, mu: float, x, scaled: bool = False):
    """Whittaker function recessive at infinity.

    Parameters
    ----------
    kappa, mu : float
        Whittaker parameters.
    x : float or array_like
        Positive argument.
    scaled : bool, default False
        Return ``W(x) exp(x/2)``.

    Returns
    -------
    float or ndarray

    Notes
    -----
    Above a parameter-dependent crossover the asymptotic series is summed to
    machine precision.  Below it the Whittaker equation is integrated inward
    in ``t = ln x`` with an 8th-order Runge-Kutta method, which is stable
    because ``W`` is the growing solution in that direction.
    """
    xa = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(xa <= 0):
        raise ValueError("x must be positive")
    x0, nterms = _asymptotic_start(float(kappa), float(mu))
    coeffs = _w_asymptotic_coeffs(kappa, mu, nterms)
    out = np.empty_like(xa)
    far = xa >= x0
    if np.any(far):
        out[far] = _w_asymptotic(kappa, mu, xa[far], coeffs)[0]
    if np.any(~far):
        out[~far] = _w_inward(kappa, mu, xa[~far], x0, coeffs)
    if not scaled:
        out = out * np.exp(-0.5 * xa)
    return out if np.ndim(x) else float(out[0])


# --------------------------------------------------------------------------
# Kernels
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class GreenEnergy:
    """Energy argument of the Coulomb Green function.

    Attributes
    ----------
    E : float
        Negative energy in units of the nuclear charge ``Z``.
    Z : float
        Charge of the Coulomb field, 1 in scaled coordinates.
    """

    E: float
    Z: float = 1.0

    def __post_init__(self):
        if not self.E < 0:
            raise ValueError("Green energy must lie below the continuum threshold")

    @classmethod
    def from_nu(cls, nu: float, Z: float = 1.0) -> "GreenEnergy":
        return cls(-(Z * Z) / (2.0 * nu * nu), Z)

    @property
    def nu(self) -> float:
        return self.Z / math.sqrt(-2.0 * self.E)


def _bound_energy(n: int, Z: float = 1.0) -> float:
    return -(Z * Z) / (2.0 * n * n)


def _reduced_orbital(n: int, l: int, r):
    r = np.asarray(r, dtype=float)
    return r * radial_wavefunction(n, l)(r)


def _check_pole(l: int, nu: float, subtracted) -> int | None:
    n = round(nu)
    if n >= l + 1 and abs(nu - n) < POLE_TOLERANCE:
        if n not in subtracted:
            raise PoleError(f"energy sits on the unsubtracted n={n}, l={l} pole")
        return n
    return None


def _prefactor(l: int, nu: float, Z: float) -> float:
    sign = float(np.sign(np.real(np.exp(loggamma(l + 1.0 - nu + 0j)))))
    mag = math.exp(float(np.real(loggamma(l + 1.0 - nu + 0j))) - gammaln(2 * l + 2))
    return sign * mag * nu / Z


def green_radial(l: int, energy: GreenEnergy, r, rp):
    """Closed-form radial Coulomb Green function.

    Parameters
    ----------
    l : int
        Partial wave.
    energy : GreenEnergy
    r, rp : float or array_like
        Radii; broadcast against each other.

    Returns
    -------
    float or ndarray
        Kernel acting on reduced radial functions ``u = r R``.
    """
    nu = energy.nu
    _check_pole(l, nu, ())
    return _green_closed(l, nu, energy.Z, r, rp)


def _green_closed(l, nu, Z, r, rp):
    r, rp = np.broadcast_arrays(np.asarray(r, float), np.asarray(rp, float))
    lo = np.minimum(r, rp).ravel()
    hi = np.maximum(r, rp).ravel()
    mu = l + 0.5
    m = whittaker_M(nu, mu, 2.0 * Z * lo / nu, scaled=True)
    w = whittaker_W(nu, mu, 2.0 * Z * hi / nu, scaled=True)
    val = _prefactor(l, nu, Z) * m * w * np.exp(Z * (lo - hi) / nu)
    val = val.reshape(r.shape)
    return val if val.ndim else float(val)


@dataclass(frozen=True)
class RadialGreenKernel:
    """Partial-wave Green function with occupied states projected out.

    Attributes
    ----------
    l : int
        Partial wave.
    energy : GreenEnergy
    subtract : tuple of int
        Principal quantum numbers ``n`` of the states ``(n, l)`` removed from
        the spectral sum.
    """

    l: int
    energy: GreenEnergy
    subtract: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "subtract", tuple(sorted(set(self.subtract))))
        for n in self.subtract:
            if n < self.l + 1:
                raise ValueError(f"no bound state n={n} in partial wave l={self.l}")


def richardson(values, steps=RICHARDSON_STEPS):
    """Extrapolate samples ``f(h)`` at halving steps to ``h = 0``."""
    table = [np.asarray(v, dtype=float) for v in values]
    ratio = steps[0] / steps[1]
    order = 1
    while len(table) > 1:
        fac = ratio**order
        table = [(fac * table[i + 1] - table[i]) / (fac - 1.0) for i in range(len(table) - 1)]
        order += 1
    return table[0]


def _pole_samples(kernel: RadialGreenKernel):
    """Energies at which the reduced kernel is sampled, plus the pole index."""
    nu = kernel.energy.nu
    n = _check_pole(kernel.l, nu, kernel.subtract)
    if n is None:
        return [nu], None
    return [n * (1.0 - eps) for eps in RICHARDSON_STEPS], n


def reduced_green_radial(kernel: RadialGreenKernel, r, rp):
    """Pauli-reduced radial Green function.

    The explicit projector terms ``u_n(r) u_n(r') / (E_n - E)`` are removed
    for every subtracted state.  On a subtracted pole the limit is taken by
    Richardson extrapolation from energies just below it.
    """
    Z = kernel.energy.Z
    nus, pole = _pole_samples(kernel)
    vals = []
    for nu in nus:
        E = -(Z * Z) / (2.0 * nu * nu)
        g = _green_closed(kernel.l, nu, Z, r, rp)
        for n in kernel.subtract:
            un = _reduced_orbital(n, kernel.l, Z * np.asarray(r, float)) * math.sqrt(Z)
            unp = _reduced_orbital(n, kernel.l, Z * np.asarray(rp, float)) * math.sqrt(Z)
            g = g - un * unp / (_bound_energy(n, Z) - E)
        vals.append(g)
    out = vals[0] if pole is None else richardson(vals)
    return out if np.ndim(out) else float(out)


# --------------------------------------------------------------------------
# Grid representation
# --------------------------------------------------------------------------

class GridGreen:
    """Reduced Green operators applied to functions sampled on a RadialGrid.

    The kink at ``r = r'`` is handled exactly by writing
    ``(G h)(r) = C [W(r) int_0^r M h + M(r) int_r^inf W h]`` and evaluating the
    running integrals panel by panel with spectral integration matrices.

    Parameters
    ----------
    grid : RadialGrid
    """

    def __init__(self, grid: RadialGrid):
        self.grid = grid
        self._cache: dict = {}

    def _basis(self, l: int, nu: float):
        key = (l, nu)
        hit = self._cache.get(key)
        if hit is None:
            g = self.grid
            x = 2.0 * g.panel_r / nu
            xa = 2.0 * g.edges / nu
            mu = l + 0.5
            m = whittaker_M(nu, mu, x.ravel(), scaled=True).reshape(x.shape)
            w = whittaker_W(nu, mu, x.ravel(), scaled=True).reshape(x.shape)
            hit = (x, xa, m, w, _prefactor(l, nu, 1.0))
            if len(self._cache) > 512:
                self._cache.clear()
            self._cache[key] = hit
        return hit

    def _apply_closed(self, l: int, nu: float, h: np.ndarray) -> np.ndarray:
        g = self.grid
        x, xa, m, w, pref = self._basis(l, nu)
        H = np.asarray(h, dtype=float).reshape(x.shape)
        P = g.npanels
        left, right = xa[:-1, None], xa[1:, None]

        # forward: int_0^r h M e^{(x'-x)/2}
        fm = H * m * np.exp(0.5 * (x - left))
        loc_f = g.local_cumulative(fm)
        tot_f = (g.panel_w * fm).sum(axis=1)
        # backward: int_r^inf h W e^{(x-x')/2}
        fw = H * w * np.exp(0.5 * (right - x))
        loc_b = g.local_cumulative(fw)
        tot_b = (g.panel_w * fw).sum(axis=1)

        carry_f = np.zeros(P)
        c = 0.0
        for p in range(P):
            carry_f[p] = c
            c = math.exp(-0.5 * (xa[p + 1] - xa[p])) * (c + tot_f[p])
        carry_b = np.zeros(P)
        c = 0.0
        for p in range(P - 1, -1, -1):
            carry_b[p] = c
            c = math.exp(-0.5 * (xa[p + 1] - xa[p])) * (c + tot_b[p])

        fwd = np.exp(-0.5 * (x - left)) * (carry_f[:, None] + loc_f)
        bwd = np.exp(-0.5 * (right - x)) * (carry_b[:, None] + (tot_b[:, None] - loc_b))
        return (pref * (w * fwd + m * bwd)).ravel()

    def apply(self, kernel: RadialGreenKernel, h) -> np.ndarray:
        """``(G~ h)(r_i)`` at every grid node for a unit-charge kernel."""
        if kernel.energy.Z != 1.0:
            raise ValueError("grid kernels are built in unit-charge coordinates")
        h = np.asarray(h, dtype=float)
        r = self.grid.r
        nus, pole = _pole_samples(kernel)
        subs = [(n, _reduced_orbital(n, kernel.l, r)) for n in kernel.subtract]
        proj = [(n, u, self.grid.integrate(u * h)) for n, u in subs]
        vals = []
        for nu in nus:
            E = -0.5 / (nu * nu)
            out = self._apply_closed(kernel.l, nu, h)
            for n, u, ov in proj:
                out = out - u * ov / (_bound_energy(n) - E)
            vals.append(out)
        return vals[0] if pole is None else richardson(vals)

    def bilinear(self, kernel: RadialGreenKernel, f, h) -> float:
        """``int int f(r) G~(r, r') h(r') dr dr'``."""
        return self.grid.integrate(np.asarray(f, dtype=float) * self.apply(kernel, h))

"""Closed-form densities and form factors as printed, transcribed symbol for symbol."""

import sympy as sp

u = sp.Symbol("u", positive=True)
theta = sp.Symbol("theta", real=True)
zs = sp.Symbol("Zs", positive=True)
q = sp.Symbol("q", positive=True)
E = sp.exp

# printed closed forms, in u = Zs r
PRINTED_DENSITY = {
    2: 2 * zs**3 / sp.pi * E(-2 * u),
    6: 2 * zs**3 * E(-2 * u) / sp.pi
    * (1 + E(u) / 8 * (1 - u + sp.Rational(11, 32) * u**2) + E(u) * u**2 * sp.cos(2 * theta) / 256),
    8: 2 * zs**3 * E(-2 * u) / sp.pi
    * (1 + E(u) / 8 * (1 - u + sp.Rational(13, 32) * u**2) - E(u) * u**2 * sp.cos(2 * theta) / 256),
    10: 2 * zs**3 * E(-2 * u) / sp.pi * (1 + E(u) / 8 * (1 - u + u**2 / 2)),
    54: 2 * E(-2 * u) * zs**3 / sp.pi
    + E(-u) * (u**2 - 2 * u + 2) * zs**3 / (8 * sp.pi)
    + 2 * E(-2 * u / 3) * (4 * u**4 - 48 * u**3 + 216 * u**2 - 324 * u + 243) * zs**3 / (6561 * sp.pi)
    + E(-u / 2) * (19 * u**6 - 720 * u**5 + 10080 * u**4 - 65280 * u**3 + 207360 * u**2 - 276480 * u + 184320)
    * zs**3 / (5898240 * sp.pi)
    + 2 * E(-2 * u / 5) * zs**3 / (10986328125 * sp.pi)
    * (12 * u**8 - 1120 * u**7 + 41200 * u**6 - 765000 * u**5 + 7668750 * u**4 - 41250000 * u**3
       + 112500000 * u**2 - 140625000 * u + 87890625),
}

_DEN = (q**2 + zs**2) ** 4 * (q**2 + 4 * zs**2) ** 2
PRINTED_FORM_FACTOR = {
    2: 32 * zs**4 / (q**2 + 4 * zs**2) ** 2,
    6: 6 * zs**4 * (6 * q**8 + 25 * q**6 * zs**2 + 30 * q**4 * zs**4 + 16 * zs**8) / _DEN,
    8: 2 * zs**4 * (18 * q**8 + 76 * q**6 * zs**2 + 99 * q**4 * zs**4 + 24 * q**2 * zs**6 + 64 * zs**8) / _DEN,
    10: 4 * zs**4 * (9 * q**8 + 37 * q**6 * zs**2 + 42 * q**4 * zs**4 + 40 * zs**8) / _DEN,
}

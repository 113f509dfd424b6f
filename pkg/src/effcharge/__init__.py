"""Atoms and ions in a hydrogen-like basis with a single effective charge.

The zeroth order is analytic: one charge ``Zs`` scales every orbital and
``E0 = -A Zs^2``.  Second-order corrections use the reduced Coulomb Green
function; densities and form factors are closed-form exponential polynomials.
"""

__version__ = "0.1.0"

from .config import Configuration, Orbital, configuration_from_string, select_ground_configuration
from .scf0 import ZerothOrderSolution, solve_zeroth_order
from .pt2 import degenerate_he_excited, delta_E2_multi, delta_E2_single, second_order
from .observables import (
    density_first_order,
    density_zeroth,
    form_factor_numeric,
    form_factor_spherical,
    s_to_q,
)
from .refdata import compare, load_reference

__all__ = [
    "__version__",
    "Configuration",
    "Orbital",
    "ZerothOrderSolution",
    "configuration_from_string",
    "select_ground_configuration",
    "solve_zeroth_order",
    "delta_E2_single",
    "delta_E2_multi",
    "second_order",
    "degenerate_he_excited",
    "density_zeroth",
    "density_first_order",
    "form_factor_spherical",
    "form_factor_numeric",
    "s_to_q",
    "compare",
    "load_reference",
]

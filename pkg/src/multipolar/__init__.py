"""Multipole distributions over simplicial regions: energies, bound charges,
forces and flux balances, with exact polynomial quadrature."""

from .bound import (bound_dipole, bound_quadrupole, edge_line_density, evaluate_dipole_bound,
                    evaluate_quad_bound)
from .fields import PolyScalarField, PolyVectorField, compose_flow, poly, vector
from .flux import (BalanceSystem, Hyperflux, balance_residual, boundary_flux, energy_rate_split,
                   hyperflux_evaluate, moving_dipole_hyperflux, variational_power)
from .geometry import SimplicialRegion, Tet, edge_conormals, face, signed_volume, \
    tangential_decompose
from .integrate import integrate_edge, integrate_face, integrate_tet
from .mechanics import energy_rate_check, force_decompose_dipole, force_decompose_quadrupole, power
from .multipole import (DensityPatch, MultipoleDistribution, PointAtom, evaluate,
                        pushforward_energy, restrict, symmetrize)

__version__ = "0.1.0"

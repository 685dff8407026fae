"""Numerical laboratory for three-point configurations of planar measures.

Submodules
----------
measure_core    discrete measures: Cantor generators, products, thickenings,
                energies, ball-mass ratios, smoothed potentials
circle_kernel   circle-measure Fourier analysis: J0, sigma-hat, the two-circle
                frequency map and kernel transform, mollified arc measures
bilinear        the two-circle bilinear operator, Sobolev norms, boundedness
                experiments
trilinear       triple-annulus masses, the mollified trilinear form,
                configuration histograms, distance densities
discrete_geom   exact congruent-triangle counting and distance statistics
sharpness_lab   product-Cantor scaling experiments (sharpness of the 7/4
                threshold)
cli             batch experiment runner (also the `triconfig` console script)
"""

__version__ = "0.1.0"

from .circle_kernel import Mollifier, TriangleSpec, gamma_ab, k_hat, sigma_eps, sigma_hat, theta_ab, u_map
from .discrete_geom import ExponentFit, GeneratorSpec, PointSet, fit_loglog, generate
from .errors import (
    AdaptabilityError,
    ConfigError,
    DegenerateTriangleError,
    NumericError,
    ResourceCapError,
)
from .measure_core import (
    BallQuery,
    CantorSpec,
    DiscreteMeasure,
    GridFunction,
    cantor_measure,
    energy_integral,
    frostman_ratio,
    is_adaptable,
    make_grid,
    measure_from_points,
    product_measure,
    riesz_potential,
    shifted_union,
    thicken,
)
from .sharpness_lab import MattilaSpec, build_mattila, distance_blowup_fit, triple_scaling_fit
from .trilinear import AnnulusTriple, ConfigHistogram, config_density, triple_annulus_mass, trilinear_form

__all__ = [name for name in dir() if not name.startswith("_")]

"""Curvature descriptors of embedded submanifolds from PCA integral invariants.

The package is organised bottom-up:

``sphere_integrals``
    closed-form monomial integrals over spheres, balls and half-balls.
``models``
    analytic hypersurfaces / submanifolds with exact curvature, plus point clouds.
``domains``
    numerical volume, barycenter and covariance of ball-induced domains.
``asymptotics``
    truncated small-scale expansions of those invariants.
``descriptors``
    inversion of the expansions into curvature estimates at a scale.
``submanifold``
    second fundamental form and Riemann tensor for higher codimension.
``estimators``
    scikit-learn compatible wrapper for point-cloud feature extraction.
"""

from intcurv.sphere_integrals import (
    ball_volume,
    half_ball_first_moment,
    monomial_ball_integral,
    monomial_sphere_integral,
    sphere_area,
)
from intcurv.models import (
    CurvatureOracle,
    GraphModel,
    PointCloud,
    SphereModel,
    SubmanifoldGraph,
    read_cloud_csv,
    write_cloud_csv,
)
from intcurv.domains import (
    IntegralInvariants,
    QuadratureConfig,
    boundary_radius,
    cloud_patch_invariants,
    component_invariants,
    patch_invariants,
    shell_invariants,
)
from intcurv.asymptotics import (
    AsymptoticInvariants,
    component_asymptotics,
    patch_asymptotics,
    shell_asymptotics,
)
from intcurv.descriptors import (
    CurvatureEstimate,
    CurvatureSingularityError,
    EigenDecomposition,
    component_limit_ratio,
    curvature_from_component,
    curvature_from_patch,
    eig_sym,
    mean_curvature_from_volume,
    patch_limit_ratios,
)
from intcurv.submanifold import (
    AdaptedFrame,
    SubmanifoldCurvature,
    assemble_second_fundamental_form,
    estimate_frame,
    project_to_hypersurface,
    riemann_from_II,
    submanifold_curvature,
)

__version__ = "0.1.0"

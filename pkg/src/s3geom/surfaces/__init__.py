"""CMC surface constructions and finite-difference estimators."""

from .constructions import (
    MINUS_J,
    PLUS_J,
    CmcTorusLayout,
    HorizontalCurve,
    HorizontalCurveSample,
    RuledSheet,
    SelfIntersectionReport,
    SingularCurveError,
    chain_angle,
    clifford_patch,
    cmc_torus_patch,
    cut_function,
    eps_mu,
    great_circle_curve,
    layout_angles,
    reverse_cut,
    ruled_jacobi_field,
    ruled_patch,
    ruled_points,
    self_intersection_candidates,
    sheet_jacobi_fd,
    sheet_normal,
    sphere_coordinates,
    sphere_patch,
    sphere_pole,
    sphere_radial_graph,
    wobbly_curve,
)
from .patch import (
    ConditioningWarning,
    CurvatureField,
    OrthogonalityResult,
    ParamPatch,
    SingularCurve,
    SingularPointError,
    SurfaceFrame,
    area_estimate,
    characteristic_residual,
    cross4,
    frame_at_patch,
    mean_curvature_estimate,
    mean_curvature_field,
    orthogonality_check,
    riemannian_area,
)

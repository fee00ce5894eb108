"""Generalized contact and complex structures on coordinate charts.

Symbolic coefficients, pointwise numerical verification: every check samples
a chart and reports its worst residual with the point where it occurred.
"""
from .bigtangent import (
    COURANT,
    Bracket,
    BundleEndomorphism,
    GeneralizedSection,
    NotClosedError,
    adjoint,
    bfield,
    bfield_transform,
    courant_bracket,
    derived_courant_bracket,
    pairing,
    tensor_endo,
)
from .calculus import KForm, MetricTensor, VectorField, exterior_derivative, interior_product, lie_bracket, lie_derivative, wedge
from .expr import Chart, ParseError, SamplePlan, ScalarField, UnknownVariableError, differentiate, evaluate, parse, to_string
from .products import (
    check_theorem1,
    commutator_closed_form,
    lift_to_product,
    product_chart,
    product_gacx,
    product_metric,
    theorem41_pipeline,
    warp_transform,
)
from .structures import (
    CheckReport,
    GacmsRecord,
    GacsRecord,
    GacxRecord,
    check_closed,
    check_co_kahler,
    check_gacms,
    check_gacs,
    check_gacx,
    check_generalized_kahler,
    check_generalized_metric,
    classify_gacs,
    lift_almost_contact,
    lift_complex,
    lift_contact,
    lift_symplectic,
)

__version__ = "0.1.0"

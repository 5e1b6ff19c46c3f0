"""Sign-based steepest descent optimizers, sign-flow integration and property checks."""

from ._signflow import (
    Objective,
    adaptive_eta,
    bench,
    cc_tie_step,
    classify_regime,
    dual_norm,
    face_aware_eta,
    integrate_flow,
    make_problem,
    manifold_example,
    run,
    separable_quadratic,
    signgd_step,
    sliding_xi,
    steepest_direction,
    verify,
)

__all__ = [
    "Objective",
    "adaptive_eta",
    "bench",
    "cc_tie_step",
    "classify_regime",
    "dual_norm",
    "face_aware_eta",
    "integrate_flow",
    "make_problem",
    "manifold_example",
    "run",
    "separable_quadratic",
    "signgd_step",
    "sliding_xi",
    "steepest_direction",
    "verify",
]

"""polydyn: polynomial functors, lenses, and mode-dependent dynamics."""

from polydyn.core import (
    FinSet,
    SetFn,
    FinPoly,
    Lens,
    make_poly,
    constant,
    linear,
    representable,
    monomial,
    ZERO,
    ONE,
    Y,
    UNIT_SET,
    eval_poly,
    canonical_form,
    is_monomial,
    lens_id,
    lens_compose,
    is_vertical,
    is_cartesian,
    is_epi,
    pullback_set,
    coequalizer_set,
    poly_to_json,
    poly_from_json,
    lens_to_json,
    lens_from_json,
    canonical_json,
)

__version__ = "0.1.0"

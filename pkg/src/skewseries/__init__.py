"""Skew power series rings R[[t; sigma, delta]] over finite coefficient rings."""

from .ringcore import CoeffRing, RingError, RingMap, Submodule, modular
from .skewalg import (SkewData, SkewError, SkewSeries, check_sigma_nilpotent, convert_form,
                      skew_mul, validate_skew)
from .instances import BUILTINS, Instance, InstanceSpec, builtin_instance, load_instance
from .filtration import filtration_length, graded_coeff, i_level, ideal_table
from .smodules import SModule, boundary_maps, make_smodule, verify_exactness
from .dualaction import act_series, act_t, dual_basis, dual_element
from .homology import ext, grade, verify_dimension_shift
from .laurent import LaurentSeries, laurent_module
from .suites import SUITES, run_suite

__version__ = "0.1.0"

__all__ = [
    "BUILTINS", "CoeffRing", "Instance", "InstanceSpec", "LaurentSeries", "RingError", "RingMap", "SModule",
    "SUITES", "SkewData", "SkewError", "SkewSeries", "Submodule", "act_series", "act_t", "boundary_maps",
    "builtin_instance", "check_sigma_nilpotent", "convert_form", "dual_basis", "dual_element", "ext",
    "filtration_length", "grade", "graded_coeff", "i_level", "ideal_table", "laurent_module", "load_instance",
    "make_smodule", "modular", "run_suite", "skew_mul", "validate_skew", "verify_dimension_shift",
    "verify_exactness",
]

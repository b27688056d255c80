"""multfun: multiplicative functions at experimental scale.

Sieve bounded multiplicative functions, measure their structure
(Besicovitch seminorms, pretentious distance, mean values) and randomness
(Gowers uniformity norms), decompose level sets into a rational superset
plus a relatively uniform part, and verify divisibility and polynomial
multiple recurrence averages on exactly computable systems.
"""

from .arith import MINUS_ONE, ONE, ZERO, RootOfUnity, Zero
from .characters import (
    DirichletCharacter,
    characters_mod,
    indicator_decomposition,
    induce,
    principal_character,
)
from .errors import InputError, MultfunError, ResourceError, SearchError
from .ergodic import (
    FiniteSystem,
    PolynomialFamily,
    RecurrenceReport,
    TorusRotation,
    convergence_average,
    intersection_measure,
    recurrence_average,
)
from .levelsets import (
    ConcentrationAnalysis,
    DivisibilityReport,
    LevelSet,
    StructurePair,
    concentration_analysis,
    density_profile,
    divisibility_report,
    find_k_and_character,
    level_set,
    random_relative_subset,
    sp_set,
    structure_pair,
    zero_repair,
)
from .mf_core import (
    BUILTIN_NAMES,
    MultiplicativeFunction,
    PrimePowerSpec,
    SieveTable,
    builtin,
    eval_at,
    sieve_range,
)
from .pretentious import (
    ap_mean,
    aperiodicity_test,
    euler_product_mean,
    halasz_classify,
    pretentious_distance,
    rap_test,
    unit_function,
)
from .seminorms import (
    GowersReport,
    besicovitch_profile,
    besicovitch_seminorm,
    fourier_coefficient,
    gowers_direct,
    gowers_fast,
    periodic_approximant,
    spectrum_scan,
    uniformity_profile,
)

__version__ = "0.1.0"

"""shiftlab: covers, product measures, and orbit statistics (hitting,
return, and cover times) on the countable full shift with metrics d1/d2."""

from .errors import BudgetError, TrialOverflowError
from .metrics import (ATOL, MetricParams, Point, coarsest_valid_scale,
                      cylinder_diameter, depth_for_scale,
                      product_cell_diameter, rho1, rho2, shift_distance,
                      space_diameter)
from .natcover import (NatCell, NatCover, build_cover, build_cover_d1,
                       build_cover_d2, greedy_min_cover)
from .measures import (Geometric, MassBracket, PowerLaw, PsiReport,
                       cylinder_measure, gibbs_envelope_check,
                       gibbs_envelope_report, min_cell_measure, mmin_bracket,
                       natcell_mass, parse_model, product_cell_measure,
                       psi_mixing_gap, sample_coordinate, sample_within_cell)
from .productcover import (DEFAULT_CELL_BUDGET, ProductCover, SandwichReport,
                           build_product_cover, verify_sandwich)
from .dynamics import (CoverBracket, Estimate, OrbitStream, PatternAutomaton,
                       TailLawRow, cover_bracket, expected_cover_mc,
                       expected_hitting_exact, expected_hitting_mc,
                       hitting_tail_law, kac_return_mc, worst_cell,
                       worst_hitting_exact)
from .bounds import (DimRow, EnvelopePair, bernoulli_example_bounds,
                     coupon_envelope, dim_diagnostic, harmonic,
                     main_envelope_d1, main_envelope_d2,
                     normalized_cover_ratio)

__version__ = "1.0.0"

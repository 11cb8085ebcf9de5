"""Clearing payments in static and multi-period financial liability networks."""

from .dynamic import (clear_dynamic_matrix, clear_dynamic_matrix_sequential, clear_dynamic_prorata,
                      clear_dynamic_prorata_sequential, scenario_compare)
from .network import (ClearingReport, DynamicInstance, InadmissibleScheduleError,
                      InvalidInstanceError, PaymentSchedule, StaticInstance, cumulative_inflow,
                      evolve_nominal, evolve_worth, loss, relative_liabilities, stage_weights)
from .static import (SolverError, certify_clearing, clear_matrix, clear_prorata_fda,
                     clear_prorata_lp)
from .validation import check_absolute_priority, check_admissible, check_payment_acyclicity

__version__ = "0.1.0"

__all__ = [
    "ClearingReport", "DynamicInstance", "InadmissibleScheduleError", "InvalidInstanceError",
    "PaymentSchedule", "SolverError", "StaticInstance",
    "certify_clearing", "check_absolute_priority", "check_admissible", "check_payment_acyclicity",
    "clear_dynamic_matrix", "clear_dynamic_matrix_sequential", "clear_dynamic_prorata",
    "clear_dynamic_prorata_sequential", "clear_matrix", "clear_prorata_fda", "clear_prorata_lp",
    "cumulative_inflow", "evolve_nominal", "evolve_worth", "loss", "relative_liabilities",
    "scenario_compare", "stage_weights",
]

"""Employee rostering: exact MILP formulation, embedded LP/branch-and-bound
solving, scatter-search refinement, and planning extensions."""

from .model import (
    ALL_DAY, BLOCKS_PER_DAY, BLOCKS_PER_WEEK, DAYS_PER_WEEK, EIGHT_HOUR,
    NO_PREF, REST_LABEL, SLOT_LABELS, ObjectiveBreakdown, ObjectiveWeights,
    Roster, RosterInstance,
)
from .feasibility import check_feasibility, validate_instance
from .objective import EvaluationContext, evaluate_objective
from .generator import GeneratorConfig, default_targets, generate_instance, toy_instance
from .milp import build_milp, encode_roster, extract_roster
from .lpsolve import solve_lp
from .bnb import BnbConfig, relax_and_fix, solve_bnb
from .scatter import RefSet, ScatterLimits, diversify, run_scatter_search
from .hybrid import (
    HybridConfig, InfeasibleInstanceError, OptimizationResult, ProgressEvent,
    compute_gap, optimize,
)
from .extensions import (
    ChangeRequest, PatternResult, PeriodPlan, WorkPattern, adjust_targets,
    optimize_with_patterns, plan_rolling_horizon, reoptimize_event,
)
from .io import (
    export_roster_csv, import_roster_csv, load_instance, load_pattern,
    save_instance, save_pattern,
)

__version__ = "0.1.0"

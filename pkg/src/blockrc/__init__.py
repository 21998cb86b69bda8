"""Constructive reservoir computing with block increments.

Reservoirs are grown block by block under a supervisory acceptance test
that guarantees the training residual contracts, with a point-incremental
variant and a fixed-size randomized baseline for comparison. Readouts are
linear and can be adapted online by a projection rule with excitation
monitors. A benchmark harness reproduces chaotic time-series prediction,
nonlinear plant identification, and industrial soft-sensing studies.
"""

from .builder import (
    ConvergenceLog,
    TrainConfig,
    audit_construction,
    configure_block,
    early_stop,
    refit_readout,
    train_brscn,
    train_esn,
    train_rscn,
    xi_scores,
)
from .data import (
    Dataset,
    MGConfig,
    add_noise_validation,
    build_mg_task,
    debutanizer_features,
    gen_mackey_glass,
    gen_plant,
    load_csv,
    save_csv,
)
from .errors import (
    ConstructionStalled,
    DataError,
    DegenerateTargetError,
    InvalidArgumentError,
    NumericFailure,
)
from .numeric import (
    least_squares_readout,
    max_singular_value,
    nrmse,
    seeded_uniform,
    spectral_radius,
    substream,
)
from .online import (
    OnlineState,
    gain_condition_check,
    pe_window_check,
    projection_step,
    run_online,
)
from .bench import (
    GridResult,
    TaskSpec,
    TrialReport,
    emit_grid,
    emit_report,
    grid_search,
    mg_task,
    plant_task,
    run_trials,
)
from .reservoir import (
    BlockModel,
    StateMatrix,
    SubReservoir,
    evaluate,
    harvest_states,
    load_model,
    predict,
    sample_subreservoir,
    save_model,
    scale_for_esp,
    step_block,
)

__version__ = "0.1.0"

"""Test-error bounds for Gibbs posteriors from tempered Langevin chains.

The pipeline: run one Langevin chain per inverse temperature on a ladder
starting at 0, estimate posterior mean losses by ergodic running means,
assemble the thermodynamic-integration functional, convert it to a 0-1
test-error bound through the partial inverse of the binary relative
entropy, and calibrate the scale on a random-label run. An exact
finite-hypothesis oracle validates every formula.
"""

from .bounds import (
    DEFAULT_DELTA,
    DEFAULT_LADDER,
    BoundReport,
    LadderEstimates,
    NotApplicable,
    StabilityInputs,
    TemperatureLadder,
    TheoryParams,
    assemble_report,
    bound_01,
    gamma_nu,
    kl_budget,
    kl_doubling_diagnostic,
    posterior_mean_gamma,
    stability_penalty,
    subgaussian_bound,
    ula_divergence,
)
from .calibration import CalibrationResult, Infeasible, calibrate
from .data import (
    BinarizationRule,
    LabeledDataset,
    RawDataset,
    binarize,
    load_cifar_binary,
    load_idx,
    make_synthetic,
    randomize_labels,
)
from .ergodic import RunningMean, StopConfig, should_stop
from .exact_gibbs import (
    FiniteHypothesisSpace,
    exact_gamma,
    free_energy_identity_check,
    heat_capacity,
    log_partition_function,
    partition_function,
    posterior_mean_loss,
)
from .kernels import BACKEND as KERNEL_BACKEND
from .klscalar import binary_kl, binary_kl_inverse
from .model import Architecture, LossConfig, init_params, loss_and_gradient, zero_one_error
from .sampler import ChainDiverged, ChainRecord, SamplerConfig, lmc_step, run_chain

__version__ = "0.1.0"

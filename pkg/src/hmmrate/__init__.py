"""Entropy rate, filter contraction and analyticity diagnostics for hidden
Markov chains with continuous-output memoryless channels."""

__version__ = "0.1.0"

from .model import (  # noqa: E402
    ChannelKind,
    ChannelModel,
    ComplexChannelModel,
    ComplexMarkovModel,
    ComplexSimplexVector,
    MarkovModel,
    ModelError,
    SimplexVector,
    SingularEvaluation,
    Trajectory,
    density,
    density_complex,
    sample_trajectory,
    stationary_vector,
)
from .hilbert import (  # noqa: E402
    birkhoff_coefficient,
    complex_hilbert_distance,
    contraction_ratio_sample,
    hilbert_distance,
    induced_map,
)
from .filtering import (  # noqa: E402
    complex_orbit_probe,
    filter_block,
    filter_step,
    forgetting_curve,
    observation_matrix,
    reblock,
    run_filter,
)
from .entropy import (  # noqa: E402
    conditional_entropy_given_input,
    convergence_scan,
    estimate_entropy_rate,
)
from .analyticity import (  # noqa: E402
    check_analytic_ball,
    check_comparability,
    check_dominance,
    check_integrability,
    check_real_domination,
    derivative_scan,
    nonanalyticity_scan,
    winding_probe,
)

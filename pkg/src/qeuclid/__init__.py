"""Numerics for the deformed (quantum) Euclidean plane and its classical
limit: Weyl quantization on uniform grids, operator Lp norms from singular
values, Mittag-Leffler propagators for Caputo-fractional evolution equations,
multiplier bounds, and Picard solvers for spectral nonlinearities."""

from .errors import (AccuracyError, AssumptionError, CalibrationError,
                     ConfigurationError, DivergenceError, DomainError,
                     EmptyWindowError, LowConfidenceWarning, NumericError,
                     QeuclidError, SectorError, ShapeError)
from .grids import (GridSpec, SymbolGrid, ThetaForm, classical_fourier,
                    ordinary_convolution, sample_symbol, twisted_convolution)
from .lebesgue import (SingularProfile, abs_power, lp_norm, mu,
                       singular_profile, weak_lp_norm)
from .mittag import (MittagParams, default_seam_radius, ml_bound_scan,
                     ml_eval, ml_eval_many)
from .multipliers import (MtValue, MultiplierSymbol, WeakQuasinorm,
                          apply_multiplier, constant_multiplier,
                          coordinate_multiplier, gaussian_multiplier,
                          hormander_bound, identity_multiplier,
                          laplacian_multiplier, m_t, power_multiplier,
                          unit_ball_volume, weak_symbol_quasinorm)
from .evolution import (DecayReport, EvolutionProblem, Trajectory,
                        caputo_l1_oracle, decay_sweep, solve, solve_heat,
                        solve_schrodinger, solve_wave, volterra_residual)
from .nonlinear import (PicardProblem, PicardResult, ProbeResult,
                        SmallDataResult, TimeProfile, constant_profile,
                        exp_decay_profile, picard_heat, picard_wave,
                        power_decay_profile, small_data_check,
                        t_star_estimate, uniqueness_probe)
from .weyl import (NcOperator, RepSpace, calibrate_trace_constant,
                   dequantize, dump_operator, fourier_coefficient,
                   load_operator, quantize, weyl_unitary)

__version__ = "0.1.0"

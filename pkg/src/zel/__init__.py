"""Extreme values of log zeta and its iterated integrals.

Numerical companion machinery: branch-tracked log zeta and its iterated
integrals eta_m, prime Dirichlet polynomials with streaming batch
kernels, moment computations by three routes (exact multiplicative sum,
saddle-radius contour integral, empirical grid average), Bessel-product
asymptotics, and exceedance-measure tail predictions.
"""

from .special_fn import bessel_i0, log_bessel_i0, g_constant, a_constant, kappa
from .prime_poly import (PolySpec, PrimeTable, TGrid, cached_table,
                         lambda_sum, approximation_defect, max_spacing,
                         poly_eval, poly_eval_batch, sieve, von_mangoldt_table)
from .zeta_core import (BranchedLog, NearZeroOnPath, QuadratureConfig,
                        ZetaAccuracyWarning, ZetaPoleError, b_constant,
                        c_constant, eta_tilde, log_zeta_branched, s_m, zeta)
from .moments import (MomentResult, MultiplicativeWeights, bessel_product,
                      contour_moment, empirical_moment, exact_moment,
                      exp_moment_trimmed)
from .tails import (AdvisoryConstants, ExceedanceCurve, FAMILIES,
                    TailPrediction, default_trim_w, measure_exceedance_eta,
                    measure_exceedance_poly, measure_exceedance_poly_multi,
                    predict_tail, solve_saddle_critical, solve_saddle_strip,
                    trim_set_A)

__version__ = "0.1.0"

__all__ = [
    "bessel_i0", "log_bessel_i0", "g_constant", "a_constant", "kappa",
    "PolySpec", "PrimeTable", "TGrid", "cached_table", "lambda_sum",
    "approximation_defect", "max_spacing", "poly_eval", "poly_eval_batch",
    "sieve", "von_mangoldt_table",
    "BranchedLog", "NearZeroOnPath", "QuadratureConfig",
    "ZetaAccuracyWarning", "ZetaPoleError", "b_constant", "c_constant",
    "eta_tilde", "log_zeta_branched", "s_m", "zeta",
    "MomentResult", "MultiplicativeWeights", "bessel_product",
    "contour_moment", "empirical_moment", "exact_moment",
    "exp_moment_trimmed",
    "AdvisoryConstants", "ExceedanceCurve", "FAMILIES", "TailPrediction",
    "default_trim_w", "measure_exceedance_eta", "measure_exceedance_poly",
    "measure_exceedance_poly_multi", "predict_tail", "solve_saddle_critical",
    "solve_saddle_strip", "trim_set_A",
]

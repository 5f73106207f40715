"""Spline-interpolated LUT predistortion (SPH, SMP) with a memory-polynomial
reference, indirect learning, simulated PAs and transmitter metrics."""
from .complexity import (ComplexityReport, NotCalibratedError, complexity_formula,
                         complexity_published, flops)
from .learning import (IlaSession, LearningConfig, mp_step, run_ila, smp_step, sph_step,
                       train)
from .models import MpModel, SmpModel, SphModel, mp_basis, model_from_dict
from .numerics import (ComplexSignal, DivergenceError, NumericError, align_and_normalize,
                       estimate_delay_and_gain, solve_hermitian)
from .pa import PaSimulator, load_fixture, pa_apply
from .spline_lut import SplineConfig, SplineLut, basis_matrix, region_index
from .waveform import (MetricsReport, OfdmConfig, aclr, evm, generate_ofdm, papr_db,
                       reduce_papr, welch_psd)

__all__ = [
    "ComplexityReport", "NotCalibratedError", "complexity_formula", "complexity_published",
    "flops", "IlaSession", "LearningConfig", "mp_step", "run_ila", "smp_step", "sph_step",
    "train", "MpModel", "SmpModel", "SphModel", "mp_basis", "model_from_dict",
    "ComplexSignal", "DivergenceError", "NumericError", "align_and_normalize",
    "estimate_delay_and_gain", "solve_hermitian", "PaSimulator", "load_fixture", "pa_apply",
    "SplineConfig", "SplineLut", "basis_matrix", "region_index", "MetricsReport",
    "OfdmConfig", "aclr", "evm", "generate_ofdm", "papr_db", "reduce_papr", "welch_psd",
]

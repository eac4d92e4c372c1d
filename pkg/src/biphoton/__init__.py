"""Coincidence-count interference of frequency-entangled photon pairs."""
from .errors import BiphotonError, DomainError, FitError, NumericError
from .kernels import backend
from .spectra import (
    BiphotonSource,
    FabryPerotFilter,
    FilterChain,
    GaussianFilter,
    biphoton_spectral_density,
    fp_free_spectral_range,
    gaussian_compose,
    transmittance,
)
from .mzi import (
    FpSeriesModel,
    FpSeriesParams,
    GaussianModel,
    MachZehnder,
    QuadratureModel,
    VisibilityScan,
    build_model,
    interference_term_fp_quadrature,
    interference_term_fp_series,
    interference_term_gaussian,
    local_visibility,
    normalized_rate,
    upper_envelope,
    visibility_envelope_gaussian,
    visibility_scan,
)

__version__ = "0.1.0"

"""Near-field focused phased-array beamforming by time-reversal phase synthesis."""

__version__ = "0.1.0"

from .analysis import (
    ComparisonReport,
    FocalReport,
    compare_methods,
    find_peak,
    phase_alignment_check,
    spot_size,
    steer_sweep,
)
from .errors import ConfigError, InvalidInputError, NffBeamError, SingularityError
from .field_engine import ElementModel, FieldMap, axial_profile, element_contribution, plane_cut, total_field
from .geometry import (
    ArrayLayout,
    FocalTarget,
    FrequencySpec,
    ObservationGrid,
    SlotColumnSpec,
    build_frequency,
    build_layout,
    fraunhofer_distance,
)
from .propagation import dipole_field, scalar_green, wrap_phase
from .synthesis import (
    ExcitationSet,
    far_field_phases,
    normalize_phases,
    quantize_phases,
    ray_optic_phases,
    tr_phases,
)

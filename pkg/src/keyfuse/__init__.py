"""Key fusion: min-entropy accounting, key-fusing transformations and secret outage analysis."""

from .errors import (
    CapacityError,
    DimensionError,
    DomainError,
    KeyfuseError,
    KeyRangeError,
    UnderflowError,
    ValidationError,
)
from .exposure_sim import (
    ExposureModel,
    SessionConfig,
    SessionOutcome,
    fused_entropy_given_leaks,
    simulate_session,
    window_compromised,
    z_score,
)
from .keyspace import (
    KeyDistribution,
    KeySpace,
    NlSource,
    is_leaked,
    min_entropy,
    point_mass,
    shannon_entropy,
    uniform,
)
from .kft import (
    KftKind,
    KftSpec,
    Laws,
    apply,
    check_laws,
    fuse_dist,
    fuse_keys,
    fuse_many,
    is_latin_square,
    verify_latin_square,
)
from .sop_analytic import SopQuery, SopRow, allowed_exposure, log10_sop, sop_closed_form, sop_curve
from .window import KeyQueue, WindowPlan, WindowPolicy, assign_windows, fused_message_keys

__version__ = "0.1.0"

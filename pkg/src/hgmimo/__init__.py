"""Near-field line-of-sight MIMO over Hermite-Gaussian modes.

The pipeline runs beam -> geometry -> channel -> txrx -> linkmetrics; the
``hgmimo`` command wraps it for config-driven experiments.
"""
__version__ = "0.1.0"

from .beam import BeamParams, ModeIndex, capture_efficiency, hg_field, hg_fields, optimize_waist
from .channel import ElementPattern, EffectiveChannel, boresight_link, effective_channel, physical_channel
from .config import ScenarioConfig, load_config, preset
from .errors import ConfigError, DimensionError, DomainError, HgMimoError
from .geometry import ArrayGeometry, Tilt
from .hermite import hermite_eval, hermite_orthogonality_check
from .linkmetrics import link_report, load_mcs_table, se_from_sinr
from .txrx import ModeSet, mode_filters, stream_sinrs

__all__ = [
    "ArrayGeometry", "BeamParams", "ConfigError", "DimensionError", "DomainError", "EffectiveChannel",
    "ElementPattern", "HgMimoError", "ModeIndex", "ModeSet", "ScenarioConfig", "Tilt", "boresight_link",
    "capture_efficiency", "effective_channel", "hermite_eval", "hermite_orthogonality_check", "hg_field",
    "hg_fields", "link_report", "load_config", "load_mcs_table", "mode_filters", "optimize_waist",
    "physical_channel", "preset", "se_from_sinr", "stream_sinrs",
]

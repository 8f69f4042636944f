"""Vortex electron beams through forked gratings and spiral zone plates.

Scalar wave-optics simulation of the diffraction of OAM-carrying beams by
binary holograms, the analysis of the resulting orders, and a grating plus
pinhole OAM analyzer.
"""

from .analysis import (DiffractionReport, OAMSpectrum, OrderMeasurement, azimuthal_mode_spectrum,
                       count_azimuthal_peaks, diffraction_report, integrate_box, intensity_difference,
                       locate_orders, measure_order, order_asymmetry, order_spacing, phase_winding,
                       ring_radius)
from .config import ScenarioConfig, echo_config, parse_config
from .errors import (AmbiguousSortError, AnalysisError, ConfigError, DomainError, ForkOAMError,
                     IndeterminateWindingError, OutputError, ResolutionError, SamplingError, ShapeError)
from .field import (BeamSpec, ComplexField, GridSpec, apply_mask, electron_wavelength, make_beam,
                    normalize, plane_wave, power, reflect_x, superpose)
from .masks import (BinaryMask, ForkedGratingSpec, SpiralZonePlateSpec, complement, grating_order_amplitude,
                    render_forked_grating, render_spiral_zone_plate)
from .propagation import (PropagationPlan, SamplingReport, angular_spectrum_propagate, fresnel_propagate,
                          lens_fourier_transform, propagate, sampling_guard)
from .scenarios import SCENARIOS, RunReport, load_scenario, reproduce, run_scenario
from .sorter import SorterConfig, SortResult, pinhole_transmission, sort_oam

__version__ = "0.1.0"

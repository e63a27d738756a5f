"""pressmat: plantar pressure mat toolkit.

A software replica of a low-cost pedobarography system: a simulated
piezoresistive mat with a quincunx double-lattice layout, a 155 Hz binary
acquisition protocol, hysteresis-aware calibration, the capture image
pipeline (50-frame averaging, 10x spline upsampling, Gaussian smoothing),
posture/callus metrics over annotated regions, session persistence and a
live WebSocket streaming service.
"""

from .calibration import (CalibrationCurve, CalibrationSample, build_curve,
                          invert_divider, sweep_samples)
from .frames import RawFrame
from .geometry import (CellFill, RawGrid, SensorLayout, channel_to_position,
                       reconstruct_grid)
from .metrics import (MetricsReport, Region, RegionSet, center_of_pressure,
                      full_report, load_percentage, mask_cells,
                      mean_foot_pressure, regional_stats)
from .pipeline import (PressureField, SmoothingSpec, average_frames,
                       gaussian_kernel, process_capture, smooth,
                       upsample_spline)
from .protocol import (FRAME_SIZE, DecodeDiagnostics, StreamDecoder, crc16,
                       decode_stream, encode_frame)
from .simulate import (Blob, BranchState, DividerConfig, MatSimulator, Scene,
                       SensorModel, adc_quantize, divider_voltage,
                       render_scene, resistance_of)
from .store import SessionWriter, export_report, read_session, write_session

__version__ = "0.1.0"

from infoplane.export import analysis_summary, export_curves, read_curves, write_plot_script
from infoplane.plane import AnalysisConfig, InfoPlanePoint, compute_plane
from infoplane.redundancy import RedundancyReport, redundancy_truncation
from infoplane.temporal import TemporalCurvePoint, temporal_compression_curve, temporal_info_curve

__all__ = [
    "AnalysisConfig",
    "InfoPlanePoint",
    "RedundancyReport",
    "TemporalCurvePoint",
    "analysis_summary",
    "compute_plane",
    "export_curves",
    "read_curves",
    "redundancy_truncation",
    "temporal_compression_curve",
    "temporal_info_curve",
    "write_plot_script",
]

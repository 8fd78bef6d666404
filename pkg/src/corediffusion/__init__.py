"""Thresholded local charge diffusion on graphs."""

from .engine import (
    ChargeState,
    DiffusionConfig,
    NodeClass,
    RunSummary,
    Status,
    TraceRecord,
    classify,
    indicator,
    run,
    step,
)
from .graph import Graph, SeedPolicy, load_edge_list, save_edge_list, select_seed

__version__ = "0.1.0"

"""parcell: lattice artificial cells that replicate through spatially
parallel synthesis pipelines, plus an exact analyzer for the abstract
scheduling problem they embody."""

from parcell._core import BACKEND_NAME, COMPILED
from parcell.cell import (GenomeConfig, build_sequential_cell, check_fission_complete,
                          gene_census, genome_mass, init_mother)
from parcell.engine import run_until, sample_next_event, step
from parcell.harness import SweepConfig, run_baseline, run_sweep, summarize
from parcell.sched import (Schedule, SystemSpec, generate_subproblems,
                           min_makespan, speedup, validate_schedule)
from parcell.world import RateConfig, World

__version__ = "0.1.0"

__all__ = [
    "BACKEND_NAME", "COMPILED", "GenomeConfig", "RateConfig", "Schedule",
    "SweepConfig", "SystemSpec", "World", "build_sequential_cell",
    "check_fission_complete", "gene_census", "generate_subproblems",
    "genome_mass", "init_mother", "min_makespan", "run_baseline",
    "run_sweep", "run_until", "sample_next_event", "speedup", "step",
    "summarize", "validate_schedule",
]

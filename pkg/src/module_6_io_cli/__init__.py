"""Module 6: Files, configuration and the command line.

Public API for DYT1 tensor files, 16-bit depth PGMs, the flat key=value
RunConfig, the benchmark and ablation tables, and the `dyspn` CLI.
"""

from .atomic import atomic_write_bytes, atomic_write_text
from .cli import EXIT_CHECK_FAILED, EXIT_INVALID, EXIT_OK, build_parser, configure_logging, main
from .experiments import run_ablation, run_bench
from .pgm import MAX_DEPTH_M, MAXVAL, decode_pgm, encode_pgm, read_depth_pgm, write_depth_pgm
from .run_config import RUN_CONFIG_NAME, RunConfig, environment_defaults, resolve_run_config
from .tensor_file import decode_tensor, encode_tensor, read_tensor, write_tensor

__all__ = [
    "EXIT_CHECK_FAILED",
    "EXIT_INVALID",
    "EXIT_OK",
    "MAXVAL",
    "MAX_DEPTH_M",
    "RUN_CONFIG_NAME",
    "RunConfig",
    "atomic_write_bytes",
    "atomic_write_text",
    "build_parser",
    "configure_logging",
    "decode_pgm",
    "decode_tensor",
    "encode_pgm",
    "encode_tensor",
    "environment_defaults",
    "main",
    "read_depth_pgm",
    "read_tensor",
    "resolve_run_config",
    "run_ablation",
    "run_bench",
    "write_depth_pgm",
    "write_tensor",
]

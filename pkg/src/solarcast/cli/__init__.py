"""Command-line interface, run configuration, model artifacts and synthetic data."""
from .config import RunConfig, config_digest, load_config, parse_config
from .main import COMMANDS, build_parser, exit_code, main, predict_table, run_benchmark
from .persistence import FORMAT_VERSION, ModelArtifact, dumps, load_artifact, save_artifact
from .synthetic import SynthParams, generate_synthetic, write_sources

__all__ = [
    "COMMANDS", "FORMAT_VERSION", "ModelArtifact", "RunConfig", "SynthParams", "build_parser",
    "config_digest", "dumps", "exit_code", "generate_synthetic", "load_artifact", "load_config",
    "main", "parse_config", "predict_table", "run_benchmark", "save_artifact", "write_sources",
]

"""Clustered mobile P2P epidemic replication simulator.

    >>> import epirep
    >>> cfg = epirep.Config()
    >>> cfg["ticks"] = 200
    >>> out = epirep.run(cfg)
    >>> out["summary"]["mean_sdr"]
"""

from epirep._core import (
    Config,
    ConfigError,
    InvariantViolation,
    cluster_cohesion,
    columns,
    compare,
    effective_throughput,
    infection_rate,
    min_delay_path,
    multipart_delay_estimate,
    preset_config,
    presets,
    recovery_rate,
    run,
    run_experiment,
    sdr,
    spreading_ratio,
    streaming_factor,
)

__all__ = [
    "Config",
    "ConfigError",
    "InvariantViolation",
    "cluster_cohesion",
    "columns",
    "compare",
    "effective_throughput",
    "infection_rate",
    "min_delay_path",
    "multipart_delay_estimate",
    "preset_config",
    "presets",
    "recovery_rate",
    "run",
    "run_experiment",
    "sdr",
    "spreading_ratio",
    "streaming_factor",
]

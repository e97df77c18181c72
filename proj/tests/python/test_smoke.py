import math

import pytest

import epirep


def small():
    cfg = epirep.Config()
    cfg["node_count"] = 20
    cfg["ticks"] = 60
    cfg["seed"] = 3
    return cfg


def test_config_keys_round_trip():
    cfg = epirep.Config()
    cfg["epidemic.beta"] = 0.05
    assert float(cfg["epidemic.beta"]) == 0.05
    again = epirep.Config.parse(cfg.to_text())
    assert again["epidemic.beta"] == cfg["epidemic.beta"]
    assert "mobility.speed_max" in epirep.Config.keys()


def test_config_error_carries_key_and_line():
    with pytest.raises(epirep.ConfigError) as e:
        epirep.Config.parse("node_count = 50\nepidemic.beta = -1\n")
    assert e.value.key == "epidemic.beta"
    assert e.value.line == 2


def test_run_is_deterministic():
    a = epirep.run(small(), audit=True)
    b = epirep.run(small(), audit=True)
    assert a["csv"] == b["csv"]
    series = a["series"]
    assert list(series) == epirep.columns()
    assert series["tick"] == [float(t) for t in range(1, 61)]
    assert all(0.0 <= v <= 1.0 for v in series["sdr"])


def test_presets_listed():
    names = {p["name"] for p in epirep.presets()}
    assert "fig6-infected" in names
    assert "fig11-sdr" in names
    assert epirep.preset_config("fig11-sdr")["node_count"]


def test_run_experiment_writes_files(tmp_path):
    files = epirep.run_experiment("fig6-infected", tmp_path, seeds=[1], set={"ticks": "40"})
    assert files
    assert all(p.exists() for p in files)


def test_compare_self_is_zero():
    cfg = small()
    c = epirep.compare(cfg, [1, 2], a={"strategy": "random"}, b={"strategy": "random"})
    assert all(d == 0.0 for d in c["infected_diff"])
    assert c["infected_sign"]["ties"] == len(c["ticks"])


def test_formulas():
    assert epirep.streaming_factor(10, 5, 25, 2) == 1.0
    assert epirep.infection_rate(0.01, 5, 3, 11) == pytest.approx(0.15)
    assert epirep.recovery_rate(0.25, 4) == 1.0
    assert epirep.multipart_delay_estimate(100, 2, 4) == 100.0
    assert epirep.effective_throughput(0.5, 1, 2, 1) == 0.75
    assert epirep.cluster_cohesion(6, 4, 0.9, 0.5) == 1.0
    assert epirep.cluster_cohesion(6, 4, 0.4, 0.5) is None
    assert epirep.sdr(0, 0) == 1.0
    assert math.isclose(epirep.spreading_ratio(0.01, 50, 50, 3.0), 1.0)


def test_min_delay_path():
    edges = [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 3.0)]
    assert epirep.min_delay_path(3, edges, 0, 2) == (2.0, [0, 1, 2])
    assert epirep.min_delay_path(4, edges, 0, 3) is None

import json
import struct

import numpy as np
import pytest

from auditbench import persist
from auditbench.config import ConfigError, PipelineConfig, parse_tau_grid
from auditbench.detect import IsolationForestDetector
from auditbench.evaluation import DEFAULT_TAU_GRID


def test_model_file_layout(tmp_path):
    X = np.random.default_rng(0).normal(size=(30, 2))
    f = IsolationForestDetector(n_estimators=3, random_state=2).fit(X)
    persist.dump(f, tmp_path / "f.bin", note="x")
    raw = (tmp_path / "f.bin").read_bytes()
    assert raw[:4] == b"ABM1"
    (size,) = struct.unpack("<I", raw[4:8])
    header = json.loads(raw[8:8 + size])
    assert header["class"].endswith("IsolationForestDetector")
    assert len(raw) == 8 + size + 8 * sum(header["blocks"])
    assert persist.read_header(tmp_path / "f.bin")["format"] == persist.FORMAT_VERSION
    back = persist.load(tmp_path / "f.bin")
    assert back.get_params() == f.get_params()
    assert back.feature_.dtype == np.int64 and np.array_equal(back.feature_, f.feature_)


def test_load_rejects_other_files(tmp_path):
    (tmp_path / "x.bin").write_bytes(b"nope")
    with pytest.raises(ValueError):
        persist.load(tmp_path / "x.bin")
    payload = json.dumps({"format": 1, "class": "os.system", "params": {}, "state": {}, "blocks": []}).encode()
    (tmp_path / "y.bin").write_bytes(b"ABM1" + struct.pack("<I", len(payload)) + payload)
    with pytest.raises(ValueError, match="foreign"):
        persist.load(tmp_path / "y.bin")


def test_tau_grid_parsing():
    assert parse_tau_grid("0.05:0.30:0.01") == list(DEFAULT_TAU_GRID)
    assert parse_tau_grid("0.1, 0.2") == [0.1, 0.2]
    with pytest.raises(ConfigError):
        parse_tau_grid("a:b")


@pytest.mark.parametrize("data", [
    {"encoding": "hash"}, {"detector": "dagmm"}, {"split": {"strategy": "kfold"}},
    {"dataset": {}}, {"tau_grid": [0.0]}, {"colour": 1},
])
def test_config_validation(data):
    with pytest.raises(ConfigError):
        PipelineConfig.from_dict(data)


def test_config_round_trip(tmp_path):
    cfg = PipelineConfig.from_dict({"encoding": "gel", "seed": 3})
    (tmp_path / "c.json").write_text(json.dumps(cfg.to_dict()))
    assert PipelineConfig.load(tmp_path / "c.json") == cfg
    assert cfg.column_kinds["repair_complexity"] == "ordinal"

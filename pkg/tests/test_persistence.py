# -*- coding: utf-8 -*-
import json

import numpy as np
import pytest

from dsrlab.agent.dsr import run_training
from dsrlab.core.const import SNAPSHOT_FORMAT
from dsrlab.core.exceptions import CorruptSnapshotError, SnapshotError, VersionMismatchError
from dsrlab.harness.persistence import (
    decode_tensor,
    dump_document,
    encode_tensor,
    load_snapshot,
    parse_document,
    save_snapshot,
)


@pytest.fixture
def snapshot(corridor, small_config):
    config = small_config
    config.train.total_episodes = 2
    return run_training(corridor, config, seed=0).snapshot


def test_tensor_encoding_is_exact():
    arr = np.array([[0.1, -2.5e-300], [np.pi, 7.0]])
    back = decode_tensor(encode_tensor(arr)["__ndarray__"])
    assert back.dtype == arr.dtype
    assert np.array_equal(back, arr)
    flags = np.array([True, False])
    assert np.array_equal(decode_tensor(encode_tensor(flags)["__ndarray__"]), flags)


def test_save_load_preserves_everything(snapshot, tmp_path):
    path = save_snapshot(snapshot, tmp_path / "snap.json")
    loaded = load_snapshot(path)
    assert loaded.kind == "dsr"
    assert loaded.params.equals(snapshot.params)
    assert loaded.params.spec == snapshot.params.spec
    for name, v in snapshot.opt.velocity.items():
        assert np.array_equal(loaded.opt.velocity[name], v)
    assert loaded.episode == snapshot.episode
    assert loaded.global_step == snapshot.global_step
    assert loaded.rng_states == snapshot.rng_states
    assert loaded.metrics == snapshot.metrics
    assert loaded.grid_map().same_topology(snapshot.grid_map())
    assert np.array_equal(loaded.replay["main"]["obs"], snapshot.replay["main"]["obs"])


def test_save_is_byte_stable(snapshot, tmp_path):
    a = save_snapshot(snapshot, tmp_path / "a.json").read_bytes()
    b = save_snapshot(load_snapshot(tmp_path / "a.json"), tmp_path / "b.json").read_bytes()
    assert a == b


def test_document_checks():
    text = dump_document({"x": np.arange(3.0)})
    assert np.array_equal(parse_document(text)["x"], [0.0, 1.0, 2.0])

    document = json.loads(text)
    document["payload"]["extra"] = 1
    with pytest.raises(CorruptSnapshotError):
        parse_document(json.dumps(document))

    document = json.loads(text)
    document["version"] = 99
    with pytest.raises(VersionMismatchError):
        parse_document(json.dumps(document))

    with pytest.raises(CorruptSnapshotError):
        parse_document(json.dumps({"format": "other"}))
    with pytest.raises(CorruptSnapshotError):
        parse_document("{not json")
    assert json.loads(text)["format"] == SNAPSHOT_FORMAT


def test_load_errors(tmp_path):
    with pytest.raises(SnapshotError):
        load_snapshot(tmp_path / "missing.json")
    path = tmp_path / "truncated.json"
    path.write_text(dump_document({"kind": "dsr"}), encoding="ascii")
    with pytest.raises(CorruptSnapshotError):
        load_snapshot(path)

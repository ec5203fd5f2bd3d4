# -*- coding: utf-8 -*-
"""
快照持久化
JSON 容器: format、version、对规范化 payload 的 sha256，以及 payload 本身。
ndarray 编码为 {dtype, shape, data(小端 base64)}。
"""

import base64
import binascii
import hashlib
import json
from pathlib import Path
from typing import Any

import numpy as np

from ..core.const import SNAPSHOT_FORMAT, SNAPSHOT_VERSION
from ..core.exceptions import CorruptSnapshotError, SnapshotError, VersionMismatchError

TENSOR_KEY = "__ndarray__"


def encode_tensor(arr: np.ndarray) -> dict[str, Any]:
    arr = np.ascontiguousarray(arr)
    little = arr.astype(arr.dtype.newbyteorder("<"), copy=False)
    return {
        TENSOR_KEY: {
            "dtype": little.dtype.str,
            "shape": list(arr.shape),
            "data": base64.b64encode(little.tobytes()).decode("ascii"),
        }
    }


def decode_tensor(data: dict[str, Any]) -> np.ndarray:
    try:
        raw = base64.b64decode(data["data"], validate=True)
        arr = np.frombuffer(raw, dtype=np.dtype(data["dtype"])).reshape(data["shape"])
    except (KeyError, TypeError, ValueError, binascii.Error) as e:
        raise CorruptSnapshotError(f"张量无法解码: {e}") from e
    return arr.copy()


def encode_tree(obj: Any) -> Any:
    """递归地把 ndarray 与 numpy 标量换成 JSON 可表示的值"""
    if isinstance(obj, np.ndarray):
        return encode_tensor(obj)
    if isinstance(obj, dict):
        return {str(k): encode_tree(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [encode_tree(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def decode_tree(obj: Any) -> Any:
    if isinstance(obj, dict):
        if set(obj) == {TENSOR_KEY}:
            return decode_tensor(obj[TENSOR_KEY])
        return {k: decode_tree(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [decode_tree(v) for v in obj]
    return obj


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True, allow_nan=True)


def payload_digest(encoded_payload: Any) -> str:
    return hashlib.sha256(canonical_json(encoded_payload).encode("ascii")).hexdigest()


def dump_document(payload: dict[str, Any]) -> str:
    encoded = encode_tree(payload)
    document = {
        "format": SNAPSHOT_FORMAT,
        "version": SNAPSHOT_VERSION,
        "sha256": payload_digest(encoded),
        "payload": encoded,
    }
    return canonical_json(document) + "\n"


def parse_document(text: str) -> dict[str, Any]:
    """校验容器并返回解码后的 payload

    Raises:
        CorruptSnapshotError: 无法解析、格式标记不符或校验和不符
        VersionMismatchError: 版本不同
    """
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise CorruptSnapshotError(f"快照不是合法的 JSON: {e}") from e
    if not isinstance(document, dict) or document.get("format") != SNAPSHOT_FORMAT:
        raise CorruptSnapshotError("不是 DSR-Lab 快照文件")
    if document.get("version") != SNAPSHOT_VERSION:
        raise VersionMismatchError(
            f"快照版本为 {document.get('version')}，当前支持 {SNAPSHOT_VERSION}"
        )
    if "payload" not in document or document.get("sha256") != payload_digest(document["payload"]):
        raise CorruptSnapshotError("快照校验和不符")
    return decode_tree(document["payload"])


def save_snapshot(snapshot, path: Path | str) -> Path:
    """写出快照；同一快照总是得到相同的字节

    Raises:
        SnapshotError: 写入失败
    """
    path = Path(path)
    text = dump_document(snapshot.to_payload())
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="ascii")
    except OSError as e:
        raise SnapshotError(f"无法写入快照 {path}: {e}") from e
    return path


def load_snapshot(path: Path | str):
    """读取快照

    Returns:
        AgentSnapshot

    Raises:
        SnapshotError: 文件无法读取
        VersionMismatchError: 版本不同
        CorruptSnapshotError: 内容损坏
    """
    from ..agent.snapshot import AgentSnapshot

    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise SnapshotError(f"无法读取快照 {path}: {e}") from e
    try:
        text = raw.decode("ascii")
    except UnicodeDecodeError as e:
        raise CorruptSnapshotError(f"快照包含非法字节: {e}") from e
    return AgentSnapshot.from_payload(parse_document(text))

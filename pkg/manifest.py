"""
运行清单 - 每个输出文件旁边写一份 <output>.manifest.json，记录命令、有效参数、输入摘要与版本
"""
import hashlib
import json
import os
from typing import Any, Dict, Iterable, List

from pydantic import BaseModel, Field

from errors import DataError, MissingFile

TOOL_NAME = "unimorph-reinflect"
TOOL_VERSION = "1.0.0"
MANIFEST_SUFFIX = ".manifest.json"


class RunManifest(BaseModel):
    """一次命令运行的记录；重放argv可得到逐字节相同的输出"""

    tool: str = TOOL_NAME
    tool_version: str = TOOL_VERSION
    command: str
    argv: List[str]
    config: Dict[str, Any] = Field(default_factory=dict)
    # 路径 → sha256
    inputs: Dict[str, str] = Field(default_factory=dict)
    outputs: Dict[str, str] = Field(default_factory=dict)


def file_digest(path: str) -> str:
    """文件的sha256；目录则按相对路径排序后依次摘要其中所有文件"""
    h = hashlib.sha256()
    if os.path.isdir(path):
        for root, dirs, files in os.walk(path):
            dirs.sort()
            for name in sorted(files):
                if name.endswith(MANIFEST_SUFFIX):
                    continue
                full = os.path.join(root, name)
                h.update(os.path.relpath(full, path).encode("utf-8"))
                h.update(b"\0")
                h.update(file_digest(full).encode("ascii"))
        return h.hexdigest()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def digests(paths: Iterable[str]) -> Dict[str, str]:
    return {p: file_digest(p) for p in paths if p and os.path.exists(p)}


def manifest_path(output: str) -> str:
    return output + MANIFEST_SUFFIX


def write_manifest(output: str, manifest: RunManifest) -> str:
    path = manifest_path(output)
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(manifest.model_dump_json(indent=2) + "\n")
    return path


def load_manifest(path: str) -> RunManifest:
    if not os.path.exists(path):
        raise MissingFile(path)
    with open(path, "r", encoding="utf-8") as f:
        try:
            return RunManifest.model_validate(json.load(f))
        except (json.JSONDecodeError, ValueError) as e:
            raise DataError(f"invalid manifest: {e}", path=path)

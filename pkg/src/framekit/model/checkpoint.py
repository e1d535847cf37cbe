"""Parameter checkpoints: one binary file with a versioned header and
named row-major tensors, plus text sidecars for the vocabulary
(`<path>.vocab`) and the action inventory (`<path>.actions`).
Save/load round-trips are bit-exact."""

from __future__ import annotations

import json
import struct
from dataclasses import asdict
from pathlib import Path

import numpy as np

from ..transitions import parse_action
from .config import ModelConfig
from .lexicon import Lexicon
from .network import Parameters

MAGIC = b"FKCP"
VERSION = 1


class CheckpointError(Exception):
    pass


def _lexicon_text(lexicon: Lexicon) -> str:
    lines = [f"max_affix_len\t{lexicon.max_affix_len}"]
    for section, table in (("word", lexicon.words), ("prefix", lexicon.prefixes),
                           ("suffix", lexicon.suffixes), ("role", lexicon.roles)):
        for entry, index in sorted(table.items(), key=lambda kv: kv[1]):
            lines.append(f"{section}\t{index}\t{json.dumps(entry, ensure_ascii=False)}")
    return "\n".join(lines) + "\n"


def _lexicon_from_text(text: str, actions_text: str) -> Lexicon:
    tables: dict[str, dict[str, int]] = {"word": {}, "prefix": {}, "suffix": {}, "role": {}}
    max_affix_len = 3
    for line in text.splitlines():
        if not line.strip():
            continue
        parts = line.split("\t")
        if parts[0] == "max_affix_len":
            max_affix_len = int(parts[1])
            continue
        section, index, entry = parts[0], int(parts[1]), json.loads(parts[2])
        tables[section][entry] = index
    actions = [parse_action(line) for line in actions_text.splitlines() if line.strip()]
    return Lexicon(words=tables["word"], prefixes=tables["prefix"],
                   suffixes=tables["suffix"], roles=tables["role"],
                   actions=actions, max_affix_len=max_affix_len)


def save_checkpoint(params: Parameters, path: str) -> None:
    """Write the parameter file and its vocabulary/action sidecars."""
    tensor_meta = []
    blobs = []
    offset = 0
    sections = [("", params.arrays)]
    if params.ema is not None:
        sections.append(("ema/", params.ema))
    for prefix, arrays in sections:
        for name, array in arrays.items():
            data = np.ascontiguousarray(array)
            raw = data.tobytes()
            tensor_meta.append({
                "name": prefix + name,
                "shape": list(data.shape),
                "dtype": str(data.dtype),
                "offset": offset,
                "nbytes": len(raw),
            })
            blobs.append(raw)
            offset += len(raw)

    header = {
        "config": asdict(params.config),
        "tensors": tensor_meta,
        "has_ema": params.ema is not None,
    }
    header_bytes = json.dumps(header, sort_keys=True,
                              separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as handle:
        handle.write(MAGIC)
        handle.write(struct.pack("<IQ", VERSION, len(header_bytes)))
        handle.write(header_bytes)
        for raw in blobs:
            handle.write(raw)

    Path(path + ".vocab").write_text(_lexicon_text(params.lexicon), encoding="utf-8")
    Path(path + ".actions").write_text(
        "\n".join(a.to_text() for a in params.lexicon.actions) + "\n", encoding="utf-8")


def load_checkpoint(path: str) -> Parameters:
    with open(path, "rb") as handle:
        magic = handle.read(4)
        if magic != MAGIC:
            raise CheckpointError(f"{path}: not a parameter checkpoint")
        version, header_len = struct.unpack("<IQ", handle.read(12))
        if version != VERSION:
            raise CheckpointError(f"{path}: unsupported checkpoint version {version}")
        header = json.loads(handle.read(header_len).decode("utf-8"))
        payload = handle.read()

    lexicon = _lexicon_from_text(
        Path(path + ".vocab").read_text(encoding="utf-8"),
        Path(path + ".actions").read_text(encoding="utf-8"))
    config = ModelConfig(**header["config"])

    params = Parameters.__new__(Parameters)
    params.config = config
    params.lexicon = lexicon
    params.arrays = {}
    params.ema = {} if header["has_ema"] else None
    for meta in header["tensors"]:
        raw = payload[meta["offset"]:meta["offset"] + meta["nbytes"]]
        array = np.frombuffer(raw, dtype=np.dtype(meta["dtype"])).copy()
        array = array.reshape(meta["shape"])
        name = meta["name"]
        if name.startswith("ema/"):
            assert params.ema is not None
            params.ema[name[len("ema/"):]] = array
        else:
            params.arrays[name] = array
    return params

"""DGCK checkpoint files: one or more named MLPs plus a JSON header.

Layout (little-endian)::

    b"DGCK" | u32 version (=1) | u32 header_length | header (UTF-8 JSON)
    then for each network, for each layer: weights (out, in) then biases (out,)
    as float32, row-major.

The header carries ``model_kind``, ``networks`` (names in payload order),
``layer_specs`` and ``activations`` (one list per network), ``config``,
``seed``, ``epochs_done`` and a free-form ``meta`` dict. Parameters are
stored at 32-bit precision and re-widened to float64 on load.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import FormatError
from .nncore import LayerSpec, MlpParams, check_chain

MAGIC = b"DGCK"
VERSION = 1
_F32 = np.dtype("<f4")


@dataclass
class Checkpoint:
    model_kind: str
    networks: dict[str, MlpParams]
    config: dict = field(default_factory=dict)
    seed: int | None = None
    epochs_done: int = 0
    meta: dict = field(default_factory=dict)

    def __getitem__(self, name: str) -> MlpParams:
        try:
            return self.networks[name]
        except KeyError:
            raise FormatError(f"checkpoint ({self.model_kind}) has no network {name!r}; "
                              f"available: {sorted(self.networks)}") from None


def _spec_dict(s: LayerSpec) -> dict:
    return {"in_dim": s.in_dim, "out_dim": s.out_dim, "activation": s.activation, "slope": s.slope}


def save_checkpoint(ckpt: Checkpoint, path) -> None:
    header = {
        "model_kind": ckpt.model_kind,
        "networks": list(ckpt.networks),
        "layer_specs": [[_spec_dict(s) for s in p.layers] for p in ckpt.networks.values()],
        "activations": [[s.activation for s in p.layers] for p in ckpt.networks.values()],
        "config": ckpt.config,
        "seed": ckpt.seed,
        "epochs_done": ckpt.epochs_done,
        "meta": ckpt.meta,
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", VERSION, len(blob)))
        fh.write(blob)
        for p in ckpt.networks.values():
            for w, b in zip(p.weights, p.biases):
                fh.write(np.ascontiguousarray(w, dtype=_F32).tobytes())
                fh.write(np.ascontiguousarray(b, dtype=_F32).tobytes())


def load_checkpoint(path) -> Checkpoint:
    with open(path, "rb") as fh:
        raw = fh.read()
    if raw[:4] != MAGIC:
        raise FormatError(f"{path}: bad magic {raw[:4]!r} at offset 0 (expected {MAGIC!r})")
    if len(raw) < 12:
        raise FormatError(f"{path}: truncated header: needs 12 bytes at offset 0, file has {len(raw)}")
    version, hlen = struct.unpack_from("<II", raw, 4)
    if version != VERSION:
        raise FormatError(f"{path}: unsupported DGCK version {version} at offset 4")
    if len(raw) < 12 + hlen:
        raise FormatError(f"{path}: truncated header: needs {hlen} bytes at offset 12")
    try:
        header = json.loads(raw[12:12 + hlen].decode("utf-8"))
        names = list(header["networks"])
        spec_lists = header["layer_specs"]
    except (ValueError, KeyError, TypeError) as exc:
        raise FormatError(f"{path}: malformed header at offset 12: {exc}") from exc
    if len(spec_lists) != len(names):
        raise FormatError(f"{path}: header lists {len(names)} networks but {len(spec_lists)} layer_spec groups")

    offset = 12 + hlen
    networks: dict[str, MlpParams] = {}
    for name, specs_raw in zip(names, spec_lists):
        try:
            specs = [LayerSpec(int(s["in_dim"]), int(s["out_dim"]), s["activation"], float(s.get("slope", 0.01)))
                     for s in specs_raw]
            check_chain(specs)
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"{path}: bad layer spec for network {name!r}: {exc}") from exc
        weights, biases = [], []
        for i, s in enumerate(specs):
            for what, shape in (("weights", (s.out_dim, s.in_dim)), ("biases", (s.out_dim,))):
                nbytes = int(np.prod(shape)) * 4
                if offset + nbytes > len(raw):
                    raise FormatError(f"{path}: truncated payload: network {name!r} layer {i} {what} "
                                      f"needs {nbytes} bytes at offset {offset}, {len(raw) - offset} remain")
                arr = np.frombuffer(raw, dtype=_F32, count=int(np.prod(shape)), offset=offset)
                (weights if what == "weights" else biases).append(arr.reshape(shape).astype(np.float64))
                offset += nbytes
        networks[name] = MlpParams(tuple(specs), weights, biases)
    if offset != len(raw):
        raise FormatError(f"{path}: {len(raw) - offset} unexpected trailing bytes at offset {offset}")
    return Checkpoint(header.get("model_kind", ""), networks, header.get("config") or {},
                      header.get("seed"), int(header.get("epochs_done", 0)), header.get("meta") or {})

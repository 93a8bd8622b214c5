"""Self-describing binary network format with bit-exact round-trips.

Layout: 8-byte magic, 8-byte big-endian header length, UTF-8 JSON header
(layer dims, activations, dropout rates), then raw little-endian float64
parameter bytes in layer order (weights row-major, then bias). The byte
stream is a pure function of the network, so identical parameters always
serialize to identical bytes.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from actalarm.nn.network import Activation, DenseLayer, Network

MAGIC = b"ACTNET01"


def network_to_bytes(net: Network) -> bytes:
    header = {
        "format": 1,
        "layers": [
            {
                "in": layer.in_dim,
                "out": layer.out_dim,
                "activation": layer.activation.value,
                "dropout": layer.dropout_rate,
            }
            for layer in net.layers
        ],
    }
    head = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    chunks = [MAGIC, struct.pack(">Q", len(head)), head]
    for layer in net.layers:
        chunks.append(np.ascontiguousarray(layer.weights, dtype="<f8").tobytes())
        chunks.append(np.ascontiguousarray(layer.bias, dtype="<f8").tobytes())
    return b"".join(chunks)


def network_from_bytes(data: bytes) -> Network:
    if data[:8] != MAGIC:
        raise ValueError(f"bad magic {data[:8]!r}, expected {MAGIC!r}")
    (head_len,) = struct.unpack(">Q", data[8:16])
    header = json.loads(data[16:16 + head_len].decode("utf-8"))
    if header.get("format") != 1:
        raise ValueError(f"unsupported format version {header.get('format')}")
    offset = 16 + head_len
    layers: list[DenseLayer] = []
    for spec in header["layers"]:
        n_in, n_out = spec["in"], spec["out"]
        w_bytes = n_out * n_in * 8
        b_bytes = n_out * 8
        if offset + w_bytes + b_bytes > len(data):
            raise ValueError(f"truncated parameter block at byte {offset}")
        weights = np.frombuffer(data, dtype="<f8", count=n_out * n_in,
                                offset=offset).reshape(n_out, n_in).copy()
        offset += w_bytes
        bias = np.frombuffer(data, dtype="<f8", count=n_out, offset=offset).copy()
        offset += b_bytes
        layers.append(DenseLayer(weights=weights, bias=bias,
                                 activation=Activation(spec["activation"]),
                                 dropout_rate=spec["dropout"]))
    if offset != len(data):
        raise ValueError(f"{len(data) - offset} trailing bytes after parameters")
    return Network(layers)


def save_network(net: Network, path: str | Path) -> None:
    Path(path).write_bytes(network_to_bytes(net))


def load_network(path: str | Path) -> Network:
    return network_from_bytes(Path(path).read_bytes())

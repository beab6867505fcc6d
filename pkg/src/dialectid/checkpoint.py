"""Self-describing binary container for model parameters and cached features.

Layout: 8-byte magic, little-endian uint32 header length, UTF-8 JSON header
(format version, kind, topology, metadata, array directory), then the raw
array bytes in directory order. Arrays are little-endian and C-order;
parameters are stored as float32. Loading fails loudly on any magic,
version, or shape mismatch.
"""

import json

import numpy as np

MAGIC = b"DIDBIN1\n"
FORMAT_VERSION = 1

_DTYPES = {"float32": "<f4", "float64": "<f8", "int64": "<i8"}


def save_container(path, kind, topology, metadata, arrays):
    """arrays: dict name -> ndarray (dtype must be one of the supported set)."""
    directory = []
    blobs = []
    for name, arr in arrays.items():
        dtype_name = arr.dtype.name
        if dtype_name not in _DTYPES:
            raise ValueError(f"unsupported array dtype {dtype_name!r} for {name!r}")
        arr = np.ascontiguousarray(arr, dtype=_DTYPES[dtype_name])
        directory.append({"name": name, "dtype": dtype_name,
                          "shape": list(arr.shape)})
        blobs.append(arr.tobytes())
    header = {"format": FORMAT_VERSION, "kind": kind, "topology": topology,
              "metadata": metadata, "arrays": directory}
    head = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(np.uint32(len(head)).tobytes())
        f.write(head)
        for blob in blobs:
            f.write(blob)


def load_container(path, expect_kind=None):
    """Returns (header dict, dict name -> ndarray)."""
    with open(path, "rb") as f:
        magic = f.read(len(MAGIC))
        if magic != MAGIC:
            raise ValueError(f"{path}: not a dialectid container (bad magic)")
        (head_len,) = np.frombuffer(f.read(4), dtype="<u4")
        header = json.loads(f.read(int(head_len)).decode("utf-8"))
        if header.get("format") != FORMAT_VERSION:
            raise ValueError(f"{path}: unsupported container format "
                             f"{header.get('format')!r}")
        if expect_kind is not None and header["kind"] != expect_kind:
            raise ValueError(f"{path}: container kind {header['kind']!r}, "
                             f"expected {expect_kind!r}")
        arrays = {}
        for entry in header["arrays"]:
            dtype = np.dtype(_DTYPES[entry["dtype"]])
            count = int(np.prod(entry["shape"], dtype=np.int64)) if entry["shape"] else 1
            raw = f.read(count * dtype.itemsize)
            if len(raw) != count * dtype.itemsize:
                raise ValueError(f"{path}: truncated array {entry['name']!r}")
            arrays[entry["name"]] = np.frombuffer(raw, dtype=dtype).reshape(
                entry["shape"]).copy()
        if f.read(1):
            raise ValueError(f"{path}: trailing bytes after declared arrays")
    return header, arrays


def save_model(path, snap, kind, metadata=None):
    """Persist a model snapshot ({'topology':…, 'params': name->float32})."""
    save_container(path, kind, snap["topology"], metadata or {}, snap["params"])


def load_model(path, kind):
    header, arrays = load_container(path, expect_kind=kind)
    return {"topology": header["topology"], "params": arrays}, header["metadata"]


def save_features(path, feats, metadata=None):
    meta = {"kind": feats.kind, "frame_hop_s": feats.frame_hop_s,
            "frame_len_s": feats.frame_len_s, **(metadata or {})}
    save_container(path, "feature-matrix", {}, meta,
                   {"frames": feats.frames.astype("<f4")})


def load_features(path):
    from .features import FeatureMatrix

    header, arrays = load_container(path, expect_kind="feature-matrix")
    meta = header["metadata"]
    return FeatureMatrix(meta["kind"], arrays["frames"].astype(np.float64),
                         meta["frame_hop_s"], meta["frame_len_s"])

"""Checkpoint files: named parameter blocks in a little-endian binary.

Layout: magic "PCHC", u32 version, then one record per block until EOF:
u32 name length, name bytes (utf-8), u32 rank, u32 dims[rank], f32 data.
Blocks are written in sorted name order so files are deterministic.
"""

import numpy as np
import torch

CKPT_MAGIC = b"PCHC"
CKPT_VERSION = 1


def save_checkpoint(path, blocks: dict[str, np.ndarray]) -> None:
    with open(path, "wb") as fh:
        fh.write(CKPT_MAGIC)
        fh.write(np.array([CKPT_VERSION], dtype="<u4").tobytes())
        for name in sorted(blocks):
            arr = np.ascontiguousarray(blocks[name], dtype="<f4")
            raw = name.encode("utf-8")
            fh.write(np.array([len(raw)], dtype="<u4").tobytes())
            fh.write(raw)
            fh.write(np.array([arr.ndim], dtype="<u4").tobytes())
            fh.write(np.array(arr.shape, dtype="<u4").tobytes())
            fh.write(arr.tobytes())


def load_checkpoint(path) -> dict[str, np.ndarray]:
    blocks: dict[str, np.ndarray] = {}
    with open(path, "rb") as fh:
        if fh.read(4) != CKPT_MAGIC:
            raise ValueError(f"{path}: not a checkpoint file")
        (version,) = np.frombuffer(fh.read(4), dtype="<u4")
        if version != CKPT_VERSION:
            raise ValueError(f"{path}: unsupported checkpoint version {version}")
        while True:
            head = fh.read(4)
            if not head:
                break
            (name_len,) = np.frombuffer(head, dtype="<u4")
            name = fh.read(int(name_len)).decode("utf-8")
            (rank,) = np.frombuffer(fh.read(4), dtype="<u4")
            dims = np.frombuffer(fh.read(4 * int(rank)), dtype="<u4").astype(int)
            count = int(np.prod(dims)) if rank else 1
            data = np.frombuffer(fh.read(4 * count), dtype="<f4")
            if data.size != count:
                raise ValueError(f"{path}: truncated block {name!r}")
            blocks[name] = data.reshape(dims).astype(np.float32)
    return blocks


def module_to_blocks(module: torch.nn.Module, prefix: str = "") -> dict[str, np.ndarray]:
    return {prefix + k: v.detach().cpu().numpy() for k, v in module.state_dict().items()}


def blocks_to_module(module: torch.nn.Module, blocks: dict[str, np.ndarray], prefix: str = "") -> None:
    state = {}
    for k, v in module.state_dict().items():
        key = prefix + k
        if key not in blocks:
            raise KeyError(f"checkpoint is missing block {key!r}")
        state[k] = torch.as_tensor(blocks[key], dtype=v.dtype).reshape(v.shape)
    module.load_state_dict(state)

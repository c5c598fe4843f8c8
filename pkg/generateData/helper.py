import numpy as np
from pathlib import Path

from utils.errors import IdxFormatError, InfeasiblePartitionError

IDX_IMAGES_MAGIC = 0x00000803
IDX_LABELS_MAGIC = 0x00000801

def _read_idx_payload(path: str, expected_magic: int) -> (tuple, np.ndarray):
    """
    (Internal Helper) Read an unsigned-byte IDX file and return its dimensions and payload

    Args:
        path (str): Path to the IDX file
        expected_magic (int): 0x00000803 for images, 0x00000801 for labels

    Returns:
        tuple: (dimensions, flat uint8 payload)

    Raises:
        IdxFormatError: On a wrong magic number or a truncated payload
    """
    raw = Path(path).read_bytes()
    if len(raw) < 4:
        raise IdxFormatError(f"{path}: file too short for an IDX header")

    magic = int.from_bytes(raw[:4], "big")
    if magic != expected_magic:
        raise IdxFormatError(f"{path}: magic number {magic:#010x}, expected {expected_magic:#010x}")

    dim_count = magic & 0xFF
    header_size = 4 + 4 * dim_count
    if len(raw) < header_size:
        raise IdxFormatError(f"{path}: truncated header")

    dims = tuple(int(d) for d in np.frombuffer(raw[4:header_size], dtype=">u4"))
    expected_size = int(np.prod(dims))
    payload = np.frombuffer(raw, dtype=np.uint8, offset=header_size)
    if payload.size < expected_size:
        raise IdxFormatError(f"{path}: payload holds {payload.size} bytes, header announces {expected_size}")
    if payload.size > expected_size:
        raise IdxFormatError(f"{path}: {payload.size - expected_size} trailing bytes after the payload")

    return dims, payload

def _idx_bytes(magic: int, dims: tuple, payload: np.ndarray) -> bytes:
    """
    (Internal Helper) Encode an unsigned-byte IDX file
    """
    header = int(magic).to_bytes(4, "big") + np.asarray(dims, dtype=">u4").tobytes()
    return header + np.ascontiguousarray(payload, dtype=np.uint8).tobytes()

def _split_class_counts(class_size: int, proportions: np.ndarray, running_totals: np.ndarray) -> np.ndarray:
    """
    (Internal Helper) Turn Dirichlet proportions into integer per-client counts for one class

    Each client first gets floor(p_k * n_c) samples; the samples lost to rounding
    are handed out one at a time to the client holding the fewest samples so far
    (lowest client index on ties).

    Args:
        class_size (int): Number of samples of the class to distribute
        proportions (np.array): Dirichlet draw over clients
        running_totals (np.array): Samples every client already holds from earlier classes

    Returns:
        np.array: Integer count per client summing to class_size
    """
    counts = np.floor(proportions * class_size).astype(np.int64)
    leftover = class_size - int(counts.sum())

    for _ in range(leftover):
        receiver = int(np.argmin(running_totals + counts))
        counts[receiver] += 1

    return counts

def _client_layout(regions: int, clients_per_region: int) -> list:
    """
    (Internal Helper) Global client ids in region-major order: [(region, client_id), ...]
    """
    return [(k // clients_per_region, k) for k in range(regions * clients_per_region)]

def _check_every_client_served(totals: np.ndarray) -> None:
    """
    (Internal Helper) Raise when a client ends up with no samples in any class
    """
    empty_clients = np.flatnonzero(totals == 0)
    if empty_clients.size:
        raise InfeasiblePartitionError(
            f"clients {empty_clients.tolist()} would receive zero samples; lower the client count or raise alpha"
        )

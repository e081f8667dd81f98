"""Binary result cache keyed by content hashes of the model parameters.

Record layout (little-endian): an 8-byte magic, a uint32 format version, a
uint8 record kind, the spec fields (two_j as int64; k, mu, tau as float64),
then the payload.  Complex matrices are stored row-major as float64
(re, im) pairs.  Keys mix the spec's exact hex floats with the package
version, so stale records are never served across code changes.
"""

from __future__ import annotations

import hashlib
import os
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import NumericError
from .floquet import EigenSystem, FloquetSpec

MAGIC = b"KSPNCACH"
FORMAT_VERSION = 1

KIND_EIGENSYSTEM = 1
KIND_PHASES = 2
KIND_D2MAP = 3

_HEADER = struct.Struct("<8sIBqddd")

ENV_CACHE_DIR = "KICKEDSPIN_CACHE_DIR"


def cache_key(spec: FloquetSpec, kind: int, extra: str = "") -> str:
    payload = ":".join([spec.content_key(), str(kind), extra, __version__])
    return hashlib.sha256(payload.encode()).hexdigest()


def resolve_cache_dir(explicit: str | os.PathLike | None = None) -> Path:
    if explicit is not None:
        return Path(explicit)
    env = os.environ.get(ENV_CACHE_DIR)
    if env:
        return Path(env)
    return Path.cwd() / ".kickedspin-cache"


@dataclass
class ResultCache:
    """Content-addressed store of eigensystems, eigenphase sets, and D2 maps."""

    root: Path
    hits: int = 0
    misses: int = 0
    _created: bool = field(default=False, repr=False)

    def __init__(self, root: str | os.PathLike | None = None):
        self.root = resolve_cache_dir(root)
        self.hits = 0
        self.misses = 0
        self._created = False

    def _path(self, key: str) -> Path:
        return self.root / f"{key}.bin"

    def _ensure_dir(self):
        if not self._created:
            self.root.mkdir(parents=True, exist_ok=True)
            self._created = True

    # -- write ------------------------------------------------------------

    def _write(self, key: str, spec: FloquetSpec, kind: int, payload: bytes):
        self._ensure_dir()
        header = _HEADER.pack(MAGIC, FORMAT_VERSION, kind, spec.two_j,
                              spec.k, spec.mu, spec.tau)
        tmp = self._path(key).with_suffix(".tmp")
        tmp.write_bytes(header + payload)
        os.replace(tmp, self._path(key))

    def put_eigensystem(self, spec: FloquetSpec, eig: EigenSystem) -> str:
        key = cache_key(spec, KIND_EIGENSYSTEM)
        dim = eig.dim
        vec = np.empty((dim, dim, 2))
        vec[..., 0] = eig.eigenvectors.real
        vec[..., 1] = eig.eigenvectors.imag
        payload = (struct.pack("<q", dim)
                   + eig.eigenphases.astype("<f8").tobytes()
                   + vec.astype("<f8").tobytes())
        self._write(key, spec, KIND_EIGENSYSTEM, payload)
        return key

    def put_phases(self, spec: FloquetSpec, phases: np.ndarray) -> str:
        key = cache_key(spec, KIND_PHASES)
        payload = struct.pack("<q", phases.size) + np.asarray(phases).astype("<f8").tobytes()
        self._write(key, spec, KIND_PHASES, payload)
        return key

    def put_d2map(self, spec: FloquetSpec, values: np.ndarray, q: float) -> str:
        key = cache_key(spec, KIND_D2MAP, extra=f"{values.shape[0]}x{values.shape[1]}:q={q!r}")
        payload = struct.pack("<qq", *values.shape) + np.asarray(values).astype("<f8").tobytes()
        self._write(key, spec, KIND_D2MAP, payload)
        return key

    # -- read -------------------------------------------------------------

    def _read(self, key: str, spec: FloquetSpec, kind: int) -> bytes | None:
        path = self._path(key)
        if not path.exists():
            self.misses += 1
            return None
        blob = path.read_bytes()
        magic, version, got_kind, two_j, k, mu, tau = _HEADER.unpack_from(blob)
        if magic != MAGIC or version != FORMAT_VERSION or got_kind != kind:
            raise NumericError(f"cache record {path} has a mismatched header")
        if (two_j, k, mu, tau) != (spec.two_j, spec.k, spec.mu, spec.tau):
            raise NumericError(f"cache record {path} does not match the requested spec")
        self.hits += 1
        return blob[_HEADER.size:]

    def get_eigensystem(self, spec: FloquetSpec) -> EigenSystem | None:
        payload = self._read(cache_key(spec, KIND_EIGENSYSTEM), spec, KIND_EIGENSYSTEM)
        if payload is None:
            return None
        (dim,) = struct.unpack_from("<q", payload)
        off = 8
        phases = np.frombuffer(payload, dtype="<f8", count=dim, offset=off).copy()
        off += dim * 8
        flat = np.frombuffer(payload, dtype="<f8", count=dim * dim * 2, offset=off)
        vec = flat.reshape(dim, dim, 2)
        return EigenSystem(phases, vec[..., 0] + 1j * vec[..., 1], spec=spec)

    def get_phases(self, spec: FloquetSpec) -> np.ndarray | None:
        payload = self._read(cache_key(spec, KIND_PHASES), spec, KIND_PHASES)
        if payload is None:
            return None
        (n,) = struct.unpack_from("<q", payload)
        return np.frombuffer(payload, dtype="<f8", count=n, offset=8).copy()

    def get_d2map(self, spec: FloquetSpec, shape: tuple[int, int], q: float) -> np.ndarray | None:
        key = cache_key(spec, KIND_D2MAP, extra=f"{shape[0]}x{shape[1]}:q={q!r}")
        payload = self._read(key, spec, KIND_D2MAP)
        if payload is None:
            return None
        nt, npz = struct.unpack_from("<qq", payload)
        if (nt, npz) != shape:
            raise NumericError("cached D2 map has an unexpected shape")
        return np.frombuffer(payload, dtype="<f8", count=nt * npz, offset=16).reshape(shape).copy()

    # -- maintenance --------------------------------------------------------

    def entries(self):
        if not self.root.exists():
            return []
        return sorted(self.root.glob("*.bin"))

    def total_bytes(self) -> int:
        return sum(p.stat().st_size for p in self.entries())

    def gc(self, max_bytes: int) -> list[str]:
        """Delete oldest records (by mtime) until the store fits max_bytes."""
        removed = []
        entries = sorted(self.entries(), key=lambda p: p.stat().st_mtime)
        total = sum(p.stat().st_size for p in entries)
        for path in entries:
            if total <= max_bytes:
                break
            total -= path.stat().st_size
            path.unlink()
            removed.append(path.name)
        return removed

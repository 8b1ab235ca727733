"""
GVCK tensor container shared by checkpoints and feature files.

Layout (all integers little-endian)::

    b'GVCK' | u32 version | u64 header length | JSON header | payload

The header holds free-form ``meta`` plus a ``tensors`` index mapping each name
to dtype, shape, byte offset and byte length inside the payload. Blobs are
little-endian float32, or float64 for arrays that are already float64, written
in sorted name order. The JSON is dumped with sorted keys, so a container that
is read and written again is byte-identical.
"""

import json
import logging
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from django.conf import settings

from storage.exceptions import BadMagic, CorruptIndex, VersionUnsupported

logger = logging.getLogger(__name__)

PREAMBLE = struct.Struct('<4sIQ')
BLOB_DTYPES = {'float32': np.dtype('<f4'), 'float64': np.dtype('<f8')}


def blob_dtype(array: np.ndarray) -> str:
    return 'float64' if np.asarray(array).dtype == np.float64 else 'float32'


@dataclass
class TensorContainer:
    """
    In-memory view of a GVCK file.

    Attributes:
        meta: JSON-serializable header fields (hyperparameters, ids, ...)
        tensors: Name to float32 or float64 array
    """

    meta: dict = field(default_factory=dict)
    tensors: dict[str, np.ndarray] = field(default_factory=dict)

    def to_bytes(self) -> bytes:
        """Serialize to the GVCK byte layout."""
        index = {}
        blobs = []
        offset = 0
        for name in sorted(self.tensors):
            dtype = blob_dtype(self.tensors[name])
            blob = np.ascontiguousarray(self.tensors[name], dtype=BLOB_DTYPES[dtype]).tobytes()
            index[name] = {
                'dtype': dtype,
                'shape': list(np.shape(self.tensors[name])),
                'offset': offset,
                'length': len(blob),
            }
            blobs.append(blob)
            offset += len(blob)

        header = json.dumps(
            {'meta': self.meta, 'tensors': index},
            sort_keys=True,
            separators=(',', ':'),
            allow_nan=False,
        ).encode('utf-8')
        preamble = PREAMBLE.pack(
            settings.GLOWVC_CONTAINER_MAGIC, settings.GLOWVC_CONTAINER_VERSION, len(header)
        )
        return preamble + header + b''.join(blobs)

    @classmethod
    def from_bytes(cls, data: bytes) -> 'TensorContainer':
        """
        Parse a GVCK byte string.

        Raises:
            BadMagic: The magic is not ``GVCK``
            VersionUnsupported: The version is not the one this build writes
            CorruptIndex: The header is truncated, invalid, or indexes bytes
                outside the payload
        """
        if len(data) < PREAMBLE.size:
            if not settings.GLOWVC_CONTAINER_MAGIC.startswith(data[:4]):
                raise BadMagic('not a GVCK container')
            raise CorruptIndex(f'container truncated to {len(data)} bytes')

        magic, version, header_length = PREAMBLE.unpack_from(data)
        if magic != settings.GLOWVC_CONTAINER_MAGIC:
            raise BadMagic(f'unexpected magic {magic!r}')
        if version != settings.GLOWVC_CONTAINER_VERSION:
            raise VersionUnsupported(f'container version {version} is not supported')

        header_end = PREAMBLE.size + header_length
        if header_end > len(data):
            raise CorruptIndex('header extends past the end of the file')
        try:
            header = json.loads(data[PREAMBLE.size : header_end].decode('utf-8'))
            meta = header['meta']
            index = header['tensors']
        except (UnicodeDecodeError, json.JSONDecodeError, KeyError, TypeError) as exc:
            raise CorruptIndex(f'unreadable header: {exc}') from exc

        payload = memoryview(data)[header_end:]
        tensors = {}
        for name, entry in index.items():
            try:
                shape = tuple(int(dim) for dim in entry['shape'])
                offset, length = int(entry['offset']), int(entry['length'])
                dtype = entry['dtype']
            except (KeyError, TypeError, ValueError) as exc:
                raise CorruptIndex(f'tensor {name!r}: malformed index entry') from exc
            if dtype not in BLOB_DTYPES:
                raise CorruptIndex(f'tensor {name!r}: unsupported dtype {dtype}')
            if offset < 0 or length < 0 or offset + length > len(payload):
                raise CorruptIndex(f'tensor {name!r}: region outside the payload')
            blob = BLOB_DTYPES[dtype]
            if int(np.prod(shape, dtype=np.int64)) * blob.itemsize != length:
                raise CorruptIndex(f'tensor {name!r}: shape {shape} does not match {length} bytes')
            tensors[name] = (
                np.frombuffer(payload[offset : offset + length], dtype=blob)
                .reshape(shape)
                .astype(np.float64 if dtype == 'float64' else np.float32)
            )
        return cls(meta=meta, tensors=tensors)

    def write(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(self.to_bytes())
        logger.debug('wrote %s (%d tensors)', path, len(self.tensors))
        return path

    @classmethod
    def read(cls, path: str | Path) -> 'TensorContainer':
        return cls.from_bytes(Path(path).read_bytes())

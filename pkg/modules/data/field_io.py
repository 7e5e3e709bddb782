"""Binary container for grid functions"""
import os
import logging
from typing import Union
import numpy as np
from modules.debug.errors import ConfigurationError
from modules.data.report import atomic_write
from modules.spectral.grid import PeriodicGrid, ScalarField, VectorField

logger = logging.getLogger(__name__)

MAGIC = b"RLXF"
VERSION = 1
HEADER = np.dtype([('magic', 'S4'), ('version', 'u1'), ('dim', 'u1'), ('points', '<u4'), ('period', '<f8'),
                   ('components', '<u2')])


def encode_field(field: Union[ScalarField, VectorField]) -> bytes:
    """Serialises a field: header, then the values as little-endian doubles in row-major order

    Args:
        field (Union[ScalarField, VectorField]): field to encode

    Returns:
        bytes: container contents
    """
    grid = field.grid
    header = np.array([(MAGIC, VERSION, grid.dim, grid.points, grid.period, field.components)], dtype=HEADER)
    return header.tobytes() + np.ascontiguousarray(field.values, dtype='<f8').tobytes(order='C')


def decode_field(payload: bytes) -> Union[ScalarField, VectorField]:
    """Inverse of :func:`encode_field`

    Args:
        payload (bytes): container contents

    Returns:
        Union[ScalarField, VectorField]: a scalar field for one component, a vector field otherwise
    """
    if len(payload) < HEADER.itemsize:
        raise ConfigurationError("field container is truncated")
    header = np.frombuffer(payload[:HEADER.itemsize], dtype=HEADER)[0]
    if header['magic'] != MAGIC:
        raise ConfigurationError("not a field container")
    if header['version'] != VERSION:
        raise ConfigurationError(f"unsupported container version {header['version']}")
    grid = PeriodicGrid(int(header['dim']), int(header['points']), float(header['period']))
    components = int(header['components'])
    values = np.frombuffer(payload[HEADER.itemsize:], dtype='<f8')
    expected = components * grid.points**grid.dim
    if values.size != expected:
        raise ConfigurationError(f"field container holds {values.size} values, expected {expected}")
    if components == 1:
        return ScalarField(grid, values.reshape(grid.shape))
    return VectorField(grid, values.reshape((components, ) + grid.shape))


def write_field(path: str, field: Union[ScalarField, VectorField]):
    """Writes a field container atomically

    Args:
        path (str): destination file
        field (Union[ScalarField, VectorField]): field to store
    """
    atomic_write(path, encode_field(field))
    logger.debug("field of %d component(s) written to %s", field.components, path)


def read_field(path: str) -> Union[ScalarField, VectorField]:
    """Reads a field container

    Args:
        path (str): file to read

    Returns:
        Union[ScalarField, VectorField]: stored field
    """
    if not os.path.exists(path):
        raise ConfigurationError(f"field container {path} not found", "norm.field")
    with open(path, "rb") as in_file:
        return decode_field(in_file.read())

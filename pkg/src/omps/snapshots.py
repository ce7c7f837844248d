"""Simulation snapshots and their on-disk formats.

Binary layout: a little-endian header ``<4sIdIII`` holding the magic
``OMPS``, format version, time tau, mirror count N, points per mirror M
and grid size n, followed by float64 arrays xbar, Re F, Im F, Z (length n
each) then z, v (length N each).
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MAGIC = b"OMPS"
VERSION = 1
_HEADER = struct.Struct("<4sIdIII")


@dataclass
class Snapshot:
    """State of a run at one instant."""

    tau: float
    xbar: np.ndarray
    field: np.ndarray
    zgrid: np.ndarray
    z: np.ndarray
    v: np.ndarray
    n_mirrors: int
    points_per_mirror: int

    def __post_init__(self):
        n = self.xbar.size
        if self.field.size != n or self.zgrid.size != n:
            raise ValueError("field and Z must match the grid length")
        if self.z.size != self.n_mirrors or self.v.size != self.n_mirrors:
            raise ValueError("z and v must have one entry per mirror")
        if self.n_mirrors * self.points_per_mirror != n:
            raise ValueError("grid length must equal n_mirrors*points_per_mirror")

    @property
    def n_points(self) -> int:
        return self.xbar.size

    @property
    def intensity(self) -> np.ndarray:
        return np.abs(self.field) ** 2

    def to_bytes(self) -> bytes:
        head = _HEADER.pack(MAGIC, VERSION, self.tau, self.n_mirrors,
                            self.points_per_mirror, self.n_points)
        parts = [head]
        for arr in (self.xbar, self.field.real, self.field.imag, self.zgrid,
                    self.z, self.v):
            parts.append(np.ascontiguousarray(arr, dtype="<f8").tobytes())
        return b"".join(parts)

    def write(self, path) -> None:
        Path(path).write_bytes(self.to_bytes())

    @classmethod
    def from_bytes(cls, data: bytes) -> "Snapshot":
        if len(data) < _HEADER.size:
            raise ValueError("truncated snapshot: header incomplete")
        magic, version, tau, n_mirrors, m, n = _HEADER.unpack_from(data)
        if magic != MAGIC:
            raise ValueError(f"bad magic {magic!r}, expected {MAGIC!r}")
        if version != VERSION:
            raise ValueError(f"unsupported snapshot version {version}")
        if n_mirrors * m != n:
            raise ValueError("inconsistent header: N*M != n_points")
        expect = _HEADER.size + 8 * (4 * n + 2 * n_mirrors)
        if len(data) != expect:
            raise ValueError(f"snapshot payload is {len(data)} bytes, expected {expect}")

        off = _HEADER.size
        def take(count):
            nonlocal off
            arr = np.frombuffer(data, dtype="<f8", count=count, offset=off).copy()
            off += 8 * count
            return arr

        xbar = take(n)
        field = take(n) + 1j * take(n)
        zgrid = take(n)
        z = take(n_mirrors)
        v = take(n_mirrors)
        return cls(tau=tau, xbar=xbar, field=field, zgrid=zgrid, z=z, v=v,
                   n_mirrors=n_mirrors, points_per_mirror=m)

    @classmethod
    def read(cls, path) -> "Snapshot":
        return cls.from_bytes(Path(path).read_bytes())


def export_csv(snapshot: Snapshot, path) -> None:
    """Write xbar, intensity and Z as delimited text, 17 significant digits."""
    intensity = snapshot.intensity
    with open(path, "w") as fh:
        fh.write("xbar,intensity,Z\n")
        for x, i, z in zip(snapshot.xbar, intensity, snapshot.zgrid):
            fh.write(f"{x:.17g},{i:.17g},{z:.17g}\n")


def read_csv(path) -> dict[str, np.ndarray]:
    """Read back a profile written by export_csv."""
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "xbar,intensity,Z":
            raise ValueError(f"unexpected column header {header!r}")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    return {"xbar": data[:, 0], "intensity": data[:, 1], "Z": data[:, 2]}

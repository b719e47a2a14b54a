"""Loading, subsampling and exporting point sets.

Two input formats are supported: plain CSV (one point per row) and
band-sequential raster images described by a small ``key=value`` sidecar::

    width=300
    height=120
    bands=256
    dtype=f32le
    interleave=bsq

A raster becomes one point per pixel (row-major), each point being the
spectrum of that pixel.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import (
    ContractError,
    DataFormatError,
    InsufficientDataError,
    UnsupportedOperationError,
)

RASTER_DTYPES = {"u8": np.dtype("u1"), "u16le": np.dtype("<u2"), "f32le": np.dtype("<f4")}


@dataclass(frozen=True, eq=False)
class Dataset:
    """N points in L dimensions.

    ``values`` is an (N, L) float array; row ``i`` is the point with index ``i``.
    ``shape`` is ``(height, width)`` for raster data and ``None`` otherwise.
    """

    values: np.ndarray
    source: str = ""
    shape: Optional[tuple[int, int]] = None

    def __post_init__(self):
        values = np.array(self.values, dtype=float, ndmin=2, copy=True)
        if values.ndim != 2:
            raise ContractError(f"point array must be 2-D, got shape {values.shape}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if self.shape is not None:
            h, w = self.shape
            if h * w != values.shape[0]:
                raise ContractError(f"raster shape {self.shape} does not match {values.shape[0]} points")

    @property
    def n_points(self) -> int:
        return self.values.shape[0]

    @property
    def dimension(self) -> int:
        return self.values.shape[1]

    @property
    def is_raster(self) -> bool:
        return self.shape is not None

    def __len__(self):
        return self.n_points

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            self.shape == other.shape
            and self.values.shape == other.values.shape
            and bool(np.array_equal(self.values, other.values))
        )

    __hash__ = None


def require_points(d: Dataset, minimum: int = 2) -> None:
    if d.n_points < minimum:
        raise InsufficientDataError(f"need at least {minimum} points, got {d.n_points} ({d.source or 'dataset'})")


def load_csv(path, has_header: bool = False) -> Dataset:
    """Read a numeric CSV file, one point per row.

    Blank cells are rejected rather than imputed.
    """
    path = Path(path)
    rows = []
    width = None
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        for line_no, row in enumerate(reader, start=1):
            if has_header and line_no == 1:
                continue
            if not row:
                continue
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise DataFormatError(f"{path}: row {line_no} has {len(row)} columns, expected {width}")
            parsed = []
            for col_no, cell in enumerate(row, start=1):
                try:
                    value = float(cell)
                except ValueError:
                    raise DataFormatError(
                        f"{path}: cannot parse {cell!r} at row {line_no}, column {col_no}"
                    ) from None
                if not math.isfinite(value):
                    raise DataFormatError(f"{path}: non-finite value at row {line_no}, column {col_no}")
                parsed.append(value)
            rows.append(parsed)
    if len(rows) < 2:
        raise InsufficientDataError(f"{path}: need at least 2 points, found {len(rows)}")
    return Dataset(np.asarray(rows, dtype=float), source=str(path))


def read_raster_header(path) -> dict:
    header = {}
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DataFormatError(f"{path}: malformed header line {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        header[key.lower()] = value
    missing = {"width", "height", "bands", "dtype"} - header.keys()
    if missing:
        raise DataFormatError(f"{path}: header missing {sorted(missing)}")
    try:
        for key in ("width", "height", "bands"):
            header[key] = int(header[key])
    except ValueError as exc:
        raise DataFormatError(f"{path}: {exc}") from None
    if min(header["width"], header["height"], header["bands"]) < 1:
        raise DataFormatError(f"{path}: width, height and bands must be positive")
    if header["dtype"] not in RASTER_DTYPES:
        raise DataFormatError(f"{path}: dtype must be one of {sorted(RASTER_DTYPES)}, got {header['dtype']!r}")
    header.setdefault("interleave", "bsq")
    if header["interleave"] != "bsq":
        raise DataFormatError(f"{path}: only interleave=bsq is supported")
    return header


def load_raster(header_path, data_path) -> Dataset:
    header = read_raster_header(header_path)
    w, h, bands = header["width"], header["height"], header["bands"]
    dtype = RASTER_DTYPES[header["dtype"]]
    raw = Path(data_path).read_bytes()
    expected = w * h * bands * dtype.itemsize
    if len(raw) != expected:
        raise DataFormatError(f"{data_path}: expected {expected} bytes for {w}x{h}x{bands} {header['dtype']}, got {len(raw)}")
    cube = np.frombuffer(raw, dtype=dtype).reshape(bands, h * w)
    values = cube.T.astype(float)
    if not np.all(np.isfinite(values)):
        raise DataFormatError(f"{data_path}: non-finite samples")
    return Dataset(values, source=str(data_path), shape=(h, w))


def write_raster(header_path, data_path, cube: np.ndarray, dtype: str = "f32le") -> None:
    """Write an (height, width, bands) array as a BSQ raster with sidecar header."""
    cube = np.asarray(cube)
    if cube.ndim == 2:
        cube = cube[:, :, None]
    h, w, bands = cube.shape
    Path(header_path).write_text(
        f"width={w}\nheight={h}\nbands={bands}\ndtype={dtype}\ninterleave=bsq\n", encoding="utf-8"
    )
    bsq = np.ascontiguousarray(np.moveaxis(cube, 2, 0)).astype(RASTER_DTYPES[dtype])
    Path(data_path).write_bytes(bsq.tobytes())


def subsample(d: Dataset, row_step: int, col_step: int = 1) -> Dataset:
    """Keep pixels whose row is a multiple of ``row_step`` and column of ``col_step``.

    For non-raster data only ``col_step == 1`` is allowed, and ``row_step``
    thins the point list.
    """
    if row_step < 1 or col_step < 1:
        raise ContractError("subsampling steps must be >= 1")
    if not d.is_raster:
        if col_step != 1:
            raise UnsupportedOperationError("column subsampling needs a raster dataset")
        return Dataset(d.values[::row_step], source=d.source)
    h, w = d.shape
    grid = d.values.reshape(h, w, d.dimension)[::row_step, ::col_step]
    nh, nw = grid.shape[:2]
    return Dataset(grid.reshape(nh * nw, d.dimension), source=d.source, shape=(nh, nw))


def export_labels(d: Dataset, labels, path) -> list[Path]:
    """Write ``index,label`` rows; rasters also get one 0/255 mask per label.

    Returns the paths written. Label -1 marks unassigned points and gets no mask.
    """
    labels = np.asarray(labels)
    if labels.shape != (d.n_points,):
        raise ContractError(f"expected {d.n_points} labels, got {labels.shape[0] if labels.ndim else 0}")
    if labels.size and labels.min() < -1:
        raise ContractError("labels must be -1 or non-negative")
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write("index,label\n")
        for i, lab in enumerate(labels.tolist()):
            fh.write(f"{i},{lab}\n")
    written = [path]
    if d.is_raster:
        h, w = d.shape
        for k in np.unique(labels[labels >= 0]).tolist():
            mask = np.where(labels == k, 255, 0).astype(np.uint8).reshape(h, w)
            hdr = path.with_name(f"{path.stem}_mask{k}.hdr")
            raw = path.with_name(f"{path.stem}_mask{k}.raw")
            write_raster(hdr, raw, mask, dtype="u8")
            written += [hdr, raw]
    return written


def load_labels(path) -> np.ndarray:
    """Read an ``index,label`` CSV back into a label vector ordered by index."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if rows and rows[0] and rows[0][0].strip() == "index":
        rows = rows[1:]
    rows = [r for r in rows if r]
    try:
        pairs = sorted((int(i), int(lab)) for i, lab in rows)
    except ValueError as exc:
        raise DataFormatError(f"{path}: {exc}") from None
    if [i for i, _ in pairs] != list(range(len(pairs))):
        raise DataFormatError(f"{path}: indices must be 0..N-1")
    return np.array([lab for _, lab in pairs], dtype=int)


def load_reference(path) -> np.ndarray:
    """Reference labels: either ``index,label`` CSV or one label per line."""
    text = Path(path).read_text(encoding="utf-8").split()
    if text and ("," in text[0]):
        return load_labels(path)
    try:
        return np.array([int(t) for t in text], dtype=int)
    except ValueError as exc:
        raise DataFormatError(f"{path}: {exc}") from None

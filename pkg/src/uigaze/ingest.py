"""Parsers for eye-tracker logs, image manifests, and segmentation files,
plus the filtering rules applied before analysis.

Tracker logs are delimiter-separated text with a header row. Consecutive
rows sharing a fixation id collapse to one fixation carrying the final
reported duration (trackers report cumulative duration per sample), and
rows whose validity flag is false are dropped. Log coordinates are screen
fractions; a letterbox transform converts them to image-normalized
coordinates when presentation geometry is known.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

from .core import ElementBox, Fixation, ImageMeta, Scanpath
from .errors import (
    EmptyLog,
    MalformedDocument,
    MalformedRow,
    MissingColumn,
    UnknownCategory,
)

DEFAULT_SCREEN = (1920, 1200)


@dataclass(frozen=True)
class ColumnMapping:
    """Names of the log columns used by the parser.

    Defaults follow Gazepoint-style exports (point-of-gaze x/y fractions,
    cumulative fixation duration, fixation id, validity flag).
    """

    x: str = "FPOGX"
    y: str = "FPOGY"
    duration: str = "FPOGD"
    fixation_id: str = "FPOGID"
    valid: str = "FPOGV"
    timestamp: str = "TIME"
    stimulus: str = "MEDIA_NAME"

    def required(self) -> tuple[str, ...]:
        return (
            self.x,
            self.y,
            self.duration,
            self.fixation_id,
            self.valid,
            self.timestamp,
            self.stimulus,
        )


def _parse_float(value, line_number, column):
    try:
        return float(value)
    except (TypeError, ValueError):
        raise MalformedRow(line_number, f"column {column!r} value {value!r}") from None


def parse_fixation_log(
    path,
    mapping: ColumnMapping = ColumnMapping(),
    viewer_id: str | None = None,
    delimiter: str = ",",
) -> list[Scanpath]:
    """Parse one tracker log into one Scanpath per (viewer, image) pair.

    Fixation onsets are seconds since the first valid sample of that
    stimulus. viewer_id defaults to the file stem (one log per participant
    and block).
    """
    path = Path(path)
    viewer = viewer_id if viewer_id is not None else path.stem
    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyLog(f"{path}: no header row") from None
        header = [h.strip() for h in header]
        col = {}
        for name in mapping.required():
            if name not in header:
                raise MissingColumn(name)
            col[name] = header.index(name)
        width = max(col.values()) + 1

        # rows per stimulus, in order of first appearance
        groups: dict[str, list] = {}
        for line_number, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) < width:
                raise MalformedRow(line_number, f"{len(row)} columns, need {width}")
            valid = _parse_float(row[col[mapping.valid]], line_number, mapping.valid)
            if not valid:
                continue
            record = (
                line_number,
                _parse_float(row[col[mapping.timestamp]], line_number, mapping.timestamp),
                row[col[mapping.fixation_id]].strip(),
                _parse_float(row[col[mapping.x]], line_number, mapping.x),
                _parse_float(row[col[mapping.y]], line_number, mapping.y),
                _parse_float(row[col[mapping.duration]], line_number, mapping.duration),
            )
            groups.setdefault(row[col[mapping.stimulus]].strip(), []).append(record)

    if not groups:
        raise EmptyLog(f"{path}: no valid data rows")

    scanpaths = []
    for stimulus, rows in groups.items():
        t0 = rows[0][1]
        fixations = []
        run_start = 0
        for i in range(1, len(rows) + 1):
            if i < len(rows) and rows[i][2] == rows[run_start][2]:
                continue
            first = rows[run_start]
            last = rows[i - 1]
            line_number, _, _, x, y, duration = last
            onset = first[1] - t0
            try:
                fixations.append(
                    Fixation(x=x, y=y, onset_s=onset, duration_s=duration)
                )
            except ValueError as exc:
                raise MalformedRow(line_number, str(exc)) from None
            run_start = i
        try:
            scanpaths.append(
                Scanpath(image_id=stimulus, viewer_id=viewer, fixations=tuple(fixations))
            )
        except ValueError as exc:
            raise MalformedRow(rows[run_start - 1][0], str(exc)) from None
    return scanpaths


def filter_in_bounds(scanpath: Scanpath) -> tuple[Scanpath, int]:
    """Drop fixations outside the unit square, preserving order.

    Returns the filtered scanpath and the number of dropped fixations.
    """
    kept = tuple(f for f in scanpath.fixations if f.in_bounds)
    dropped = len(scanpath.fixations) - len(kept)
    if dropped == 0:
        return scanpath, 0
    return (
        Scanpath(scanpath.image_id, scanpath.viewer_id, kept),
        dropped,
    )


def truncate_to_duration(scanpath: Scanpath, horizon_s: float) -> Scanpath:
    """Keep exactly the fixations with onset strictly before horizon_s."""
    if not horizon_s > 0:
        raise ValueError("horizon_s must be positive")
    kept = tuple(f for f in scanpath.fixations if f.onset_s < horizon_s)
    if len(kept) == len(scanpath.fixations):
        return scanpath
    return Scanpath(scanpath.image_id, scanpath.viewer_id, kept)


def parse_segmentation(path) -> list[ElementBox]:
    """Parse a segmentation JSON document: {"elements": [{category, x0, y0,
    x1, y1}, ...]}."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise MalformedDocument(f"{path}: {exc}") from None
    if not isinstance(doc, dict) or "elements" not in doc:
        raise MalformedDocument(f"{path}: missing 'elements' list")
    elements = doc["elements"]
    if not isinstance(elements, list):
        raise MalformedDocument(f"{path}: 'elements' must be a list")
    boxes = []
    for i, entry in enumerate(elements):
        if not isinstance(entry, dict):
            raise MalformedDocument(f"{path}: element {i} is not an object")
        try:
            category = entry["category"]
            rect = (entry["x0"], entry["y0"], entry["x1"], entry["y1"])
        except KeyError as exc:
            raise MalformedDocument(f"{path}: element {i} missing {exc}") from None
        try:
            rect = tuple(float(v) for v in rect)
        except (TypeError, ValueError):
            raise MalformedDocument(f"{path}: element {i} has non-numeric rect") from None
        boxes.append(ElementBox(category=category, rect=rect))
    return boxes


def parse_image_manifest(path, delimiter: str = ",") -> list[ImageMeta]:
    """Parse the image manifest CSV: image_id, ui_type, width, height, and
    an optional block_id column."""
    path = Path(path)
    metas = []
    with open(path, newline="", encoding="utf-8-sig") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise EmptyLog(f"{path}: no header row") from None
        for name in ("image_id", "ui_type", "width", "height"):
            if name not in header:
                raise MissingColumn(name)
        idx = {name: header.index(name) for name in header}
        has_block = "block_id" in idx
        for line_number, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            try:
                width = int(row[idx["width"]])
                height = int(row[idx["height"]])
            except (ValueError, IndexError):
                raise MalformedRow(line_number, "bad width/height") from None
            ui_type = row[idx["ui_type"]].strip()
            block = row[idx["block_id"]].strip() if has_block else None
            try:
                metas.append(
                    ImageMeta(
                        image_id=row[idx["image_id"]].strip(),
                        ui_type=ui_type,
                        width=width,
                        height=height,
                        block_id=block or None,
                    )
                )
            except UnknownCategory:
                raise
            except ValueError as exc:
                raise MalformedRow(line_number, str(exc)) from None
    if not metas:
        raise EmptyLog(f"{path}: manifest has no rows")
    return metas


def letterbox_to_image(
    sx: float, sy: float, meta: ImageMeta, screen: tuple[int, int] = DEFAULT_SCREEN
) -> tuple[float, float]:
    """Convert screen-normalized coordinates to image-normalized ones for a
    stimulus scaled to fit the display and centered.

    Results may fall outside [0, 1]; filter_in_bounds handles those.
    """
    screen_w, screen_h = screen
    scale = min(screen_w / meta.width, screen_h / meta.height)
    frac_w = meta.width * scale / screen_w
    frac_h = meta.height * scale / screen_h
    off_x = (1.0 - frac_w) / 2.0
    off_y = (1.0 - frac_h) / 2.0
    return (sx - off_x) / frac_w, (sy - off_y) / frac_h


def apply_letterbox(
    scanpath: Scanpath, meta: ImageMeta, screen: tuple[int, int] = DEFAULT_SCREEN
) -> Scanpath:
    """Map a screen-normalized scanpath into image-normalized coordinates."""
    fixations = []
    for f in scanpath.fixations:
        x, y = letterbox_to_image(f.x, f.y, meta, screen)
        fixations.append(Fixation(x=x, y=y, onset_s=f.onset_s, duration_s=f.duration_s))
    return Scanpath(scanpath.image_id, scanpath.viewer_id, tuple(fixations))


# --- canonical scanpath files ----------------------------------------------

_CANONICAL_HEADER = ["x", "y", "onset_s", "duration_s"]


def write_canonical(scanpath: Scanpath, path):
    """Write the canonical scanpath format: header plus one fixation per
    row (x, y, onset_s, duration_s), floats at full round-trip precision."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_CANONICAL_HEADER)
        for f in scanpath.fixations:
            writer.writerow(
                [format(v, ".17g") for v in (f.x, f.y, f.onset_s, f.duration_s)]
            )


def read_canonical(path, image_id: str | None = None, viewer_id: str | None = None) -> Scanpath:
    """Read a canonical scanpath file. Identifiers default to the file stem
    split on a double underscore (image__viewer)."""
    path = Path(path)
    if image_id is None or viewer_id is None:
        stem_image, _, stem_viewer = path.stem.partition("__")
        image_id = image_id if image_id is not None else stem_image
        viewer_id = viewer_id if viewer_id is not None else (stem_viewer or "unknown")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != _CANONICAL_HEADER:
            raise MalformedDocument(f"{path}: not a canonical scanpath file")
        fixations = []
        for line_number, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 4:
                raise MalformedRow(line_number, f"{len(row)} fields, need 4")
            x, y, onset, duration = (
                _parse_float(v, line_number, name)
                for v, name in zip(row, _CANONICAL_HEADER)
            )
            try:
                fixations.append(Fixation(x=x, y=y, onset_s=onset, duration_s=duration))
            except ValueError as exc:
                raise MalformedRow(line_number, str(exc)) from None
    return Scanpath(image_id=image_id, viewer_id=viewer_id, fixations=tuple(fixations))

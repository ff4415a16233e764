"""AIS CSV ingestion: parse rows into track points, group into trajectories.

Column names default to the MarineCadastre export (MMSI, BaseDateTime,
LAT, LON, SOG, COG) and can be remapped for other AIS sources.  Rows
with a missing or unparseable LAT, LON, SOG, or COG are rejected and
counted, never silently dropped; every rejection carries its row number
and a reason so the training data stays auditable.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Iterable, TextIO

from .errors import SchemaError
from .track import MotionClass, TrackPoint, Trajectory, classify_motion

#: Internal field -> MarineCadastre column name.
DEFAULT_SCHEMA = {
    "mmsi": "MMSI",
    "timestamp": "BaseDateTime",
    "lat": "LAT",
    "lon": "LON",
    "speed": "SOG",
    "course": "COG",
}

#: AIS "course not available" sentinel.
COG_UNAVAILABLE = 511.0


@dataclass(frozen=True)
class RejectedRow:
    row: int
    reason: str


@dataclass(frozen=True)
class Provenance:
    source: str
    total_rows: int
    accepted: int
    rejected: int
    rejects: tuple[RejectedRow, ...] = field(default=())


@dataclass(frozen=True)
class Dataset:
    points: tuple[TrackPoint, ...]
    provenance: Provenance


def _parse_float(raw: str) -> float | None:
    raw = raw.strip()
    if not raw:
        return None
    try:
        return float(raw)
    except ValueError:
        return None


def _parse_timestamp(raw: str) -> datetime | None:
    raw = raw.strip()
    if not raw:
        return None
    try:
        return datetime.fromisoformat(raw)
    except ValueError:
        return None


def parse_ais_csv(
    source: str | Path | TextIO,
    schema: dict[str, str] | None = None,
) -> Dataset:
    """Parse an AIS CSV file (or open text stream) into a Dataset.

    Raises SchemaError if the header lacks a mapped column.  A COG of
    exactly 360.0 normalizes to 0.0 and the AIS sentinel 511 rejects
    the row, as do out-of-range coordinates and negative speeds.
    """
    schema = dict(DEFAULT_SCHEMA, **(schema or {}))
    if isinstance(source, (str, Path)):
        name = str(source)
        stream: TextIO = open(source, newline="", encoding="utf-8")
        close = True
    else:
        name = getattr(source, "name", "<stream>")
        stream = source
        close = False
    try:
        return _parse_stream(stream, name, schema)
    finally:
        if close:
            stream.close()


def _parse_stream(stream: TextIO, name: str, schema: dict[str, str]) -> Dataset:
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise SchemaError(f"{name}: empty file, no header row") from None
    index: dict[str, int] = {}
    for fieldname, column in schema.items():
        try:
            index[fieldname] = header.index(column)
        except ValueError:
            raise SchemaError(f"{name}: header is missing column {column!r}") from None

    points: list[TrackPoint] = []
    rejects: list[RejectedRow] = []
    total = 0
    for row in reader:
        total += 1
        rowno = reader.line_num
        reason = _row_to_point(row, index, points)
        if reason is not None:
            rejects.append(RejectedRow(rowno, reason))

    prov = Provenance(
        source=name,
        total_rows=total,
        accepted=len(points),
        rejected=len(rejects),
        rejects=tuple(rejects),
    )
    assert prov.accepted + prov.rejected == prov.total_rows
    return Dataset(points=tuple(points), provenance=prov)


def _row_to_point(row: list[str], index: dict[str, int], out: list[TrackPoint]) -> str | None:
    """Append the parsed point to ``out``; return a reject reason otherwise."""
    ncols = max(index.values()) + 1
    if len(row) < ncols:
        return "short row"
    values: dict[str, float] = {}
    for fieldname in ("lat", "lon", "speed", "course"):
        v = _parse_float(row[index[fieldname]])
        if v is None:
            return f"missing or unparseable {fieldname}"
        values[fieldname] = v
    if values["course"] == 360.0:
        values["course"] = 0.0
    if values["course"] == COG_UNAVAILABLE:
        return "course unavailable (511)"
    if values["speed"] < 0.0:
        return "negative speed"
    if not -90.0 <= values["lat"] <= 90.0:
        return "lat out of range"
    if not -180.0 <= values["lon"] <= 180.0:
        return "lon out of range"
    if not 0.0 <= values["course"] < 360.0:
        return "course out of range"
    mmsi = row[index["mmsi"]].strip() or None
    ts = _parse_timestamp(row[index["timestamp"]])
    out.append(
        TrackPoint(
            lat=values["lat"],
            lon=values["lon"],
            speed=values["speed"],
            course=values["course"],
            timestamp=ts,
            vessel_id=mmsi,
        )
    )
    return None


def group_trajectories(dataset: Dataset) -> list[Trajectory]:
    """One trajectory per vessel_id, points sorted by timestamp.

    Points without a vessel_id become singleton trajectories.  Points
    without a timestamp sort after timestamped ones, keeping arrival
    order among themselves.
    """
    groups: dict[str, list[TrackPoint]] = {}
    order: list[str] = []
    singletons: list[TrackPoint] = []
    for p in dataset.points:
        if p.vessel_id is None:
            singletons.append(p)
            continue
        if p.vessel_id not in groups:
            groups[p.vessel_id] = []
            order.append(p.vessel_id)
        groups[p.vessel_id].append(p)

    def sort_key(p: TrackPoint):
        if p.timestamp is None:
            return (1, datetime.min)
        return (0, p.timestamp)

    trajectories = [
        Trajectory(id=vid, points=tuple(sorted(groups[vid], key=sort_key)))
        for vid in order
    ]
    for k, p in enumerate(singletons):
        trajectories.append(Trajectory(id=f"anon-{k}", points=(p,)))
    return trajectories


def split_by_motion(trajectory: Trajectory) -> tuple[list[TrackPoint], list[TrackPoint]]:
    """Partition a trajectory into (stationary, moving), order preserved."""
    stationary: list[TrackPoint] = []
    moving: list[TrackPoint] = []
    for p in trajectory.points:
        if classify_motion(p) is MotionClass.STATIONARY:
            stationary.append(p)
        else:
            moving.append(p)
    return stationary, moving


def write_jsonl(dataset: Dataset, target: str | Path | TextIO) -> None:
    """Serialize points to line-delimited JSON {lat, lon, speed, course, ts, id}."""
    if isinstance(target, (str, Path)):
        with open(target, "w", encoding="utf-8") as fh:
            write_jsonl(dataset, fh)
        return
    for p in dataset.points:
        record = {
            "lat": p.lat,
            "lon": p.lon,
            "speed": p.speed,
            "course": p.course,
            "ts": p.timestamp.isoformat() if p.timestamp else None,
            "id": p.vessel_id,
        }
        target.write(json.dumps(record, sort_keys=True))
        target.write("\n")


def read_jsonl(source: str | Path | TextIO) -> Dataset:
    """Read a JSONL point cache written by :func:`write_jsonl`."""
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as fh:
            text = fh.read()
        name = str(source)
    else:
        text = source.read()
        name = getattr(source, "name", "<stream>")
    points = []
    for line in io.StringIO(text):
        line = line.strip()
        if not line:
            continue
        rec = json.loads(line)
        points.append(
            TrackPoint(
                lat=rec["lat"],
                lon=rec["lon"],
                speed=rec["speed"],
                course=rec["course"],
                timestamp=datetime.fromisoformat(rec["ts"]) if rec.get("ts") else None,
                vessel_id=rec.get("id"),
            )
        )
    prov = Provenance(source=name, total_rows=len(points), accepted=len(points), rejected=0)
    return Dataset(points=tuple(points), provenance=prov)


def points_from_rows(rows: Iterable[tuple]) -> list[TrackPoint]:
    """Build TrackPoints from (lat, lon, speed, course) tuples; test helper."""
    return [TrackPoint(lat=r[0], lon=r[1], speed=r[2], course=r[3]) for r in rows]

"""Parsers and writers for landmark correspondence files.

Three input formats are supported: a plain CSV of paired coordinates, the
MNI tag point format used by the public neurosurgical ultrasound datasets,
and pairs of Slicer markups fiducial (.fcsv) files.  Every parser either
returns a case whose field passes full domain validation or raises an error
naming the first offending location; nothing partially valid escapes.

The canonical internal space is RAS millimeters.  Only the fcsv pair parser
ever converts (LPS inputs get x and y negated), and it records the
conversion as a warning so the report shows it.

Numeric output is ASCII with '.' decimal points and 9 significant digits.
"""

from __future__ import annotations

import io
import re
from dataclasses import dataclass
from enum import Enum

from varioscreen.model import (
    DisplacementField,
    Landmark,
    build_field,
    validate_landmark_list,
)


class ParseError(ValueError):
    pass


class BadHeader(ParseError):
    pass


class BadFloat(ParseError):
    pass


class WrongColumnCount(ParseError):
    pass


class NotTagFile(ParseError):
    pass


class UnsupportedVolumes(ParseError):
    pass


class MalformedPointRecord(ParseError):
    pass


class UnterminatedBlock(ParseError):
    pass


class CoordinateSystemMismatchUnresolvable(ParseError):
    pass


class PointCountMismatch(ParseError):
    pass


class MalformedRow(ParseError):
    pass


class SourceFormat(str, Enum):
    CSV = "csv"
    MNI_TAG = "mni_tag"
    SLICER_FCSV_PAIR = "slicer_fcsv_pair"


@dataclass(frozen=True)
class ParsedCase:
    """A parsed landmark file: cross-validated landmark list plus parse
    warnings.  Single-landmark files parse fine; the minimum-size rule only
    applies once a displacement field is built for screening."""

    case_id: str
    landmarks: tuple[Landmark, ...]
    source_format: SourceFormat
    warnings: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "landmarks", tuple(self.landmarks))
        validate_landmark_list(self.landmarks)

    def field(self) -> DisplacementField:
        return build_field(self.case_id, self.landmarks)


CSV_HEADER = "id,fx,fy,fz,mx,my,mz"


def _float(token: str, line_no: int) -> float:
    try:
        return float(token)
    except ValueError:
        raise BadFloat(f"line {line_no}: not a number: {token!r}") from None


def _decode(data: bytes) -> str:
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(f"not UTF-8 text: {exc}") from None


def parse_csv(data: bytes, case_id: str = "case") -> ParsedCase:
    """Parse the plain CSV correspondence format.

    Header must equal 'id,fx,fy,fz,mx,my,mz' exactly: no trimming, no case
    folding.  Silent column misinterpretation in clinical data is worse
    than a hard error.  Blank lines are skipped, '#' starts a comment line.
    """
    text = _decode(data)
    lines = text.splitlines()
    header_seen = False
    landmarks: list[Landmark] = []
    for line_no, line in enumerate(lines, start=1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        if not header_seen:
            if line != CSV_HEADER:
                raise BadHeader(
                    f"line {line_no}: header must be exactly "
                    f"{CSV_HEADER!r}, got {line!r}"
                )
            header_seen = True
            continue
        parts = line.split(",")
        if len(parts) != 7:
            raise WrongColumnCount(
                f"line {line_no}: expected 7 fields, got {len(parts)}"
            )
        values = [_float(p, line_no) for p in parts[1:]]
        landmarks.append(Landmark(
            id=parts[0],
            fixed=(values[0], values[1], values[2]),
            moving=(values[3], values[4], values[5]),
        ))
    if not header_seen:
        raise BadHeader("missing header row")
    return ParsedCase(
        case_id=case_id,
        landmarks=tuple(landmarks),
        source_format=SourceFormat.CSV,
    )


def write_csv(field: DisplacementField) -> bytes:
    """Inverse of parse_csv; values round-trip to 9 significant digits."""
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    for lm in field.landmarks:
        coords = ",".join(f"{v:.9g}" for v in (*lm.fixed, *lm.moving))
        buf.write(f"{lm.id},{coords}\n")
    return buf.getvalue().encode("utf-8")


TAG_MAGIC = "MNI Tag Point File"
_QUOTED = re.compile(r'"([^"]*)"')


def _tag_tokens(line: str):
    """Tokens of one tag-file line: floats, quoted labels, ';'."""
    pos = 0
    while pos < len(line):
        ch = line[pos]
        if ch.isspace():
            pos += 1
            continue
        if ch == '"':
            m = _QUOTED.match(line, pos)
            if not m:
                yield ("bad", line[pos:])
                return
            yield ("label", m.group(1))
            pos = m.end()
        elif ch == ";":
            yield ("end", ";")
            pos += 1
        else:
            end = pos
            while end < len(line) and not line[end].isspace() and line[end] not in ';"':
                end += 1
            yield ("token", line[pos:end])
            pos = end
    yield ("newline", "")


def parse_mni_tag(data: bytes, case_id: str = "case") -> ParsedCase:
    """Parse a two-volume MNI tag point file.

    Each record in the Points block is six floats (fixed xyz then moving
    xyz), optionally followed by a double-quoted label; records may share
    lines or span them, and the block ends at ';'.  Auxiliary numeric
    fields that some writers place between the coordinates and the label
    are skipped with a warning.  Lines starting with '%' are comments.
    """
    text = _decode(data)
    lines = text.splitlines()
    if not lines or lines[0].strip() != TAG_MAGIC:
        raise NotTagFile(f"first line must be {TAG_MAGIC!r}")

    body = [l for l in lines[1:] if not l.lstrip().startswith("%")]
    volumes = None
    points_start = None
    for idx, line in enumerate(body):
        m = re.match(r"\s*Volumes\s*=\s*(\d+)\s*;", line)
        if m:
            volumes = int(m.group(1))
        m = re.search(r"Points\s*=", line)
        if m:
            points_start = (idx, m.end())
            break
    if volumes is None:
        raise NotTagFile("missing 'Volumes = n;' declaration")
    if volumes != 2:
        raise UnsupportedVolumes(
            f"need a two-volume file to form correspondences, got "
            f"Volumes = {volumes}"
        )
    if points_start is None:
        raise NotTagFile("missing 'Points =' block")

    warnings: list[str] = []
    records: list[tuple[tuple[float, ...], str | None]] = []
    coords: list[float] = []
    label: str | None = None
    extras = 0
    on_record_line = False  # still on the line where the 6th float landed
    terminated = False

    def flush():
        nonlocal coords, label, extras, on_record_line
        if coords:
            records.append((tuple(coords), label))
        if extras:
            warnings.append(
                f"record {len(records)}: skipped {extras} auxiliary "
                f"numeric field(s)"
            )
        coords = []
        label = None
        extras = 0
        on_record_line = False

    start_line, start_col = points_start
    for idx in range(start_line, len(body)):
        line = body[idx] if idx > start_line else body[idx][start_col:]
        for kind, value in _tag_tokens(line):
            if terminated:
                break
            if kind == "newline":
                on_record_line = False
            elif kind == "end":
                if len(coords) in (0, 6):
                    flush()
                    terminated = True
                else:
                    raise MalformedPointRecord(
                        f"record {len(records) + 1}: expected 6 "
                        f"coordinates, got {len(coords)}"
                    )
            elif kind == "label":
                if len(coords) != 6:
                    raise MalformedPointRecord(
                        f"record {len(records) + 1}: label before 6 "
                        f"coordinates were read"
                    )
                label = value
                flush()
            elif kind == "token":
                try:
                    num = float(value)
                except ValueError:
                    raise MalformedPointRecord(
                        f"record {len(records) + 1}: unexpected token "
                        f"{value!r}"
                    ) from None
                if len(coords) < 6:
                    coords.append(num)
                    on_record_line = len(coords) == 6
                elif on_record_line:
                    # trailing numerics (weight/structure/patient fields)
                    extras += 1
                else:
                    flush()
                    coords.append(num)
            else:
                raise MalformedPointRecord(
                    f"record {len(records) + 1}: unbalanced quote in "
                    f"{value!r}"
                )
        if terminated:
            break
    if not terminated:
        raise UnterminatedBlock("Points block not terminated by ';'")

    if any(lab is None for _, lab in records):
        warnings.append("one or more points had no label; indices assigned")
    landmarks = []
    for n, (cs, lab) in enumerate(records, start=1):
        landmarks.append(Landmark(
            id=lab if lab is not None else str(n),
            fixed=(cs[0], cs[1], cs[2]),
            moving=(cs[3], cs[4], cs[5]),
        ))
    return ParsedCase(
        case_id=case_id,
        landmarks=tuple(landmarks),
        source_format=SourceFormat.MNI_TAG,
        warnings=tuple(warnings),
    )


_FCSV_COORD_RE = re.compile(r"#\s*CoordinateSystem\s*[:=]\s*(\S+)")


def _fcsv_space(text: str) -> str | None:
    """RAS or LPS from the CoordinateSystem header, None when absent."""
    for line in text.splitlines():
        if not line.startswith("#"):
            break
        m = _FCSV_COORD_RE.match(line)
        if m:
            value = m.group(1).strip()
            if value in ("0", "RAS"):
                return "RAS"
            if value in ("1", "LPS"):
                return "LPS"
            raise MalformedRow(f"unrecognized CoordinateSystem {value!r}")
    return None


def _fcsv_rows(text: str, filename: str):
    """(line_no, point_id, x, y, z, label) rows of one markups file."""
    rows = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split(",")
        if len(parts) < 4:
            raise MalformedRow(
                f"{filename} line {line_no}: expected at least "
                f"id,x,y,z, got {len(parts)} fields"
            )
        try:
            x, y, z = float(parts[1]), float(parts[2]), float(parts[3])
        except ValueError:
            raise MalformedRow(
                f"{filename} line {line_no}: non-numeric coordinate"
            ) from None
        label = parts[11].strip() if len(parts) > 11 else ""
        rows.append((line_no, parts[0], x, y, z, label))
    return rows


def parse_fcsv_pair(fixed_bytes: bytes, moving_bytes: bytes,
                    case_id: str = "case") -> ParsedCase:
    """Pair two Slicer markups fiducial files by row order.

    The '# CoordinateSystem' header ('0'/'RAS' or '1'/'LPS') decides each
    file's space; LPS coordinates are converted to the canonical RAS by
    negating x and y.  Ids come from the fixed file's label column.
    """
    fixed_text = _decode(fixed_bytes)
    moving_text = _decode(moving_bytes)
    fixed_space = _fcsv_space(fixed_text)
    moving_space = _fcsv_space(moving_text)
    warnings: list[str] = []
    if (fixed_space is None) != (moving_space is None):
        raise CoordinateSystemMismatchUnresolvable(
            "CoordinateSystem header present in only one of the two files"
        )
    if fixed_space is None:
        fixed_space = moving_space = "RAS"
        warnings.append(
            "no CoordinateSystem headers; assuming both files are RAS"
        )

    fixed_rows = _fcsv_rows(fixed_text, "fixed")
    moving_rows = _fcsv_rows(moving_text, "moving")
    if len(fixed_rows) != len(moving_rows):
        raise PointCountMismatch(
            f"fixed file has {len(fixed_rows)} points, moving file has "
            f"{len(moving_rows)}"
        )

    def to_ras(space: str, x: float, y: float, z: float):
        return (-x, -y, z) if space == "LPS" else (x, y, z)

    if fixed_space == "LPS":
        warnings.append("fixed file converted from LPS to RAS")
    if moving_space == "LPS":
        warnings.append("moving file converted from LPS to RAS")

    landmarks = []
    missing_label = False
    for idx, (frow, mrow) in enumerate(zip(fixed_rows, moving_rows), start=1):
        label = frow[5]
        if not label:
            label = str(idx)
            missing_label = True
        landmarks.append(Landmark(
            id=label,
            fixed=to_ras(fixed_space, frow[2], frow[3], frow[4]),
            moving=to_ras(moving_space, mrow[2], mrow[3], mrow[4]),
        ))
    if missing_label:
        warnings.append("one or more points had no label; indices assigned")
    return ParsedCase(
        case_id=case_id,
        landmarks=tuple(landmarks),
        source_format=SourceFormat.SLICER_FCSV_PAIR,
        warnings=tuple(warnings),
    )

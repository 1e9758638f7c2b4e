import io
from datetime import datetime, timezone

import pytest
from hypothesis import given, strategies as st

from heritage_flow.ingestion import (
    MalformedRowError,
    MissingColumnError,
    PhotoRecord,
    parse_photo_csv,
    parse_timestamp,
    validate_record,
    write_photo_csv,
)

HEADER = "photo_id,user_id,lat,lon,timestamp"


def write_csv(tmp_path, lines, name="photos.csv"):
    path = tmp_path / name
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


class TestValidateRecord:
    def test_valid_record(self):
        rec = validate_record(
            {"photo_id": "p1", "user_id": "u1", "lat": "-13.16", "lon": "-72.54",
             "timestamp": "2013-06-01T10:00:00Z"}
        )
        assert isinstance(rec, PhotoRecord)
        assert rec.lat == -13.16
        assert rec.timestamp == datetime(2013, 6, 1, 10, 0, 0, tzinfo=timezone.utc)

    def test_unparseable_timestamp(self):
        raw = {"photo_id": "p1", "user_id": "u1", "lat": "0", "lon": "0", "timestamp": "yesterday"}
        assert validate_record(raw) == "unparseable timestamp"

    def test_lon_out_of_range(self):
        raw = {"photo_id": "p1", "user_id": "u1", "lat": "0", "lon": "-200", "timestamp": "2013-06-01T10:00:00Z"}
        assert validate_record(raw) == "lon out of range"

    def test_lat_out_of_range(self):
        raw = {"photo_id": "p1", "user_id": "u1", "lat": "95.0", "lon": "0", "timestamp": "2013-06-01T10:00:00Z"}
        assert validate_record(raw) == "lat out of range"

    def test_nan_lat_rejected(self):
        raw = {"photo_id": "p1", "user_id": "u1", "lat": "nan", "lon": "0", "timestamp": "2013-06-01T10:00:00Z"}
        assert validate_record(raw) == "lat out of range"

    def test_pre_1990_rejected(self):
        raw = {"photo_id": "p1", "user_id": "u1", "lat": "0", "lon": "0", "timestamp": "1989-12-31T23:59:59Z"}
        assert validate_record(raw) == "timestamp before 1990"

    def test_naive_timestamp_is_utc(self):
        raw = {"photo_id": "p1", "user_id": "u1", "lat": "0", "lon": "0", "timestamp": "2013-06-01T10:00:00"}
        rec = validate_record(raw)
        assert rec.timestamp.tzinfo == timezone.utc

    def test_offset_normalized_to_utc(self):
        raw = {"photo_id": "p1", "user_id": "u1", "lat": "0", "lon": "0",
               "timestamp": "2013-06-01T10:00:00-05:00"}
        rec = validate_record(raw)
        assert rec.timestamp == datetime(2013, 6, 1, 15, 0, 0, tzinfo=timezone.utc)


class TestParseTimestamp:
    def test_z_suffix(self):
        assert parse_timestamp("2013-06-01T10:00:00Z").tzinfo == timezone.utc

    def test_truncates_to_seconds(self):
        assert parse_timestamp("2013-06-01T10:00:00.750Z").microsecond == 0


class TestParsePhotoCsv:
    def test_clean_file(self, tmp_path):
        path = write_csv(tmp_path, [
            HEADER,
            "p1,u1,-13.16,-72.54,2013-06-01T10:00:00Z",
            "p2,u1,-13.17,-72.55,2013-06-01T11:00:00Z",
            "p3,u2,-13.18,-72.56,2013-06-02T09:00:00Z",
        ])
        ds = parse_photo_csv(path)
        assert len(ds.records) == 3
        assert ds.rejected == []

    def test_out_of_range_rejected_with_reason(self, tmp_path):
        path = write_csv(tmp_path, [HEADER, "p1,u1,95.0,0,2013-06-01T10:00:00Z"])
        ds = parse_photo_csv(path)
        assert ds.records == []
        assert ds.rejected[0][1] == "lat out of range"

    def test_duplicate_photo_id_keeps_first(self, tmp_path):
        path = write_csv(tmp_path, [
            HEADER,
            "p1,u1,1.0,1.0,2013-06-01T10:00:00Z",
            "p1,u2,2.0,2.0,2013-06-01T11:00:00Z",
        ])
        ds = parse_photo_csv(path)
        assert len(ds.records) == 1
        assert ds.records[0].user_id == "u1"
        assert ds.rejected == [("p1,u2,2.0,2.0,2013-06-01T11:00:00Z", "duplicate photo_id")]

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            parse_photo_csv(tmp_path / "nope.csv")

    def test_missing_column(self, tmp_path):
        path = write_csv(tmp_path, ["photo_id,user_id,lat,lon", "p1,u1,0,0"])
        with pytest.raises(MissingColumnError) as err:
            parse_photo_csv(path)
        assert err.value.name == "timestamp"

    def test_strict_mode_raises_with_line_number(self, tmp_path):
        path = write_csv(tmp_path, [
            HEADER,
            "p1,u1,0,0,2013-06-01T10:00:00Z",
            "p2,u1,99,0,2013-06-01T10:00:00Z",
        ])
        with pytest.raises(MalformedRowError) as err:
            parse_photo_csv(path, strict=True)
        assert err.value.line_number == 3
        assert err.value.reason == "lat out of range"

    def test_column_order_is_free(self, tmp_path):
        path = write_csv(tmp_path, [
            "timestamp,lon,lat,user_id,photo_id",
            "2013-06-01T10:00:00Z,-72.54,-13.16,u1,p1",
        ])
        ds = parse_photo_csv(path)
        assert ds.records[0].photo_id == "p1"
        assert ds.records[0].lat == -13.16

    def test_url_column_carried(self, tmp_path):
        path = write_csv(tmp_path, [
            HEADER + ",url",
            "p1,u1,0,0,2013-06-01T10:00:00Z,https://example.com/p1.jpg",
            "p2,u1,0,0,2013-06-01T11:00:00Z,",
        ])
        ds = parse_photo_csv(path)
        assert ds.records[0].url == "https://example.com/p1.jpg"
        assert ds.records[1].url is None

    def test_record_plus_rejected_counts_cover_rows(self, tmp_path):
        rows = [
            "p1,u1,0,0,2013-06-01T10:00:00Z",
            "p2,u1,95,0,2013-06-01T10:00:00Z",
            "p1,u1,0,0,2013-06-01T10:00:00Z",
            "p4,u1,0,-200,2013-06-01T10:00:00Z",
        ]
        ds = parse_photo_csv(write_csv(tmp_path, [HEADER, *rows]))
        assert len(ds.records) + len(ds.rejected) == len(rows)


ids = st.text(
    alphabet=st.characters(min_codepoint=33, max_codepoint=126, exclude_characters=',"'),
    min_size=1,
    max_size=12,
)
timestamps = st.datetimes(
    min_value=datetime(1990, 1, 1), max_value=datetime(2030, 1, 1)
).map(lambda dt: dt.replace(microsecond=0, tzinfo=timezone.utc))


@st.composite
def photo_records(draw, photo_id=None):
    return PhotoRecord(
        photo_id=photo_id if photo_id is not None else draw(ids),
        user_id=draw(ids),
        lat=draw(st.floats(min_value=-90, max_value=90, allow_nan=False)),
        lon=draw(st.floats(min_value=-180, max_value=180, allow_nan=False)),
        timestamp=draw(timestamps),
        url=draw(st.none() | st.just("https://example.com/x.jpg")),
    )


@given(st.lists(photo_records(), max_size=20, unique_by=lambda r: r.photo_id))
def test_round_trip_is_identity(tmp_path_factory, records):
    buf = io.StringIO()
    write_photo_csv(records, buf)
    path = tmp_path_factory.mktemp("rt") / "photos.csv"
    path.write_text(buf.getvalue(), encoding="utf-8")
    ds = parse_photo_csv(path)
    assert ds.rejected == []
    assert ds.records == list(records)

    # second round trip yields an identical dataset
    buf2 = io.StringIO()
    write_photo_csv(ds.records, buf2)
    assert buf2.getvalue() == buf.getvalue()

import importlib.resources

import pytest

from stegcap.errors import SchemaError
from stegcap.published import (
    PUBLISHED_HEADER,
    PublishedPoint,
    read_published_csv,
    write_published_csv,
)


def _example_path():
    return importlib.resources.files("stegcap") / "data" / \
        "published_points_example.csv"


def test_shipped_example_parses():
    points = read_published_csv(_example_path())
    assert len(points) >= 8
    for p in points:
        assert p.payload_bpp >= 0.05
        assert 0.05 <= p.p_e_avg <= 0.45
        assert "approximate" in p.source


def test_shipped_example_covers_known_methods():
    points = read_published_csv(_example_path())
    methods = {p.method for p in points}
    assert {"HUGO", "WOW", "S-UNIWARD", "HILL", "MiPOD"} <= methods
    analyzers = {p.steganalyzer for p in points}
    assert {"SRM", "maxSRMd2"} <= analyzers


def test_round_trip(tmp_path):
    points = [
        PublishedPoint("HUGO", "SRM", 0.4, 0.2, "approx"),
        PublishedPoint("a,comma", 'quote"inside', 0.123456789012345, 0.05,
                       "odd, but legal"),
    ]
    path = tmp_path / "points.csv"
    write_published_csv(path, points)
    assert read_published_csv(path) == points


def test_header_row_required(tmp_path):
    path = tmp_path / "noheader.csv"
    path.write_text("HUGO,SRM,0.4,0.2,approx\n")
    with pytest.raises(SchemaError) as err:
        read_published_csv(path)
    assert err.value.line == 1


def test_empty_file_rejected(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("")
    with pytest.raises(SchemaError):
        read_published_csv(path)


def test_header_only_gives_empty_list(tmp_path):
    path = tmp_path / "bare.csv"
    path.write_text(",".join(PUBLISHED_HEADER) + "\n")
    assert read_published_csv(path) == []


def test_bad_number_names_line_and_column(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text(",".join(PUBLISHED_HEADER) + "\n"
                    "HUGO,SRM,not-a-number,0.2,approx\n")
    with pytest.raises(SchemaError) as err:
        read_published_csv(path)
    assert err.value.line == 2
    assert err.value.column == "payload_bpp"
    assert "line 2" in str(err.value)
    assert "payload_bpp" in str(err.value)


def test_out_of_range_pe_names_column(tmp_path):
    path = tmp_path / "range.csv"
    path.write_text(",".join(PUBLISHED_HEADER) + "\n"
                    "HUGO,SRM,0.4,0.7,approx\n")
    with pytest.raises(SchemaError) as err:
        read_published_csv(path)
    assert err.value.line == 2
    assert err.value.column == "pe"


def test_wrong_field_count_reports_line(tmp_path):
    path = tmp_path / "short.csv"
    path.write_text(",".join(PUBLISHED_HEADER) + "\n"
                    "HUGO,SRM,0.4,0.2,approx\n"
                    "WOW,SRM,0.4\n")
    with pytest.raises(SchemaError) as err:
        read_published_csv(path)
    assert err.value.line == 3


def test_blank_lines_skipped(tmp_path):
    path = tmp_path / "blank.csv"
    path.write_text(",".join(PUBLISHED_HEADER) + "\n\n"
                    "HUGO,SRM,0.4,0.2,approx\n\n")
    assert len(read_published_csv(path)) == 1


def test_negative_payload_rejected():
    with pytest.raises(SchemaError):
        PublishedPoint("x", "y", -0.1, 0.2, "s")
    with pytest.raises(SchemaError):
        PublishedPoint("x", "y", 0.1, 0.51, "s")

import numpy as np
import pytest

from qmemsim.errors import InvalidArgument, SortRequiredError, StreamParseError
from qmemsim.streams import TimeTagStream, derive_seeds, read_csv, stream_digest, write_csv


def test_unsorted_construction_is_rejected():
    with pytest.raises(SortRequiredError):
        TimeTagStream(np.array([1, 2]), np.array([5, 3]))


def test_from_unsorted_orders_by_time_then_channel():
    s = TimeTagStream.from_unsorted([2, 1, 1], [5, 5, 3])
    assert s.times.tolist() == [3, 5, 5]
    assert s.channels.tolist() == [1, 1, 2]


def test_unknown_channel():
    s = TimeTagStream.from_unsorted([1], [0], channel_set=(1, 2))
    assert s.channel_times(2).size == 0
    with pytest.raises(InvalidArgument):
        s.channel_times(7)


def test_csv_round_trip_is_lossless(tmp_path):
    rng = np.random.default_rng(3)
    s = TimeTagStream.from_unsorted(rng.integers(1, 4, 500), rng.integers(0, 10 ** 12, 500))
    write_csv(s, tmp_path / "t.csv")
    back = read_csv(tmp_path / "t.csv")
    assert back.equals(s)
    assert stream_digest(back) == stream_digest(s)


def test_csv_errors_name_the_row(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("channel,t_ns\n1,10\n2,1x\n")
    with pytest.raises(StreamParseError, match="row 3"):
        read_csv(p)
    p.write_text("channel,t_ns\n1,10,4\n")
    with pytest.raises(StreamParseError, match="row 2"):
        read_csv(p)
    p.write_text("chan,time\n")
    with pytest.raises(StreamParseError, match="row 1"):
        read_csv(p)


def test_csv_unsorted_file_requires_sorting(tmp_path):
    p = tmp_path / "u.csv"
    p.write_text("channel,t_ns\n1,10\n2,9\n")
    with pytest.raises(SortRequiredError):
        read_csv(p)


def test_empty_file_gives_empty_stream(tmp_path):
    p = tmp_path / "e.csv"
    p.write_text("")
    assert len(read_csv(p)) == 0


def test_derived_seeds_are_stable_and_distinct():
    a = derive_seeds(42, 5)
    assert a == derive_seeds(42, 5)
    assert len(set(a)) == 5
    assert derive_seeds(43, 5) != a

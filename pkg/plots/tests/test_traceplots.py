import glob
from pathlib import Path

import pytest

from traceplots import (
    MODES,
    TRACE_HEADER,
    TraceFormatError,
    plot_traces,
    read_trace,
)
from traceplots.cli import main

HERE = Path(__file__).parent
FIXTURES = HERE / "fixtures"
GOLDEN = HERE / "golden"

GOOD_HEADER = ",".join(TRACE_HEADER)


def write_trace(path, rows, header=GOOD_HEADER):
    lines = [header] + [",".join(str(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")
    return path


class TestReadTrace:
    def test_parses_columns(self, tmp_path):
        p = write_trace(tmp_path / "t.csv", [
            [0, 1.0, 0.5, "nan", "nan", "nan", "nan", 0.1],
            [1, 0.25, 0.1, 2.0, 0, "nan", "nan", 0.2],
        ])
        trace = read_trace(p)
        assert trace.column("iter") == [0.0, 1.0]
        assert trace.column("cost") == [1.0, 0.25]
        assert trace.label == "t"

    def test_header_contract_enforced(self, tmp_path):
        p = write_trace(tmp_path / "bad.csv", [[0, 1, 1, 1, 1, 1, 1, 1]],
                        header=GOOD_HEADER.replace("rho", "ratio"))
        with pytest.raises(TraceFormatError, match="contract"):
            read_trace(p)

    def test_reordered_header_rejected(self, tmp_path):
        cols = list(TRACE_HEADER)
        cols[0], cols[1] = cols[1], cols[0]
        p = write_trace(tmp_path / "bad.csv", [[1, 0, 1, 1, 1, 1, 1, 1]],
                        header=",".join(cols))
        with pytest.raises(TraceFormatError):
            read_trace(p)

    def test_nonmonotone_iter_rejected(self, tmp_path):
        p = write_trace(tmp_path / "bad.csv", [
            [0, 1, 1, 1, 1, 1, 1, 1],
            [2, 1, 1, 1, 1, 1, 1, 2],
            [1, 1, 1, 1, 1, 1, 1, 3],
        ])
        with pytest.raises(TraceFormatError, match="not increasing"):
            read_trace(p)

    def test_short_row_rejected(self, tmp_path):
        p = tmp_path / "bad.csv"
        p.write_text(GOOD_HEADER + "\n0,1.0\n")
        with pytest.raises(TraceFormatError, match="fields"):
            read_trace(p)

    def test_non_numeric_cell_rejected(self, tmp_path):
        p = write_trace(tmp_path / "bad.csv",
                        [[0, "oops", 1, 1, 1, 1, 1, 1]])
        with pytest.raises(TraceFormatError):
            read_trace(p)

    def test_empty_and_headerless(self, tmp_path):
        empty = tmp_path / "empty.csv"
        empty.write_text("")
        with pytest.raises(TraceFormatError, match="empty"):
            read_trace(empty)
        headeronly = tmp_path / "h.csv"
        headeronly.write_text(GOOD_HEADER + "\n")
        with pytest.raises(TraceFormatError, match="no data"):
            read_trace(headeronly)


class TestPlotTraces:
    def test_single_trace_single_curve(self, tmp_path):
        p = write_trace(tmp_path / "one.csv", [
            [0, 1.0, 1, "nan", "nan", "nan", "nan", 0.1],
            [1, 0.1, 0.5, 1.0, 0, "nan", "nan", 0.2],
            [2, 0.01, 0.1, 1.0, 0, "nan", "nan", 0.3],
        ])
        out = plot_traces([p], out=tmp_path / "fig.svg")
        body = out.read_text()
        assert body.count("<svg") == 1
        assert "one" in body  # legend label survives

    def test_empty_list_is_usage_error(self, tmp_path):
        with pytest.raises(ValueError, match="no trace files"):
            plot_traces([], out=tmp_path / "fig.svg")

    def test_all_invalid_is_usage_error(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("not,a,trace\n1,2,3\n")
        with pytest.raises(ValueError, match="valid trace"):
            plot_traces([bad], out=tmp_path / "fig.svg")

    def test_malformed_file_skipped_others_plotted(self, tmp_path, capsys):
        good = write_trace(tmp_path / "good.csv", [
            [0, 1.0, 1, "nan", "nan", "nan", "nan", 0.1],
            [1, 0.5, 0.5, 1.0, 0, "nan", "nan", 0.2],
        ])
        bad = tmp_path / "bad.csv"
        bad.write_text("garbage\n")
        out = plot_traces([bad, good], out=tmp_path / "fig.svg")
        assert out.exists()
        err = capsys.readouterr().err
        assert "skipping" in err and "bad.csv" in err

    def test_unknown_mode_rejected(self, tmp_path):
        p = write_trace(tmp_path / "t.csv",
                        [[0, 1, 1, 1, 1, 1, 1, 1]])
        with pytest.raises(ValueError, match="mode"):
            plot_traces([p], mode="wallclock", out=tmp_path / "f.svg")

    def test_png_output(self, tmp_path):
        p = write_trace(tmp_path / "t.csv", [
            [0, 1.0, 1, "nan", "nan", "nan", "nan", 0.1],
            [1, 0.5, 0.5, 1.0, 0, "nan", "nan", 0.2],
        ])
        out = plot_traces([p], out=tmp_path / "fig.png")
        assert out.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


class TestGolden:
    def test_three_row_trace_is_byte_stable(self, tmp_path):
        csv_path = GOLDEN / "three_row.csv"
        got = plot_traces([csv_path], mode="iterations",
                          out=tmp_path / "regen.svg")
        assert got.read_bytes() == (GOLDEN / "three_row.svg").read_bytes()

    def test_rerender_is_identical(self, tmp_path):
        csv_path = GOLDEN / "three_row.csv"
        a = plot_traces([csv_path], out=tmp_path / "a.svg")
        b = plot_traces([csv_path], out=tmp_path / "b.svg")
        assert a.read_bytes() == b.read_bytes()


class TestEndToEndFixtures:
    # The eight traces of one full benchmark run (four geometries, two
    # solvers), captured once through the public CSV contract.
    def fixture_paths(self):
        paths = sorted(FIXTURES.glob("*.csv"))
        assert len(paths) == 8
        return paths

    @pytest.mark.parametrize("mode", MODES)
    def test_renders_eight_traces(self, tmp_path, mode):
        out = plot_traces(self.fixture_paths(), mode=mode,
                          out=tmp_path / f"{mode}.svg")
        body = out.read_text()
        for p in self.fixture_paths():
            assert p.stem in body

    def test_time_mode_uses_time_axis(self, tmp_path):
        # Wall-time x values are fractions of a second, so the axis upper
        # bound stays far below the iteration counts shown in the other mode.
        paths = self.fixture_paths()
        out = plot_traces(paths, mode="time", out=tmp_path / "t.svg")
        assert out.exists()
        last_times = [read_trace(p).column("time_s")[-1] for p in paths]
        last_iters = [read_trace(p).column("iter")[-1] for p in paths]
        assert max(last_times) < 30.0 < max(last_iters)


class TestCli:
    def test_glob_and_output(self, tmp_path, capsys, monkeypatch):
        monkeypatch.chdir(FIXTURES)
        out = tmp_path / "fig.svg"
        code = main(["*.csv", "--mode", "time", "--out", str(out)])
        assert code == 0
        assert out.exists()
        assert "wrote" in capsys.readouterr().out

    def test_no_match_is_usage_error(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            main([str(tmp_path / "nothing_*.csv")])
        assert exc.value.code == 2

    def test_literal_paths_accepted(self, tmp_path):
        p = write_trace(tmp_path / "t.csv", [
            [0, 1.0, 1, "nan", "nan", "nan", "nan", 0.1],
            [1, 0.5, 0.5, 1.0, 0, "nan", "nan", 0.2],
        ])
        out = tmp_path / "fig.svg"
        assert main([str(p), "--out", str(out)]) == 0
        assert out.exists()

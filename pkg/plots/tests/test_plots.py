"""Rendering tests over the golden CSV fixtures."""

import os
import shutil

import pytest

from fama_plots.cli import main
from fama_plots.figures import FIGURES
from fama_plots.io import SchemaError, load_table
from fama_plots.render import render

GOLDEN = os.path.join(os.path.dirname(__file__), "golden")


# ============================================================================
# RENDERING
# ============================================================================


class TestRender:
    @pytest.mark.parametrize("name", sorted(FIGURES))
    def test_every_figure_renders(self, name, tmp_path):
        svg, png = render(name, GOLDEN, str(tmp_path))
        head = open(svg, "rb").read(64)
        assert head.startswith(b"<?xml")
        assert open(png, "rb").read(8) == b"\x89PNG\r\n\x1a\n"
        assert os.path.getsize(svg) > 1000 and os.path.getsize(png) > 1000

    def test_rerender_is_byte_identical(self, tmp_path):
        for name in ("fig4_bler_vs_n", "fig2_rate_surface", "fig11_training"):
            first = render(name, GOLDEN, str(tmp_path / "a"))
            second = render(name, GOLDEN, str(tmp_path / "b"))
            for p1, p2 in zip(first, second):
                assert open(p1, "rb").read() == open(p2, "rb").read()

    def test_input_csv_never_mutated(self, tmp_path):
        src = os.path.join(GOLDEN, "table2_nstar.csv")
        before = open(src, "rb").read()
        render("table2_nstar", GOLDEN, str(tmp_path))
        assert open(src, "rb").read() == before

    def test_unknown_figure_is_named(self, tmp_path):
        with pytest.raises(KeyError, match="unknown figure 'fig99'"):
            render("fig99", GOLDEN, str(tmp_path))

    def test_zero_bler_points_stay_on_log_axis(self, tmp_path):
        path = tmp_path / "fig4_bler_vs_n.csv"
        path.write_text(
            "mcs_index,codec,w1,w2,n1,n2,users,n_rf,seed,blocks,errors,bler\n"
            "3,coded,2.0,2.0,2,2,8,4,42,100,50,0.5\n"
            "3,coded,2.0,2.0,4,4,8,4,42,100,0,0.0\n")
        svg, _ = render("fig4_bler_vs_n", str(tmp_path), str(tmp_path / "out"))
        assert os.path.getsize(svg) > 1000


# ============================================================================
# SCHEMA DIAGNOSTICS
# ============================================================================


class TestSchema:
    def test_missing_column_is_named(self, tmp_path):
        rows = open(os.path.join(GOLDEN, "fig4_bler_vs_n.csv")).read().splitlines()
        cols = rows[0].split(",")
        drop = cols.index("bler")
        trimmed = "\n".join(
            ",".join(f for i, f in enumerate(r.split(",")) if i != drop)
            for r in rows) + "\n"
        (tmp_path / "fig4_bler_vs_n.csv").write_text(trimmed)
        with pytest.raises(SchemaError, match="missing column 'bler'"):
            render("fig4_bler_vs_n", str(tmp_path), str(tmp_path / "out"))

    def test_header_only_csv_rejected(self, tmp_path):
        (tmp_path / "mobility_gain.csv").write_text(
            "doppler_hz,mcs_index,se,threshold,gain,bler,blocks\n")
        with pytest.raises(SchemaError, match="no data rows"):
            render("mobility_gain", str(tmp_path), str(tmp_path / "out"))

    def test_zero_byte_csv_rejected(self, tmp_path):
        (tmp_path / "mobility_gain.csv").write_text("")
        with pytest.raises(SchemaError, match="empty CSV"):
            render("mobility_gain", str(tmp_path), str(tmp_path / "out"))

    def test_ragged_row_reports_line(self, tmp_path):
        (tmp_path / "table2_nstar.csv").write_text(
            "n1,n2,rate,is_n_star\n2,2,1.0,0\n3,3,1.2\n")
        with pytest.raises(SchemaError, match="line 3"):
            render("table2_nstar", str(tmp_path), str(tmp_path / "out"))

    def test_missing_file_names_path(self, tmp_path):
        with pytest.raises(SchemaError, match="not found"):
            render("table2_nstar", str(tmp_path), str(tmp_path / "out"))

    def test_loader_keeps_strings_and_numbers_apart(self):
        table = load_table(os.path.join(GOLDEN, "fig6_gain_vs_se.csv"),
                           ("system", "se", "m_gain"))
        assert table["system"].dtype == object
        assert table["se"].dtype.kind == "f"


# ============================================================================
# CLI
# ============================================================================


class TestCli:
    def test_render_all_writes_every_image(self, tmp_path, capsys):
        assert main(["render", "all", "--in", GOLDEN,
                     "--out", str(tmp_path)]) == 0
        paths = capsys.readouterr().out.splitlines()
        assert len(paths) == 2 * len(FIGURES)
        assert all(os.path.exists(p) for p in paths)

    def test_single_figure(self, tmp_path, capsys):
        assert main(["render", "fig6_gain_vs_se", "--in", GOLDEN,
                     "--out", str(tmp_path)]) == 0
        out = capsys.readouterr().out.splitlines()
        assert [os.path.basename(p) for p in out] == \
            ["fig6_gain_vs_se.svg", "fig6_gain_vs_se.png"]

    def test_schema_violation_exits_2(self, tmp_path, capsys):
        shutil.copy(os.path.join(GOLDEN, "table2_nstar.csv"),
                    tmp_path / "table2_nstar.csv")
        (tmp_path / "table2_nstar.csv").write_text("n1,n2\n")
        code = main(["render", "table2_nstar", "--in", str(tmp_path),
                     "--out", str(tmp_path / "out")])
        assert code == 2
        assert "missing column" in capsys.readouterr().err

    def test_unknown_name_exits_2(self, tmp_path, capsys):
        assert main(["render", "fig99", "--in", GOLDEN,
                     "--out", str(tmp_path)]) == 2
        assert "unknown figure" in capsys.readouterr().err

    def test_list_shows_names(self, capsys):
        assert main(["list"]) == 0
        out = capsys.readouterr().out
        assert "fig2_rate_surface" in out and "fig11_training" in out

"""CLI surface: schemas, caching, exit codes, determinism.

Everything runs in-process through cli.run so monkeypatching and
coverage work; stdout is captured per invocation.
"""

import json

import pytest

from cmtrace import cache as cache_mod
from cmtrace.cli import run
from cmtrace.qform import enumerate_reduced, hurwitz, reduce, stabilizer_order
from cmtrace.qform import QuadForm
from cmtrace.series import QSeries, g_series


@pytest.fixture(autouse=True)
def isolated_cache(tmp_path, monkeypatch):
    monkeypatch.setenv("CMTRACE_CACHE_DIR", str(tmp_path / "cache"))
    return tmp_path / "cache"


def invoke(capsys, *argv):
    code = run(list(argv))
    out = capsys.readouterr().out
    return code, out


def rows_of(out: str):
    return [json.loads(line) for line in out.splitlines() if line]


class TestSchemas:
    def test_trace_anchor_row(self, capsys):
        code, out = invoke(capsys, "trace", "--f", "J", "--D", "3")
        assert code == 0
        (row,) = rows_of(out)
        assert row["trace"] == "-248" and row["certified"] is True

    def test_trace_golden_shape(self, capsys):
        code, out = invoke(capsys, "trace", "--f", "J", "--D", "8")
        (row,) = rows_of(out)
        assert list(row) == ["D", "p", "f", "trace", "residual", "certified", "precision"]
        assert row["D"] == 8 and row["f"] == "J" and row["trace"] == "7256"

    def test_classnum_matches_enumeration(self, capsys):
        code, out = invoke(capsys, "classnum", "--range", "3:40")
        assert code == 0
        for row in rows_of(out):
            want = hurwitz(row["D"])
            got = row["H"]
            assert got == (str(want) if want.denominator == 1
                           else f"{want.numerator}/{want.denominator}")

    def test_classnum_zero_convention(self, capsys):
        _, out = invoke(capsys, "classnum", "--D", "0")
        assert rows_of(out) == [{"D": 0, "H": "-1/12"}]

    def test_csv_json_same_data(self, capsys):
        import csv as csvlib
        import io

        _, js = invoke(capsys, "classnum", "--range", "3:30")
        _, cs = invoke(capsys, "classnum", "--range", "3:30", "--format", "csv")
        jrows = rows_of(js)
        crows = list(csvlib.DictReader(io.StringIO(cs)))
        assert len(jrows) == len(crows)
        for j, c in zip(jrows, crows):
            assert str(j["D"]) == c["D"] and str(j["H"]) == c["H"]

    def test_forms_match_enumeration(self, capsys):
        _, out = invoke(capsys, "forms", "--D", "23")
        got = [(r["a"], r["b"], r["c"], r["stabilizer"]) for r in rows_of(out)]
        want = [(F.a, F.b, F.c, stabilizer_order(F)) for F in enumerate_reduced(23)]
        assert got == want

    def test_reduce(self, capsys):
        _, out = invoke(capsys, "reduce", "--form", "12,10,3")
        (row,) = rows_of(out)
        R = reduce(QuadForm(12, 10, 3))
        assert (row["a"], row["b"], row["c"], row["D"]) == (R.a, R.b, R.c, 44)

    def test_series_matches_library(self, capsys):
        _, out = invoke(capsys, "series", "--name", "g", "--dmax", "12")
        got = {r["exponent"]: r["coefficient"] for r in rows_of(out)}
        want = {int(e): str(c) for e, c in g_series(13).items()}
        assert got == want

    def test_duke_fields(self, capsys):
        _, out = invoke(capsys, "duke", "--range", "500:510")
        rows = rows_of(out)
        assert [r["D"] for r in rows] == [500, 503, 504, 507, 508]
        r503 = rows[1]
        assert r503["fundamental"] is True and r503["H"] == "21"
        assert isinstance(r503["statistic"], float)

    def test_exactformula_echoes_cmax(self, capsys):
        _, out = invoke(capsys, "exactformula", "--D", "3", "--cmax", "100")
        (row,) = rows_of(out)
        assert row["c_max"] == 100
        assert abs(row["value"] + 247.76) < 0.01  # single-c partial sum anchor

    def test_poincare_row(self, capsys):
        _, out = invoke(capsys, "poincare", "--k", "4", "--m", "1", "--n", "1",
                        "--cmax", "2000")
        (row,) = rows_of(out)
        assert row["c_max"] == 2000
        assert abs(row["value"] - 141444) < 0.01

    def test_avg_constant(self, capsys):
        _, out = invoke(capsys, "avg", "--f", "1")
        (row,) = rows_of(out)
        assert abs(row["value"] - 1) < 1e-6

    def test_theta_row(self, capsys):
        _, out = invoke(capsys, "theta", "--h", "0", "--tau", "1.5j",
                        "--f", "1", "--tol", "1e-2")
        (row,) = rows_of(out)
        assert row["tol"] == 1e-2 and row["f"] == "1"
        assert abs(row["integral_im"]) < 1e-2  # real on the imaginary axis

    def test_out_flag_writes_file(self, capsys, tmp_path):
        target = tmp_path / "rows.json"
        code, out = invoke(capsys, "trace", "--f", "J", "--D", "3",
                           "--no-cache", "--out", str(target))
        assert code == 0 and out == ""
        assert json.loads(target.read_text())["trace"] == "-248"


class TestCache:
    def test_hit_is_byte_identical(self, capsys, isolated_cache):
        _, first = invoke(capsys, "trace", "--f", "J", "--range", "3:20")
        assert list(isolated_cache.glob("*.json"))
        _, second = invoke(capsys, "trace", "--f", "J", "--range", "3:20")
        assert first == second

    def test_no_cache_identical(self, capsys, isolated_cache):
        _, cached = invoke(capsys, "trace", "--f", "J", "--range", "3:20")
        _, fresh = invoke(capsys, "trace", "--f", "J", "--range", "3:20", "--no-cache")
        assert cached == fresh
        # and --no-cache must not have written anything new
        names = sorted(p.name for p in isolated_cache.glob("*.json"))
        _, _ = invoke(capsys, "classnum", "--range", "3:8", "--no-cache")
        assert sorted(p.name for p in isolated_cache.glob("*.json")) == names

    def test_corrupt_entry_recovers_with_warning(self, capsys, isolated_cache):
        _, first = invoke(capsys, "classnum", "--range", "3:12")
        for p in isolated_cache.glob("*.json"):
            p.write_text("not json at all")
        with pytest.warns(UserWarning, match="corrupt cache entry"):
            _, again = invoke(capsys, "classnum", "--range", "3:12")
        assert again == first

    def test_version_bump_invalidates(self, capsys, isolated_cache, monkeypatch):
        _, first = invoke(capsys, "classnum", "--range", "3:12")
        n_before = len(list(isolated_cache.glob("*.json")))
        monkeypatch.setattr(cache_mod, "__version__", "0.1.0+next")
        _, again = invoke(capsys, "classnum", "--range", "3:12")
        assert again == first  # same data, recomputed under the new key
        assert len(list(isolated_cache.glob("*.json"))) == n_before + 1

    def test_cache_dir_flag(self, capsys, tmp_path):
        alt = tmp_path / "alt"
        invoke(capsys, "classnum", "--range", "3:8", "--cache-dir", str(alt))
        assert list(alt.glob("*.json"))


class TestExitCodes:
    @pytest.mark.parametrize("argv", [
        ("trace", "--f", "J", "--D", "3", "--bogus"),
        ("nosuchcommand",),
        ("verify", "nosuchcheck"),
        ("trace", "--f", "J", "--range", "9:3"),
        ("trace", "--f", "Q", "--D", "3"),
        ("reduce", "--form", "1,5,1"),
        ("trace", "--f", "J", "--D", "3", "--precision", "32"),
        ("trace", "--f", "J", "--D", "3", "--threads", "0"),
    ])
    def test_usage_errors_exit_2(self, capsys, argv):
        assert run(list(argv)) == 2

    def test_computational_failure_exits_3(self, capsys):
        # height below the truncation design's floor
        assert run(["theta", "--tau", "0.1+0.2j"]) == 3

    def test_help_exits_0(self, capsys):
        assert run(["--help"]) == 0


class TestVerifyCommand:
    def test_single_check_report(self, capsys):
        code, out = invoke(capsys, "verify", "hurwitz", "--dmax", "500")
        assert code == 0
        rep = json.loads(out)
        assert rep["command"] == "verify" and rep["passed"] is True
        (chk,) = rep["outputs"]
        assert chk["check"] == "hurwitz" and chk["passed"] is True
        assert rep["inputs"]["dmax"] == 500

    def test_mutation_fails_zagier(self, capsys, monkeypatch):
        import cmtrace.verify as verify_mod

        real = g_series

        def corrupted(trunc):
            s = real(trunc)
            terms = dict(s.terms)
            if 3 in terms:
                terms[3] = -247  # flip one coefficient
            return QSeries(terms, s.trunc, s.denom)

        monkeypatch.setattr(verify_mod, "g_series", corrupted)
        code, out = invoke(capsys, "verify", "zagier", "--dmax", "60")
        assert code == 1
        rep = json.loads(out)
        assert rep["passed"] is False
        assert rep["outputs"][0]["passed"] is False
        assert "mismatches [3]" in rep["outputs"][0]["detail"]  # failing D named


class TestDeterminism:
    def test_threads_byte_identical(self, capsys):
        _, one = invoke(capsys, "trace", "--f", "J", "--range", "3:60", "--no-cache")
        _, four = invoke(capsys, "trace", "--f", "J", "--range", "3:60",
                         "--no-cache", "--threads", "4")
        assert one == four

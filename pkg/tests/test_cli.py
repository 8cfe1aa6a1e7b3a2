import json

from metallicgeo.cli import main, report_json


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_classify_zoo_s6(capsys):
    code, out, _ = run(capsys, "classify", "--zoo", "s6")
    assert code == 0
    assert "nearly metallic Kähler" in out


def test_classify_zoo_flat(capsys):
    code, out, _ = run(capsys, "classify", "--zoo", "flat-k1")
    assert code == 0
    assert "metallic Kähler" in out


def test_classify_malformed_spec_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.spec"
    bad.write_text("dimension = 2\nbounds = -1 1, -1 1\nstructure = JM\njm[0][0] = sin(x0\n")
    code, _, err = run(capsys, "classify", str(bad))
    assert code == 2
    assert "offset" in err


def test_verify_s2_metallic_all_pass(capsys):
    code, out, _ = run(capsys, "verify", "--zoo", "s2", "--suite", "metallic")
    assert code == 0
    assert "0 failed" in out


def test_verify_s6_nearly_all_pass(capsys):
    code, out, _ = run(capsys, "verify", "--zoo", "s6", "--suite", "nearly")
    assert code == 0


def test_verify_negative_skips_are_not_failures(capsys):
    code, out, _ = run(capsys, "verify", "--zoo", "negative", "--suite", "metallic")
    assert code == 0
    assert "SKIP" in out


def test_verify_exit_1_when_an_asserted_check_fails(capsys, tmp_path):
    # force a failure by making the curvature tolerance absurdly tight
    # (tightening d1 would change the classification gates instead)
    code, out, _ = run(capsys, "verify", "--zoo", "s6", "--suite", "nearly",
                       "--tol-d2", "1e-18")
    assert code == 1
    assert "FAIL" in out


def test_curvature_s2_origin(capsys):
    code, out, _ = run(capsys, "curvature", "--zoo", "s2", "--point", "0,0")
    assert code == 0
    assert "2" in out.split("scalar curvature:")[1].splitlines()[0]


def test_curvature_flat_zeros(capsys):
    code, out, _ = run(capsys, "curvature", "--zoo", "flat-k1", "--point", "0.3,0.4",
                       "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert data["curvature"]["scalar"] == 0.0


def test_curvature_s6_scalar_30(capsys):
    code, out, _ = run(capsys, "curvature", "--zoo", "s6", "--point", "0,0,0,0,0,0",
                       "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert abs(data["curvature"]["scalar"] - 30.0) < 1e-4
    assert abs(data["curvature"]["scalar_star"] - 6.0) < 1e-4
    assert abs(data["curvature"]["norm_nabla_jm_sq"] - 24.0) < 1e-4


def test_curvature_point_outside_chart_exit_3(capsys):
    code, _, err = run(capsys, "curvature", "--zoo", "s2", "--point", "5,5")
    assert code == 3
    assert "chart" in err or "boundary" in err


def test_classify_singular_metric_exit_3(tmp_path, capsys):
    spec = tmp_path / "singular.spec"
    spec.write_text(
        "dimension = 2\nq = 0.6666666666666666\nbounds = -1 1, -1 1\n"
        "structure = JM\ng[0][0] = 0\ng[1][1] = 1\njm[0][1] = -1\njm[1][0] = 1\n"
    )
    code, _, err = run(capsys, "classify", str(spec))
    assert code == 3
    assert "singular" in err


def test_json_report_round_trips(capsys):
    code, out, _ = run(capsys, "classify", "--zoo", "torus", "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert json.loads(json.dumps(data)) == data
    assert data["classification"]["verdict"] == "metallic Kähler"


def test_json_deterministic_excluding_timing(capsys):
    outs = []
    for _ in range(2):
        code, out, _ = run(capsys, "verify", "--zoo", "s2", "--suite", "metallic",
                           "--format", "json", "--seed", "11")
        assert code == 0
        data = json.loads(out)
        data.pop("timing_s")
        outs.append(json.dumps(data, sort_keys=False))
    assert outs[0] == outs[1]


def test_report_json_helper_excludes_timing():
    text = report_json({"a": 1.23456789, "timing_s": 1.0}, include_timing=False)
    assert "timing_s" not in text
    assert "1.23457" in text

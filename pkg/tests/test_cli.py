import json

import pytest

from railyard.cli import EXIT_INVALID, EXIT_IO, EXIT_NUMERIC, EXIT_OK, main
from railyard.graph import RailYardSpec
from railyard.io import Heatmap, Polyline, RunManifest, export_table, load_spec, read_csv, render_svg, spec_json
from railyard.presets import pyramid, pyramid_limit


@pytest.fixture
def finite_path(tmp_path):
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(RailYardSpec.from_words("LRL", "+--", ["1/3", "1/4", "1/5"]).to_json()))
    return path


@pytest.fixture
def limit_path(tmp_path):
    path = tmp_path / "limit.json"
    path.write_text(json.dumps(pyramid_limit().to_json()))
    return path


def run(args, capsys):
    code = main([str(a) for a in args])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_spec_json_round_trip(tmp_path):
    for spec in (pyramid(3), pyramid_limit((10.0, 0.1))):
        text = spec_json(spec)
        path = tmp_path / "s.json"
        path.write_text(text)
        again = load_spec(path)
        assert again == spec and spec_json(again) == text


def test_documented_limit_json_loads(tmp_path):
    path = tmp_path / "doc.json"
    path.write_text('{"n":2,"m":2,"V":[-1,0,1],"tau":[1,1],"a_res":["L","R"],"b_seg":[["+","+"],["-","-"]],"beta":1}')
    assert load_spec(path) == pyramid_limit()


def test_validate_and_exit_codes(tmp_path, finite_path, capsys):
    assert run(["validate", finite_path], capsys)[:2] == (EXIT_OK, "ok\n")
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(RailYardSpec.from_words("LL", "+-", ["2", "1"]).to_json()))
    code, out, _ = run(["validate", bad], capsys)
    assert code == EXIT_INVALID and "pair" in out
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    assert run(["validate", broken], capsys)[0] == EXIT_INVALID
    assert run(["validate", tmp_path / "missing.json"], capsys)[0] == EXIT_IO
    geo = tmp_path / "geo.json"
    geo.write_text(json.dumps(RailYardSpec.from_words("LL", "+-", ["1/2", "1/2"]).to_json()))
    code, _, err = run(["sample", geo, "--budget", "3"], capsys)
    assert code == EXIT_NUMERIC and "budget" in err


def test_zfunction_output(finite_path, capsys):
    code, out, _ = run(["zfunction", finite_path, "--N", "20"], capsys)
    data = json.loads(out)
    assert code == EXIT_OK and data["gap"] <= data["tail_bound"]


def test_table_headers(tmp_path, finite_path, limit_path, capsys):
    cases = [
        (["moments", finite_path, "--t", "0.5", "--budget", "10"], "column,k,t,contour_value,oracle_value,abs_err"),
        (["limit-shape", limit_path, "--grid", "4"], "chi,kappa,density,region"),
        (["frozen-boundary", limit_path, "--u-grid", "4"], "u,chi,kappa,res1,res2"),
        (["gff-cov", limit_path, "--chis", "-0.5,0.3"], "chi_d,chi_h,k_d,k_h,covariance"),
        (["enumerate", finite_path, "--budget", "2"], "partitions,weight"),
    ]
    for args, header in cases:
        code, out, _ = run(args, capsys)
        assert code == EXIT_OK and out.splitlines()[0] == header


def test_moments_agree_with_oracle(finite_path, capsys):
    code, out, _ = run(["moments", finite_path, "--t", "0.3,0.7", "--budget", "16", "--covariance"], capsys)
    rows = [line.split(",") for line in out.splitlines()[1:]]
    assert code == EXIT_OK and rows and all(float(r[-1]) < 1e-7 for r in rows)


def test_manifest_sidecar(tmp_path, limit_path, capsys):
    out = tmp_path / "shape.csv"
    assert run(["limit-shape", limit_path, "--grid", "3", "--out", out], capsys)[0] == EXIT_OK
    manifest = json.loads((tmp_path / "shape.csv.manifest.json").read_text())
    assert manifest["command"] == "limit-shape" and len(manifest["spec_hash"]) == 16
    assert manifest["started"] and manifest["finished"]
    header, rows = read_csv(out)
    assert header == ["chi", "kappa", "density", "region"] and len(rows) == 9


def test_sampling_is_deterministic(tmp_path, finite_path, capsys):
    outs = []
    for k in range(2):
        path = tmp_path / f"s{k}.csv"
        assert run(["sample", finite_path, "--count", "5", "--seed", "3", "--out", path], capsys)[0] == EXIT_OK
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    code, _, _ = run(["sample", finite_path, "--mcmc", "--count", "2", "--steps", "50"], capsys)
    assert code == EXIT_OK


def test_height_command(tmp_path, finite_path, capsys):
    cover = tmp_path / "cover.json"
    cover.write_text(json.dumps([[], [], [], []]))
    code, out, _ = run(["height", finite_path, cover, "--ylo", "0", "--yhi", "2"], capsys)
    assert code == EXIT_OK and out.splitlines()[0] == "partition,y,height"


def test_render_is_deterministic_and_overlays(tmp_path, limit_path, capsys):
    shape, curve = tmp_path / "shape.csv", tmp_path / "curve.csv"
    run(["limit-shape", limit_path, "--grid", "6", "--out", shape], capsys)
    run(["frozen-boundary", limit_path, "--u-grid", "8", "--out", curve], capsys)
    svgs = []
    for k in range(2):
        path = tmp_path / f"fig{k}.svg"
        assert run(["render", shape, curve, "--out", path], capsys)[0] == EXIT_OK
        svgs.append(path.read_text())
    assert svgs[0] == svgs[1]
    assert "<rect" in svgs[0] and "<polygon" in svgs[0]
    assert svgs[0].index("<polygon") > svgs[0].rindex("fill=\"rgb(")
    junk = tmp_path / "junk.csv"
    junk.write_text("a,b\n1,2\n")
    assert run(["render", junk, "--out", tmp_path / "x.svg"], capsys)[0] == EXIT_INVALID


def test_render_svg_contract():
    with pytest.raises(ValueError):
        render_svg([])
    text = render_svg([Heatmap([0, 1], [0, 1], [[0, 2], [1, 0]]), Polyline([0, 1], [0, 1])])
    assert text.startswith("<svg") and text.count("<rect") >= 5 and "<polyline" in text


def test_export_json_and_bad_format(tmp_path):
    man = RunManifest.start("test")
    path = export_table(["a", "b"], [(1, 2.5)], tmp_path / "t.json", man, fmt="json")
    assert json.loads(path.read_text()) == [{"a": 1, "b": 2.5}]
    with pytest.raises(ValueError):
        export_table(["a"], [(1,)], tmp_path / "t.xml", fmt="xml")


def test_preset_command(capsys):
    code, out, _ = run(["preset", "pyramid", "--size", "3"], capsys)
    assert code == EXIT_OK and json.loads(out)["b"] == ["+", "+", "+", "-", "-", "-"]
    assert run(["preset", "pyramid", "--size", "2"], capsys)[0] == EXIT_INVALID
    code, out, _ = run(["preset", "pyramid-limit", "--tau", "10,0.1"], capsys)
    assert json.loads(out)["tau"] == [10.0, 0.1]


def test_threads_env(limit_path, capsys, monkeypatch):
    serial = run(["limit-shape", limit_path, "--grid", "3"], capsys)[1]
    monkeypatch.setenv("RAILYARD_THREADS", "2")
    assert run(["limit-shape", limit_path, "--grid", "3"], capsys)[1] == serial
    monkeypatch.setenv("RAILYARD_THREADS", "many")
    assert run(["limit-shape", limit_path, "--grid", "3"], capsys)[0] == EXIT_INVALID


def test_height_rejects_bad_covering(tmp_path, finite_path, capsys):
    cover = tmp_path / "cover.json"
    cover.write_text(json.dumps({"parts": []}))
    assert run(["height", finite_path, cover], capsys)[0] == EXIT_INVALID
    cover.write_text(json.dumps([[], []]))
    assert run(["height", finite_path, cover], capsys)[0] == EXIT_INVALID

import json
from pathlib import Path

import pytest

from hammrl import _jsontext
from hammrl.cli import (
    EXIT_OK,
    EXIT_RUNTIME,
    EXIT_USAGE,
    build_parser,
    compare_params,
    evaluate_params,
    generate_params,
    main,
    mitigate_params,
    render_invocation,
)
from hammrl.distribution import CountsMap
from hammrl.evaluation import RECORDS_CSV_HEADER, SUMMARY_CSV_HEADER

FIVE_NODE_COUNTS = {
    "n_qubits": 3,
    "shots": 1000,
    "counts": {"011": 80, "100": 10, "101": 50, "110": 10, "111": 850},
    "secret": "111",
}


def write_counts(path: Path, obj=None) -> Path:
    _jsontext.dump(path, obj or FIVE_NODE_COUNTS)
    return path


def read_tree(root: Path) -> dict[str, bytes]:
    return {
        str(p.relative_to(root)): p.read_bytes()
        for p in sorted(root.rglob("*")) if p.is_file()
    }


def test_generate_writes_dataset(tmp_path, capsys):
    out = tmp_path / "ds"
    code = main([
        "generate", "--qubits", "4", "--ones", "2", "--shots", "256",
        "--seed", "5", "--base-flip", "0.05", "--per-cnot-flip", "0.01",
        "--out", str(out),
    ])
    assert code == EXIT_OK
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["n_qubits"] == 4
    assert manifest["ones_count"] == 2
    assert manifest["shots"] == 256
    assert manifest["master_seed"] == 5
    assert len(manifest["circuits"]) == 6
    for name in manifest["circuits"]:
        cm = CountsMap.load(out / name)
        assert cm.secret is not None
        assert cm.label == "4q2ones"
        assert cm.total_counts == 256


def test_generate_is_byte_deterministic(tmp_path):
    args = ["generate", "--qubits", "4", "--ones", "2", "--shots", "128",
            "--seed", "9", "--base-flip", "0.08"]
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(args + ["--out", str(a)]) == EXIT_OK
    assert main(args + ["--out", str(b)]) == EXIT_OK
    assert read_tree(a) == read_tree(b)


def test_generate_validation_writes_nothing(tmp_path):
    out = tmp_path / "ds"
    code = main(["generate", "--qubits", "3", "--ones", "4", "--out", str(out)])
    assert code == EXIT_USAGE
    assert not out.exists()
    assert main(["generate", "--qubits", "3", "--ones", "1",
                 "--p01", "0.1", "--out", str(out)]) == EXIT_USAGE
    assert not out.exists()


def test_generate_config_and_flag_precedence(tmp_path):
    config = tmp_path / "cfg.json"
    config.write_text(json.dumps({"shots": 64, "seed": 3, "base_flip": 0.1}))
    out1 = tmp_path / "d1"
    assert main(["generate", "--qubits", "3", "--ones", "1",
                 "--config", str(config), "--out", str(out1)]) == EXIT_OK
    m1 = json.loads((out1 / "manifest.json").read_text())
    assert m1["shots"] == 64 and m1["master_seed"] == 3

    out2 = tmp_path / "d2"
    assert main(["generate", "--qubits", "3", "--ones", "1", "--shots", "32",
                 "--config", str(config), "--out", str(out2)]) == EXIT_OK
    m2 = json.loads((out2 / "manifest.json").read_text())
    assert m2["shots"] == 32  # flag beats config
    assert m2["noise"]["base_flip_prob"] == 0.1

    config.write_text(json.dumps({"shotz": 64}))
    assert main(["generate", "--qubits", "3", "--ones", "1",
                 "--config", str(config), "--out", str(tmp_path / "d3")]) == EXIT_USAGE


def test_mitigate_deconvolution(tmp_path):
    src = write_counts(tmp_path / "counts.json")
    out = tmp_path / "out.json"
    assert main(["mitigate", "--input", str(src), "--out", str(out)]) == EXIT_OK
    obj = json.loads(out.read_text())
    assert obj["method"] == "hammr-l"
    assert obj["secret"] == "111"
    assert obj["converged"] is True
    assert obj["iterations_run"] == len(obj["l1_history"])
    probs = obj["mitigated"]["probs"]
    assert max(probs, key=probs.get) == "111"
    assert probs["111"] > 0.85


def test_mitigate_to_stdout(tmp_path, capsys):
    src = write_counts(tmp_path / "counts.json")
    assert main(["mitigate", "--input", str(src), "--method", "hammer"]) == EXIT_OK
    obj = json.loads(capsys.readouterr().out)
    assert obj["method"] == "hammer"
    assert "iterations_run" not in obj


def test_mitigate_identity_and_labels(tmp_path, capsys):
    src = write_counts(tmp_path / "counts.json")
    assert main(["mitigate", "--input", str(src), "--method", "identity"]) == EXIT_OK
    obj = json.loads(capsys.readouterr().out)
    assert obj["method"] == "identity"
    assert obj["mitigated"]["probs"]["111"] == 0.85


def test_mitigate_poisson_requires_lambda(tmp_path, capsys):
    src = write_counts(tmp_path / "counts.json")
    assert main(["mitigate", "--input", str(src),
                 "--method", "poisson"]) == EXIT_USAGE
    assert main(["mitigate", "--input", str(src), "--method", "poisson",
                 "--lambda", "0.5"]) == EXIT_OK
    obj = json.loads(capsys.readouterr().out)
    assert obj["method"] == "poisson [QBEEP-style (simplified)]"


def test_mitigate_psf_and_options(tmp_path, capsys):
    src = write_counts(tmp_path / "counts.json")
    assert main(["mitigate", "--input", str(src), "--psf", "poisson:0.4",
                 "--iterations", "5", "--tolerance", "1e-300"]) == EXIT_OK
    obj = json.loads(capsys.readouterr().out)
    assert obj["iterations_run"] == 5
    assert obj["converged"] is False
    assert main(["mitigate", "--input", str(src),
                 "--psf", "gaussian:1"]) == EXIT_USAGE


def test_mitigate_missing_and_malformed_input(tmp_path, capsys):
    assert main(["mitigate", "--input", str(tmp_path / "nope.json")]) == EXIT_RUNTIME
    bad = tmp_path / "bad.json"
    bad.write_text("{broken")
    assert main(["mitigate", "--input", str(bad)]) == EXIT_USAGE
    missing = tmp_path / "missing.json"
    missing.write_text(json.dumps({"shots": 10, "counts": {"01": 10}}))
    assert main(["mitigate", "--input", str(missing)]) == EXIT_USAGE
    err = capsys.readouterr().err
    assert "n_qubits" in err


def test_mitigate_plot_topk(tmp_path):
    src = write_counts(tmp_path / "counts.json")
    out = tmp_path / "m.json"
    assert main(["mitigate", "--input", str(src), "--out", str(out),
                 "--plot"]) == EXIT_OK
    plot = tmp_path / "m_topk.csv"
    lines = plot.read_text().splitlines()
    assert lines[0] == "outcome,prob_before,prob_after"
    assert lines[1].startswith("111,")
    assert len(lines) <= 11


def test_unknown_method_is_usage_error(tmp_path):
    src = write_counts(tmp_path / "counts.json")
    with pytest.raises(SystemExit) as exc_info:
        main(["mitigate", "--input", str(src), "--method", "magic"])
    assert exc_info.value.code == EXIT_USAGE


def _generate_small(tmp_path, seed="7") -> Path:
    out = tmp_path / f"ds{seed}"
    assert main(["generate", "--qubits", "5", "--ones", "3", "--shots", "2048",
                 "--seed", seed, "--base-flip", "0.02", "--per-cnot-flip",
                 "0.09", "--out", str(out)]) == EXIT_OK
    return out


def test_evaluate_writes_tables(tmp_path, capsys):
    ds = _generate_small(tmp_path)
    out = tmp_path / "eval"
    assert main(["evaluate", "--manifest", str(ds / "manifest.json"),
                 "--methods", "hammr-l,identity,poisson",
                 "--out", str(out)]) == EXIT_OK
    records = (out / "records.csv").read_text().splitlines()
    summary = (out / "summary.csv").read_text().splitlines()
    assert records[0] == RECORDS_CSV_HEADER
    assert summary[0] == SUMMARY_CSV_HEADER
    assert len(records) == 1 + 3 * 10  # C(5,3) circuits per method
    identity_row = next(l for l in summary if l.startswith("identity,"))
    assert identity_row == "identity,5q3ones,0.0,100.0,0.0,0.00"
    poisson_row = next(l for l in summary if l.startswith("poisson"))
    assert poisson_row.startswith("poisson [QBEEP-style (simplified)],5q3ones,")
    report = json.loads((out / "report.json").read_text())
    assert set(report["grand_mean_rank_change"]) == {
        "hammr-l", "identity", "poisson [QBEEP-style (simplified)]"
    }
    for entry in report["reports"]:
        for rec in entry["records"]:
            assert "tvd" in rec


def test_evaluate_requires_secrets(tmp_path):
    ds = _generate_small(tmp_path)
    manifest = json.loads((ds / "manifest.json").read_text())
    first = ds / manifest["circuits"][0]
    obj = json.loads(first.read_text())
    del obj["secret"]
    first.write_text(json.dumps(obj))
    assert main(["evaluate", "--manifest", str(ds / "manifest.json"),
                 "--out", str(tmp_path / "eval")]) == EXIT_USAGE


def test_evaluate_plot_histogram(tmp_path):
    ds = _generate_small(tmp_path)
    out = tmp_path / "eval"
    assert main(["evaluate", "--manifest", str(ds / "manifest.json"),
                 "--methods", "identity", "--out", str(out),
                 "--plot"]) == EXIT_OK
    lines = (out / "rank_histogram.csv").read_text().splitlines()
    assert lines[0] == "method,dataset,stage,rank,count"
    assert any(",before," in l for l in lines[1:])
    assert any(",after," in l for l in lines[1:])
    # histogram covers every circuit exactly once per stage
    before_total = sum(
        int(l.rsplit(",", 1)[1]) for l in lines[1:] if ",before," in l
    )
    assert before_total == 10


def test_evaluate_is_byte_deterministic(tmp_path):
    ds = _generate_small(tmp_path)
    outs = []
    for name in ("e1", "e2"):
        out = tmp_path / name
        assert main(["evaluate", "--manifest", str(ds / "manifest.json"),
                     "--methods", "hammr-l,hammer", "--out", str(out),
                     "--plot"]) == EXIT_OK
        outs.append(read_tree(out))
    assert outs[0] == outs[1]


def test_compare_adds_grand_rows(tmp_path):
    ds1 = _generate_small(tmp_path, seed="7")
    out2 = tmp_path / "ds8"
    assert main(["generate", "--qubits", "5", "--ones", "2", "--shots", "2048",
                 "--seed", "8", "--base-flip", "0.02", "--per-cnot-flip",
                 "0.09", "--out", str(out2)]) == EXIT_OK
    out = tmp_path / "cmp"
    assert main(["compare", "--manifests", str(ds1 / "manifest.json"),
                 str(out2 / "manifest.json"), "--methods", "hammr-l,identity",
                 "--out", str(out)]) == EXIT_OK
    summary = (out / "summary.csv").read_text().splitlines()
    assert summary[0] == SUMMARY_CSV_HEADER
    all_rows = [l for l in summary if ",all," in l]
    assert len(all_rows) == 2
    identity_all = next(l for l in all_rows if l.startswith("identity,"))
    assert identity_all == "identity,all,0.0,100.0,0.0,0.00"
    datasets = {l.split(",")[1] for l in summary[1:]}
    assert datasets == {"5q3ones", "5q2ones", "all"}


def test_compare_poisson_per_dataset_lambda(tmp_path):
    # Different ones counts give different default lambdas; the compare
    # path must still run and keep method-major row order.
    ds1 = _generate_small(tmp_path, seed="7")
    out2 = tmp_path / "ds9"
    assert main(["generate", "--qubits", "5", "--ones", "2", "--shots", "1024",
                 "--seed", "9", "--base-flip", "0.02", "--per-cnot-flip",
                 "0.09", "--out", str(out2)]) == EXIT_OK
    out = tmp_path / "cmp"
    assert main(["compare", "--manifests", str(ds1 / "manifest.json"),
                 str(out2 / "manifest.json"), "--methods", "poisson,identity",
                 "--out", str(out)]) == EXIT_OK
    summary = (out / "summary.csv").read_text().splitlines()[1:]
    methods = [l.split(",")[0] for l in summary]
    assert methods == ["poisson [QBEEP-style (simplified)]"] * 2 + \
        ["identity"] * 2 + ["poisson [QBEEP-style (simplified)]", "identity"]


def test_full_pipeline_byte_determinism(tmp_path):
    # generate -> mitigate -> evaluate twice in separate directories.
    trees = []
    for name in ("run1", "run2"):
        root = tmp_path / name
        ds = root / "ds"
        assert main(["generate", "--qubits", "4", "--ones", "2",
                     "--shots", "512", "--seed", "11", "--base-flip", "0.06",
                     "--out", str(ds)]) == EXIT_OK
        assert main(["mitigate", "--input", str(ds / "counts_0011.json"),
                     "--out", str(root / "mit.json"), "--plot"]) == EXIT_OK
        assert main(["evaluate", "--manifest", str(ds / "manifest.json"),
                     "--methods", "hammr-l,hammer,identity",
                     "--out", str(root / "eval"), "--plot"]) == EXIT_OK
        trees.append(read_tree(root))
    assert trees[0] == trees[1]


def test_config_roundtrip_generate(tmp_path):
    parser = build_parser()
    argv = ["generate", "--qubits", "9", "--ones", "6", "--shots", "10240",
            "--seed", "3", "--base-flip", "0.02", "--per-cnot-flip", "0.07",
            "--out", "somewhere"]
    params = generate_params(parser.parse_args(argv))
    rendered = render_invocation("generate", params)
    assert generate_params(parser.parse_args(rendered)) == params


def test_config_roundtrip_mitigate(tmp_path):
    parser = build_parser()
    argv = ["mitigate", "--input", "in.json", "--method", "poisson",
            "--lambda", "0.63", "--psf", "poisson:0.5", "--iterations", "50",
            "--tolerance", "1e-09", "--distance-cutoff", "3",
            "--exclude-self", "--out", "out.json", "--plot"]
    params = mitigate_params(parser.parse_args(argv))
    rendered = render_invocation("mitigate", params)
    assert mitigate_params(parser.parse_args(rendered)) == params


def test_config_roundtrip_evaluate_and_compare(tmp_path):
    parser = build_parser()
    argv = ["evaluate", "--manifest", "m.json", "--methods", "hammr-l,identity",
            "--label", "mylabel", "--out", "evaldir"]
    params = evaluate_params(parser.parse_args(argv))
    assert evaluate_params(parser.parse_args(
        render_invocation("evaluate", params))) == params

    argv = ["compare", "--manifests", "a.json", "b.json",
            "--methods", "hammr-l,poisson", "--lambda", "0.4",
            "--labels", "x,y", "--out", "cmpdir"]
    params = compare_params(parser.parse_args(argv))
    assert compare_params(parser.parse_args(
        render_invocation("compare", params))) == params


def test_mitigate_config_file(tmp_path, capsys):
    src = write_counts(tmp_path / "counts.json")
    config = tmp_path / "cfg.json"
    config.write_text(json.dumps({
        "method": "hammr-l", "psf": "poisson:0.4", "iterations": 4,
        "tolerance": 1e-300,
    }))
    assert main(["mitigate", "--input", str(src),
                 "--config", str(config)]) == EXIT_OK
    obj = json.loads(capsys.readouterr().out)
    assert obj["iterations_run"] == 4
    # explicit flag wins over the config file
    assert main(["mitigate", "--input", str(src), "--config", str(config),
                 "--iterations", "2"]) == EXIT_OK
    obj = json.loads(capsys.readouterr().out)
    assert obj["iterations_run"] == 2

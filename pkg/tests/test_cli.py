import json

import numpy as np
import pytest

from negmix.cli import main
from negmix.gaussian import analytic_moment_tensors
from negmix.tensor import tensor_to_json
from negmix.wfa import one_letter_example, rho075_fixture


@pytest.fixture
def model_file(tmp_path, running_model):
    p = tmp_path / "model.json"
    p.write_text(json.dumps(running_model.to_json()))
    return p


def test_sample_fit_roundtrip(tmp_path, model_file, capsys):
    data = tmp_path / "data.csv"
    assert main(["sample", "--model", str(model_file), "--N", "20000", "--seed", "42", "--out", str(data)]) == 0
    assert "acceptance rate" in capsys.readouterr().out
    X = np.loadtxt(data, delimiter=",")
    assert X.shape == (20000, 2)
    out, trace = tmp_path / "fit.json", tmp_path / "trace.csv"
    assert main(["fit", "--data", str(data), "--k", "2", "--out", str(out), "--trace", str(trace)]) == 0
    fitted = json.loads(out.read_text())
    assert fitted["k"] == 2 and len(fitted["means"]) == 2
    lines = trace.read_text().splitlines()
    assert lines[0].startswith("candidate,eigenvalue,log_likelihood")
    assert len(lines) == 3
    out2 = tmp_path / "fit2.json"
    assert main(["fit", "--data", str(data), "--k", "2", "--out", str(out2)]) == 0
    assert out.read_bytes() == out2.read_bytes()


def test_sample_is_byte_identical(tmp_path, model_file):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        main(["sample", "--model", str(model_file), "--N", "1000", "--seed", "42", "--out", str(p)])
    assert a.read_bytes() == b.read_bytes()


def test_sample_with_header(tmp_path, model_file):
    p = tmp_path / "h.csv"
    main(["sample", "--model", str(model_file), "--N", "5", "--header", "--out", str(p)])
    assert p.read_text().splitlines()[0] == "x0,x1"


def test_single_component_acceptance(tmp_path, capsys):
    p = tmp_path / "one.json"
    p.write_text(json.dumps({"k": 1, "weights": [1.0], "means": [[0.0]], "variances": [1.0]}))
    assert main(["sample", "--model", str(p), "--N", "10", "--out", str(tmp_path / "x.csv")]) == 0
    assert "acceptance rate 1.000000" in capsys.readouterr().out


def test_missing_model_file(tmp_path, capsys):
    assert main(["sample", "--model", str(tmp_path / "nope.json"), "--N", "5"]) == 2
    assert "cannot read" in capsys.readouterr().err


def test_k_exceeds_dimension(tmp_path):
    data = tmp_path / "d.csv"
    np.savetxt(data, np.random.default_rng(0).normal(size=(100, 2)), delimiter=",")
    assert main(["fit", "--data", str(data), "--k", "3"]) == 2


def test_bad_flag_is_usage_error():
    with pytest.raises(SystemExit) as info:
        main(["fit", "--restarts", "zero"])
    assert info.value.code == 2


def test_decompose(tmp_path, running_model, capsys):
    am = analytic_moment_tensors(running_model)
    m2, m3 = tmp_path / "m2.json", tmp_path / "m3.json"
    m2.write_text(json.dumps(tensor_to_json(am.M2)))
    m3.write_text(json.dumps(tensor_to_json(am.M3)))
    assert main(["decompose", "--m2", str(m2), "--m3", str(m3), "--k", "2"]) == 0
    out = json.loads(capsys.readouterr().out)
    comps = sorted(out["components"], key=lambda c: -c["weight"])
    assert comps[0]["weight"] == pytest.approx(1.5, abs=1e-8)
    np.testing.assert_allclose(comps[1]["mean"], [11.9, -1.9], atol=1e-8)


def test_decompose_rank_error(tmp_path, capsys):
    v = np.array([1.0, 2.0])
    m2, m3 = tmp_path / "m2.json", tmp_path / "m3.json"
    m2.write_text(json.dumps(tensor_to_json(np.outer(v, v))))
    m3.write_text(json.dumps(tensor_to_json(np.einsum("i,j,k->ijk", v, v, v))))
    assert main(["decompose", "--m2", str(m2), "--m3", str(m3), "--k", "2"]) == 1
    assert "rank" in capsys.readouterr().err
    assert main(["decompose", "--m2", str(m2), "--m3", str(m3), "--k", "1"]) == 0


def test_wfa_commands(tmp_path, capsys):
    rep = tmp_path / "rep.json"
    rep.write_text(json.dumps(one_letter_example(0.5, 0.6, 0.8).to_json()))
    mix = tmp_path / "mix.json"
    assert main(["wfa", "mixture", "--wfa", str(rep), "--out", str(mix)]) == 0
    obj = json.loads(mix.read_text())
    assert obj["s_plus"] == pytest.approx(1.4364, abs=1e-3)
    pa = tmp_path / "pa.json"
    pa.write_text(json.dumps(obj["pa_plus"]))
    capsys.readouterr()
    assert main(["wfa", "sum", "--wfa", str(pa)]) == 0
    assert float(capsys.readouterr().out) == pytest.approx(1.0)
    assert main(["wfa", "eval", "--wfa", str(rep), "--n", "3"]) == 0
    assert len(capsys.readouterr().out.splitlines()) == 4
    assert main(["wfa", "eval", "--wfa", str(rep), "--word", "b"]) == 2


def test_wfa_split_pointwise(tmp_path, capsys):
    from negmix.wfa import LinearRep, eval_word

    rep_obj = one_letter_example(0.5, 0.6, 0.8)
    rep = tmp_path / "rep.json"
    rep.write_text(json.dumps(rep_obj.to_json()))
    assert main(["wfa", "split", "--wfa", str(rep)]) == 0
    parts = json.loads(capsys.readouterr().out)
    plus, minus = LinearRep.from_json(parts["plus"]), LinearRep.from_json(parts["minus"])
    for n in range(21):
        w = "a" * n
        assert eval_word(plus, w) - eval_word(minus, w) == pytest.approx(eval_word(rep_obj, w), abs=1e-10)


def test_wfa_divergence_exit_code(tmp_path):
    raw = tmp_path / "raw.json"
    raw.write_text(json.dumps(one_letter_example(0.75, 0.6, 0.8).to_json()))
    assert main(["wfa", "mixture", "--wfa", str(raw)]) == 1
    fix = tmp_path / "fix.json"
    fix.write_text(json.dumps(rho075_fixture().to_json()))
    assert main(["wfa", "mixture", "--wfa", str(fix), "--no-check", "--out", str(tmp_path / "m.json")]) == 0


def test_convergence_experiment_csv(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        assert main(["experiment", "convergence", "--R", "10", "--seed", "1", "--out", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()
    lines = a.read_text().splitlines()
    assert lines[0] == "iteration,weight_error,mean_error" and len(lines) == 21


def test_learning_experiment_csv(tmp_path):
    out = tmp_path / "l.csv"
    args = ["experiment", "learning", "--R", "1", "--sizes", "2000", "--restarts", "2", "--out", str(out)]
    assert main(args) == 0
    first = out.read_bytes()
    assert main(args) == 0
    assert out.read_bytes() == first
    assert out.read_text().splitlines()[0].startswith("size,runs,median_error")

import io
import json
from importlib import resources

import jsonschema
import pytest

from grwhittaker.cli import (
    EXIT_BUDGET,
    EXIT_FAIL,
    EXIT_OK,
    EXIT_USAGE,
    MalformedValueError,
    RangeError,
    RunConfig,
    UnknownKeyError,
    load_config,
    parse_config_text,
    run,
)
from grwhittaker.conformance import INJECT_ENV


def _schema(name):
    return json.loads(resources.files("grwhittaker").joinpath("schemas", f"{name}.json").read_text())


def _run(*argv):
    buf = io.StringIO()
    code = run(list(argv), buf)
    return code, buf.getvalue()


def _run_json(*argv):
    code, text = _run(*argv)
    return code, json.loads(text)


# -- configuration -----------------------------------------------------------


def test_config_example(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text("m=1\nn=2\nhbar=1\n")
    cfg = load_config(p)
    assert cfg == RunConfig(m=1, N=2, hbar=1.0)


def test_config_range_error(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text("m=3\nn=3\n")
    with pytest.raises(RangeError):
        load_config(p)


def test_config_sign():
    cfg = RunConfig(**parse_config_text("m=1\nn=2\nepsilon=1"))
    assert cfg.sign == -1
    assert RunConfig().sign is None


def test_config_unknown_key():
    with pytest.raises(UnknownKeyError):
        parse_config_text("m=1\ncolour=blue")


@pytest.mark.parametrize("text", ["m=one", "m 1", "lambda=0,x"])
def test_config_malformed(text):
    with pytest.raises(MalformedValueError):
        parse_config_text(text)


def test_config_comments_and_blank_lines():
    assert parse_config_text("# header\n\nm = 2  # rows\nn=4\n") == {"m": 2, "N": 4}


def test_flags_override_file(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text("m=1\nn=3\nhbar=2\n")
    cfg = load_config(p, {"N": 2, "hbar": None})
    assert (cfg.m, cfg.N, cfg.hbar) == (1, 2, 2.0)


@pytest.mark.parametrize(
    "values",
    [{"m": 1, "N": 2, "lam": (0.0,)}, {"m": 1, "N": 2, "hbar": 0.0}, {"m": 1, "N": 9}, {"m": 1, "N": 2, "tol": -1.0}],
)
def test_range_violations(values):
    with pytest.raises(RangeError):
        RunConfig(**values).validate()


def test_numeric_dimension_limit():
    RunConfig(m=2, N=5).validate()
    with pytest.raises(RangeError):
        RunConfig(m=2, N=5).validate(numeric=True)


def test_config_file_drives_integral(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text("m=1\nn=2\nlambda=0,0\nhbar=1\nx=0\ntol=1e-8\n")
    code, data = _run_json("integral", "--config", str(p))
    assert code == EXIT_OK
    assert data["value"]["re"] == pytest.approx(0.2277877, abs=1e-7)


# -- subcommands -------------------------------------------------------------


def test_verify_whittaker_example():
    code, data = _run_json("verify", "whittaker", "--m", "1", "--n", "2")
    assert code == EXIT_OK and data["ok"]
    jsonschema.validate(data, _schema("whittaker"))


def test_graph_dot_example():
    code, text = _run("graph", "--m", "2", "--n", "4", "--format", "dot")
    assert code == EXIT_OK
    assert text.count('[label="x[') == 5  # 4 interior vertices and the source
    assert 'zero [label="0"]' in text


def test_graph_written_to_file(tmp_path):
    out = tmp_path / "g.dot"
    code, _ = _run("graph", "--m", "1", "--n", "3", "--format", "dot", "--output", str(out))
    assert code == EXIT_OK and out.read_text().startswith("digraph")


def test_integral_example():
    code, data = _run_json("integral", "--m", "1", "--n", "2", "--lambda", "0,0", "--hbar", "1", "--x", "0", "--tol", "1e-8")
    assert code == EXIT_OK
    assert data["value"]["re"] == pytest.approx(0.2277877, abs=1e-7)
    jsonschema.validate(data, _schema("integral"))


def test_integral_budget_exit_code():
    code, data = _run_json("integral", "--m", "1", "--n", "3", "--max-evaluations", "100")
    assert code == EXIT_BUDGET
    assert "error" in data
    jsonschema.validate(data, _schema("integral"))


def test_integral_rejects_large_dimension():
    code, _ = _run("integral", "--m", "2", "--n", "5")
    assert code == EXIT_USAGE


def test_usage_errors():
    assert _run()[0] == EXIT_USAGE
    assert _run("transmogrify")[0] == EXIT_USAGE
    assert _run("integral", "--m", "3", "--n", "3")[0] == EXIT_USAGE
    assert _run("graph", "--config", "/nonexistent/file.cfg")[0] == EXIT_USAGE


def test_epsilon_removes_sign_symbol():
    for argv in (("lax", "--m", "2", "--n", "4"), ("verify", "whittaker", "--m", "2", "--n", "4"), ("lax", "--m", "2", "--n", "4", "--specialized")):
        _, text = _run(*argv, "--epsilon", "1")
        data = json.loads(text)
        strings = json.dumps(data).replace("sigma", "")
        assert "s*" not in strings and "*s" not in strings and "{s}" not in strings and "-s" not in strings
    _, data = _run_json("lax", "--m", "1", "--n", "2", "--specialized", "--epsilon", "1")
    assert data["specialized"][0][1] == "q"


def test_verify_whittaker_sign_value_changes_classification():
    _, plain = _run_json("verify", "whittaker", "--m", "1", "--n", "2")
    _, odd = _run_json("verify", "whittaker", "--m", "1", "--n", "2", "--epsilon", "1")
    right = lambda d: next(e for e in d["entries"] if e["side"] == "R")  # noqa: E731
    assert right(plain)["match"] == "sign-deviation"
    assert right(odd)["match"] == "match"


@pytest.mark.parametrize(
    "argv,schema",
    [
        (("graph", "--m", "2", "--n", "4"), "graph"),
        (("graph", "--gz", "--n", "3"), "graph"),
        (("phase", "--m", "2", "--n", "4", "--lambda", "0.1,0.2,0.3,0.4"), "phase"),
        (("lax", "--m", "2", "--n", "4"), "lax"),
        (("lax", "--m", "2", "--n", "4", "--charpoly"), "lax"),
        (("hamiltonian", "--m", "2", "--n", "4", "--k", "2", "--gauge", "balanced", "--trace"), "hamiltonian"),
        (("verify", "chevalley", "--n", "3"), "relations"),
        (("verify", "paths", "--n", "4"), "relations"),
        (("verify", "boxes", "--m", "2", "--n", "5"), "relations"),
        (("verify", "whittaker", "--m", "2", "--n", "5"), "whittaker"),
    ],
)
def test_json_outputs_match_schemas(argv, schema):
    code, data = _run_json(*argv)
    assert code == EXIT_OK
    jsonschema.validate(data, _schema(schema))


def test_lax_exit_code_reports_entry_failures():
    # first-row entries for m = 3 differ from the tabulated ones beyond sign
    assert _run("lax", "--m", "3", "--n", "4")[0] == EXIT_FAIL
    assert _run("lax", "--m", "2", "--n", "4")[0] == EXIT_OK


def test_verify_centrality_and_adjoint():
    code, data = _run_json("verify", "centrality", "--n", "2")
    assert code == EXIT_OK and data["ok"]
    code, data = _run_json("verify", "adjoint", "--n", "3", "--samples", "5")
    assert code == EXIT_OK and data["status"] == "match"


def test_text_emitter():
    code, text = _run("verify", "whittaker", "--m", "1", "--n", "2", "--emit", "text")
    assert code == EXIT_OK
    assert "realized_scalar: -h" in text


def test_output_is_deterministic():
    a = _run("phase", "--m", "2", "--n", "4")[1]
    b = _run("phase", "--m", "2", "--n", "4")[1]
    assert a == b
    assert _run("lax", "--m", "2", "--n", "5")[1] == _run("lax", "--m", "2", "--n", "5")[1]


# -- conformance report ------------------------------------------------------


def test_report_subset_validates(tmp_path):
    out = tmp_path / "report.json"
    code, data = _run_json("report", "--only", "acceptance-4,acceptance-9", "--output", str(out))
    assert code == EXIT_OK and data["ok"]
    assert [c["check-id"] for c in data["checks"]] == ["acceptance-4", "acceptance-9"]
    jsonschema.validate(data, _schema("report"))
    assert json.loads(out.read_text()) == data


def test_injected_failure_gives_nonzero_exit():
    code, data = _run_json("report", "--only", "acceptance-4,acceptance-9", "--inject", "acceptance-9")
    assert code == EXIT_FAIL and not data["ok"]
    jsonschema.validate(data, _schema("report"))


def test_injected_failure_through_environment(monkeypatch):
    monkeypatch.setenv(INJECT_ENV, "acceptance-4")
    code, data = _run_json("report", "--only", "acceptance-4")
    assert code == EXIT_FAIL
    assert data["checks"][0]["status"] == "fail"

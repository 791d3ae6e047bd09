import json

from sl2genus.cli import EXIT_OK, EXIT_USAGE, EXIT_VERIFY_FAIL, run


def _run(capsys, *argv):
    code = run(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_genus_json(capsys):
    code, out, _ = _run(capsys, "genus", "--p", "13", "--n", "1", "--subgroup", "B", "--output", "json")
    assert code == EXIT_OK
    payload = json.loads(out)
    assert payload["genus"] == "0"
    assert payload["delta"] == {"num": "-6", "den": "7"}


def test_class_table_mod4(capsys):
    code, out, _ = _run(capsys, "class-table", "--p", "2", "--n", "2", "--output", "json")
    assert code == EXIT_OK
    payload = json.loads(out)
    sizes = sorted(int(c["size"]) for c in payload["classes"])
    assert sizes == [1, 1, 3, 3, 6, 6, 6, 6, 8, 8]
    labels = {c["label"] for c in payload["classes"]}
    assert {"1", "-1", "sigma", "-sigma", "tau", "-tau", "u", "-u", "u^2", "-u^2"} <= labels


def test_count_command(capsys):
    code, out, _ = _run(
        capsys, "count", "--p", "13", "--n", "1", "--subgroup", "B", "--class", "u", "--output", "json"
    )
    assert code == EXIT_OK
    payload = json.loads(out)
    assert payload["count"] == "6"  # (p-1)/2


def test_count_u_power_class(capsys):
    code, out, _ = _run(
        capsys, "count", "--p", "3", "--n", "2", "--subgroup", "full", "--class", "u^p^1",
        "--output", "json",
    )
    assert code == EXIT_OK
    assert json.loads(out)["class_size"] == "4"


def test_bounds_command(capsys):
    code, out, _ = _run(capsys, "bounds", "--kind", "a_sigma_p", "--p", "5", "--n", "3", "--output", "json")
    assert code == EXIT_OK
    assert json.loads(out)["value"] == "1250"


def test_verify_section7_case(capsys):
    code, out, _ = _run(capsys, "verify", "--suite", "section7", "--case", "P7.2", "--output", "json")
    assert code == EXIT_OK
    payload = json.loads(out)
    assert payload["ok"] is True
    assert payload["cases"][0]["verdict"] == "match"


def test_verify_named_suite(capsys):
    code, out, _ = _run(capsys, "verify", "--suite", "lemma4.5", "--output", "json")
    assert code == EXIT_OK
    assert json.loads(out)["ok"] is True


def test_json_determinism(capsys):
    args = ("verify", "--suite", "lemma4.10", "--seed", "7", "--output", "json")
    _, out1, _ = _run(capsys, *args)
    _, out2, _ = _run(capsys, *args)
    assert out1 == out2  # no timing fields in suite payloads


def test_usage_errors(capsys):
    code, _, err = _run(capsys, "verify", "--suite", "not-a-suite")
    assert code == EXIT_USAGE
    code, _, _ = _run(capsys, "genus", "--p", "13")
    assert code == EXIT_USAGE
    code, _, err = _run(capsys, "genus", "--p", "12", "--n", "1", "--subgroup", "B")
    assert code == EXIT_USAGE
    code, _, err = _run(capsys, "verify", "--suite", "section7", "--case", "P9.1")
    assert code == EXIT_USAGE


def test_feasibility_error_names_the_flag(capsys):
    code, _, err = _run(
        capsys, "genus", "--p", "5", "--n", "2", "--subgroup", "full", "--max-elements", "100"
    )
    assert code == EXIT_USAGE
    assert "max-elements" in err or "SL2_MAX_ELEMENTS" in err

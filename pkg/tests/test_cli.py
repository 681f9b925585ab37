"""Command-line interface tests, driving main() in-process."""

import json
import subprocess
import sys
from pathlib import Path

import pytest

from cbaco.cli import main

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"
EXAMPLE1 = str(FIXTURES / "example1.cbaco")
EVENTS = str(FIXTURES / "example1_events.jsonl")
AUXPC = str(FIXTURES / "auxpc.strat")


def write_doc(tmp_path, doc, name="policy.cbaco"):
    path = tmp_path / name
    path.write_text(json.dumps(doc), encoding="utf-8")
    return str(path)


def hierarchy_doc():
    return {
        "principals": ["pat"],
        "categories": ["ana", "low", "mid", "high"],
        "actions": ["read"],
        "resources": ["file"],
        "pca": [["pat", "ana"]],
        "arca": [["read", "file", "high"]],
        "cc_auth": [["ana", "low"], ["low", "mid"], ["mid", "high"]],
    }


def duty_doc():
    # clerks must file the cabinet between an opening and a closing event
    return {
        "principals": ["ana"],
        "categories": ["clerks"],
        "actions": ["read", "file"],
        "resources": ["doc", "cabinet", "bin"],
        "schemes": [
            {"name": "opened", "args": [], "pattern": {"act": "read"}},
            {"name": "closed", "args": [], "pattern": {"act": "file", "obj": "bin"}},
        ],
        "pca": [["ana", "clerks"]],
        "oca": [{"action": "file", "resource": "cabinet",
                 "start": 0, "end": 1, "category": "clerks"}],
    }


def write_events(tmp_path, events, name="log.jsonl"):
    path = tmp_path / name
    path.write_text("\n".join(json.dumps(e) for e in events), encoding="utf-8")
    return str(path)


# ----------------------------------------------------------------------
# validate
# ----------------------------------------------------------------------


def test_validate_well_formed(capsys):
    assert main(["validate", EXAMPLE1]) == 0
    assert capsys.readouterr().out.strip() == "well-formed"


def test_validate_reports_violations(tmp_path, capsys):
    doc = hierarchy_doc()
    doc["arca"] = [["read", "file", "ana"]]
    doc["barca"] = [["read", "file", "ana"]]
    path = write_doc(tmp_path, doc)
    assert main(["validate", path]) == 1
    out = capsys.readouterr().out
    assert "grant-ban-conflict" in out

    assert main(["validate", path, "--json"]) == 1
    payload = json.loads(capsys.readouterr().out)
    assert payload["violations"][0]["code"] == "grant-ban-conflict"
    assert payload["violations"][0]["elements"]


def test_validate_usage_errors(tmp_path, capsys):
    assert main(["validate", str(tmp_path / "missing.cbaco")]) == 2
    bad = tmp_path / "bad.cbaco"
    bad.write_text("{broken", encoding="utf-8")
    assert main(["validate", str(bad)]) == 2
    err = capsys.readouterr().err
    assert "error:" in err


# ----------------------------------------------------------------------
# query
# ----------------------------------------------------------------------


def test_query_grant(capsys):
    code = main(["query", EXAMPLE1,
                 "--p", "J. Dorian", "--a", "Read", "--r", "Rec(J. Lewis)"])
    assert code == 0
    out = capsys.readouterr().out.strip()
    assert out == "grant: J. Dorian -> Dr(J. Lewis) -> (Read, Rec(J. Lewis))"


def test_query_deny_exits_1(tmp_path, capsys):
    doc = hierarchy_doc()
    doc["arca"] = []
    doc["barca"] = [["read", "file", "ana"]]
    path = write_doc(tmp_path, doc)
    assert main(["query", path, "--p", "pat", "--a", "read", "--r", "file"]) == 1
    assert capsys.readouterr().out.startswith("deny: pat -> ana")


def test_query_undetermined_exits_0(capsys):
    code = main(["query", EXAMPLE1,
                 "--p", "J. Dorian", "--a", "Read", "--r", "Admin-log"])
    assert code == 0
    out = capsys.readouterr().out
    assert out.startswith("undetermined:")


def test_query_json(capsys):
    main(["query", EXAMPLE1, "--json",
          "--p", "C. Tuck", "--a", "Read", "--r", "Rec(F. Mason)"])
    payload = json.loads(capsys.readouterr().out)
    assert payload["verdict"] == "grant"
    assert [j["label"] for j in payload["justification"]] == \
        ["C. Tuck", "Dr(F. Mason)", "(Read, Rec(F. Mason))"]


def test_query_unknown_name_is_usage_error(capsys):
    code = main(["query", EXAMPLE1, "--p", "Nobody", "--a", "Read", "--r", "Admin-log"])
    assert code == 2
    assert "Nobody" in capsys.readouterr().err


# ----------------------------------------------------------------------
# duties
# ----------------------------------------------------------------------


def test_duties_lifecycle(capsys):
    assert main(["duties", EXAMPLE1, "--events", EVENTS]) == 0
    out = capsys.readouterr().out
    assert out.startswith("[fulfilled] C. Tuck must Declare Admin-log")
    assert "time: 200" in out


def test_duties_filters(capsys):
    assert main(["duties", EXAMPLE1, "--events", EVENTS,
                 "--state", "pending"]) == 0
    assert capsys.readouterr().out.strip() == "no duties"
    assert main(["duties", EXAMPLE1, "--events", EVENTS,
                 "--principal", "C. Tuck", "--json"]) == 0
    rows = json.loads(capsys.readouterr().out)["duties"]
    assert len(rows) == 1
    assert rows[0]["status"] == "fulfilled"


def test_violated_duties_exit_1(tmp_path, capsys):
    path = write_doc(tmp_path, duty_doc())
    log = write_events(tmp_path, [
        {"act": "read", "subj": "ana", "obj": "doc", "time": 1},
        {"act": "file", "subj": "ana", "obj": "bin", "time": 2},
    ])
    assert main(["duties", path, "--events", log]) == 1
    assert "[violated] ana must file cabinet" in capsys.readouterr().out


def test_duties_without_a_log_reports_standing_duties(tmp_path, capsys):
    # no start scheme: the duty holds from the outset and is pending
    doc = duty_doc()
    doc["oca"][0]["start"] = None
    path = write_doc(tmp_path, doc)
    assert main(["duties", path]) == 0
    out = capsys.readouterr().out
    assert out.startswith("[pending] ana must file cabinet (since the outset)")


def test_bad_event_lines_are_usage_errors(tmp_path, capsys):
    log = tmp_path / "log.jsonl"
    log.write_text('{"act": "read", "time": 1}\n{oops\n', encoding="utf-8")
    assert main(["duties", EXAMPLE1, "--events", str(log)]) == 2
    assert ":2:" in capsys.readouterr().err

    log.write_text('{"act": "read", "pos": [1, 2]}\n', encoding="utf-8")
    assert main(["duties", EXAMPLE1, "--events", str(log)]) == 2
    assert "scalar" in capsys.readouterr().err


# ----------------------------------------------------------------------
# simulate
# ----------------------------------------------------------------------


def test_simulate_replays_and_rewrites(tmp_path, capsys):
    path = write_doc(tmp_path, hierarchy_doc())
    assert main(["simulate", path, "--strategy", AUXPC, "--seed", "5"]) == 0
    assert capsys.readouterr().out.strip() == \
        "0 events, 3 rule applications, 0 duties, 0 violations"

    assert main(["simulate", path, "--strategy", AUXPC, "--json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert [s["rule"] for s in payload["steps"]] == ["auxPC"] * 3
    assert payload["violations"] == []


def test_simulate_with_events(capsys):
    assert main(["simulate", EXAMPLE1, "--events", EVENTS, "--json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["events"] == 2
    assert payload["steps"] == []
    assert len(payload["duties"]) == 1
    assert payload["duties"][0]["status"] == "fulfilled"


def test_simulate_rejects_broken_scripts(tmp_path, capsys):
    script = tmp_path / "bad.strat"
    script.write_text("(((", encoding="utf-8")
    assert main(["simulate", EXAMPLE1, "--strategy", str(script)]) == 1
    assert "error:" in capsys.readouterr().err


# ----------------------------------------------------------------------
# export and relations
# ----------------------------------------------------------------------


def test_export_json_with_hiding(capsys):
    assert main(["export", EXAMPLE1]) == 0
    full = json.loads(capsys.readouterr().out)
    assert len(full["nodes"]) == 18
    assert main(["export", EXAMPLE1, "--hide", "node:type=E"]) == 0
    trimmed = json.loads(capsys.readouterr().out)
    assert len(trimmed["nodes"]) == 16
    assert all(n["type"] != "E" for n in trimmed["nodes"])


def test_export_dot_to_file(tmp_path):
    out = tmp_path / "graph.dot"
    assert main(["export", EXAMPLE1, "--format", "dot", "-o", str(out)]) == 0
    text = out.read_text(encoding="utf-8")
    assert text.startswith("digraph policy {")
    assert text.rstrip().endswith("}")
    assert 'label="J. Dorian"' in text


def test_export_rejects_bad_hide_rules(capsys):
    assert main(["export", EXAMPLE1, "--hide", "sideways"]) == 2
    assert "error:" in capsys.readouterr().err


def test_relations_prints_the_model(capsys):
    assert main(["relations", EXAMPLE1]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["pca"] == [["C. Tuck", "Dr(F. Mason)"],
                              ["J. Dorian", "Dr(J. Lewis)"]]
    assert payload["par"] == [["C. Tuck", "Read", "Rec(F. Mason)"],
                              ["J. Dorian", "Read", "Rec(J. Lewis)"]]


# ----------------------------------------------------------------------
# entry point
# ----------------------------------------------------------------------


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "cbaco.cli", "validate", EXAMPLE1],
        capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.strip() == "well-formed"


def test_usage_error_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["query", EXAMPLE1, "--p", "x"])  # --a and --r missing
    assert exc.value.code == 2

"""Drives `regula serve` over HTTP and validates every answer against the JSON schemas."""

import json
import pathlib
import subprocess
import sys
import tempfile
import urllib.error
import urllib.request

import jsonschema

cli, schemas, data = sys.argv[1], pathlib.Path(sys.argv[2]), pathlib.Path(sys.argv[3])


def schema(name):
    return json.loads((schemas / name).read_text())


state_schema = schema("session_state.schema.json")
error_schema = schema("error.schema.json")
snapshot_schema = schema("session_snapshot.schema.json")
for s in (state_schema, error_schema, snapshot_schema):
    jsonschema.Draft202012Validator.check_schema(s)


def call(base, method, path, body=None):
    payload = None if body is None else (body if isinstance(body, bytes) else json.dumps(body).encode())
    req = urllib.request.Request(base + path, data=payload, method=method, headers={"Content-Type": "application/json"})
    try:
        with urllib.request.urlopen(req, timeout=120) as res:
            return res.status, json.loads(res.read())
    except urllib.error.HTTPError as e:
        return e.code, json.loads(e.read())


def expect(answer, status):
    code, doc = answer
    assert code == status, (code, doc)
    jsonschema.validate(doc, state_schema if code < 400 else error_schema)
    return doc


with tempfile.TemporaryDirectory() as snapshots:
    server = subprocess.Popen([cli, "serve", "--port", "0", "--snapshots", snapshots], stdout=subprocess.PIPE, text=True)
    try:
        line = server.stdout.readline()
        assert line.startswith("listening on "), line
        base = line.split()[-1]
        cogsys = (data / "cogsys.reg").read_text()
        exams = (data / "cogsys_exams.reg").read_text()

        s = expect(call(base, "POST", "/sessions", {"instance": cogsys, "horizon": 4}), 201)
        sid = s["id"]
        assert s["semesters"][1]["forced"] == ["bm2"]
        s = expect(call(base, "POST", f"/sessions/{sid}/assumptions", {"module": "bm3", "semester": 3}), 200)
        assert s["assumptions"] == [{"module": "bm3", "semester": 3, "polarity": "assigned"}]
        s = expect(call(base, "POST", f"/sessions/{sid}/assumptions",
                        {"module": "im", "semester": 3, "polarity": "excluded"}), 200)
        s = expect(call(base, "POST", f"/sessions/{sid}/next"), 200)
        assert s["browsing"] and s["current_plan"] is not None
        expect(call(base, "GET", f"/sessions/{sid}"), 200)
        expect(call(base, "DELETE", f"/sessions/{sid}/assumptions/im/3"), 200)
        expect(call(base, "POST", f"/sessions/{sid}/reset"), 200)

        s = expect(call(base, "POST", "/sessions", {"instance": cogsys, "horizon": 4, "node_budget": 3}), 201)
        assert not s["complete"]

        e = expect(call(base, "POST", "/sessions", {"instance": [cogsys, exams], "horizon": 4, "mode": "exam"}), 201)
        e = expect(call(base, "POST", f"/sessions/{e['id']}/next"), 200)
        assert "exam_semesters" in e["current_plan"]

        expect(call(base, "POST", "/sessions", {"instance": "in((a;b),m).\nmap(c,a 5).\n", "horizon": 2}), 400)
        expect(call(base, "POST", "/sessions", b"{not json"), 400)
        expect(call(base, "POST", f"/sessions/{sid}/assumptions", {"module": "zz", "semester": 1}), 422)
        expect(call(base, "POST", f"/sessions/{sid}/assumptions", {"module": "msc", "semester": 1}), 422)
        expect(call(base, "GET", "/sessions/missing"), 404)
        expect(call(base, "POST", f"/sessions/{sid}/assumptions", {"module": "bm2", "semester": 2, "polarity": "excluded"}), 409)

        files = list(pathlib.Path(snapshots).glob("*.json"))
        assert len(files) == 3, files
        for f in files:
            jsonschema.validate(json.loads(f.read_text()), snapshot_schema)
    finally:
        server.terminate()
        server.wait(timeout=10)

print("schemas ok")

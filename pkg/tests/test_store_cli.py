import io
import json
import logging

import pytest

from bmlab import store
from bmlab.cli import dispatch
from bmlab.store import SheafCache, sheaf_equal, sheaf_from_json, sheaf_to_json
from conftest import MATRIX_DIR, ball, sheaf_of


def run(*argv):
    out = io.StringIO()
    code = dispatch(list(argv), out)
    return code, out.getvalue()


def mpath(name):
    return str(MATRIX_DIR / f"{name}.json")


@pytest.mark.parametrize("name, word", [("a1", "s1"), ("a2", "s1s2s1"), ("b2", "s1s2s1"), ("a3", "s2s1s3s2")])
def test_roundtrip(name, word):
    sh = sheaf_of(name, word)
    back = sheaf_from_json(json.loads(store.dumps(sheaf_to_json(sh))))
    assert sheaf_equal(sh, back)
    for k, pm in sh.rho_up.items():
        for d in range(0, 6):
            assert pm.matrix(d) == back.rho_up[k].matrix(d)


def test_cache_hit_corruption_and_schema(tmp_path, monkeypatch, caplog):
    b = ball("a2", 3)
    x = b.parse("s1s2s1")
    cache = SheafCache(tmp_path)
    first = cache.get_or_build(b, x)
    assert len(list(tmp_path.glob("*.json"))) == 1
    assert sheaf_equal(cache.load(b, x, 4), first)
    # corrupt one coefficient inside the payload
    p = next(tmp_path.glob("*.json"))
    doc = json.loads(p.read_text())
    doc["payload"] = doc["payload"].replace('"stalks"', '"stalkz"', 1)
    p.write_text(json.dumps(doc))
    with caplog.at_level(logging.WARNING):
        assert cache.load(b, x, 4) is None
    assert "checksum" in caplog.text
    rebuilt = cache.get_or_build(b, x)
    assert sheaf_equal(rebuilt, first)
    # a schema bump changes the key and is never served stale data
    monkeypatch.setattr(store, "SCHEMA_VERSION", store.SCHEMA_VERSION + 1)
    assert cache.load(b, x, 4) is None


def test_schema_mismatch_rejected():
    data = sheaf_to_json(sheaf_of("a1", "s1"))
    data["schema"] = 999
    with pytest.raises(ValueError):
        sheaf_from_json(data)


def test_cli_kl_a2():
    code, out = run("kl", "--matrix", mpath("a2"), "--x", "s1 s2 s1")
    assert code == 0
    tab = json.loads(out)["tables"][0]
    assert len(tab["h"]) == 6
    for y, row in tab["h"].items():
        ly = 0 if y == "e" else len(y.split())
        assert (row["low"], row["coeffs"]) == (3 - ly, [1])


def test_cli_klcon_a1():
    code, out = run("check", "klcon", "--matrix", mpath("a1"), "--x", "s1")
    assert code == 0
    assert json.loads(out)["reports"][0]["verdict"] == "holds"


def test_cli_graph_dot():
    code, out = run("graph", "--matrix", mpath("a2"), "--x", "s1 s2 s1", "--format", "dot")
    assert code == 0
    assert out.count("[label=") == 6 + 9 and out.count("->") == 9


def test_cli_exit_codes(capsys):
    assert run("check", "pdimone", "--matrix", mpath("a2"), "--x", "s1s2s1", "--center", "shifted")[0] == 0
    assert run("check", "hl", "--matrix", mpath("a2"), "--x", "s1s2s1", "--center", "literal")[0] == 2
    assert run("check", "hl", "--matrix", mpath("a2"), "--x", "s1s2s1", "--center", "both")[0] == 2
    assert run("frobnicate")[0] == 1
    assert run("check", "--matrix", mpath("a2"), "--x", "s1")[0] == 1
    assert run("kl", "--matrix", mpath("a2"), "--x", "s1 q")[0] == 1
    assert run("kl", "--matrix", mpath("a2"), "--x", "s1", "--cap-margin", "-1")[0] == 1
    assert run("kl", "--matrix", "/nonexistent.json", "--x", "s1")[0] == 1
    assert run("kl", "--matrix", mpath("a2"), "--wat")[0] == 1
    assert run("sheaf", "--matrix", mpath("a2"), "--x", "s1", "--format", "dot")[0] == 1


def test_cli_non_reduced_word(caplog):
    with caplog.at_level(logging.WARNING):
        code, out = run("kl", "--matrix", mpath("a2"), "--x", "s1 s1 s2")
    assert code == 0
    assert json.loads(out)["tables"][0]["x"] == "s2"
    assert "not reduced" in caplog.text


@pytest.mark.parametrize("argv", [
    ("report", "--matrix", mpath("a2"), "--max-length", "3"),
    ("check", "genmaps", "--trials", "40", "--line-seed", "5"),
    ("sheaf", "--matrix", mpath("b2"), "--x", "s1s2s1"),
    ("enumerate", "--matrix", mpath("h3"), "--max-length", "3"),
])
def test_cli_deterministic(argv):
    a = run(*argv)
    b = run(*argv)
    assert a == b and a[0] == 0


def test_cli_report_and_cache(tmp_path):
    code, out = run("report", "--matrix", mpath("a1xa1"), "--max-length", "2", "--cache-dir", str(tmp_path))
    assert code == 0
    doc = json.loads(out)
    assert set(doc["summary"]) == {"dcon", "klcon", "pcon", "pdimone", "hl"}
    assert all(FAIL not in row for row in doc["summary"].values() for FAIL in ["fails"])
    assert len(list(tmp_path.glob("*.json"))) == 4
    again = run("report", "--matrix", mpath("a1xa1"), "--max-length", "2", "--cache-dir", str(tmp_path))
    assert again == (code, out)


def test_cli_text_views():
    for argv in [("enumerate", "--matrix", mpath("a2"), "--max-length", "3"),
                 ("character", "--matrix", mpath("a2"), "--x", "s1s2"),
                 ("check", "pcon", "--matrix", mpath("a2"), "--x", "s1s2s1", "--y", "e", "--m", "1")]:
        code, out = run(*argv, "--format", "text")
        assert code == 0 and out.strip()

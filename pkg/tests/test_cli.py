import io
import subprocess
import sys
from pathlib import Path

import pytest

from projed import bundled_language_path
from projed.cli import ScriptError, main, parse_script

LANGS = Path(bundled_language_path("dna")).parent
SCRIPTS = LANGS / "scripts"

RUNS = [
    ("dna", "DNA", None),
    ("boxes", "root", None),
    ("lambda_calculus", "exp", LANGS / "sessions" / "lambda_y.pxml"),
    ("nested_graph", "machine", None),
    ("class_models", "model", None),
    ("dungeon", "game", None),
]


def run_cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main([str(a) for a in argv])
    return code, out.getvalue(), err.getvalue()


def test_check_all_corpus_files_pass():
    for name, _, _ in RUNS:
        assert main(["check", str(bundled_language_path(name))]) == 0


def test_check_reports_diagnostics(tmp_path, capsys):
    bad = tmp_path / "bad.pld"
    bad.write_text("(deflang bad (abstract [x (x)]) (reduce [(x) (f q)]))")
    assert main(["check", str(bad)]) == 1
    assert "'q'" in capsys.readouterr().err


def test_check_diagnostics_carry_line_numbers(tmp_path, capsys):
    bad = tmp_path / "bad.pld"
    bad.write_text("(deflang bad\n  (abstract [x (x)])\n  (reduce\n   [(x) (f q)]))\n")
    assert main(["check", str(bad)]) == 1
    err = capsys.readouterr().err
    assert f"{bad}:4:4:" in err


def test_fuel_env_override(monkeypatch):
    from projed.cli import build_parser

    monkeypatch.setenv("PROJED_FUEL", "1234")
    args = build_parser().parse_args(["run", "x.pld", "s", "e.script"])
    assert args.fuel == 1234
    monkeypatch.setenv("PROJED_FUEL", "junk")
    args = build_parser().parse_args(["run", "x.pld", "s", "e.script"])
    assert args.fuel == 100_000


def test_check_missing_file_is_io_error(capsys):
    assert main(["check", "/nonexistent/lang.pld"]) == 2
    capsys.readouterr()


def test_script_parse_rejects_unknown_ops():
    with pytest.raises(ScriptError):
        parse_script("jump 3")


def test_script_parses_all_event_forms():
    text = """
    # comment
    key -1 t
    key 7 up
    dblclick b,3
    edge n,1 n,2
    edge n,1 n,2 north
    menu 4 delete previous
    drag n,1 100 250
    edit 9 hello world
    snapshot one
    """
    events = parse_script(text)
    assert len(events) == 9


def _run(tmp_path, name, start, load, outname):
    args = ["run", str(bundled_language_path(name)), start, str(SCRIPTS / f"{name}.script"),
            "--out", str(tmp_path / outname)]
    if load:
        args += ["--load", str(load)]
    return main(args)


@pytest.mark.parametrize("name,start,load", RUNS)
def test_run_corpus_scripts(tmp_path, name, start, load, capsys):
    assert _run(tmp_path, name, start, load, "out") == 0
    err = capsys.readouterr().err
    assert err == ""
    out = tmp_path / "out"
    assert (out / "final.svg").exists()
    assert (out / "final.txt").exists()
    assert (out / "final.pxml").exists()


def test_dna_run_produces_flowed_letters(tmp_path):
    assert _run(tmp_path, "dna", "DNA", None, "out") == 0
    text = (tmp_path / "out" / "final.txt").read_text()
    assert "AACTGG" in text and "[●]" in text


def test_boxes_run_alternates_modes(tmp_path):
    assert _run(tmp_path, "boxes", "root", None, "out") == 0
    tree = (tmp_path / "out" / "tree-mode.svg").read_text()
    box = (tmp_path / "out" / "box-mode.svg").read_text()
    assert tree != box
    assert "polyline" in tree  # connector lines
    assert box.count("<rect") > tree.count("<rect")


def test_replay_determinism_across_processes(tmp_path):
    cmd = [sys.executable, "-m", "projed", "run", str(bundled_language_path("dungeon")),
           "game", str(SCRIPTS / "dungeon.script")]
    for sub in ("a", "b"):
        r = subprocess.run(cmd + ["--out", str(tmp_path / sub)], capture_output=True, text=True)
        assert r.returncode == 0, r.stderr
    a, b = tmp_path / "a", tmp_path / "b"
    names = sorted(p.name for p in a.iterdir())
    assert names == sorted(p.name for p in b.iterdir())
    for name in names:
        assert (a / name).read_bytes() == (b / name).read_bytes(), name


def test_run_fuel_exhaustion_status(tmp_path):
    lang = tmp_path / "loop.pld"
    lang.write_text("""
    (deflang loop (abstract [x (x)])
      (transform [(send t (key-pressed _ #\\k)) (spin)] [(spin) (spin)])
      (reduce [(x) "ok"] [(spin) "s"]))
    """)
    script = tmp_path / "s.script"
    script.write_text("key -1 k\n")
    code = main(["run", str(lang), "x", str(script), "--out", str(tmp_path / "out"), "--fuel", "40"])
    assert code == 3


def test_render_saved_session(tmp_path):
    assert _run(tmp_path, "class_models", "model", None, "out") == 0
    pxml = tmp_path / "out" / "final.pxml"
    out_svg = tmp_path / "render.svg"
    assert main(["render", str(pxml), str(bundled_language_path("class_models")), str(out_svg)]) == 0
    assert "<svg" in out_svg.read_text()


def test_render_corrupt_session(tmp_path, capsys):
    bad = tmp_path / "bad.pxml"
    bad.write_text("<nonsense/>")
    code = main(["render", str(bad), str(bundled_language_path("dna")), str(tmp_path / "x.svg")])
    assert code == 1
    capsys.readouterr()


def test_serve_refuses_invalid_language(tmp_path, capsys):
    bad = tmp_path / "bad.pld"
    bad.write_text("(deflang bad (abstract [x (x)]) (reduce [(x) (f q)]))")
    assert main(["serve", str(bad), "x", "--port", "7999"]) == 1
    capsys.readouterr()


def test_run_missing_script_is_io_error(tmp_path, capsys):
    code = main(["run", str(bundled_language_path("dna")), "DNA", "/no/such.script",
                 "--out", str(tmp_path)])
    assert code == 2
    capsys.readouterr()

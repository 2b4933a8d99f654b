import json
import subprocess
import sys

import numpy as np
import pytest

from momentvariety import corpus, schemas
from momentvariety.cli import main
from momentvariety.measures import atomic_measure, body_to_json, spec_to_json


def write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


@pytest.fixture
def files(tmp_path):
    return {
        "torus": write(tmp_path / "torus.json", spec_to_json(corpus.torus_signed())),
        "circle": write(tmp_path / "circle.json", spec_to_json(corpus.circle())),
        "dens": write(tmp_path / "dens.json", spec_to_json(corpus.circle_density())),
        "atoms": write(tmp_path / "atoms.json",
                       spec_to_json(atomic_measure([[0.1, 0.2], [0.5, -0.3], [-0.4, 0.4]], [1, -2, 0.5j]))),
        "curve": write(tmp_path / "curve.json", body_to_json(corpus.circle().terms[0].body)),
        "dir": tmp_path,
    }


def run(*argv):
    return main([str(a) for a in argv])


def load(path):
    return json.loads(open(path).read())


def test_moments_torus_entry(files):
    out = files["dir"] / "t.json"
    assert run("moments", "--spec", files["torus"], "--degree", 4, "--out", out) == 0
    obj = load(out)
    schemas.validate(obj, schemas.MOMENTS_OUTPUT, "moments")
    entry = {tuple(e["alpha"]): e["value"] for e in obj["entries"]}
    assert entry[(1, -2)] == [1.0, 0.0]
    assert obj["config"]["command"] == "moments" and obj["config"]["seed"] == 42


def test_empty_terms_exit_2(files, capsys):
    bad = write(files["dir"] / "bad.json", {"space": {"kind": "affine", "n": 1}, "terms": []})
    assert run("moments", "--spec", bad, "--degree", 2) == 2
    assert "error" in capsys.readouterr().err
    assert run("moments", "--spec", files["dir"] / "missing.json", "--degree", 2) == 2


def test_atomic_spec_round_trip(files):
    from momentvariety.measures import spec_from_json

    obj = load(files["atoms"])
    assert spec_to_json(spec_from_json(obj)) == obj


def test_support_circle(files, capsys):
    t = files["dir"] / "c.json"
    run("moments", "--spec", files["circle"], "--degree", 6, "--out", t)
    assert run("support", "--moments", t, "--degree", 2) == 0
    obj = json.loads(capsys.readouterr().out)
    schemas.validate(obj, schemas.SUPPORT_OUTPUT, "support")
    (gen,) = obj["ideal"]["generators"]
    coeffs = {tuple(x["alpha"]): complex(*x["coeff"]) for x in gen["terms"]}
    expect = {(0, 0): -1, (2, 0): 1, (0, 2): 1}
    for a in set(coeffs) | set(expect):
        assert abs(coeffs.get(a, 0) - expect.get(a, 0)) < 1e-8
    assert obj["constant_in_kernel"] is False


def test_support_torus_r_rows_flag(files):
    t = files["dir"] / "t.json"
    out = files["dir"] / "s.json"
    run("moments", "--spec", files["torus"], "--degree", 8, "--out", t)
    assert run("support", "--moments", t, "--degree", 3, "--rows", "R", "--out", out) == 0
    obj = load(out)
    assert obj["constant_in_kernel"] is True
    assert obj["status"] == "constant in kernel: recovery impossible"
    assert run("support", "--moments", t, "--degree", 3, "--delta", 2, "--cols", "L", "--out", out) == 0
    assert load(out)["constant_in_kernel"] is False
    assert run("support", "--moments", t, "--degree", 2, "--stabilize", "--max-row-degree", 6, "--out", out) == 0
    assert load(out)["ideal"]["stabilized_at"] is not None


def test_prony_byte_identical(files):
    t = files["dir"] / "a.json"
    run("moments", "--spec", files["atoms"], "--degree", 8, "--out", t)
    p1, p2 = files["dir"] / "p1.json", files["dir"] / "p2.json"
    assert run("prony", "--moments", t, "--degree", 3, "--seed", 42, "--out", p1) == 0
    assert run("prony", "--moments", t, "--degree", 3, "--seed", 42, "--out", p2) == 0
    assert p1.read_bytes() == p2.read_bytes()
    obj = load(p1)
    schemas.validate(obj, schemas.PRONY_OUTPUT, "prony")
    assert obj["rank"] == 3
    w = sorted(complex(*x).real for x in obj["weights"])
    assert np.allclose(w, [-2, 0, 1], atol=1e-8)


def test_prony_rank_mismatch_exit_3(files, capsys):
    t = files["dir"] / "a.json"
    run("moments", "--spec", files["atoms"], "--degree", 8, "--out", t)
    assert run("prony", "--moments", t, "--degree", 3, "--rank", 2) == 3
    assert "numerical failure" in capsys.readouterr().err


def test_density_with_curve_and_hint(files, capsys):
    t = files["dir"] / "d.json"
    run("moments", "--spec", files["dens"], "--degree", 8, "--out", t)
    out = files["dir"] / "den.json"
    assert run("density", "--moments", t, "--degree", 3, "--delta", 1, "--curve", files["curve"], "--out", out) == 0
    obj = load(out)
    schemas.validate(obj, schemas.DENSITY_OUTPUT, "density")
    coords = [complex(*c) for c in obj["density"]["coordinates"]]
    assert np.abs(np.array(coords) - [1, 0.5, 0]).max() < 1e-6
    assert run("density", "--moments", t, "--degree", 3, "--delta", 1) == 0
    assert json.loads(capsys.readouterr().out)["hints"][0]["kind"] == "ellipse"


def test_matrix_outputs(files):
    t = files["dir"] / "c.json"
    run("moments", "--spec", files["circle"], "--degree", 4, "--out", t)
    out, sv = files["dir"] / "m.json", files["dir"] / "sv.csv"
    assert run("matrix", "--moments", t, "--rows", 2, "--cols", 2, "--out", out, "--singular-values-csv", sv) == 0
    obj = load(out)
    schemas.validate(obj, schemas.MATRIX_OUTPUT, "matrix")
    assert obj["shape"] == [6, 6] and len(sv.read_text().splitlines()) == 6
    csv = files["dir"] / "m.csv"
    assert run("matrix", "--moments", t, "--rows", 1, "--cols", 2, "--format", "csv", "--out", csv) == 0
    assert len(csv.read_text().splitlines()) == 3
    assert run("matrix", "--moments", t, "--rows", 3, "--cols", 3) == 2  # table too small


def test_reproduce(files, capsys):
    out = files["dir"] / "r.json"
    assert run("reproduce", "neg-density", "two-atoms-h00", "mixture-delta2", "--out", out) == 0
    obj = load(out)
    schemas.validate(obj, schemas.REPRODUCE_OUTPUT, "reproduce")
    assert [r["status"] for r in obj["reports"]] == ["PASS"] * 3
    assert "PASS neg-density" in capsys.readouterr().out
    assert run("reproduce", "no-such-example") == 2


def test_threads_flag_does_not_change_output(files):
    a, b = files["dir"] / "a.json", files["dir"] / "b.json"
    base = ("moments", "--spec", files["torus"], "--degree", 4, "--no-exact-characters")
    run(*base, "--threads", 1, "--out", a)
    run(*base, "--threads", 3, "--out", b)
    ea, eb = load(a), load(b)
    assert ea["entries"] == eb["entries"]
    assert ea["config"]["threads"] == 1 and eb["config"]["threads"] == 3


def test_bad_flags_exit_2(files):
    with pytest.raises(SystemExit) as info:
        run("--tol", "loose", "reproduce", "circle")
    assert info.value.code == 2


def test_module_entry_point(files):
    proc = subprocess.run([sys.executable, "-m", "momentvariety", "reproduce", "circle"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and "PASS circle" in proc.stdout

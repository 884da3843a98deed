import copy
import csv
import io
import json
from pathlib import Path

import pytest

from resonator_feshbach.analytic import transmission
from resonator_feshbach.cli import SPECTRUM_COLUMNS, SWEEP_COLUMNS, main
from resonator_feshbach.config import ConfigError, RunConfig

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

BASE = {
    "schema_version": 1,
    "system": {
        "arm_a": {"omega": 2.0, "hopping": 1.0, "coupling": 0.5},
        "arm_b": {"omega": 1.0, "hopping": 0.5, "coupling": 0.7},
        "controller_level": 2.5,
    },
    "spectrum": {"e_min": 0.0, "e_max": 4.0, "count": 201},
    "resonances": {"window": [2.0, 4.0]},
}


def write(tmp_path, doc, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def run(tmp_path, command, doc, *extra):
    out = tmp_path / f"{command}.out"
    code = main([command, "--config", write(tmp_path, doc), "--out", str(out), *extra])
    return code, (out.read_text() if out.exists() else None)


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_spectrum_csv(tmp_path):
    code, text = run(tmp_path, "spectrum", BASE)
    assert code == 0
    assert tuple(text.splitlines()[0].split(",")) == SPECTRUM_COLUMNS
    table = rows(text)
    by_e = {float(r["E"]): r for r in table}
    assert by_e[0.0]["s_re"] == "" and by_e[0.0]["flags"] == "band-edge|dual-edge"
    assert float(by_e[2.0]["reflect_sq"]) < 1e-12
    assert max(float(r["reflect_sq"]) for r in table if r["reflect_sq"]) > 0.999
    s = complex(float(by_e[3.0]["s_re"]), float(by_e[3.0]["s_im"]))
    r = complex(float(by_e[3.0]["r_re"]), float(by_e[3.0]["r_im"]))
    assert r == pytest.approx(s - 1, abs=1e-15)


def test_spectrum_is_byte_deterministic(tmp_path):
    _, first = run(tmp_path, "spectrum", BASE)
    _, second = run(tmp_path, "spectrum", BASE)
    assert first == second


def test_energy_scale_rescales_inputs(tmp_path):
    doc = copy.deepcopy(BASE)
    doc["units"] = {"energy_scale": 2.0}
    for arm in ("arm_a", "arm_b"):
        doc["system"][arm] = {k: 2 * v for k, v in doc["system"][arm].items()}
    doc["system"]["controller_level"] = 5.0
    doc["spectrum"] = {"e_min": 0.0, "e_max": 8.0, "count": 201}
    assert run(tmp_path, "spectrum", doc)[1] == run(tmp_path, "spectrum", BASE)[1]


def test_bound_bare_controller(tmp_path):
    doc = copy.deepcopy(BASE)
    doc["system"]["arm_a"]["coupling"] = 0.0
    doc["system"]["arm_b"]["coupling"] = 0.0
    doc["system"]["controller_level"] = 5.0
    code, text = run(tmp_path, "bound", doc)
    assert code == 0
    (entry,) = json.loads(text)["bound_states"]
    assert entry["energy"] == 5.0 and entry["kappa_I"] is None and entry["arm"] is None


def test_bound_with_lattice_check(tmp_path):
    doc = copy.deepcopy(BASE)
    doc["bound"] = {"verify": True, "N": 300}
    code, text = run(tmp_path, "bound", doc)
    assert code == 0
    states = json.loads(text)["bound_states"]
    assert len(states) == 4
    assert {(s["arm"], s["branch"]) for s in states} == {("A", "plus"), ("A", "minus"), ("B", "plus"), ("B", "minus")}
    for s in states:
        assert abs(s["residual"]) < 1e-10
        assert s["delta"] < 1e-6
        assert s["kappa_I"] > 0


def test_resonances_command(tmp_path):
    code, text = run(tmp_path, "resonances", BASE)
    doc = json.loads(text)
    assert code == 0 and doc["window"] == [2.0, 4.0]
    (root,) = doc["resonances"]
    cfg = RunConfig.from_dict(BASE)
    assert abs(transmission(cfg.system, root).transmission) < 1e-8


def test_sweep_command_and_tracks(tmp_path):
    doc = copy.deepcopy(BASE)
    del doc["spectrum"]
    tracks = tmp_path / "tracks.csv"
    doc["sweep"] = {
        "vary": "controller_level",
        "values": [2.2, 2.5, 3.0],
        "energy_grid": {"e_min": 0.0, "e_max": 4.0, "count": 81},
    }
    doc["output"] = {"tracks_path": str(tracks)}
    code, text = run(tmp_path, "sweep", doc, "--threads", "1")
    assert code == 0
    assert tuple(text.splitlines()[0].split(",")) == SWEEP_COLUMNS
    assert sorted({float(r["param"]) for r in rows(text)}) == [2.2, 2.5, 3.0]
    track_rows = rows(tracks.read_text())
    assert [float(r["param"]) for r in track_rows] == [2.2, 2.5, 3.0]
    res = [float(r["resonance"]) for r in track_rows]
    assert res == sorted(res)


def test_exit_code_for_bad_config(tmp_path, capsys):
    doc = copy.deepcopy(BASE)
    doc["system"]["arm_a"]["hopping"] = -1.0
    assert run(tmp_path, "spectrum", doc)[0] == 1
    assert "config.system.arm_a" in capsys.readouterr().err


def test_exit_code_for_empty_sweep_values(tmp_path, capsys):
    doc = copy.deepcopy(BASE)
    doc["sweep"] = {"vary": "controller_level", "values": [], "energy_grid": {"e_min": 0, "e_max": 4, "count": 5}}
    assert run(tmp_path, "sweep", doc)[0] == 1
    assert "config.sweep.values" in capsys.readouterr().err


def test_missing_block_for_command(tmp_path, capsys):
    assert run(tmp_path, "sweep", BASE)[0] == 1
    assert "config.sweep" in capsys.readouterr().err


def test_exit_code_for_unwritable_output(tmp_path):
    cfg = write(tmp_path, BASE)
    assert main(["spectrum", "--config", cfg, "--out", str(tmp_path / "no" / "such" / "dir.csv")]) == 2


def test_unreadable_config_is_a_config_error(tmp_path):
    assert main(["spectrum", "--config", str(tmp_path / "absent.json")]) == 1


@pytest.mark.parametrize(
    "mutate, fragment",
    [
        (lambda d: d.update(extra=1), "unknown key"),
        (lambda d: d["system"]["arm_b"].pop("coupling"), "config.system.arm_b.coupling"),
        (lambda d: d["system"].update(controller_level="x"), "config.system.controller_level"),
        (lambda d: d.update(schema_version=2), "schema_version"),
        (lambda d: d.update(oracle={"f_branch": "sideways"}), "config.oracle.f_branch"),
    ],
)
def test_strict_parsing(mutate, fragment):
    doc = copy.deepcopy(BASE)
    mutate(doc)
    with pytest.raises(ConfigError, match=fragment.replace(".", r"\.")):
        RunConfig.from_dict(doc)


@pytest.mark.parametrize("name", sorted(p.name for p in CONFIGS.glob("*.json")))
def test_config_round_trip(name):
    cfg = RunConfig.load(CONFIGS / name)
    again = RunConfig.from_dict(json.loads(cfg.canonical_json()))
    assert again == cfg
    assert again.canonical_json() == cfg.canonical_json()


def small_verify_doc(**oracle):
    doc = copy.deepcopy(BASE)
    doc["oracle"] = {
        "N": 120,
        "wavepacket_N": 500,
        "width_sites": 20,
        "resonance_width_sites": 40,
        "grid_points": 41,
        "carriers": [1.0],
        **oracle,
    }
    return doc


@pytest.mark.slow
def test_verify_flags_flipped_branch(tmp_path, capsys):
    code, text = run(tmp_path, "verify", small_verify_doc(f_branch="flipped"))
    report = json.loads(text)
    assert code == 3
    assert "wavepacket-concordance" in report["failed"]
    assert report["f_branch"] == "flipped"
    assert "FAILED: wavepacket-concordance" in capsys.readouterr().err


@pytest.mark.slow
def test_verify_flags_unconverged_lattice(tmp_path):
    code, text = run(tmp_path, "verify", small_verify_doc(N=4))
    report = json.loads(text)
    assert code == 3
    assert "bound-state-convergence" in report["failed"]
    assert "wavepacket-concordance" not in report["failed"]


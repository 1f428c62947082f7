import json

import numpy as np
import pytest

from smoothlab import ConfigError, GridSpec
from smoothlab.harness import REGISTRY, FamilySpec, get, identity_ids, make_family
from smoothlab.harness import cli, registry
from smoothlab.harness.report import read_csv, rows_to_csv, write_outcome


# -- families ---------------------------------------------------------------------


def test_single_gaussian_member():
    g = GridSpec(2, 8.0, 64)
    members = make_family(FamilySpec(), g)
    assert len(members) == 1
    print("norm", members[0].field.norm())
    assert abs(members[0].field.norm() - 1) < 1e-12


def test_family_order_and_norms():
    g = GridSpec(2, 16.0, 128)
    spec = FamilySpec(dilations=(0.5, 1.0, 2.0), translations=((0, 0), (0.5, 0)), modulations=((0, 0), (1, 0)),
                      scale_grids=True)
    members = make_family(spec, g)
    assert len(members) == 12
    assert [m.dilation for m in members[:4]] == [0.5] * 4
    for m in members:
        assert abs(m.field.norm() - 1) < 1e-12


def test_hermite_and_random_bases_normalized():
    g = GridSpec(1, 16.0, 128)
    for spec in (FamilySpec(base="hermite", order=3), FamilySpec(base="random_bandlimited", seed=3)):
        f = make_family(spec, g)[0].field
        assert abs(f.norm() - 1) < 1e-12


def test_random_bandlimited_bit_identical():
    g = GridSpec(2, 12.0, 96)
    spec = FamilySpec(base="random_bandlimited", seed=7, dilations=(1.0, 2.0), scale_grids=True)
    a = make_family(spec, g)
    b = make_family(spec, g)
    for ma, mb in zip(a, b):
        assert ma.member_id == mb.member_id
        assert ma.field.values.tobytes() == mb.field.values.tobytes()
    other = make_family(FamilySpec(base="random_bandlimited", seed=8), g)[0].field
    assert not np.array_equal(other.values, a[0].field.values)


def test_modulation_beyond_half_nyquist_rejected():
    g = GridSpec(1, 8.0, 32)
    with pytest.raises(ConfigError, match="Nyquist"):
        make_family(FamilySpec(modulations=((0.6 * g.nyquist,),)), g)


def test_boundary_tail_names_member_and_suggests_larger_L():
    g = GridSpec(1, 8.0, 64)
    with pytest.raises(ConfigError, match=r"lam=0\.5.*larger L"):
        make_family(FamilySpec(dilations=(1.0, 0.5)), g)


def test_spectral_tail_suggests_larger_N():
    g = GridSpec(1, 16.0, 32)
    with pytest.raises(ConfigError, match="larger N"):
        make_family(FamilySpec(dilations=(4.0,)), g)


def test_bad_family_spec():
    with pytest.raises(ConfigError):
        FamilySpec(base="sinc")
    with pytest.raises(ConfigError):
        FamilySpec(dilations=(0.0,))
    with pytest.raises(ConfigError, match="dimension"):
        make_family(FamilySpec(translations=((1.0,),)), GridSpec(2, 8.0, 32))


def test_min_nyquist_widens_grid():
    g = GridSpec(1, 10.0, 32)
    f = make_family(FamilySpec(), g, min_nyquist=3 * g.nyquist)[0].field
    print("widened N", f.grid.N, "nyquist", f.grid.nyquist)
    assert f.grid.L == g.L and f.grid.nyquist >= 3 * g.nyquist and f.grid.N % 2 == 0


# -- registry ---------------------------------------------------------------------


def test_registry_ids_unique_and_described():
    assert len(REGISTRY) == len(registry._ENTRIES)
    for e in REGISTRY.values():
        assert e.kind in ("identity", "inequality") and e.statement
    assert "plancherel" in identity_ids() and "T11-I-homog" not in identity_ids()


def test_unknown_id_lists_valid_ids():
    with pytest.raises(ConfigError, match="valid ids:.*plancherel"):
        get("T99")


def test_resolve_coerces_strings():
    P = get("T21-SW").resolve({"N": "64", "alpha": "1.0", "dilations": "1,2"})
    assert P["N"] == 64 and isinstance(P["N"], int)
    assert P["dilations"] == (1.0, 2.0)
    P = get("T11-I-homog").resolve({"translations": "0.5,0;0,0.5", "negative_control": "yes"})
    assert P["translations"] == ((0.5, 0.0), (0.0, 0.5)) and P["negative_control"] is True


def test_resolve_rejects_unknown_and_unreadable():
    with pytest.raises(ConfigError, match="unknown parameter"):
        get("plancherel").resolve({"bogus": 1})
    with pytest.raises(ConfigError, match="cannot read"):
        get("plancherel").resolve({"N": "many"})
    with pytest.raises(ConfigError, match="cannot read"):
        get("plancherel").resolve({"N": 3.5})


def test_explicit_requires_physical_keys():
    with pytest.raises(ConfigError, match="explicitly"):
        get("T21-SW").resolve({"n": 2, "m": 2}, explicit=True)
    P = get("T21-SW").resolve({"n": 2, "m": 2, "L": 16, "N": 64}, explicit=True)
    assert P["L"] == 16.0


def test_thread_count(monkeypatch):
    monkeypatch.delenv(registry.THREADS_ENV, raising=False)
    assert registry.thread_count() == 1
    monkeypatch.setenv(registry.THREADS_ENV, "4")
    assert registry.thread_count() == 4
    assert registry.pmap(lambda x: x * x, range(5)) == [0, 1, 4, 9, 16]
    monkeypatch.setenv(registry.THREADS_ENV, "four")
    with pytest.raises(ConfigError):
        registry.thread_count()


def test_threaded_sweep_matches_serial(monkeypatch):
    over = {"L": 10, "N": 96, "dilations": "0.5,1,2"}
    monkeypatch.setenv(registry.THREADS_ENV, "1")
    a = get("T12-I").run(over)
    monkeypatch.setenv(registry.THREADS_ENV, "3")
    b = get("T12-I").run(over)
    assert [r.ratio for r in a.rows] == [r.ratio for r in b.rows]


def test_negative_control_reported_not_gating():
    out = get("T12-II").run({"m": 2.0, "n": 2, "L": 10, "N": 96, "negative_control": True, "dilations": "1"})
    print("control metrics", out.metrics)
    assert out.negative_control and out.passed


# -- reports ----------------------------------------------------------------------


def test_csv_deterministic_modulo_timestamp(tmp_path):
    over = {"L": 8, "N": 64, "dilations": "0.5,1,2"}
    a = rows_to_csv(get("T21-SW").run(over).rows)
    b = rows_to_csv(get("T21-SW").run(over).rows, created="2000-01-01T00:00:00+00:00")
    assert a.splitlines()[0].startswith("# created")
    assert a.splitlines()[1:] == b.splitlines()[1:]


def test_write_outcome_schema(tmp_path):
    out = get("T21-SW").run({"L": 8, "N": 64, "dilations": "1,2"})
    csv_path, json_path = write_outcome(out, tmp_path)
    rows = read_csv(csv_path)
    assert len(rows) == len(out.rows) == 4
    assert list(rows[0])[:5] == ["estimate_id", "member_id", "lhs", "rhs", "ratio"]
    for r in rows:
        assert float(r["ratio"]) == pytest.approx(float(r["lhs"]) / float(r["rhs"]), rel=1e-15)
        assert "aux_refinement_delta" in r
    summary = json.loads(json_path.read_text())
    assert summary["schema_version"] == 1
    assert summary["estimate_id"] == "T21-SW" and summary["passed"] is True
    assert summary["sup_ratio"] == pytest.approx(max(r.ratio for r in out.rows))


# -- command line -----------------------------------------------------------------


def test_cli_list(capsys):
    assert cli.main(["list-estimates"]) == 0
    text = capsys.readouterr().out
    assert len(text.strip().splitlines()) == len(REGISTRY)
    assert "T12-II" in text and "1<m<n" in text


def test_cli_verify_plancherel(capsys, tmp_path):
    assert cli.main(["verify", "plancherel", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    print(out)
    assert out.startswith("PASS plancherel")
    summary = json.loads((tmp_path / "plancherel.json").read_text())
    assert summary["metrics"]["plancherel"] <= 1e-12


def test_cli_type2_gate_exit3(capsys):
    assert cli.main(["verify", "T11-II-homog", "--m", "2", "--n", "2"]) == 3
    assert "requires 1<m<n" in capsys.readouterr().err


def test_cli_config_errors(capsys, tmp_path):
    assert cli.main(["verify", "nope"]) == 3
    assert cli.main(["verify", "plancherel", "--bogus", "1"]) == 3
    assert cli.main(["verify", "plancherel", "stray"]) == 3
    assert cli.main(["sweep", str(tmp_path / "missing.cfg")]) == 3
    bad = tmp_path / "bad.json"
    bad.write_text("[1, 2]")
    assert cli.main(["sweep", str(bad)]) == 3
    noid = tmp_path / "noid.cfg"
    noid.write_text("n = 2\n")
    assert cli.main(["sweep", str(noid)]) == 3
    err = capsys.readouterr().err
    assert "valid ids" in err and "must name an estimate" in err


def test_cli_verify_failure_exit2():
    # a zero tolerance turns an identity into an acceptance failure
    assert cli.main(["verify", "plancherel", "--tol", "0", "--count", "3"]) == 2


def test_cli_sweep_key_value(tmp_path, capsys):
    cfg = tmp_path / "sw.cfg"
    cfg.write_text("# Stein-Weiss sweep\nestimate = T21-SW\nn = 2\nm = 2\nL = 8\nN = 64\n"
                   "dilations = 0.5, 1, 2\n")
    assert cli.main(["sweep", str(cfg), "--out", str(tmp_path / "out")]) == 0
    assert (tmp_path / "out" / "T21-SW.csv").exists()
    assert capsys.readouterr().out.startswith("PASS T21-SW")


def test_cli_sweep_json_and_missing_physical_key(tmp_path, capsys):
    cfg = tmp_path / "sw.json"
    cfg.write_text(json.dumps({"estimate": "T21-SW", "n": 2, "m": 2, "L": 8, "N": 64, "dilations": [1, 2]}))
    assert cli.main(["sweep", str(cfg)]) == 0
    cfg.write_text(json.dumps({"estimate": "T21-SW", "n": 2, "m": 2, "L": 16}))
    assert cli.main(["sweep", str(cfg)]) == 3
    assert "['N']" in capsys.readouterr().err


def test_cli_parse_overrides():
    d = cli.parse_overrides(["--eta-min", "1e-4", "--negative-control", "--N=64"])
    assert d == {"eta_min": "1e-4", "negative_control": "true", "N": "64"}

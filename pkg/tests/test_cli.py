import json

from multfun.cli import parse_polys, parse_z, run
from multfun.arith import ZERO, RootOfUnity


def read(path):
    return json.loads(path.read_text())


def test_parse_z_forms():
    assert parse_z("0") == ZERO
    assert parse_z("1") == RootOfUnity(0, 1)
    assert parse_z("-1") == RootOfUnity(1, 2)
    assert parse_z("2/3") == RootOfUnity(2, 3)
    from fractions import Fraction

    assert parse_z("val:1/3") == Fraction(1, 3)
    assert parse_z("0.5+0.1j") == 0.5 + 0.1j


def test_parse_polys():
    pf = parse_polys("n;2n;n^2;n^3+2n")
    assert pf.coeffs == ((0, 1), (0, 2), (0, 0, 1), (0, 2, 0, 1))


def test_structure_command(tmp_path):
    out = tmp_path / "s.json"
    rc = run(["structure", "--function", "moebius", "--z", "1",
              "--N", "100000", "--P", "100000", "--out", str(out)])
    assert rc == 0
    rep = read(out)["result"]
    assert rep["k"] == 2
    assert rep["chi"] == {"modulus": 1, "index": 0}
    assert rep["R"]["members_head"][:9] == [1, 2, 3, 5, 6, 7, 10, 11, 13]
    assert rep["u_norms"]
    assert read(out)["version"]


def test_divisibility_command(tmp_path):
    out = tmp_path / "d.json"
    rc = run(["divisibility", "--set", "squarefree", "--shift", "4",
              "--umax", "10", "--N", "100000", "--out", str(out)])
    assert rc == 0
    rep = read(out)["result"]["report"]
    assert rep["verdict"] == "not_divisible"
    assert rep["witness_u"] == 4


def test_invalid_target_exits_2(tmp_path):
    out = tmp_path / "e.json"
    rc = run(["levelset", "--function", "moebius", "--z", "bogus",
              "--N", "100", "--out", str(out)])
    assert rc == 2
    data = read(out)
    assert data["error"]["type"] == "InputError"
    assert data["error"]["exit_code"] == 2


def test_resource_cap_exits_3(tmp_path, monkeypatch):
    monkeypatch.setenv("MULTFUN_MEM_CAP_MB", "1")
    out = tmp_path / "r.json"
    rc = run(["sieve", "--function", "moebius", "--N", "10000000",
              "--out", str(out)])
    assert rc == 3
    assert read(out)["error"]["type"] == "ResourceError"


def test_search_failure_exits_4(tmp_path):
    out = tmp_path / "f.json"
    rc = run(["structure", "--function", "dirichlet_character", "--modulus", "5",
              "--index", "1", "--z", "1", "--N", "50000", "--P", "100000",
              "--kmax", "3", "--Qmax", "3", "--out", str(out)])
    assert rc == 4
    assert read(out)["error"]["type"] == "SearchError"
    assert "k <= 3" in read(out)["error"]["message"]


def test_rerun_is_byte_identical(tmp_path):
    out = tmp_path / "l.json"
    args = ["levelset", "--set", "squarefree", "--N", "10000",
            "--qmax", "4", "--out", str(out)]
    assert run(args) == 0
    first = out.read_bytes()
    assert run(args) == 0
    assert out.read_bytes() == first
    meta = json.loads((tmp_path / "l.json.meta.json").read_text())
    assert "timestamp" in meta


def test_levelset_exports_and_seeded_subset(tmp_path):
    out = tmp_path / "ls.json"
    members = tmp_path / "m.txt"
    bitmap = tmp_path / "m.bin"
    rc = run(["levelset", "--function", "liouville", "--z", "1", "--N", "20",
              "--members", str(members), "--bitmap", str(bitmap), "--out", str(out)])
    assert rc == 0
    got = [int(x) for x in members.read_text().split()]
    assert got[:5] == [1, 4, 6, 9, 10]
    assert len(bitmap.read_bytes()) == (20 + 7) // 8
    # randomized fixture demands a seed
    rc = run(["levelset", "--set", "squarefree", "--N", "1000",
              "--random-subset", "0.5", "--out", str(out)])
    assert rc == 2
    rc = run(["levelset", "--set", "squarefree", "--N", "1000",
              "--random-subset", "0.5", "--seed", "9", "--out", str(out)])
    assert rc == 0


def test_gowers_profile_csv(tmp_path):
    out = tmp_path / "g.json"
    csv = tmp_path / "g.csv"
    rc = run(["gowers", "--function", "liouville", "--s", "2",
              "--grid", "1024,4096", "--out", str(out), "--csv", str(csv)])
    assert rc == 0
    lines = csv.read_text().splitlines()
    assert lines[0] == "N,Ntilde,s,method,value"
    assert len(lines) == 3


def test_catalog_command(tmp_path):
    out = tmp_path / "c.json"
    assert run(["catalog", "--out", str(out)]) == 0
    data = read(out)["result"]
    assert "liouville" in data["builtins"]
    assert "squarefree" in data["named_sets"]


def test_recurrence_command_with_certificate(tmp_path):
    out = tmp_path / "rec.json"
    rc = run(["recurrence", "--set", "squarefree", "--shift", "4", "--m", "4",
              "--A", "0", "--polys", "n", "--N", "200000", "--Jmax", "10000",
              "--out", str(out)])
    assert rc == 0
    rep = read(out)["result"]["report"]
    assert rep["positivity"] == "zero_exact"
    assert rep["certificate"]["type"] == "square_factor"


def test_convergence_command(tmp_path):
    out = tmp_path / "conv.json"
    rc = run(["convergence", "--m", "3", "--A", "0", "--polys", "n^2",
              "--N", "50000", "--Jmax", "50000", "--out", str(out)])
    assert rc == 0
    rep = read(out)["result"]["report"]
    assert rep["oscillation"] is not None


def test_apmean_command(tmp_path):
    out = tmp_path / "ap.json"
    rc = run(["apmean", "--function", "lambda_xi", "--xi", "1/3",
              "--q", "5", "--r", "2", "--N", "100000", "--out", str(out)])
    assert rc == 0
    assert read(out)["result"]["agreement"] < 1e-12


def test_distance_command(tmp_path):
    out = tmp_path / "dist.json"
    csv = tmp_path / "dist.csv"
    rc = run(["distance", "--function", "liouville", "--g", "one",
              "--P", "100000", "--out", str(out), "--csv", str(csv)])
    assert rc == 0
    prof = read(out)["result"]["profile"]
    assert prof["trend"] == "mertens_divergence"
    assert csv.read_text().splitlines()[0] == "P,partial_sum"


def test_classify_command(tmp_path):
    out = tmp_path / "cls.json"
    rc = run(["classify", "--function", "mu_squared", "--P", "100000",
              "--N", "100000", "--Qmax", "10", "--out", str(out)])
    assert rc == 0
    res = read(out)["result"]
    assert res["halasz"]["halasz_case"] == "case_i"
    assert res["rap"]["verdict"] == "rap_pretends"


def test_spectrum_command(tmp_path):
    out = tmp_path / "sp.json"
    rc = run(["spectrum", "--function", "dirichlet_character", "--modulus", "4",
              "--index", "1", "--N", "100000", "--qmax", "8", "--out", str(out)])
    assert rc == 0
    pts = read(out)["result"]["scan"]["points"]
    assert {p["theta"] for p in pts} == {"1/4", "3/4"}


def test_mean_command(tmp_path):
    out = tmp_path / "mean.json"
    rc = run(["mean", "--function", "mu_squared", "--P", "100000",
              "--N", "1000000", "--out", str(out)])
    assert rc == 0
    res = read(out)["result"]
    ep = res["euler_product"]["value"]["re"]
    emp = res["empirical_mean"]["re"]
    assert abs(ep - emp) < 2e-3


def test_threads_flag_recorded(tmp_path):
    out = tmp_path / "t.json"
    rc = run(["sieve", "--function", "liouville", "--N", "1000",
              "--threads", "4", "--out", str(out)])
    assert rc == 0
    assert read(out)["config"]["threads"] == 4

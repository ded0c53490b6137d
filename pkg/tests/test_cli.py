import json

import numpy as np

from qdbkit import serialize
from qdbkit.cli import run
from qdbkit.ensembles import haar_unitary, random_channel
from qdbkit.markov import MarkovChain


def invoke(capsys, *args):
    code = run(list(args))
    out = capsys.readouterr()
    return code, out.out, out.err


def invoke_json(capsys, *args):
    code, out, err = invoke(capsys, *args, "--json")
    assert code == 0, err
    return json.loads(out)


def write(path, data):
    path.write_text(serialize.dumps(data))
    return str(path)


def test_family_fig2a(capsys):
    rep = invoke_json(capsys, "family", "--preset", "fig2a", "--x", "0.6,0.7")
    assert rep["qdb_holds"] and rep["predicted_qdb"]
    assert rep["irreducible"] and rep["period"] == 5
    assert np.allclose(rep["eta"], [1.0, 0.0])


def test_family_table1(capsys):
    rep = invoke_json(capsys, "family", "--preset", "table1", "--p", "4", "--s", "0.3")
    xi = np.exp(2j * np.pi / 12)
    assert rep["qdb_holds"]
    assert abs(complex(*rep["eta"]) - xi**3) < 1e-9


def test_family_singular_case(capsys):
    code, _, err = invoke(capsys, "family", "--d", "2", "--a0", "0")
    assert code == 2 and "SingularCase" in err


def test_family_key_value_output(capsys):
    code, out, _ = invoke(capsys, "family", "--preset", "fig2a")
    assert code == 0
    lines = dict(line.split("=", 1) for line in out.strip().splitlines())
    assert lines["qdb_holds"] == "True" and lines["period"] == "5"


def test_family_out_file_round_trips(capsys, tmp_path):
    out = tmp_path / "fam.json"
    rep = invoke_json(capsys, "family", "--preset", "fig2a", "--out", str(out))
    saved = serialize.load(out)
    assert saved == rep
    ch = serialize.channel_from_json(saved["channel"])
    assert serialize.dumps(serialize.channel_to_json(ch)) == serialize.dumps(saved["channel"])


def test_qdb_holds(capsys):
    rep = invoke_json(capsys, "qdb", "--preset", "fig2a")
    assert rep["holds"] and rep["residual"] <= 1e-9
    assert rep["rho_computed"] and rep["rho"]["dim"] == 5


def test_qdb_with_files(capsys, tmp_path):
    fam = invoke_json(capsys, "family", "--preset", "table1")
    ch = write(tmp_path / "ch.json", fam["channel"])
    J = write(tmp_path / "J.json", fam["symmetry"])
    d = fam["params"]["d"]
    rho = write(tmp_path / "rho.json", {"dim": d, "rho": serialize.matrix_to_json(np.eye(d) / d)})
    rep = invoke_json(capsys, "qdb", ch, "--J", J, "--rho", rho)
    assert rep["holds"] and not rep["rho_computed"]


def test_qdb_search_counterexample(capsys):
    # the claim concerns unitary symmetries; anti-unitary ones with eta = 1 exist
    rep = invoke_json(capsys, "qdb", "--preset", "counterexample", "--search", "--kinds", "unitary")
    assert rep["found"]
    etas = {tuple(e) for e in rep["eta_values"]}
    assert etas == {(-1.0, 0.0)}
    kinds = {f["symmetry"]["antiunitary"] for f in rep["found"]}
    assert kinds == {False}


def test_instrument_build_iqdb(capsys, tmp_path):
    out = tmp_path / "iqdb.json"
    rep = invoke_json(capsys, "instrument", "--preset", "fig2a", "--build-iqdb", "--out", str(out))
    assert rep["iqdb_residual"] <= 1e-9
    assert rep["outcomes"] == 8 and rep["ic_complete"]
    instr = serialize.instrument_from_json(rep["instrument"])
    again = serialize.dumps(serialize.instrument_to_json(instr))
    assert again == serialize.dumps(rep["instrument"])


def test_instrument_rejects_non_qdb(capsys, tmp_path):
    fam = invoke_json(capsys, "family", "--preset", "fig2a")
    J = write(tmp_path / "J.json", fam["symmetry"])
    ch = write(tmp_path / "ch.json", serialize.channel_to_json(random_channel(5, 2, np.random.default_rng(0))))
    code, _, err = invoke(capsys, "instrument", ch, "--J", J, "--build-iqdb")
    assert code == 2 and ("NotAdmissible" in err or "QDBFailed" in err)


def test_ep_on_iqdb_instrument(capsys, tmp_path):
    out = tmp_path / "iqdb.json"
    invoke_json(capsys, "instrument", "--preset", "fig2a", "--build-iqdb", "--out", str(out))
    code, text, _ = invoke(capsys, "ep", str(out), "--nmax", "4")
    assert code == 0
    lines = text.strip().splitlines()
    assert lines[0] == "n,Ep,Ep_per_n,fekete_lower,C,infinite_flag"
    eps = [float(line.split(",")[1]) for line in lines[1:]]
    assert len(eps) == 4 and max(abs(e) for e in eps) < 1e-10


def test_ep_on_biased_chain(capsys, tmp_path):
    P = np.array([[0.2, 0.5, 0.3], [0.1, 0.3, 0.6], [0.6, 0.1, 0.3]])
    path = write(tmp_path / "chain.json", serialize.chain_to_json(MarkovChain(P)))
    code, text, _ = invoke(capsys, "ep", "--chain", path, "--nmax", "5")
    assert code == 0
    rows = [line.split(",") for line in text.strip().splitlines()[1:]]
    eps = [float(r[1]) for r in rows]
    fek = [float(r[3]) for r in rows]
    assert all(b > a for a, b in zip(eps[1:], eps[2:]))
    assert all(b >= a for a, b in zip(fek, fek[1:]))


def test_ep_word_cap(capsys, tmp_path):
    P = np.array([[0.2, 0.5, 0.3], [0.1, 0.3, 0.6], [0.6, 0.1, 0.3]])
    path = write(tmp_path / "chain.json", serialize.chain_to_json(MarkovChain(P)))
    code, _, err = invoke(capsys, "ep", "--chain", path, "--nmax", "6", "--word-cap", "100")
    assert code == 3 and "WordCapExceeded" in err


def test_ep_mc_is_reproducible(capsys, tmp_path):
    P = np.array([[0.2, 0.5, 0.3], [0.1, 0.3, 0.6], [0.6, 0.1, 0.3]])
    path = write(tmp_path / "chain.json", serialize.chain_to_json(MarkovChain(P)))
    args = ("ep", "--chain", path, "--nmax", "4", "--mc", "--samples", "500", "--seed", "9")
    first = invoke(capsys, *args)
    second = invoke(capsys, *args)
    assert first[0] == 0 and first[1] == second[1]
    assert first[1].startswith("n,Ep_per_n_mc,stderr,samples,seed,infinite_flag\n")
    code, _, _ = invoke(capsys, "ep", "--chain", path, "--mc")
    assert code == 2


def test_povm_ic(capsys):
    rep = invoke_json(capsys, "povm", "--ic", "3")
    assert rep["outcomes"] == 24 and rep["rank"] == 9 and rep["ic_complete"]
    povm = serialize.povm_from_json(rep["povm"])
    assert serialize.dumps(serialize.povm_to_json(povm)) == serialize.dumps(rep["povm"])


def test_pgfcs_gauge_pair(capsys, tmp_path):
    rng = np.random.default_rng(4)
    ch = random_channel(3, 2, rng)
    U = haar_unitary(3, rng)
    K2 = np.exp(0.4j) * (U @ ch.kraus @ U.conj().T)
    one = write(tmp_path / "a.json", serialize.channel_to_json(ch))
    two = write(tmp_path / "b.json", {"dim": 3, "kraus": [serialize.matrix_to_json(k) for k in K2]})
    rep = invoke_json(capsys, "pgfcs", one, two)
    assert rep["equal"] and rep["U"] is not None
    assert rep["residuals"]["intertwine"] <= 1e-8
    other = write(tmp_path / "c.json", serialize.channel_to_json(random_channel(3, 2, rng)))
    rep = invoke_json(capsys, "pgfcs", one, other)
    assert not rep["equal"] and rep["U"] is None


def test_missing_input_is_validation_error(capsys):
    assert invoke(capsys, "qdb")[0] == 2
    assert invoke(capsys, "ep")[0] == 2
    assert invoke(capsys, "family", "--preset", "nope")[0] == 2

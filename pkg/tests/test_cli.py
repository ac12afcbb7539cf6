import io
import json
import subprocess
import sys

import numpy as np
import pytest

from divcorr import cli
from divcorr.errors import DomainError
from divcorr.sieve import TauTable


def run(argv):
    out = io.StringIO()
    rc = cli.main(argv, out=out)
    return rc, out.getvalue()


def test_correlate_checkpoint():
    rc, text = run(["correlate", "--k", "2", "--ell", "2", "--h", "1", "--x", "20220000"])
    assert rc == 0
    assert text.splitlines() == ["k,ell,h,X,value", "2,2,1,20220000,4003240588"]


def test_correlate_json():
    rc, text = run(["correlate", "--k", "3", "--ell", "2", "--h", "2", "--x", "1000", "--output", "json"])
    rec = json.loads(text)[0]
    assert rc == 0 and rec["k"] == 3 and rec["ell"] == 2 and isinstance(rec["value"], int)


def test_constant_by_name():
    rc, text = run(["constants", "--name", "A354709"])
    assert rc == 0 and text.startswith("2.5290661735809299")
    rc, text = run(["constants", "--name", "gamma", "--digits", "30", "--header"])
    assert text.splitlines()[0] == "name,value" and text.splitlines()[1].startswith("gamma,0.5772156649")


def test_unknown_flag_is_usage_error():
    with pytest.raises(SystemExit) as info:
        run(["correlate", "--k", "2", "--ell", "2", "--x", "10", "--bogus"])
    assert info.value.code == 2
    proc = subprocess.run([sys.executable, "-m", "divcorr", "nosuchcommand"], capture_output=True)
    assert proc.returncode == 2


def test_domain_errors_exit_2(capsys):
    assert run(["correlate", "--k", "2", "--ell", "2", "--x", "10", "--digits", "10"])[0] == 2
    assert run(["correlate", "--k", "9", "--ell", "2", "--x", "10"])[0] == 2
    assert "error" in capsys.readouterr().err


def test_resource_error_exit_3_with_json(capsys):
    rc, _ = run(["ap-remainder", "--k", "3", "--x", "100000000", "--budget-seconds", "1"])
    assert rc == 3
    diag = json.loads(capsys.readouterr().err)
    assert diag["error"] == "ResourceError" and diag["budget"] == 1 and diag["estimate"] > 1


def test_env_default_digits(monkeypatch):
    monkeypatch.setenv(cli.DIGITS_ENV, "35")
    rc, text = run(["mainterm", "m22", "--output", "json"])
    doc = json.loads(text)
    assert rc == 0 and doc["digits"] == 35 and doc["degree"] == 2
    # coefficients are strings so that no digits are lost
    assert all(isinstance(c, str) for c in doc["coefficients"])
    assert doc["coefficients"][1].startswith("1.57374492033249107890705692804844")
    monkeypatch.setenv(cli.DIGITS_ENV, "abc")
    assert run(["mainterm", "m22"])[0] == 2


def test_mainterm_m33_and_delta_agree():
    a = json.loads(run(["mainterm", "m33", "--digits", "40"])[1])["coefficients"]
    b = json.loads(run(["mainterm", "delta", "--digits", "40"])[1])["coefficients"]
    assert [x[:35] for x in a] == [x[:35] for x in b]
    assert run(["mainterm", "m33", "--h", "2"])[0] == 2


def test_identical_invocations_are_byte_identical():
    argv = ["ap-remainder", "--k", "3", "--x", "100000", "--sample", "40", "--seed", "5"]
    assert run(argv)[1] == run(argv)[1]
    assert run(argv)[1] != run(argv[:-1] + ["6"])[1]


def test_sieve_dump(tmp_path):
    path = tmp_path / "t3.bin"
    rc, _ = run(["sieve", "--k", "3", "--lo", "1", "--hi", "11", "--out", str(path)])
    table = TauTable.from_bytes(path.read_bytes())
    assert rc == 0 and table.values.tolist() == [1, 3, 3, 6, 3, 9, 3, 10, 6, 9]


def test_hooley_check():
    rc, text = run(["hooley-check", "--x", "10000", "--h", "6", "--output", "json"])
    rep = json.loads(text)[0]
    assert rc == 0 and rep["decomposition_holds"] and rep["identity_failures"] == 0


def test_local_factor():
    rc, text = run(["local-factor", "--k", "2", "--ell", "2", "--h", "12", "--digits", "30"])
    lines = text.splitlines()
    assert lines[0] == "p,nu,exact,factor"
    assert lines[-1].startswith("all,,7/3,")      # sigma_{-1}(12) = 28/12


def test_fit_error(tmp_path):
    path = tmp_path / "e.csv"
    rc, text = run(["fit-error", "--k", "2", "--ell", "2", "--xmax", "100000", "--csv", str(path)])
    fit = json.loads(text)
    assert rc == 0 and fit["method"] == "record-points" and 0.3 < fit["alpha"] < 0.8
    assert path.read_text().splitlines()[0] == "X,E,bound_upper,bound_lower"


def test_verify_exit_codes():
    rc, text = run(["verify", "--criteria", "1"])
    assert rc == 0 and text.startswith("[PASS]  1")
    rc, text = run(["verify", "--criteria", "2"])
    assert rc == 0 and "[SKIP]" in text


def test_run_config_validation():
    with pytest.raises(DomainError):
        cli.RunConfig(digits=29)
    with pytest.raises(DomainError):
        cli.RunConfig(output="xml")
    with pytest.raises(DomainError):
        cli.RunConfig(seed=2**64)
    assert cli.RunConfig(threads=3).workers == 3


def test_json_safe():
    assert cli._json_safe(2**60) == str(2**60)
    assert cli._json_safe(12) == 12
    assert cli._json_safe(np.int64(2**62)) == str(2**62)

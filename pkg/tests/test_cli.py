from __future__ import annotations

import io
import json
import subprocess
import sys

import pytest

from fusion_algebra.cli import run


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    text = out.getvalue()
    payload = json.loads(text) if text.strip().startswith("{") else text
    return code, payload, err.getvalue()


def test_enumerate():
    code, data, _ = call("enumerate", "--rank", "2", "--level", "2")
    assert code == 0
    assert data["size"] == 6
    assert data["weights"][0] == "2,0,0"


def test_chi_exact_record():
    code, data, _ = call("chi", "--rank", "2", "--level", "3", "--lambda", "1,0", "--mu", "0,1", "--no-zeroth")
    assert code == 0
    assert data["lambda"] == "2,1,0" and data["certified"] == "exact"
    assert data["zero"] is False


def test_fuse():
    code, data, _ = call("fuse", "--rank", "2", "--level", "3", "--lambda", "1,0", "--mu", "1,0", "--no-zeroth")
    assert code == 0
    assert data == {"1,2,0": 1, "2,0,1": 1}


def test_smatrix_summary():
    code, data, _ = call("smatrix", "--rank", "3", "--level", "2", "--summary")
    assert code == 0
    assert data["unitarity_residual"] < 1e-10


def test_rank():
    code, data, _ = call("rank", "--rank", "2", "--level", "4")
    assert code == 0
    assert data["rank"] == 1 and data["witnesses_complete"]


def test_generators_gamma():
    code, data, _ = call("generators", "--rank", "3", "--level", "2", "--gamma", "1,1,0,0")
    assert code == 0
    assert data["gamma"]["is_generator"] is False
    assert "witness_pair" in data["gamma"]


def test_invertible_and_scan():
    code, data, _ = call("invertible", "--rank", "1", "--level", "2")
    assert code == 0 and data["invertible"] is False and data["zeros"] == ["1,1"]
    code, data, _ = call("scan-invertible", "--max-rank", "2", "--max-level", "3")
    assert code == 0 and data["mismatches"] == [] and data["cells"] == 6


def test_factorize_and_census():
    code, data, _ = call("factorize", "--rank", "3", "--level", "4", "-d", "2")
    assert code == 0 and data["ok"]
    code, data, _ = call("nz-census", "--rank", "3", "--level", "8", "-d", "2", "--counts-only")
    assert code == 0
    assert (data["nz"], data["ality_pass"], data["total"]) == (75, 85, 165)


def test_zero_construct():
    code, data, _ = call("zero-construct", "--rbar", "11", "--kbar", "30", "--primes", "3,5", "--mults", "2,1")
    assert code == 0
    assert data["labels"] == [26, 25, 20, 19, 16, 13, 10, 7, 6, 1, 0]
    code, data, err = call("zero-construct", "--rbar", "5", "--kbar", "7")
    assert code == 1 and "no admissible primes" in err


def test_galois_and_fields():
    code, data, _ = call("galois", "--rank", "2", "--level", "3", "--ell", "5")
    assert code == 0 and set(data["parity_vector"]) <= {1, -1}
    code, data, _ = call("fields", "--rank", "2", "--level", "3")
    assert code == 0 and data["L_order"] == 18 and data["K_descriptor"] == "Q_18"


def test_usage_errors():
    assert call("chi", "--rank", "2", "--level", "3", "--lambda", "5,5,5", "--mu", "3,0,0")[0] == 2
    assert call("enumerate", "--rank", "2")[0] == 2
    assert call("galois", "--rank", "2", "--level", "3", "--ell", "3")[0] == 2
    assert call("enumerate", "--rank", "12", "--level", "12", "--capacity", "100")[0] == 2
    assert call("no-such-command")[0] == 2


def test_text_format():
    code, text, _ = call("enumerate", "--rank", "1", "--level", "1", "--format", "text")
    assert code == 0
    assert "size: 2" in text


def test_cache_dir(tmp_path):
    code, data, _ = call("smatrix", "--rank", "2", "--level", "2", "--summary", "--cache-dir", str(tmp_path))
    assert code == 0
    assert list(tmp_path.iterdir())


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "fusion_algebra", "enumerate", "--rank", "1", "--level", "1"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["size"] == 2


@pytest.mark.slow
def test_table_repro_small():
    code, data, _ = call("table-repro", "--max-rank", "3", "--max-level", "3")
    assert code == 0
    assert len(data["cells"]) == 9 and all(c["matches_golden"] for c in data["cells"])

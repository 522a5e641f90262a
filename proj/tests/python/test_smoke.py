import json
import math

import pytest

import rxnshingle as rs


def test_version():
    assert rs.__version__


def test_canonical_smiles():
    assert rs.canonical_smiles("OCC") == rs.canonical_smiles("C(O)C")
    assert rs.canonical_smiles("OCC.C") == "C." + rs.canonical_smiles("CCO")


def test_canonical_reaction_smiles():
    a = rs.canonical_reaction_smiles("CCO.CC(=O)O>>CC(=O)OCC.O")
    b = rs.canonical_reaction_smiles("CC(=O)O.OCC>>O.CC(=O)OCC")
    assert a == b
    assert ">>" in a


def test_parse_error_kinds():
    with pytest.raises(ValueError, match="UnknownElement"):
        rs.canonical_smiles("CQ")
    with pytest.raises(ValueError, match="MissingArrow"):
        rs.shingle_keys("CCO")


def test_shingle_keys():
    keys = rs.shingle_keys("CCO>>CC=O", r_max=2)
    assert keys == sorted(keys)
    assert len(keys) > 0
    # identical sides leave nothing in the symmetric difference
    assert rs.shingle_keys("CCO>>CCO") == []
    assert len(rs.shingle_keys("CCO>>CCO", mode="union")) > 0


def test_drfp():
    hex_fp = rs.drfp_hex("CCO>>CC=O")
    assert len(hex_fp) == 1024 // 4
    assert rs.drfp_hex("CCO.CC>>CC.CCO").strip("0") == ""
    # molecule order must not matter
    assert rs.drfp_hex("CCO.CC(=O)O>>CC(=O)OCC.O") == rs.drfp_hex(
        "CC(=O)O.OCC>>O.CC(=O)OCC"
    )
    assert rs.tanimoto_hex(hex_fp, hex_fp) == 1.0


def test_model_roundtrip(tmp_path):
    model = rs.Model.fresh("desk", seed=7)
    rxn = "CCO.CC(=O)O>>CC(=O)OCC.O"
    p = model.predict(rxn)
    assert math.isfinite(p)
    assert model.predict_many([rxn, rxn]) == [p, p]
    assert model.permutation_std(rxn, n_perms=6, seed=3) == 0.0

    path = str(tmp_path / "model.ckpt")
    model.save(path)
    again = rs.Model.load(path)
    assert again.predict(rxn) == p
    assert json.loads(again.config_json())["dim"] == 64


def test_bad_checkpoint(tmp_path):
    path = tmp_path / "junk.ckpt"
    path.write_bytes(b"not a checkpoint")
    with pytest.raises(ValueError, match="BadCheckpoint"):
        rs.Model.load(str(path))

import math
import os

import lvx


def test_bdg_constant_branches():
    assert lvx.bdg_constant(0.5) == 1.0
    assert lvx.bdg_constant(1.0) == 2.0
    assert lvx.bdg_constant(2.0) == 1.0
    assert math.isclose(lvx.bdg_constant(1.5), math.sqrt(12.0))


def test_fixed_point_golden_ratio_square():
    assert abs(lvx.stability_fixed_point(1.0, 1.0, 0.5) - (3 + math.sqrt(5)) / 2) < 1e-10


def test_exp_family_lambda_two():
    fam = lvx.exp_kernel_family(2.0)
    assert fam["bounded_unique"]
    assert fam["describe"] == "c*e^{-t} + 2"


def test_heat_norm_closed_form_d1_p2():
    # int_0^inf int g_a^2 with a = 1, d = 1 is 1/4
    assert abs(lvx.heat_lp_norm(1.0, 1, 2.0, math.inf) - 0.25) < 1e-9


def test_check_presets_match_expectations():
    d2 = lvx.check(lvx.resolve_preset("ex3.1-d2"))
    assert d2["overall"] == "fail"
    assert any(i["id"] == "local_integrability" and i["verdict"] == "fail" for i in d2["items"])
    d1 = lvx.check(lvx.resolve_preset("ex3.1-d1"))
    assert d1["overall"] == "pass"


def test_run_reproduce_example(tmp_path):
    code, out, err = lvx.run("reproduce-example", "ex4.1", out_dir=str(tmp_path))
    assert code == 0, err
    assert "c*e^{-t} + 2" in out
    assert (tmp_path / "report.csv").exists()


def test_unknown_override_is_config_error(tmp_path):
    code, _, err = lvx.run("check", lvx.resolve_preset("ex3.1-d1"), overrides=["kernel.dampin=1"], out_dir=str(tmp_path))
    assert code == 1
    assert "unknown key" in err


def test_preset_dir_from_environment():
    assert os.path.isdir(lvx.preset_dir())

import json
from fractions import Fraction

import pytest

from s3geom.config import DEFAULT, Config, RationalityPolicy, Tolerances


def test_policy_accepts_close_rationals():
    pol = RationalityPolicy(tol=1e-9, max_denominator=64)
    assert pol.approximate(0.5) == Fraction(1, 2)
    assert pol.approximate(1 / 3 + 1e-12) == Fraction(1, 3)
    assert pol.approximate(2 ** -0.5) is None


def test_policy_rejects_bad_parameters():
    with pytest.raises(ValueError):
        RationalityPolicy(max_denominator=0)
    with pytest.raises(ValueError):
        RationalityPolicy(tol=0)
    with pytest.raises(ValueError):
        Tolerances(unit=-1)


def test_config_roundtrip(tmp_path):
    cfg = DEFAULT.with_overrides(tolerances={"ode_rtol": 1e-9}, rationality={"max_denominator": 12})
    path = tmp_path / "c.json"
    path.write_text(json.dumps(cfg.to_dict()))
    assert Config.load(path) == cfg


def test_config_rejects_unknown_sections():
    with pytest.raises(ValueError):
        Config.from_dict({"tolerance": {}})
    with pytest.raises(TypeError):
        Config.from_dict({"tolerances": {"nope": 1.0}})

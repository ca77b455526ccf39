import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from relast.config import KEYS, describe_keys, parse_config, serialize_config
from relast.errors import InputError

MINIMAL = """
domain.box = 0 1 0 1
domain.resolution = 4
material.lambda = 1
material.mu = 1
"""


def test_minimal_config_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg.box == ((0.0, 1.0), (0.0, 1.0))
    assert cfg.resolution == (4, 4)
    assert (cfg.metric, cfg.phi0, cfg.tol, cfg.maxiter) == ("euclidean", "identity", 1e-10, 200)
    assert cfg.dim == 2 and cfg.mode == "linear"


def test_mu_violation_message_names_line():
    text = MINIMAL.replace("material.mu = 1", "material.mu = -1.0")
    with pytest.raises(InputError) as exc:
        parse_config(text)
    assert "mu = -1.0 violates the constraint μ > 0" in str(exc.value)
    assert exc.value.line == 5


@pytest.mark.parametrize("line, needle", [
    ("domain.colour = red", "unknown key"),
    ("target.metric = torus", "unknown metric"),
    ("solver.mode = fast", "unknown mode"),
    ("forces.body = 1 2 3", "needs 2 values"),
    ("domain.gamma2 = zmax", "unknown face"),
    ("target.radius = 2", "not a parameter"),
    ("solver.tol = abc", "expected a number"),
    ("no equals sign here", "section.key = value"),
])
def test_rejected_lines(line, needle):
    with pytest.raises(InputError, match=needle) as exc:
        parse_config(MINIMAL + line + "\n")
    assert exc.value.line == 6


def test_missing_required_keys():
    with pytest.raises(InputError, match="required"):
        parse_config("domain.box = 0 1 0 1\ndomain.resolution = 2\nmaterial.mu = 1\n")
    with pytest.raises(InputError, match="required"):
        parse_config("material.lambda = 1\nmaterial.mu = 1\n")


def test_comments_and_blank_lines():
    cfg = parse_config("# run\n\n" + MINIMAL + "target.metric = sphere  # unit\n")
    assert cfg.metric == "sphere"


def test_describe_keys_lists_every_key():
    text = describe_keys()
    for key in KEYS:
        assert key in text


floats = st.floats(0.1, 10.0, allow_nan=False)


@settings(max_examples=40, deadline=None)
@given(lo=st.floats(-5, 5), width=floats, lam=st.floats(0.0, 10.0), mu=floats,
       n=st.integers(1, 64), metric=st.sampled_from(["euclidean", "sphere", "polar_flat"]),
       body=st.lists(st.floats(-100, 100), min_size=2, max_size=2),
       tol=st.floats(1e-14, 1e-2), seed=st.integers(0, 2 ** 31))
def test_serialize_round_trip(lo, width, lam, mu, n, metric, body, tol, seed):
    text = (f"domain.box = {lo!r} {lo + width!r} 0 1\ndomain.resolution = {n}\n"
            f"target.metric = {metric}\nmaterial.lambda = {lam!r}\nmaterial.mu = {mu!r}\n"
            f"forces.body = {body[0]!r} {body[1]!r}\nsolver.tol = {tol!r}\nsolver.seed = {seed}\n")
    cfg = parse_config(text)
    again = parse_config(serialize_config(cfg))
    assert again == cfg
    assert serialize_config(again) == serialize_config(cfg)


def test_round_trip_with_linear_reference():
    cfg = parse_config(MINIMAL + "reference.phi0 = linear\nreference.matrix = 1 0.2 0 1.5\n"
                       "reference.offset = 0.7 0\nforces.f1 = 0.1 0 0 0.1\n")
    assert parse_config(serialize_config(cfg)) == cfg
    assert np.reshape(cfg.matrix, (2, 2))[0, 1] == 0.2

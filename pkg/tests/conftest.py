import numpy as np
import pytest

from src.realizability.strainreal.fields.expressions import parse_expression
from src.realizability.strainreal.fields.grid import Grid2D
from src.realizability.strainreal.fields.velocity import affine_stream, stream_to_velocity


@pytest.fixture
def unit_grid():
    return Grid2D.square((0.0, 0.0), 1.0, 33)


@pytest.fixture
def hyperbolic_stream():
    """u = (x^2 - y^2) / 2, U = (y, x), e(U) = [[0, 1], [1, 0]]"""
    return parse_expression("(x^2-y^2)/2")


@pytest.fixture
def shear_velocity():
    return stream_to_velocity(affine_stream((0.0, 1.0, 1.0, 0.0))).with_average((0.0, 1.0, 1.0, 0.0))


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture
def out_dir(tmp_path, monkeypatch):
    monkeypatch.delenv("AWS_S3_BUCKET_NAME", raising=False)
    monkeypatch.delenv("STRAINREAL_THREADS", raising=False)
    monkeypatch.delenv("STRAINREAL_LOG_LEVEL", raising=False)
    return tmp_path / "artifacts"

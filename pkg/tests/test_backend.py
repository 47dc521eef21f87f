import subprocess
import sys

import numpy as np
import pytest

from evdecode import _backend, _pykernels
from evdecode.model import Label, prune

from conftest import BACKENDS


def test_python_always_available():
    assert "python" in _backend.available()
    assert _backend.get("python") is _pykernels


def test_env_selection(monkeypatch):
    monkeypatch.setenv("EVDECODE_BACKEND", "python")
    assert _backend.get() is _pykernels
    with pytest.raises(ValueError):
        _backend.get("fortran")


def test_missing_extension_reported(monkeypatch):
    monkeypatch.setattr(_backend, "_compiled", None)
    assert _backend.available() == ["python"]
    with pytest.raises(RuntimeError):
        _backend.get("compiled")
    assert _backend.get() is _pykernels


def test_fallback_when_extension_hidden():
    # a fresh interpreter that cannot import the extension still decodes
    code = (
        "import sys; sys.modules['evdecode._kernels'] = None\n"
        "from evdecode import _backend; print(_backend.available())"
    )
    out = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "['python']"


@pytest.mark.parametrize("name", BACKENDS)
def test_prune3_matches_model_prune(name):
    kernels = _backend.get(name)
    rng = np.random.default_rng(0)
    for _ in range(50):
        pts = rng.integers(0, 6, size=(80, 3)).astype(float)
        keep = list(kernels.prune3(pts[:, 0].copy(), pts[:, 1].copy(), pts[:, 2].copy()))
        labels = [Label(*p, parent=i) for i, p in enumerate(pts)]
        assert keep == [lab.parent for lab in prune(labels)]


@pytest.mark.parametrize("name", BACKENDS)
def test_prune2(name):
    kernels = _backend.get(name)
    d = np.array([1.0, 2.0, 1.0, 3.0, 0.5])
    b = np.array([5.0, 1.0, 5.0, 0.5, 9.0])
    keep = [int(i) for i in kernels.prune2(d, b)]
    assert keep == [4, 0, 1, 3]


@pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled kernels not built")
def test_kernels_agree_on_empty_front():
    for name in BACKENDS:
        ctx = _backend.get(name).FRContext(np.zeros((2, 2)), [0], np.zeros((1, 1)), 1.0, 1.0, None)
        fd, fb, *_rest, generated = ctx.step([], [], 0, 1, False)
        assert len(fd) == 0 and generated == 0

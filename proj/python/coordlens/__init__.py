"""Python access to the coordlens coordinated-view engine."""

import json

from . import _core
from ._core import CoordLensError, generate

__all__ = ["CoordLensError", "Session", "classify", "generate", "validate"]


def validate(path):
    """Validation report for a bundle directory as a dict."""
    return json.loads(_core.validate(str(path)))


def classify(values, method="quantile", k=5):
    return _core.classify([float(v) for v in values], method, int(k))


class Session:
    """One session over a bundle. Commands and notifications are dicts."""

    def __init__(self, path=None, _core_session=None):
        self._s = _core_session if _core_session is not None else _core.Session(str(path))

    @classmethod
    def restore(cls, path, snapshot):
        text = snapshot if isinstance(snapshot, str) else json.dumps(snapshot)
        return cls(_core_session=_core.Session.restore(str(path), text))

    def dispatch(self, command):
        text = command if isinstance(command, str) else json.dumps(command)
        return [json.loads(n) for n in self._s.dispatch(text)]

    def full_state(self):
        return [json.loads(n) for n in self._s.full_state()]

    def snapshot(self):
        return json.loads(self._s.snapshot())

    def status(self):
        return self._s.status()

    def view_ids(self):
        return self._s.view_ids()

    @property
    def revision(self):
        return self._s.revision

"""Certificate files (JSON), CSV tables and atomic output.

Floats are written with 17 significant digits (``%.17g``), which determines
a binary64 value uniquely, so certificates can be rechecked bit for bit.
Non-finite values use the ``Infinity``/``NaN`` tokens accepted by Python's
:mod:`json`. Keys are sorted; the timestamp lives in ``created`` and is the
only field excluded from the deterministic payload.
"""

import csv
import dataclasses
import io
import json
import os
import tempfile
from dataclasses import dataclass
from datetime import datetime, timezone

import numpy as np

from . import __version__
from . import geometry as geo
from .delta import PsiData
from .problem import spec_from_body

SCHEMA_VERSION = "zerocert.certificate/1"


def fmt_float(x: float) -> str:
    x = float(x)
    if x != x:
        return "NaN"
    if x in (float("inf"), float("-inf")):
        return "Infinity" if x > 0 else "-Infinity"
    s = "%.17g" % x
    if not any(c in s for c in ".en"):
        s += ".0"
    return s


def to_payload(obj) -> object:
    """Plain JSON-ready structure (dicts, lists, str, int, float, bool, None)."""
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return to_payload(obj.tolist())
    if isinstance(obj, geo.ConvexBody):
        return spec_from_body(obj)
    if isinstance(obj, PsiData):
        return {"type": "psi_data", "points": obj.points.tolist(), "values": obj.values.tolist(),
                "subgradients": obj.subgradients.tolist()}
    if dataclasses.is_dataclass(obj):
        out = {"type": type(obj).__name__}
        for f in dataclasses.fields(obj):
            if f.name.startswith("_"):
                continue
            out[f.name] = to_payload(getattr(obj, f.name))
        return out
    if isinstance(obj, dict):
        return {str(k): to_payload(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_payload(v) for v in obj]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(value, indent=1, _level=0) -> str:
    """JSON text with ``%.17g`` floats and sorted keys."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if value is None:
        return "null"
    if value is True:
        return "true"
    if value is False:
        return "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return fmt_float(value)
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(value[k], indent, _level + 1)}"
                 for k in sorted(value)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(value, list):
        if not value:
            return "[]"
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
            return "[" + ", ".join(dumps(v) for v in value) + "]"
        items = [pad + dumps(v, indent, _level + 1) for v in value]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"not a payload value: {type(value).__name__}")


@dataclass(frozen=True)
class CertificateFile:
    command: str
    config: dict
    status: str
    result: dict
    schema: str = SCHEMA_VERSION
    library_version: str = __version__
    created: str = ""

    def payload(self) -> dict:
        d = dataclasses.asdict(self)
        d.pop("created")
        return d

    def payload_text(self) -> str:
        """Deterministic serialization (everything except the timestamp)."""
        return dumps(self.payload()) + "\n"

    def dumps(self) -> str:
        d = self.payload()
        d["created"] = self.created
        return dumps(d) + "\n"

    @classmethod
    def loads(cls, text: str) -> "CertificateFile":
        d = json.loads(text)
        if d.get("schema") != SCHEMA_VERSION:
            raise ValueError(f"unsupported certificate schema {d.get('schema')!r}")
        return cls(**d)


def make_certificate(command, config, status, result) -> CertificateFile:
    stamp = datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    return CertificateFile(command, to_payload(config), status, to_payload(result), created=stamp)


def write_atomic(path, text: str) -> None:
    """Write ``text`` to ``path`` through a temporary file and a rename."""
    path = os.fspath(path)
    folder = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".zerocert-", suffix=".tmp")
    try:
        umask = os.umask(0)
        os.umask(umask)
        os.chmod(tmp, 0o666 & ~umask)
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt_float(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()

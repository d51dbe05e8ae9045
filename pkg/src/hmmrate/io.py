"""Model configuration files and CSV output.

Model file (JSON)::

    {
      "alphabet_size": 2,
      "transition": [[0.9, 0.1], [0.2, 0.8]],
      "channel": {
        "kind": "gaussian",
        "params": [{"mu": 0.0, "scale": 1.0}, {"mu": 0.0, "scale": 2.0}]
      }
    }

``transition`` may also be given flat, row-major. ``kind`` is one of
"gaussian", "cauchy" or "slow_tail"; ``scale`` is sigma or gamma.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import __version__
from .model import ChannelKind, ChannelModel, MarkovModel, ModelError


class ConfigError(ModelError):
    pass


def parse_model(doc: dict) -> tuple[MarkovModel, ChannelModel]:
    try:
        l = int(doc["alphabet_size"])
        P = np.asarray(doc["transition"], dtype=float)
        ch = doc["channel"]
        kind = ChannelKind(str(ch["kind"]).lower())
        params = ch["params"]
        mu = [float(p["mu"]) for p in params]
        scale = [float(p["scale"]) for p in params]
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed model document: {exc!r}") from exc
    if l < 1:
        raise ConfigError("alphabet_size must be positive")
    if P.size != l * l:
        raise ConfigError(f"transition has {P.size} entries, expected {l * l}")
    if len(mu) != l:
        raise ConfigError(f"channel lists {len(mu)} components, expected {l}")
    return MarkovModel(P.reshape(l, l)), ChannelModel(kind, mu, scale)


def load_model(path: str | Path) -> tuple[MarkovModel, ChannelModel, dict]:
    """Read a model file; returns (model, channel, raw document)."""
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read model file {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"model file {path} is not valid JSON: {exc}") from exc
    model, channel = parse_model(doc)
    return model, channel, doc


def model_document(model: MarkovModel, channel: ChannelModel) -> dict:
    return {
        "alphabet_size": model.size,
        "transition": model.transition.tolist(),
        "channel": {
            "kind": channel.kind.value,
            "params": [{"mu": float(m), "scale": float(s)} for m, s in zip(channel.mu, channel.scale)],
        },
    }


def config_hash(payload: dict) -> str:
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def fmt(x) -> str:
    """17 significant digits for floats; empty for None."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    if isinstance(x, (dict, list, tuple)):
        return json.dumps(x, sort_keys=True, default=_json_default)
    return str(x)


def _json_default(o):
    if isinstance(o, complex):
        return [o.real, o.imag]
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not serializable: {type(o)}")


def header_line(command: str, chash: str, seed: int | None) -> str:
    return f"# command={command} config_hash={chash} seed={seed if seed is not None else 'none'} version={__version__}"


def render_csv(header: str, columns: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    buf.write(header + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    return buf.getvalue()


def write_text(path: str | Path | None, text: str) -> None:
    if path is None or str(path) == "-":
        import sys

        sys.stdout.write(text)
        return
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(text)


def trajectory_rows(states: np.ndarray):
    """(step, state_1..state_l) rows for a filter run."""
    for i, x in enumerate(states):
        yield (i, *np.real(x).tolist())

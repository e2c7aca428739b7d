"""File formats: state and mixture JSON, graph input, sample streams."""

import csv
import io
import json

import numpy as np

from .samplers import MixtureSpec, SampleRecord
from .state import GaussianState

RECORD_FIELDS = ("pattern", "N", "eta", "epsilon", "wall_time", "halted")


def load_state(path):
    with open(path) as fh:
        return GaussianState.from_dict(json.load(fh))


def save_state(state, path):
    with open(path, "w") as fh:
        json.dump(state.to_dict(), fh)


def load_mean(path, m):
    """Displacement file: JSON ``{"mean_re": [...], "mean_im": [...]}``."""
    with open(path) as fh:
        data = json.load(fh)
    mean = np.asarray(data.get("mean_re", np.zeros(m)), dtype=float) + 1j * np.asarray(
        data.get("mean_im", np.zeros(m)), dtype=float
    )
    if mean.shape != (m,):
        raise ValueError(f"displacement must have {m} entries")
    return mean


def load_mixture(path):
    """JSON list of ``{"q": weight, "state": {...}}``; negative weights make it signed."""
    with open(path) as fh:
        data = json.load(fh)
    components = [(float(item["q"]), GaussianState.from_dict(item["state"])) for item in data]
    return MixtureSpec(components, signed=any(q < 0 for q, _ in components))


def save_mixture(mix, path):
    with open(path, "w") as fh:
        json.dump([{"q": q, "state": s.to_dict()} for q, s in mix.components], fh)


def parse_graph(text):
    """Dense CSV matrix or ``u v`` edge list (0-based), detected from the first data line."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise ValueError("empty graph file")
    if "," in lines[0]:
        adj = np.array([[float(x) for x in ln.split(",")] for ln in lines])
        if adj.shape[0] != adj.shape[1]:
            raise ValueError(f"dense graph must be square, got {adj.shape}")
        return adj
    edges = []
    for ln in lines:
        parts = ln.split()
        if len(parts) not in (2, 3):
            raise ValueError(f"cannot parse edge line {ln!r}")
        w = float(parts[2]) if len(parts) == 3 else 1.0
        edges.append((int(parts[0]), int(parts[1]), w))
    n = 1 + max(max(u, v) for u, v, _ in edges)
    adj = np.zeros((n, n))
    for u, v, w in edges:
        adj[u, v] = adj[v, u] = w
    return adj


def load_graph(path):
    with open(path) as fh:
        return parse_graph(fh.read())


def save_graph_csv(adj, path):
    np.savetxt(path, adj, delimiter=",", fmt="%.17g")


def load_unitary(path):
    """``.npy`` complex array, or JSON ``{"re": [[...]], "im": [[...]]}``."""
    if str(path).endswith(".npy"):
        return np.load(path)
    with open(path) as fh:
        data = json.load(fh)
    return np.asarray(data["re"], dtype=float) + 1j * np.asarray(data.get("im", 0.0), dtype=float)


def record_to_dict(rec, timing=True):
    out = {
        "pattern": list(rec.pattern),
        "N": rec.N,
        "eta": rec.eta,
        "epsilon": rec.epsilon,
        "wall_time": rec.wall_time,
        "halted": rec.halted,
    }
    if not timing:
        del out["wall_time"]
    return out


def record_from_dict(data):
    return SampleRecord(
        pattern=tuple(int(s) for s in data["pattern"]),
        eta=float(data["eta"]),
        epsilon=float(data["epsilon"]),
        wall_time=float(data.get("wall_time", 0.0)),
        halted=bool(data["halted"]),
    )


def format_jsonl(records, timing=True):
    return "".join(json.dumps(record_to_dict(r, timing)) + "\n" for r in records)


def parse_jsonl(text):
    return [record_from_dict(json.loads(ln)) for ln in text.splitlines() if ln.strip()]


def format_csv(records, timing=True):
    buf = io.StringIO()
    fields = [f for f in RECORD_FIELDS if timing or f != "wall_time"]
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fields)
    for rec in records:
        row = record_to_dict(rec, timing)
        row["pattern"] = " ".join(str(s) for s in rec.pattern)
        row["halted"] = int(rec.halted)
        writer.writerow([repr(row[f]) if isinstance(row[f], float) else row[f] for f in fields])
    return buf.getvalue()


def parse_csv(text):
    out = []
    for row in csv.DictReader(io.StringIO(text)):
        out.append(
            SampleRecord(
                pattern=tuple(int(s) for s in row["pattern"].split()),
                eta=float(row["eta"]),
                epsilon=float(row["epsilon"]),
                wall_time=float(row.get("wall_time") or 0.0),
                halted=bool(int(row["halted"])),
            )
        )
    return out


def load_records(path):
    with open(path) as fh:
        text = fh.read()
    if str(path).endswith(".csv"):
        return parse_csv(text)
    return parse_jsonl(text)

"""File formats: path/field/law CSVs and the posterior JSON document.

Floats are written with 17 significant digits so every value reads back
bit-exactly.
"""
import json
from pathlib import Path

import numpy as np

from .local_time import ChiField, LocalTimeField, StationaryLaw
from .posterior import PosteriorGaussian
from .prior import PriorSpec
from .sde import SamplePath

FLOAT_FMT = "%.17g"


def fmt(v):
    return FLOAT_FMT % v


def write_path_csv(path, filename):
    data = np.column_stack([path.times, path.values])
    np.savetxt(filename, data, fmt=FLOAT_FMT, delimiter=",", header="t,x", comments="")


def read_path_csv(filename):
    data = np.loadtxt(filename, delimiter=",", skiprows=1, ndmin=2)
    if data.shape[1] != 2 or data.shape[0] < 2:
        raise ValueError(f"{filename}: expected columns t,x and at least two rows")
    t, x = data[:, 0], data[:, 1]
    dt = t[1] - t[0]
    steps = np.diff(t)
    if not dt > 0 or np.max(np.abs(steps - dt)) > 1e-9 * max(1.0, t[-1]):
        raise ValueError(f"{filename}: time column is not uniformly spaced")
    return SamplePath(dt, x)


def write_field_csv(lt, chi, filename):
    if lt.M != chi.M:
        raise ValueError("local time and chi grids differ")
    with open(filename, "w") as fh:
        fh.write("x,L,chi\n")
        for x, L, c in zip(lt.x, lt.values, chi.values):
            fh.write(f"{fmt(x)},{fmt(L)},{int(c)}\n")


def read_field_csv(filename):
    data = np.loadtxt(filename, delimiter=",", skiprows=1, ndmin=2)
    L = data[:, 1]
    # occupation identity: the grid mean of L is the horizon
    return LocalTimeField(L, float(L.mean())), ChiField(data[:, 2].astype(np.int64))


def write_law_csv(law, filename):
    with open(filename, "w") as fh:
        fh.write("x,rho,s_prime\n")
        for x, r, s in zip(law.x, law.rho, law.s_prime):
            fh.write(f"{fmt(x)},{fmt(r)},{fmt(s)}\n")
        fh.write(f"# m_mass={fmt(law.m_mass)}\n")


def read_law_csv(filename):
    lines = Path(filename).read_text().splitlines()
    meta = [ln for ln in lines if ln.startswith("# m_mass=")]
    if not meta:
        raise ValueError(f"{filename}: missing '# m_mass=' line")
    rows = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:] if ln and not ln.startswith("#")])
    return StationaryLaw(rows[:, 0], rows[:, 1], rows[:, 2], float(meta[-1].split("=", 1)[1]))


def _json_array(a):
    a = np.asarray(a)
    if a.ndim == 1:
        return "[" + ", ".join(fmt(v) for v in a) + "]"
    return "[\n    " + ",\n    ".join(_json_array(row) for row in a) + "\n  ]"


def posterior_to_json(post):
    s = post.spec
    parts = [
        f'  "p": {s.p}',
        f'  "eta": {fmt(s.eta)}',
        f'  "kappa": {fmt(s.kappa)}',
        f'  "N": {s.N}',
        f'  "T": {fmt(post.T)}',
        f'  "mean": {_json_array(post.mean)}',
        f'  "precision": {_json_array(post.precision)}',
    ]
    return "{\n" + ",\n".join(parts) + "\n}\n"


def write_posterior_json(post, filename):
    Path(filename).write_text(posterior_to_json(post))


def read_posterior_json(filename):
    doc = json.loads(Path(filename).read_text())
    spec = PriorSpec(doc["p"], doc["eta"], doc["kappa"], doc["N"])
    mean = np.asarray(doc["mean"], dtype=float)
    A = np.asarray(doc["precision"], dtype=float)
    if mean.shape != (spec.N,) or A.shape != (spec.N, spec.N):
        raise ValueError(f"{filename}: mean/precision shapes do not match N={spec.N}")
    return PosteriorGaussian(spec, mean, A, float(doc["T"]))


def write_rows_csv(columns, rows, filename):
    with open(filename, "w") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_cell(row.get(c)) for c in columns) + "\n")


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return fmt(v)
    s = str(v)
    return '"' + s.replace('"', "'") + '"' if ("," in s or '"' in s) else s

"""
Result files of a scenario run. Floats are written with ``repr`` so the
files are bit exact and two runs of one config compare equal byte for
byte.
"""
import csv
import json
import os

import numpy as np

AXES = ("x", "y", "z")


def _cell(value):
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def write_table(path, header, rows):
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
    return path


def _by_point(values, n_points):
    return np.asarray(values, dtype=float).reshape(n_points, -1)


def write_estimates(path, points, estimate):
    """
    One row per target point and component: coordinates, component
    index, estimate, standard error, requested paths, excluded paths.
    """
    points = np.atleast_2d(points)
    n_points, dim = points.shape
    mean = _by_point(estimate.mean, n_points)
    stderr = _by_point(estimate.stderr, n_points)
    excluded = np.broadcast_to(estimate.n_excluded, (n_points,))
    header = list(AXES[:dim]) + ["component", "estimate", "stderr",
                                 "n_paths", "n_excluded"]
    rows = []
    for p in range(n_points):
        for c in range(mean.shape[1]):
            rows.append(list(points[p]) + [c, mean[p, c], stderr[p, c],
                                           int(estimate.n_paths),
                                           int(excluded[p])])
    return write_table(path, header, rows)


def write_oracle(path, points, estimate, reference):
    """Reference values beside the estimates, with their z-scores."""
    points = np.atleast_2d(points)
    n_points, dim = points.shape
    reference = _by_point(reference, n_points)
    z = _by_point(estimate.z_score(reference.reshape(
        np.shape(estimate.mean))), n_points)
    header = list(AXES[:dim]) + ["component", "reference", "z"]
    rows = [list(points[p]) + [c, reference[p, c], z[p, c]]
            for p in range(n_points) for c in range(reference.shape[1])]
    write_table(path, header, rows)
    finite = np.abs(z[np.isfinite(z)])
    return float(np.max(finite)) if finite.size else float("inf")


def write_diagnostics(path, states):
    records = [s.diagnostics.as_dict() for s in states]
    n_circulation = len(records[0]["circulation"])
    names = [k for k in records[0] if k != "circulation"]
    header = names + ["circulation_%d" % i for i in range(n_circulation)]
    rows = [[r[k] for k in names] + list(r["circulation"]) for r in records]
    return write_table(path, header, rows)


def write_particles(path, ensemble, domain=None):
    positions = ensemble.positions
    if domain is not None and domain.is_periodic:
        positions = domain.wrap(positions)
    times = ensemble.grid.times() if ensemble.recorded else [
        ensemble.grid.t0, ensemble.grid.t1]
    dim = positions.shape[-1]
    header = ["particle", "time"] + list(AXES[:dim]) + ["valid"]
    rows = [[p, times[k]] + list(positions[p, k]) + [ensemble.valid[p]]
            for p in range(positions.shape[0])
            for k in range(positions.shape[1])]
    return write_table(path, header, rows)


class _Encoder(json.JSONEncoder):

    def default(self, o):
        if isinstance(o, np.integer):
            return int(o)
        if isinstance(o, np.floating):
            return float(o)
        if isinstance(o, np.bool_):
            return bool(o)
        if isinstance(o, np.ndarray):
            return o.tolist()
        return super(_Encoder, self).default(o)


def write_json(path, data):
    with open(path, "w") as handle:
        json.dump(data, handle, cls=_Encoder, indent=2, sort_keys=True)
        handle.write("\n")
    return path


def ensure_directory(path):
    os.makedirs(path, exist_ok=True)
    return path

"""CSV writers (full round-trip float precision) and flat config files."""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .timeseries import TimeSeries


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return str(x)


def write_csv(path, header, rows) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(x) for x in row])


def write_probes_csv(path, series: TimeSeries, probes, with_stress: bool) -> None:
    """Long-format probe series: t, location, u [, tau12, n1]."""
    header = ["t", "location", "u"] + (["tau12", "n1"] if with_stress else [])
    rows = []
    for k, t in enumerate(series.t):
        for p in probes:
            row = [t, p, series[f"u_at_{p:g}"][k]]
            if with_stress:
                row += [series[f"tau12_at_{p:g}"][k], series[f"n1_at_{p:g}"][k]]
            rows.append(row)
    write_csv(path, header, rows)


def write_hysteresis_csv(path, series: TimeSeries) -> None:
    rows = zip(
        series.t,
        series["mean_sq_ext_over_b"],
        series["normal_stress_diff"],
        series["eps_rate"],
    )
    write_csv(path, ["t", "mean_sq_ext_over_b", "normal_stress_diff", "eps_rate"], rows)


def write_particles_csv(path, ensemble: np.ndarray, node_ids=None) -> None:
    header = ["particle_index", "q1", "q2"]
    if node_ids is not None:
        header.append("node_id")
        rows = [
            (i, q[0], q[1], nid)
            for nid, ens in zip(node_ids, ensemble)
            for i, q in enumerate(ens)
        ]
    else:
        rows = [(i, q[0], q[1]) for i, q in enumerate(ensemble)]
    write_csv(path, header, rows)


def write_field_csv(path, mesh, u: np.ndarray, psi: np.ndarray, tau: np.ndarray) -> None:
    rows = (
        (i, mesh.nodes[i, 0], mesh.nodes[i, 1], u[i, 0], u[i, 1], psi[i],
         tau[i, 0], tau[i, 1], tau[i, 2])
        for i in range(mesh.n_nodes)
    )
    write_csv(path, ["node_id", "x", "y", "u", "v", "psi", "tau11", "tau12", "tau22"], rows)


def write_metrics_csv(path, metrics: TimeSeries) -> None:
    rows = zip(
        metrics.t,
        metrics["vortex_x"],
        metrics["vortex_y"],
        metrics["vortex_strength"],
        metrics["asymmetry"],
    )
    write_csv(path, ["t", "vortex_x", "vortex_y", "vortex_strength", "asymmetry"], rows)


def write_energy_csv(path, energy: TimeSeries | None) -> None:
    if energy is None:
        write_csv(path, ["step", "t", "free_energy", "stability_residual"], [])
        return
    rows = zip(energy["step"], energy.t, energy["free_energy"], energy["stability_residual"])
    write_csv(path, ["step", "t", "free_energy", "stability_residual"], rows)


# ---------------------------------------------------------------------------
# flat key = value config files


def parse_config_text(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def read_config_file(path) -> dict[str, str]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return parse_config_text(text)


def echo_config(path, mapping: dict) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        for key in sorted(mapping):
            f.write(f"{key} = {mapping[key]}\n")

"""Command-line driver: run an experiment, write a CSV result and a JSON manifest."""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import platform
import sys
import time
from dataclasses import asdict
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .config import ConfigError, ExperimentConfig, build_config, parse_pairs, read_config_text, serialize
from .mapping import format_positions, identity
from .montecarlo import FadingModel
from .ofdm import SnrSweep, pilot_positions, run_link_sim, run_sorted_sim, selection_to_subcarrier_permutation, write_table_csv
from .polar import build_code
from .search import (
    LOG_COLUMNS,
    SearchBudget,
    brute_force_select,
    optimize_permutation,
    surrogate_select,
    write_log_csv,
)

SUBCOMMANDS = ("brute-force", "surrogate-select", "surrogate-permute", "link-sim", "sorted-sim", "fig1-table")
INDEX_CONVENTION = "1-based positions in every CSV and manifest field"
FIG1_COLUMNS = ("index", "ber", "errors", "frames", "seed")

# flag -> config key; all default to None so that only given flags override the file
_FLAGS = {
    "--n": ("n", int), "--k": ("k", int), "--v": ("v", int), "--p": ("p", float),
    "--fd": ("fd", float), "--sigma-h-sq": ("sigma_h_sq", float),
    "--snr-db-list": ("snr_db_list", str), "--frames": ("frames", int),
    "--max-evals": ("max_evals", int), "--seed": ("seed", int), "--workers": ("workers", int),
    "--out": ("out", str), "--estimator": ("estimator", str), "--check-node": ("check_node", str),
    "--selection": ("selection", str), "--permutation": ("permutation", str),
}
_SWITCHES = {"--noiseless": "noiseless", "--uniform-pilots": "uniform_pilots"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="polarmap", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="flat 'key = value' file; flags override it")
        for flag, (key, typ) in _FLAGS.items():
            p.add_argument(flag, dest=key, type=typ, default=None)
        for flag, key in _SWITCHES.items():
            p.add_argument(flag, dest=key, action="store_const", const=True, default=None)
    return parser


def _read_positions(text: str) -> str:
    """Positions given inline or as the path of a file holding them."""
    return Path(text).read_text().strip() if os.path.isfile(text) else text


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    kind = args.command.replace("-", "_")
    text = Path(args.config).read_text() if args.config else ""
    file_values = parse_pairs(read_config_text(text))
    if file_values.get("kind", kind) != kind:
        raise ConfigError(f"config file is for {file_values['kind']!r}, not {kind!r}")
    flag_values = {}
    for key, _ in _FLAGS.values():
        value = getattr(args, key)
        if value is None:
            continue
        if key in ("selection", "permutation"):
            value = _read_positions(value)
        flag_values.update(parse_pairs({key: str(value)}))
    for key in _SWITCHES.values():
        if getattr(args, key):
            flag_values[key] = True
    values = {**file_values, **flag_values, "kind": kind}
    return build_config(values)


def _budget(cfg: ExperimentConfig) -> SearchBudget:
    return SearchBudget(cfg.effective_max_evals, cfg.effective_frames, cfg.seed)


def _write_rows(path: Path, columns, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)


def _run_brute_force(cfg, out: Path):
    res = brute_force_select(cfg.n, cfg.k, cfg.v, cfg.p, _budget(cfg), workers=cfg.workers)
    seed = _budget(cfg).crn_seed
    _write_rows(out / "brute_force.csv", LOG_COLUMNS, (
        {"candidate": format_positions(r.selection), "ber": repr(r.estimate.ber),
         "errors": r.estimate.bit_errors, "frames": r.estimate.frames, "seed": seed}
        for r in res.table
    ))
    top = res.ranked[:5]
    return ["brute_force.csv"], {
        "best": format_positions(res.best), "best_ber": res.best_ber, "gain": res.gain,
        "top5": [format_positions(r.selection) for r in top],
    }


def _run_fig1(cfg, out: Path):
    res = brute_force_select(cfg.n, cfg.k, 1, cfg.p, _budget(cfg), workers=cfg.workers)
    seed = _budget(cfg).crn_seed
    _write_rows(out / "fig1_table.csv", FIG1_COLUMNS, (
        {"index": r.selection[0] + 1, "ber": repr(r.estimate.ber), "errors": r.estimate.bit_errors,
         "frames": r.estimate.frames, "seed": seed}
        for r in res.table
    ))
    return ["fig1_table.csv"], {"best": format_positions(res.best), "best_ber": res.best_ber, "gain": res.gain}


def _run_surrogate(cfg, out: Path):
    if cfg.kind == "surrogate_select":
        res = surrogate_select(cfg.n, cfg.k, cfg.v, cfg.p, _budget(cfg), workers=cfg.workers)
        best_name = "best_selection.txt"
    else:
        res = optimize_permutation(cfg.n, cfg.k, _budget(cfg), workers=cfg.workers)
        best_name = "best_permutation.txt"
    name = f"{cfg.kind}.csv"
    write_log_csv(out / name, res)
    (out / best_name).write_text(format_positions(res.best_point) + "\n")
    return [name, best_name], {
        "best": format_positions(res.best_point), "best_ber": res.best_ber,
        "evaluations": res.result.evaluations,
    }


def _sweep(cfg) -> SnrSweep:
    return SnrSweep(tuple(cfg.snr_db_list), cfg.effective_frames, noiseless=cfg.noiseless)


def _model(cfg) -> FadingModel:
    # the sweep supplies the SNR; the model only carries the correlation parameters
    return FadingModel(cfg.n, math.inf, f_D=cfg.fd, sigma_h_sq=cfg.sigma_h_sq)


def _run_link(cfg, out: Path):
    code = build_code(cfg.n, cfg.k)
    scheme = pilot_positions(cfg.n, cfg.v, uniform=cfg.uniform_pilots)
    sweep, model = _sweep(cfg), _model(cfg)
    kw = dict(seed=cfg.seed, workers=cfg.workers, check_node=cfg.check_node)
    rows = run_link_sim(code, None, model, scheme, cfg.estimator, sweep, label="unmapped", **kw)
    if cfg.selection is not None:
        P = selection_to_subcarrier_permutation(cfg.selection, scheme)
        rows += run_link_sim(code, P, model, scheme, cfg.estimator, sweep, label="mapped", **kw)
    write_table_csv(out / "link_sim.csv", rows)
    return ["link_sim.csv"], {"pilots": format_positions(scheme.positions)}


def _run_sorted(cfg, out: Path):
    code = build_code(cfg.n, cfg.k)
    sweep, model = _sweep(cfg), _model(cfg)
    kw = dict(seed=cfg.seed, workers=cfg.workers, check_node=cfg.check_node)
    rows = run_sorted_sim(code, identity(cfg.n), model, sweep, label="none", **kw)
    if cfg.permutation is not None:
        good = np.asarray(cfg.permutation)
        rows += run_sorted_sim(code, good, model, sweep, label="good", **kw)
        rows += run_sorted_sim(code, good[::-1], model, sweep, label="bad", **kw)
    write_table_csv(out / "sorted_sim.csv", rows)
    return ["sorted_sim.csv"], {}


_RUNNERS = {
    "brute_force": _run_brute_force,
    "fig1_table": _run_fig1,
    "surrogate_select": _run_surrogate,
    "surrogate_permute": _run_surrogate,
    "link_sim": _run_link,
    "sorted_sim": _run_sorted,
}


def run_experiment(cfg: ExperimentConfig) -> dict:
    """Run ``cfg``, write its CSV and ``manifest.json`` into ``cfg.out``; return the manifest."""
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    start = time.perf_counter()
    files, summary = _RUNNERS[cfg.kind](cfg, out)
    manifest = {
        "kind": cfg.kind,
        "config": {k: (list(v) if isinstance(v, tuple) else v) for k, v in asdict(cfg).items()},
        "config_text": serialize(cfg),
        "effective_frames": cfg.effective_frames,
        "effective_max_evals": cfg.effective_max_evals,
        "index_convention": INDEX_CONVENTION,
        "outputs": files,
        "summary": summary,
        "versions": {
            "polarmap": __version__, "python": platform.python_version(),
            "numpy": np.__version__, "scipy": scipy.__version__,
        },
        "wall_time_s": time.perf_counter() - start,
    }
    for key in ("selection", "permutation"):
        if getattr(cfg, key) is not None:
            manifest["config"][key] = format_positions(getattr(cfg, key))
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        manifest = run_experiment(cfg)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"polarmap: error: {exc}", file=sys.stderr)
        return 2
    print(json.dumps(manifest["summary"], sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())

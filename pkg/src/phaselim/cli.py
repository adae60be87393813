"""Command line front end.

Subcommands: ``thresholds`` (achievability/converse measurement counts),
``figure`` (threshold-vs-SNR curve CSVs), ``verify`` (statistical check
suites as JSON lines), ``simulate`` (tiny-scale decoder error curve CSV),
``replay`` (re-run a recorded manifest and compare output digests).

Every data-producing command writes a run manifest: the resolved parameter
set, seed, version, timestamps, and a sha256 digest per output file.
Replaying the manifest regenerates byte-identical data outputs regardless
of thread count; only the manifest timestamps differ.

Exit codes: 0 success, 1 verification failure / replay mismatch,
2 usage or invalid parameters, 3 I/O failure, 4 numeric failure.

Defaults can come from ``--config`` (a JSON object or flat ``key = value``
lines whose keys mirror the flag names); explicit flags win. The master
seed falls back to the ``PHASELIM_SEED`` environment variable, then 0.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import tempfile
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .densities import GaussianNoise
from .limits import (ThresholdQuery, figure_curves, measurement_thresholds,
                     write_figure_csv)
from .model import DiscreteFlat, GaussianIID
from .simulate import SimConfig, error_curve
from .verify import SUITE_NAMES, run_suite

__all__ = ["main"]

_NUMERIC_ERRORS = (FloatingPointError, ZeroDivisionError, OverflowError)


# ---------------------------------------------------------------- helpers

def _default_seed() -> int:
    raw = os.environ.get("PHASELIM_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"PHASELIM_SEED must be an integer, got {raw!r}")


def _parse_n_grid(value) -> tuple[int, ...]:
    """Accept ``5,10,15`` lists or ``lo:hi:step`` ranges (hi inclusive)."""
    if isinstance(value, (list, tuple)):
        return tuple(int(v) for v in value)
    s = str(value).strip()
    if ":" in s:
        parts = [int(t) for t in s.split(":")]
        if len(parts) not in (2, 3):
            raise ValueError(f"bad range {s!r}, want lo:hi or lo:hi:step")
        step = parts[2] if len(parts) == 3 else 1
        grid = tuple(range(parts[0], parts[1] + 1, step))
    else:
        grid = tuple(int(t) for t in s.split(",") if t.strip())
    if not grid:
        raise ValueError("empty measurement grid")
    return grid


def _to_bool(value) -> bool:
    if isinstance(value, bool):
        return value
    s = str(value).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {value!r}")


def _load_config(path: str) -> dict:
    """JSON object, or flat ``key = value`` lines with ``#`` comments."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        doc = json.loads(text)
        if not isinstance(doc, dict):
            raise ValueError("config JSON must be an object")
        return doc
    out: dict = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected key = value")
        key, _, val = line.partition("=")
        out[key.strip().replace("-", "_")] = val.strip()
    return out


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _write_manifest(path: str, command: str, params: dict,
                    outputs: list[str], started: str, finished: str) -> None:
    doc = {
        "command": command,
        "params": params,
        "master_seed": params.get("seed", 0),
        "version": __version__,
        "started": started,
        "finished": finished,
        "outputs": {out: _sha256(out) for out in outputs},
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _manifest_path(args, command: str) -> str:
    if getattr(args, "manifest_out", None):
        return args.manifest_out
    out = getattr(args, "out", None)
    if out:
        return out + ".manifest.json"
    out_dir = getattr(args, "out_dir", None)
    if out_dir:
        return os.path.join(out_dir, "manifest.json")
    return f"{command}_manifest.json"


def _signal_for(model: str, c_beta: float, k: int):
    if model == "gaussian":
        return GaussianIID(c_beta=c_beta, k=k)
    if model == "flat":
        return DiscreteFlat(c_beta=c_beta, k=k)
    raise ValueError(f"unknown model {model!r}")


# ---------------------------------------------------------------- runners
# Each runner takes the resolved JSON-serializable parameter dict and
# returns (output paths, stdout text, metadata). Keeping them argv-free
# lets the replay command re-execute a manifest directly.

def _run_thresholds(params: dict):
    signal = _signal_for(params["model"], params["c_beta"], params["k"])
    query = ThresholdQuery(
        p=params["p"], k=params["k"], signal=signal,
        noise=GaussianNoise(params["sigma"]),
        alpha_star=params["alpha_star"], mode=params["mode"],
        grid_step=params["grid_step"])
    result = measurement_thresholds(query)
    record = {key: params[key] for key in
              ("model", "p", "k", "c_beta", "sigma", "alpha_star", "mode")}
    record.update(result.to_dict())
    if params["json"]:
        text = json.dumps(record, indent=2, sort_keys=True)
    else:
        lines = [f"{'quantity':<12} value",
                 f"{'n_ach':<12} {result.n_ach:.6f}  (alpha {result.alpha_ach:.6f})",
                 f"{'n_con':<12} {result.n_con:.6f}  (alpha {result.alpha_con:.6f})",
                 f"{'n_ach_norm':<12} {result.n_ach_norm:.6f}",
                 f"{'n_con_norm':<12} {result.n_con_norm:.6f}",
                 f"note: {result.regime_note}"]
        text = "\n".join(lines)
    outputs = []
    if params.get("out"):
        with open(params["out"], "w", encoding="utf-8") as fh:
            json.dump(record, fh, sort_keys=True, separators=(",", ":"))
            fh.write("\n")
        outputs.append(params["out"])
    return outputs, text, {}


def _run_figure(params: dict):
    step = params["snr_step"]
    grid = np.arange(params["snr_min"], params["snr_max"] + step / 2.0, step)
    curves = figure_curves(alpha_star=params["alpha_star"],
                           snr_db_values=grid, kinds=("flat", "gaussian"),
                           sigma=params["sigma"],
                           grid_step=params["grid_step"])
    os.makedirs(params["out_dir"], exist_ok=True)
    outputs = []
    for kind in ("flat", "gaussian"):
        path = os.path.join(params["out_dir"], f"{kind}_thresholds.csv")
        write_figure_csv(curves[kind], path)
        outputs.append(path)
    text = "wrote " + ", ".join(outputs)
    return outputs, text, {}


def _run_verify(params: dict):
    reports = run_suite(params["suite"], trials=params["trials"],
                        master_seed=params["seed"],
                        threads=params["threads"])
    lines = [r.to_json_line() for r in reports]
    text = "\n".join(lines)
    outputs = []
    if params.get("out"):
        with open(params["out"], "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
        outputs.append(params["out"])
    counts = {"pass": 0, "fail": 0, "inconclusive": 0}
    bad_numerics = 0
    for r in reports:
        counts[r.verdict] += 1
        if not math.isfinite(r.estimate):
            bad_numerics += 1
    meta = {"counts": counts, "bad_numerics": bad_numerics}
    return outputs, text, meta


def _run_simulate(params: dict):
    signal = _signal_for(params["model"], params["c_beta"], params["k"])
    decoder = params["decoder"]
    if decoder == "auto":
        decoder = "mc-marginal" if params["model"] == "gaussian" else "flat-ml"
    config = SimConfig(
        p=params["p"], k=params["k"], signal=signal,
        noise=GaussianNoise(params["sigma"]),
        alpha_star=params["alpha_star"],
        n_grid=_parse_n_grid(params["n_grid"]),
        trials=params["trials"], decoder=decoder,
        mc_samples=params["mc_samples"], master_seed=params["seed"],
        threads=params["threads"])
    curve = error_curve(config)
    try:
        ref_query = ThresholdQuery(
            p=params["p"], k=params["k"], signal=signal,
            noise=GaussianNoise(params["sigma"]),
            alpha_star=params["alpha_star"], mode="asymptotic")
        ref_result = measurement_thresholds(ref_query)
        reference = {"n_ach": ref_result.n_ach, "n_con": ref_result.n_con}
    except ValueError:
        reference = None
    curve.to_csv(params["out"], reference=reference)
    text = "wrote " + params["out"]
    return [params["out"]], text, {}


_RUNNERS = {
    "thresholds": _run_thresholds,
    "figure": _run_figure,
    "verify": _run_verify,
    "simulate": _run_simulate,
}

# which parameters name output locations, for replay redirection
_OUTPUT_KEYS = {
    "thresholds": {"out": "file"},
    "figure": {"out_dir": "dir"},
    "verify": {"out": "file"},
    "simulate": {"out": "file"},
}


# ----------------------------------------------------------------- parser

def _build_parser(config: dict) -> argparse.ArgumentParser:
    def conf(key, fallback, convert):
        if key in config:
            return convert(config[key])
        return fallback

    parser = argparse.ArgumentParser(
        prog="phaselim",
        description="Measurement thresholds for approximate support "
                    "recovery from phaseless observations.")
    parser.add_argument("--version", action="version",
                        version=f"phaselim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(sp):
        sp.add_argument("--seed", type=int,
                        default=conf("seed", _default_seed(), int),
                        help="master seed (env PHASELIM_SEED, default 0)")
        sp.add_argument("--threads", type=int,
                        default=conf("threads", 1, int),
                        help="worker cap; results do not depend on it")
        sp.add_argument("--config", help="JSON or key=value defaults file")
        sp.add_argument("--manifest", dest="manifest_out",
                        default=conf("manifest", None, str),
                        help="run manifest path (default next to outputs)")

    th = sub.add_parser("thresholds",
                        help="achievability and converse measurement counts")
    th.add_argument("--model", required="model" not in config,
                    choices=("gaussian", "flat"),
                    default=conf("model", None, str))
    th.add_argument("--p", type=int, required="p" not in config,
                    default=conf("p", None, int))
    th.add_argument("--k", type=int, required="k" not in config,
                    default=conf("k", None, int))
    th.add_argument("--c-beta", type=float,
                    default=conf("c_beta", 1.0, float))
    th.add_argument("--sigma", type=float, default=conf("sigma", 1.0, float))
    th.add_argument("--alpha-star", type=float,
                    default=conf("alpha_star", 0.1, float))
    th.add_argument("--mode", choices=("floor", "asymptotic"),
                    default=conf("mode", "asymptotic", str))
    th.add_argument("--grid-step", type=float,
                    default=conf("grid_step", 1e-3, float))
    th.add_argument("--json", action="store_true",
                    default=conf("json", False, _to_bool))
    th.add_argument("--out", default=conf("out", None, str),
                    help="also write the JSON record here")
    add_common(th)

    fig = sub.add_parser("figure",
                         help="threshold-vs-SNR curve CSVs for both models")
    fig.add_argument("--alpha-star", type=float,
                     default=conf("alpha_star", 0.1, float))
    fig.add_argument("--snr-min", type=float,
                     default=conf("snr_min", -10.0, float))
    fig.add_argument("--snr-max", type=float,
                     default=conf("snr_max", 40.0, float))
    fig.add_argument("--snr-step", type=float,
                     default=conf("snr_step", 1.0, float))
    fig.add_argument("--sigma", type=float, default=conf("sigma", 1.0, float))
    fig.add_argument("--grid-step", type=float,
                     default=conf("grid_step", 1e-3, float))
    fig.add_argument("--out-dir", default=conf("out_dir", "figures", str))
    add_common(fig)

    ver = sub.add_parser("verify",
                         help="statistical check suites, JSON-lines reports")
    ver.add_argument("--suite", required="suite" not in config,
                     choices=SUITE_NAMES, default=conf("suite", None, str))
    ver.add_argument("--trials", type=int,
                     default=conf("trials", 100000, int))
    ver.add_argument("--out", default=conf("out", None, str),
                     help="also write the JSON lines here")
    add_common(ver)

    sim = sub.add_parser("simulate",
                         help="exhaustive-decoder error curve at tiny sizes")
    sim.add_argument("--p", type=int, required="p" not in config,
                     default=conf("p", None, int))
    sim.add_argument("--k", type=int, required="k" not in config,
                     default=conf("k", None, int))
    sim.add_argument("--model", choices=("flat", "gaussian"),
                     default=conf("model", "flat", str))
    sim.add_argument("--c-beta", type=float,
                     default=conf("c_beta", 1.0, float))
    sim.add_argument("--sigma", type=float, default=conf("sigma", 1.0, float))
    sim.add_argument("--alpha-star", type=float,
                     default=conf("alpha_star", 0.5, float))
    sim.add_argument("--n-grid", type=_parse_n_grid,
                     default=conf("n_grid", (5, 10, 15, 20, 25, 30, 35, 40,
                                             45, 50), _parse_n_grid),
                     help="comma list (5,10,15) or lo:hi:step range")
    sim.add_argument("--trials", type=int, default=conf("trials", 400, int))
    sim.add_argument("--decoder", choices=("auto", "flat-ml", "mc-marginal"),
                     default=conf("decoder", "auto", str))
    sim.add_argument("--mc-samples", type=int,
                     default=conf("mc_samples", 256, int))
    sim.add_argument("--out", default=conf("out", "error_curve.csv", str))
    add_common(sim)

    rep = sub.add_parser("replay",
                         help="re-run a manifest, compare output digests")
    rep.add_argument("manifest", help="manifest JSON written by a prior run")
    rep.add_argument("--scratch", default=None,
                     help="directory for regenerated outputs (default temp)")
    rep.add_argument("--threads", type=int, default=None,
                     help="override the recorded thread count")
    return parser


def _params_from_args(args, command: str) -> dict:
    skip = {"command", "config", "manifest_out"}
    params = {key: val for key, val in vars(args).items() if key not in skip}
    if "n_grid" in params:
        params["n_grid"] = list(params["n_grid"])
    return params


def _cmd_replay(args) -> int:
    with open(args.manifest, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    command = doc.get("command")
    if command not in _RUNNERS:
        print(f"manifest names unknown command {command!r}", file=sys.stderr)
        return 2
    params = dict(doc["params"])
    if args.threads is not None:
        params["threads"] = args.threads
    scratch = args.scratch or tempfile.mkdtemp(prefix="phaselim-replay-")
    os.makedirs(scratch, exist_ok=True)
    for key, kind in _OUTPUT_KEYS[command].items():
        if params.get(key):
            params[key] = (scratch if kind == "dir"
                           else os.path.join(scratch,
                                             os.path.basename(params[key])))
    outputs, _text, _meta = _RUNNERS[command](params)
    produced = {os.path.basename(path): path for path in outputs}
    all_match = True
    for orig, digest in sorted(doc.get("outputs", {}).items()):
        new_path = produced.get(os.path.basename(orig))
        actual = _sha256(new_path) if new_path and os.path.exists(new_path) else None
        ok = actual == digest
        all_match &= ok
        print(f"{'match   ' if ok else 'MISMATCH'} {orig}")
    extra = set(produced) - {os.path.basename(o) for o in doc.get("outputs", {})}
    for name in sorted(extra):
        all_match = False
        print(f"UNEXPECTED {produced[name]}")
    print(f"replay of {command!r}: "
          f"{'outputs identical' if all_match else 'digest mismatch'}")
    return 0 if all_match else 1


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    try:
        config = _load_config(known.config) if known.config else {}
    except OSError as exc:
        print(f"phaselim: cannot read config: {exc}", file=sys.stderr)
        return 3
    except (ValueError, json.JSONDecodeError) as exc:
        print(f"phaselim: bad config: {exc}", file=sys.stderr)
        return 2

    try:
        parser = _build_parser(config)
    except ValueError as exc:
        print(f"phaselim: {exc}", file=sys.stderr)
        return 2
    args = parser.parse_args(argv)

    if args.command == "replay":
        try:
            return _cmd_replay(args)
        except OSError as exc:
            print(f"phaselim: {exc}", file=sys.stderr)
            return 3
        except (ValueError, KeyError) as exc:
            print(f"phaselim: bad manifest: {exc}", file=sys.stderr)
            return 2
        except _NUMERIC_ERRORS as exc:
            print(f"phaselim: numeric failure: {exc}", file=sys.stderr)
            return 4

    params = _params_from_args(args, args.command)
    started = _utc_now()
    try:
        outputs, text, meta = _RUNNERS[args.command](params)
    except _NUMERIC_ERRORS as exc:
        print(f"phaselim: numeric failure: {exc}", file=sys.stderr)
        return 4
    except OSError as exc:
        print(f"phaselim: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"phaselim: {exc}", file=sys.stderr)
        return 2
    finished = _utc_now()

    if text:
        print(text)
    try:
        _write_manifest(_manifest_path(args, args.command), args.command,
                        params, outputs, started, finished)
    except OSError as exc:
        print(f"phaselim: cannot write manifest: {exc}", file=sys.stderr)
        return 3

    if args.command == "verify":
        counts = meta["counts"]
        if meta["bad_numerics"]:
            print(f"numeric failure: {meta['bad_numerics']} non-finite "
                  "estimates", file=sys.stderr)
            return 4
        if counts["inconclusive"]:
            print(f"warning: {counts['inconclusive']} inconclusive "
                  "verdicts (underpowered run)", file=sys.stderr)
        print(f"{sum(counts.values())} checks: {counts['pass']} pass, "
              f"{counts['fail']} fail, {counts['inconclusive']} "
              "inconclusive", file=sys.stderr)
        if counts["fail"]:
            return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

"""Command line interface: simulate, fit, eval-loglik, version.

Runs are driven by a single JSON config document; individual keys can be
overridden by flags. Exit codes: 0 success, 1 usage/input error, 2 numeric
failure.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import __version__, minnesota, type1, type2
from .data import build_design, load_dataset, save_dataset
from .exceptions import NumericError
from .fitting import FitOptions
from .minnesota import MinnesotaHyper, default_hyper
from .params import TParams, default_params
from .simulate import RngStream, simulate_bvar

MODELS = ("type1", "type1-minnesota", "type2", "type2-minnesota")

CONFIG_DEFAULTS = {
    "model": "type1",
    "endogenous": None,
    "exogenous": None,
    "p": 1,
    "init": "default",
    "tol": 1e-8,
    "max_iters": 500,
    "update-nu0": False,
    "nu0-equation": "eq26",
    "gamma-delta-variant": "consistent",
    "seed": 0,
    "output-dir": ".",
    # simulate-only keys
    "n": 1,
    "l": 1,
    "T": 100,
}


def _load_config(path):
    with open(path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    if not isinstance(payload, dict):
        raise ValueError(f"{path}: config must be a JSON object")
    return payload


def _merged_config(args):
    config = dict(CONFIG_DEFAULTS)
    if getattr(args, "config", None):
        config.update(_load_config(args.config))
    overrides = {
        "model": getattr(args, "model", None),
        "endogenous": getattr(args, "endogenous", None),
        "exogenous": getattr(args, "exogenous", None),
        "p": getattr(args, "p", None),
        "tol": getattr(args, "tol", None),
        "max_iters": getattr(args, "max_iters", None),
        "update-nu0": getattr(args, "update_nu0", None),
        "nu0-equation": getattr(args, "nu0_equation", None),
        "gamma-delta-variant": getattr(args, "gamma_delta_variant", None),
        "seed": getattr(args, "seed", None),
        "output-dir": getattr(args, "output_dir", None),
    }
    for key, value in overrides.items():
        if value is not None:
            config[key] = value
    if config["model"] not in MODELS:
        raise ValueError(f"model must be one of {MODELS}, got {config['model']!r}")
    if config["nu0-equation"] not in ("eq26", "eq27"):
        raise ValueError("nu0-equation must be 'eq26' or 'eq27'")
    if config["gamma-delta-variant"] not in ("consistent", "printed"):
        raise ValueError("gamma-delta-variant must be 'consistent' or 'printed'")
    return config


def _max_workers():
    cap = os.environ.get("CMVT_THREADS")
    return int(cap) if cap else None


def _initial_from_config(config, design):
    model = config["model"]
    init = config.get("init", "default")
    if model.endswith("minnesota"):
        if init == "default" or init is None:
            l = design.d - design.n * int(config["p"])
            return default_hyper(design.n, l, config.get("phi"))
        return MinnesotaHyper.from_dict(init)
    if init == "default" or init is None:
        return default_params(design)
    return TParams.from_dict(init)


def _objective(model, params, design, p):
    if model.endswith("minnesota"):
        params = minnesota.induced_params(params, p)
    if model.startswith("type1"):
        return type1.log_marginal_likelihood(params, design)
    return type2.log_likelihood(params, design)


def _write_json(path, payload):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _write_report(path, config, design, trace):
    lines = [
        "conditional matrix-variate t fit report",
        f"model: {config['model']}",
        f"dimensions: n={design.n} l={design.d - design.n * config['p']} "
        f"p={config['p']} T={design.T} d={design.d}",
        f"update-nu0: {bool(config['update-nu0'])}",
        f"nu0-equation: {config['nu0-equation']}",
        f"gamma-delta-variant: {config['gamma-delta-variant']}",
        f"tol: {config['tol']!r}",
        f"max_iters: {config['max_iters']}",
        f"iterations: {len(trace) - 1}",
        f"converged: {trace.converged}",
        f"stop_reason: {trace.stop_reason}",
        f"final loglik: {trace.loglik[-1]!r}",
        f"final nu0: {float(trace.params[-1].nu0)!r}",
    ]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _cmd_fit(args):
    config = _merged_config(args)
    if not config.get("endogenous"):
        raise ValueError("fit needs an 'endogenous' CSV path (config key or --endogenous)")
    p = int(config["p"])
    dataset = load_dataset(config["endogenous"], config.get("exogenous"), p)
    design = build_design(dataset)
    model = config["model"]
    initial = _initial_from_config(config, design)
    options = FitOptions(tol=float(config["tol"]), max_iters=int(config["max_iters"]))
    common = dict(
        update_nu0=bool(config["update-nu0"]),
        nu0_equation=config["nu0-equation"],
        gamma_delta_variant=config["gamma-delta-variant"],
    )
    if model.startswith("type1"):
        params, trace = type1.fit(initial, design, options, **common)
    else:
        params, trace = type2.fit(initial, design, options,
                                  max_workers=_max_workers(), **common)
    outdir = config["output-dir"]
    os.makedirs(outdir, exist_ok=True)
    _write_json(os.path.join(outdir, "params.json"), {"model": model, **params.to_dict()})
    trace.write_csv(os.path.join(outdir, "trace.csv"))
    _write_report(os.path.join(outdir, "report.txt"), config, design, trace)
    print(f"fit {model}: {len(trace) - 1} iterations, stop_reason={trace.stop_reason}, "
          f"loglik={trace.loglik[-1]!r}")
    return 0


def _cmd_eval_loglik(args):
    config = _merged_config(args)
    if not config.get("endogenous"):
        raise ValueError("eval-loglik needs an 'endogenous' CSV path")
    with open(args.params, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    model = payload.get("model", config["model"])
    if model not in MODELS:
        raise ValueError(f"params file declares unknown model {model!r}")
    p = int(config["p"])
    dataset = load_dataset(config["endogenous"], config.get("exogenous"), p)
    design = build_design(dataset)
    if model.endswith("minnesota"):
        params = MinnesotaHyper.from_dict(payload)
    else:
        params = TParams.from_dict(payload)
    value = _objective(model, params, design, p)
    print(repr(float(value)))
    return 0


def _default_truth(model, n, l, p):
    """Concrete simulation truth when the config says 'default': a stable VAR
    with own-lag 0.5, intercepts 0, modest coefficient scatter."""
    d = l + n * p
    coeff = np.zeros((n, d))
    coeff[:, l:l + n] = 0.5 * np.eye(n)
    pi0 = coeff.reshape(-1, order="F")
    return TParams(pi0, 0.05 * np.ones(d), float(n + 3), np.eye(n))


def _cmd_simulate(args):
    config = _merged_config(args)
    model = config["model"]
    base_model = "type1" if model.startswith("type1") else "type2"
    n, l, p, T = int(config["n"]), int(config["l"]), int(config["p"]), int(config["T"])
    seed = int(config["seed"])
    init = config.get("init", "default")
    if init == "default" or init is None:
        params = _default_truth(model, n, l, p)
    elif model.endswith("minnesota"):
        params = minnesota.induced_params(MinnesotaHyper.from_dict(init), p)
    else:
        params = TParams.from_dict(init)
    rng = RngStream(seed)
    exogenous = None
    if l > 1:
        # exogenous path drawn first, before the model draws
        exogenous = np.vstack([np.ones((1, T)), rng.normal((l - 1, T))])
    dataset = simulate_bvar(params, n, l, p, T, base_model,
                            exogenous=exogenous, presample=None, rng=rng)
    outdir = config["output-dir"]
    os.makedirs(outdir, exist_ok=True)
    endog_path = os.path.join(outdir, "endogenous.csv")
    exog_path = os.path.join(outdir, "exogenous.csv") if l > 1 else None
    save_dataset(dataset, endog_path, exog_path)
    truth = {
        "model": model, "n": n, "l": l, "p": p, "T": T, "seed": seed,
        **params.to_dict(),
    }
    _write_json(os.path.join(outdir, "truth.json"), truth)
    written = [endog_path] + ([exog_path] if exog_path else [])
    print(f"simulate {base_model}: wrote {', '.join(written)}")
    return 0


def _cmd_version(args):
    print(f"cmvt {__version__}")
    return 0


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="cmvt",
        description="EM estimation of conditional matrix-variate Student t models",
    )
    sub = parser.add_subparsers(dest="command")

    def add_common(p_):
        p_.add_argument("--config", help="JSON config file")
        p_.add_argument("--model", choices=MODELS)
        p_.add_argument("--endogenous", help="endogenous CSV path")
        p_.add_argument("--exogenous", help="exogenous CSV path")
        p_.add_argument("--p", type=int, help="lag order")
        p_.add_argument("--tol", type=float)
        p_.add_argument("--max-iters", dest="max_iters", type=int)
        p_.add_argument("--update-nu0", dest="update_nu0", action="store_const", const=True)
        p_.add_argument("--nu0-equation", dest="nu0_equation", choices=("eq26", "eq27"))
        p_.add_argument("--gamma-delta-variant", dest="gamma_delta_variant",
                        choices=("consistent", "printed"))
        p_.add_argument("--seed", type=int)
        p_.add_argument("--output-dir", dest="output_dir")

    fit_parser = sub.add_parser("fit", help="estimate a model from CSV data")
    add_common(fit_parser)
    fit_parser.set_defaults(handler=_cmd_fit)

    sim_parser = sub.add_parser("simulate", help="simulate a dataset and its truth")
    add_common(sim_parser)
    sim_parser.set_defaults(handler=_cmd_simulate)

    eval_parser = sub.add_parser("eval-loglik", help="evaluate the objective for given parameters")
    add_common(eval_parser)
    eval_parser.add_argument("--params", required=True, help="params.json path")
    eval_parser.set_defaults(handler=_cmd_eval_loglik)

    version_parser = sub.add_parser("version", help="print the package version")
    version_parser.set_defaults(handler=_cmd_version)

    return parser


def run_cli(argv=None):
    """Parse argv and dispatch; returns the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    if getattr(args, "command", None) is None:
        parser.print_usage(sys.stderr)
        return 1
    try:
        return args.handler(args)
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(run_cli(sys.argv[1:]))

"""Command-line interface: ``msqhr {decompose,propagate,simulate,design,verify}``.

Results are JSON documents on stdout (or ``--out``); ``simulate`` writes a
CSV trajectory. Exit codes: 0 success, 1 verification failed, 2 bad
configuration, 3 model not applicable, 4 integration failure, 5 design has
no solution.
"""

import argparse
import csv
import io
import json
import math
import os
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import config as cfgmod
from .config import ConfigError
from .dynamics import SimulationProblem, compare_analytic, integrate, propagator
from .errors import (
    DomainError,
    FarOffValidityWarning,
    IntegrationError,
    NoSolutionError,
    UnsupportedModeError,
    ValidationError,
)
from .linalg_core import is_unitary, wrap_phase
from .linkages import coupled_blocks
from .mirrors import assemble_full, coupled_mirrors, reflection_condition
from .morris_shore import decompose, m2_theta_sigma
from .two_state import (
    CayleyKlein,
    DetuningSpec,
    PulseSpec,
    design_realization,
    far_off_phase,
    far_off_validity,
    resonant_ck,
    rosen_zener_ck,
)

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_MODEL, EXIT_INTEGRATION, EXIT_NO_SOLUTION = 0, 1, 2, 3, 4, 5
ORACLE_WINDOW = (-40.0, 40.0)
DEFAULT_TOL = {"resonant": 1e-6, "rosen_zener": 1e-6, "far_off": 0.05}


def cplx(a):
    """Complex scalar/array to nested ``[re, im]`` lists."""
    a = np.asarray(a, dtype=complex)
    if a.ndim == 0:
        return [float(a.real), float(a.imag)]
    return [cplx(x) for x in a]


def _columns(m):
    return [cplx(m[:, k]) for k in range(m.shape[1])]


def pick_model(cfg, requested=None):
    """Explicit request, else the config's model, else the best exact model available."""
    if requested:
        return requested
    if cfg.model:
        return cfg.model
    if cfg.detuning.value == 0.0:
        return "resonant"
    if cfg.pulse.shape == "sech":
        return "rosen_zener"
    return "far_off"


def channel_cks(ms, pulse, detuning, model):
    """Cayley-Klein parameters for every MS channel under an analytic model."""
    D = detuning.value
    delta = detuning.phase(pulse)
    if model == "resonant":
        if D != 0.0:
            raise UnsupportedModeError(f"the resonant model needs zero detuning, got Delta T = {D}")
        return [resonant_ck(pulse, lam) for lam in ms.lambdas]
    if model == "rosen_zener":
        if pulse.shape != "sech":
            raise UnsupportedModeError(f"the Rosen-Zener model needs a sech pulse, got {pulse.shape}")
        return [rosen_zener_ck(lam * pulse.T, D * pulse.T, pulse.window) for lam in ms.lambdas]
    if model == "far_off":
        if D == 0.0:
            raise UnsupportedModeError("the far-off-resonant model needs nonzero detuning")
        if pulse.shape == "constant":
            raise UnsupportedModeError("the far-off-resonant model needs a pulse-shaped envelope")
        phis = [far_off_phase(pulse, lam, D) for lam in ms.lambdas]
        return [CayleyKlein(complex(math.cos(p), math.sin(p)), 0.0, delta) for p in phis]
    raise UnsupportedModeError(f"unknown model {model!r}")


def analytic_block(ms, cfg, model):
    cks = channel_cks(ms, cfg.pulse, cfg.detuning, model)
    if model == "far_off":
        cm = coupled_mirrors(ms, [ck.phase for ck in cks], cfg.detuning.phase(cfg.pulse))
        return cm.as_block(), cks, cm
    return assemble_full(ms, cks, cfg.detuning.phase(cfg.pulse)), cks, None


def _block_json(block):
    return {
        "U_N": cplx(block.U_N),
        "U_NM": cplx(block.U_NM),
        "U_MN": cplx(block.U_MN),
        "U_M": cplx(block.U_M),
        "delta": block.delta,
    }


def cmd_decompose(cfg, opts):
    im = cfg.interaction()
    ms = decompose(im)
    scale = im.norm or 1.0
    out = {
        "N": im.N,
        "M": im.M,
        "lower_labels": list(im.lower_labels),
        "upper_labels": list(im.upper_labels),
        "rank": ms.rank,
        "lambdas": ms.lambdas.tolist(),
        "lambda_squared": (ms.lambdas**2).tolist(),
        "bright": _columns(ms.bright),
        "upper": _columns(ms.upper),
        "dark": _columns(ms.dark),
        "upper_dark": _columns(ms.upper_dark),
        "diagonality_residual": ms.diagonality_residual(im) / scale,
        "completeness_residual": ms.completeness_residual(),
        "blocks": [{"lower": list(b.lower), "upper": list(b.upper)} for b in coupled_blocks(im)],
    }
    if im.M == 2 and im.norm > 0:
        ts = m2_theta_sigma(im.column(0), im.column(1))
        out["theta"], out["sigma"], out["degenerate"] = ts.theta, ts.sigma, ts.degenerate
    return out, EXIT_OK


def cmd_propagate(cfg, opts):
    im = cfg.interaction()
    ms = decompose(im)
    model = pick_model(cfg, opts.get("model"))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", FarOffValidityWarning)
        block, cks, cm = analytic_block(ms, cfg, model)
    tol = opts.get("tol") or 1e-8
    phis = [ck.phase for ck in cks]
    if cm is not None:
        factors = [{"nu": cplx(f.nu), "phi": f.phi} for f in cm.factors]
        upper_factors = [{"nu": cplx(f.nu), "phi": f.phi} for f in cm.upper_factors]
    else:
        factors = [{"nu": cplx(ms.bright[:, k]), "phi": p} for k, p in enumerate(phis)]
        upper_factors = [{"nu": cplx(ms.upper[:, k]), "phi": -p} for k, p in enumerate(phis)]
    out = {
        "model": model,
        "lambdas": ms.lambdas.tolist(),
        "cayley_klein": [{"a": cplx(ck.a), "b": cplx(ck.b), "delta": ck.delta} for ck in cks],
        "phases": phis,
        "block": _block_json(block),
        "unitary": bool(is_unitary(block.full, 1e-10)),
        "factors": factors,
        "upper_factors": upper_factors,
        "reflection_condition": reflection_condition(cks, tol),
        "reflection_tol": tol,
        "leakage": block.leakage(),
        "far_off_valid": bool(far_off_validity(ms.lambdas, cfg.detuning.value)) if ms.rank else True,
        "warnings": [str(w.message) for w in caught],
    }
    return out, EXIT_OK


def _labels(im):
    return [f"lower[{x}]" for x in im.lower_labels] + [f"upper[{x}]" for x in im.upper_labels]


def cmd_simulate(cfg, opts):
    im = cfg.interaction()
    c0 = cfg.initial_vector(im.N + im.M)
    samples = opts.get("samples") or 201
    rel_tol = opts.get("rel_tol") or 1e-10
    problem = SimulationProblem(im, cfg.pulse, cfg.detuning, c0, samples)
    traj = integrate(problem, rel_tol)

    analytic = None
    model = None
    try:
        model = pick_model(cfg, opts.get("model"))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", FarOffValidityWarning)
            block, _, _ = analytic_block(decompose(im), cfg, model)
        analytic = np.abs(block.apply(c0)) ** 2
    except UnsupportedModeError:
        if opts.get("model"):
            raise

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t/T"] + _labels(im))
    for t, row in zip(traj.times, traj.populations):
        w.writerow([repr(float(t / cfg.pulse.T))] + [repr(float(p)) for p in row])
    if analytic is not None:
        w.writerow(["analytic"] + [repr(float(p)) for p in analytic])

    final = np.abs(traj.final_state) ** 2
    summary = {
        "samples": samples,
        "rel_tol": rel_tol,
        "steps": traj.stats["steps"],
        "rejected": traj.stats["rejected"],
        "labels": _labels(im),
        "final_populations": final.tolist(),
        "final_state": cplx(traj.final_state),
        "norm_drift": float(np.max(np.abs(traj.populations.sum(axis=1) - 1.0))),
        "model": model if analytic is not None else None,
        "analytic_populations": None if analytic is None else analytic.tolist(),
        "max_population_deviation": None if analytic is None else float(np.max(np.abs(final - analytic))),
    }
    return {"summary": summary, "csv": buf.getvalue()}, EXIT_OK


def _design_inputs(cfg, opts):
    d = cfg.design if cfg is not None else None
    targets = opts.get("targets")
    if targets is None:
        if d is None:
            raise ConfigError("design needs --targets or a design section", "design.targets")
        targets = d.targets
    mode = opts.get("mode") or (d.mode if d else None)
    if mode is None:
        raise ConfigError("design needs --mode or design.mode", "design.mode")
    delta = opts.get("delta")
    if delta is None and d is not None:
        delta = d.Delta
    l = opts.get("l") or (d.l if d else 1)
    lmax = opts.get("lambda_max")
    if lmax is None and d is not None:
        lmax = d.lambda_max
    shape = cfg.pulse.shape if cfg is not None else "sech"
    return tuple(targets), mode, delta, l, lmax, shape


def forward_phase(lam, Delta, shape, rel_tol=1e-10):
    """arg a from direct integration of one channel over the oracle window."""
    if lam == 0.0:
        return 0.0
    pulse = PulseSpec(shape, 1.0, ORACLE_WINDOW)
    y = propagator(np.array([[lam]]), pulse, DetuningSpec(Delta), rel_tol, initial=np.array([[1.0], [0.0]]))
    return math.atan2(y[0, 0].imag, y[0, 0].real)


def cmd_design(cfg, opts):
    targets, mode, delta, l, lmax, shape = _design_inputs(cfg, opts)
    pulse = PulseSpec(shape, 1.0, ORACLE_WINDOW)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", FarOffValidityWarning)
        real = design_realization(targets, mode, pulse, l=l, Delta=delta, lambda_max=lmax)
    checks = []
    if mode == "rosen_zener" or real.l == 0:
        for k, t in enumerate(targets):
            if real.l == 0:
                got = 0.0
            else:
                got = rosen_zener_ck(real.lambdas[k], real.Delta).phase
            err = abs(wrap_phase(got - t))
            checks.append({"target": t, "achieved": got, "error": err, "tol": 1e-9, "passed": err <= 1e-9})
        method = "analytic"
    else:
        for k, t in enumerate(targets):
            got = forward_phase(float(real.lambdas[k]), real.Delta, shape)
            err = abs(wrap_phase(got - t)) / abs(t)
            checks.append({"target": t, "achieved": got, "relative_error": err, "tol": 1e-2, "passed": err <= 1e-2})
        method = "numeric two-state integration over t/T in [-40, 40]"
    out = {
        "mode": mode,
        "targets": list(targets),
        "lambdaT": real.lambdas.tolist(),
        "lambda_squared_T2": real.lambda_squared.tolist(),
        "DeltaT": real.Delta,
        "l": real.l,
        "predicted_phases": real.predicted_phases().tolist(),
        "round_trip": {"method": method, "checks": checks, "passed": all(c["passed"] for c in checks)},
        "warnings": [str(w.message) for w in caught],
    }
    return out, EXIT_OK if out["round_trip"]["passed"] else EXIT_VERIFY


def cmd_verify(cfg, opts):
    im = cfg.interaction()
    ms = decompose(im)
    model = pick_model(cfg, opts.get("model"))
    tol = opts.get("tol") or DEFAULT_TOL[model]
    rel_tol = opts.get("rel_tol") or 1e-10
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", FarOffValidityWarning)
        block, cks, _ = analytic_block(ms, cfg, model)
    scale = im.norm or 1.0
    problem = SimulationProblem(im, cfg.pulse, cfg.detuning, cfg.initial_vector(im.N + im.M))
    checks = [
        ("ms_diagonality", ms.diagonality_residual(im) / scale, 1e-10),
        ("ms_completeness", ms.completeness_residual(), 1e-10),
        ("propagator_unitarity", float(np.max(np.abs(block.full.conj().T @ block.full - np.eye(im.N + im.M)))), 1e-10),
        ("analytic_vs_numeric", compare_analytic(problem, block, rel_tol), tol),
    ]
    rows = [{"check": n, "value": v, "tol": t, "passed": bool(v <= t)} for n, v, t in checks]
    ok = all(r["passed"] for r in rows)
    return {"model": model, "checks": rows, "passed": ok}, EXIT_OK if ok else EXIT_VERIFY


COMMANDS = {
    "decompose": cmd_decompose,
    "propagate": cmd_propagate,
    "simulate": cmd_simulate,
    "design": cmd_design,
    "verify": cmd_verify,
}


def run(command, cfg, opts):
    """Run one subcommand; returns ``(result, exit_code)`` and maps failures to exit codes."""
    try:
        return COMMANDS[command](cfg, opts)
    except ConfigError as e:
        return {"error": str(e), "field": e.field, "line": e.line}, EXIT_CONFIG
    except UnsupportedModeError as e:
        return {"error": str(e)}, EXIT_MODEL
    except IntegrationError as e:
        return {"error": str(e), "time": e.time}, EXIT_INTEGRATION
    except NoSolutionError as e:
        return {"error": str(e)}, EXIT_NO_SOLUTION
    except (ValidationError, DomainError) as e:
        return {"error": str(e)}, EXIT_CONFIG


def _sweep_item(args):
    command, item, base, opts = args
    try:
        if isinstance(item, str):
            cfg = cfgmod.load_config(os.path.join(base, item))
        else:
            cfg = cfgmod.parse_config(item)
    except ConfigError as e:
        return {"error": str(e), "field": e.field, "line": e.line}, EXIT_CONFIG
    return run(command, cfg, opts)


def run_sweep(command, path, opts, workers=None):
    """Run ``command`` over a JSON list of configs (objects or file paths) in a process pool."""
    with open(path) as fh:
        items = json.load(fh)
    if not isinstance(items, list):
        raise ConfigError("a sweep file must hold a JSON list", "sweep")
    base = os.path.dirname(os.path.abspath(path))
    jobs = [(command, item, base, opts) for item in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_sweep_item, jobs))


def _float_list(text):
    try:
        val = json.loads(text) if text.strip().startswith("[") else [float(x) for x in text.split(",")]
        return [float(x) for x in val]
    except (ValueError, TypeError):
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser():
    p = argparse.ArgumentParser(prog="msqhr", description="Morris-Shore reduction and coupled Householder reflections")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON run configuration")
        sp.add_argument("--out", help="output path (results JSON; CSV for simulate)")
        sp.add_argument("--sweep", help="JSON list of configs to run in a worker pool")
        sp.add_argument("--workers", type=int, default=None, help="worker processes for --sweep")

    sp = sub.add_parser("decompose", help="Morris-Shore decomposition of the linkage")
    common(sp)
    sp = sub.add_parser("propagate", help="analytic block propagator and QHR factors")
    common(sp)
    sp.add_argument("--model", choices=cfgmod.MODELS)
    sp.add_argument("--tol", type=float, help="reflection-condition tolerance on |b| (default 1e-8)")
    sp = sub.add_parser("simulate", help="integrate the Schrodinger equation and write a CSV trajectory")
    common(sp)
    sp.add_argument("--rel-tol", type=float, default=1e-10)
    sp.add_argument("--samples", type=int, default=201)
    sp.add_argument("--model", choices=cfgmod.MODELS, help="analytic model for the comparison row")
    sp = sub.add_parser("design", help="pulse parameters that realize target reflection phases")
    common(sp)
    sp.add_argument("--targets", type=_float_list, help="target phases, e.g. 2.65772,0.954776")
    sp.add_argument("--mode", choices=("rosen_zener", "far_off"))
    sp.add_argument("--delta", type=float, help="detuning Delta T (far_off)")
    sp.add_argument("--l", type=int, help="integer lambda T (rosen_zener, default 1)")
    sp.add_argument("--lambda-max", type=float, help="largest coupling lambda T (far_off alternative to --delta)")
    sp = sub.add_parser("verify", help="check the analytic propagator against direct integration")
    common(sp)
    sp.add_argument("--model", choices=cfgmod.MODELS)
    sp.add_argument("--tol", type=float, help="allowed amplitude deviation (default by model)")
    sp.add_argument("--rel-tol", type=float, default=1e-10)
    return p


def _opts(ns):
    keys = ("model", "tol", "rel_tol", "samples", "targets", "mode", "delta", "l", "lambda_max")
    return {k: getattr(ns, k) for k in keys if getattr(ns, k, None) is not None}


def _emit(doc, path=None):
    text = json.dumps(doc, indent=2)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _emit_result(command, result, out):
    if command == "simulate" and "csv" in result:
        if out:
            with open(out, "w", newline="") as fh:
                fh.write(result["csv"])
            _emit(result["summary"])
        else:
            sys.stdout.write(result["csv"])
        return
    _emit(result, out)


def main(argv=None):
    ns = build_parser().parse_args(argv)
    opts = _opts(ns)
    command = ns.command

    if ns.sweep:
        try:
            results = run_sweep(command, ns.sweep, opts, ns.workers)
        except (OSError, json.JSONDecodeError, ConfigError) as e:
            _emit({"error": f"cannot read sweep: {e}"})
            return EXIT_CONFIG
        docs = []
        for i, (res, code) in enumerate(results):
            if command == "simulate" and "csv" in res:
                if ns.out:
                    os.makedirs(ns.out, exist_ok=True)
                    with open(os.path.join(ns.out, f"run_{i:03d}.csv"), "w", newline="") as fh:
                        fh.write(res["csv"])
                res = res["summary"]
            docs.append({"index": i, "exit_code": code, "result": res})
        _emit(docs, None if command == "simulate" else ns.out)
        return next((d["exit_code"] for d in docs if d["exit_code"]), EXIT_OK)

    cfg = None
    if ns.config:
        try:
            cfg = cfgmod.load_config(ns.config)
        except ConfigError as e:
            _emit({"error": str(e), "field": e.field, "line": e.line})
            return EXIT_CONFIG
    elif command != "design":
        _emit({"error": f"{command} needs --config or --sweep"})
        return EXIT_CONFIG

    result, code = run(command, cfg, opts)
    if code in (EXIT_OK, EXIT_VERIFY):
        _emit_result(command, result, ns.out)
    else:
        _emit(result)
        print(f"error: {result['error']}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end: config ingestion, pipelines, reports, CSV output.

Verbs: ``synth``, ``check``, ``sens``, ``hidden``, ``sweep``.  Each takes a
YAML (or JSON) config validated against CONFIG_SCHEMA plus ``--out`` and
optional grid/tolerance overrides.  Exit codes: 0 success (including
flagged divergences), 2 input/validation error, 3 numerical failure.
All output files are written atomically at the end of the job; rerunning
the same config yields byte-identical CSV files.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
import warnings

import jsonschema
import numpy as np
import yaml

from .errors import InputError, NumericalError, QldetError
from .hidden_modes import (ModeNetwork, conserved_observables,
                           final_io_relation, full_network_io,
                           max_invariance_residual, mode_observable,
                           network_state_space, signal_response_shift,
                           symplectic_commutator, y_minus_response)
from .physical_realization import (decompose_network, expander_state_space,
                                   extract_open_oscillator,
                                   make_physically_realizable,
                                   squeezer_state_space, verify_physical)
from .sensitivity import (ProbeCoupling, build_report, divergence_scan,
                          optimal_probe_mode, qcrb_bound)
from .statespace import canonical_realization, is_hurwitz, minimal_realization
from .tf_core import (FrequencyGrid, QuadratureTransferMatrix,
                      RationalFunction, build_quadrature_tf, check_realness,
                      check_symplectic_realizability, conjugate_partner,
                      evaluate_rational, expander_g11, free_parameter_count,
                      internal_squeezing_g11, picture_convert)
from .errors import OnResonance

NORMALIZATION_NOTE = (
    "note: absolute SNR constants carry a one-sided-integral normalization "
    "ambiguity; ratios, gamma-independence and divergence locations are the "
    "reliable quantities")

_complex_entry = {
    "oneOf": [
        {"type": "number"},
        {"type": "array", "items": {"type": "number"},
         "minItems": 2, "maxItems": 2},
    ]
}

CONFIG_SCHEMA = {
    "type": "object",
    "required": ["job", "system"],
    "additionalProperties": False,
    "properties": {
        "job": {"enum": ["synth", "check", "sens", "sensitivity", "hidden",
                         "sweep"]},
        "system": {
            "type": "object",
            "additionalProperties": False,
            "minProperties": 1,
            "maxProperties": 1,
            "properties": {
                "tf": {
                    "type": "object",
                    "required": ["kind"],
                    "additionalProperties": False,
                    "properties": {
                        "kind": {"enum": ["first_order", "second_order",
                                          "pole_zero"]},
                        "alpha": {"type": "number"},
                        "beta": {"type": "number"},
                        "alpha1": _complex_entry, "beta1": _complex_entry,
                        "alpha2": _complex_entry, "beta2": _complex_entry,
                        "zeros": {"type": "array", "items": _complex_entry},
                        "poles": {"type": "array", "items": _complex_entry},
                        "gain": _complex_entry,
                    },
                },
                "network": {
                    "type": "object",
                    "required": ["gamma"],
                    "additionalProperties": False,
                    "properties": {
                        "gamma": {"type": "number"},
                        "g": {"type": "number"},
                        "g_b": _complex_entry, "g_bdag": _complex_entry,
                        "g_c": _complex_entry, "g_cdag": _complex_entry,
                        "omega_prime": {"type": "number"},
                        "d_chain": {"type": "array", "items": {
                            "type": "object", "additionalProperties": False,
                            "properties": {"g": _complex_entry,
                                           "g_dag": _complex_entry}}},
                        "e_chain": {"type": "array", "items": {
                            "type": "object", "additionalProperties": False,
                            "properties": {"g": _complex_entry,
                                           "g_dag": _complex_entry}}},
                        "signal_mode": {"type": "string"},
                        "signal_quadrature": {
                            "enum": ["amplitude", "phase"]},
                        "alpha": {"type": "number"},
                    },
                },
            },
        },
        "physical": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "omega0": {"type": "number", "exclusiveMinimum": 0},
                "length": {"type": "number", "exclusiveMinimum": 0},
                "photon_number": {"type": "number", "exclusiveMinimum": 0},
                "x_c": {"type": "number", "minimum": 0},
            },
        },
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "min": {"type": "number", "exclusiveMinimum": 0},
                "max": {"type": "number", "exclusiveMinimum": 0},
                "points": {"type": "integer", "minimum": 2},
                "scale": {"enum": ["linear", "logarithmic"]},
            },
        },
        "sweep": {
            "type": "object",
            "required": ["family", "min", "max", "points"],
            "additionalProperties": False,
            "properties": {
                "family": {"enum": ["internal_squeezer", "expander"]},
                "gamma": {"type": "number", "exclusiveMinimum": 0},
                "omega_s": {"type": "number", "exclusiveMinimum": 0},
                "min": {"type": "number"},
                "max": {"type": "number"},
                "points": {"type": "integer", "minimum": 2},
            },
        },
        "tolerance": {"type": "number", "exclusiveMinimum": 0},
    },
}


def _fmt(value) -> str:
    """Deterministic shortest-roundtrip text for CSV cells."""
    value = float(value)
    if np.isinf(value):
        return "inf"
    return repr(value)


def _to_complex(entry) -> complex:
    if isinstance(entry, (list, tuple)):
        return complex(entry[0], entry[1])
    return complex(entry)


def _jsonify(obj):
    if isinstance(obj, dict):
        return {k: _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return [_jsonify(v) for v in obj.tolist()]
        return obj.tolist()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, float) and np.isinf(obj):
        return "inf"
    return obj


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".qldet-tmp-")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_csv(path: str, header: list, rows: list) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(cell) for cell in row))
    _atomic_write(path, "\n".join(lines) + "\n")


def load_config(path: str) -> dict:
    with open(path, "r") as handle:
        raw = yaml.safe_load(handle)
    if not isinstance(raw, dict):
        raise InputError("config must be a mapping")
    try:
        jsonschema.validate(raw, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise InputError(f"config validation failed: {exc.message}") from exc
    return raw


def build_tf(spec: dict, validate: bool = True) -> QuadratureTransferMatrix:
    kind = spec["kind"]
    try:
        if kind == "first_order":
            for key in ("alpha", "beta"):
                if key not in spec:
                    raise InputError(f"first_order tf needs '{key}'")
            g11 = internal_squeezing_g11(spec["alpha"], spec["beta"])
        elif kind == "second_order":
            vals = []
            for key in ("alpha1", "beta1", "alpha2", "beta2"):
                if key not in spec:
                    raise InputError(f"second_order tf needs '{key}'")
                vals.append(_to_complex(spec[key]))
            g11 = expander_g11(*vals)
        else:
            g11 = RationalFunction(
                zeros=[_to_complex(z) for z in spec.get("zeros", [])],
                poles=[_to_complex(p) for p in spec.get("poles", [])],
                gain=_to_complex(spec.get("gain", 1.0)))
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    if validate:
        return build_quadrature_tf(g11)
    return QuadratureTransferMatrix(g11=g11, g22=conjugate_partner(g11))


def build_network(spec: dict) -> ModeNetwork:
    chains = {}
    if "omega_prime" in spec and ("d_chain" in spec or "e_chain" in spec):
        raise InputError("give either omega_prime or explicit chains")
    if spec.get("omega_prime"):
        pair = ((spec["omega_prime"], 0.0),)
        chains = {"d_couplings": pair, "e_couplings": pair}
    else:
        chains = {
            "d_couplings": tuple(
                (_to_complex(c.get("g", 0.0)), _to_complex(c.get("g_dag", 0.0)))
                for c in spec.get("d_chain", [])),
            "e_couplings": tuple(
                (_to_complex(c.get("g", 0.0)), _to_complex(c.get("g_dag", 0.0)))
                for c in spec.get("e_chain", [])),
        }
    if "g" in spec:
        couplings = {"g_bdag": complex(spec["g"]), "g_c": complex(spec["g"])}
        for key in ("g_b", "g_bdag", "g_c", "g_cdag"):
            if key in spec:
                couplings[key] = _to_complex(spec[key])
    else:
        couplings = {key: _to_complex(spec.get(key, 0.0))
                     for key in ("g_b", "g_bdag", "g_c", "g_cdag")}
    try:
        return ModeNetwork(
            gamma=spec["gamma"],
            signal_mode=spec.get("signal_mode", "c"),
            signal_quadrature=spec.get("signal_quadrature", "amplitude"),
            signal_strength=spec.get("alpha", 0.0),
            **couplings, **chains)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def build_coupling(config: dict) -> ProbeCoupling:
    phys = config.get("physical", {})
    try:
        return ProbeCoupling(
            omega0=phys.get("omega0", 1.0),
            length=phys.get("length", 1.0),
            photon_number=phys.get("photon_number", 1.0))
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def build_grid(config: dict, args, rates=(1.0,)) -> FrequencyGrid:
    gspec = dict(config.get("grid", {}))
    if args is not None:
        if args.grid_min is not None:
            gspec["min"] = args.grid_min
        if args.grid_max is not None:
            gspec["max"] = args.grid_max
        if args.grid_points is not None:
            gspec["points"] = args.grid_points
    scale = max(abs(r) for r in rates) or 1.0
    lo = gspec.get("min", 1e-3 * scale)
    hi = gspec.get("max", 1e3 * scale)
    n = gspec.get("points", 400)
    kind = gspec.get("scale", "logarithmic")
    try:
        if kind == "linear":
            return FrequencyGrid.linear(lo, hi, n)
        return FrequencyGrid.logarithmic(lo, hi, n)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def _unit(value, unit: str) -> dict:
    return {"value": _jsonify(value), "unit": unit}


def _matrix_block(ss) -> dict:
    return {
        "a": _unit(ss.a, "rad/s"),
        "b": _unit(ss.b, "sqrt(rad/s)"),
        "c": _unit(ss.c, "sqrt(rad/s)"),
        "d": _unit(ss.d, "dimensionless"),
    }


def _oscillator_block(osc) -> dict:
    modes = []
    for k in range(osc.n_modes):
        modes.append({
            "mode": k,
            "gamma": _unit(osc.mode_gamma(k), "rad/s"),
            "chi": _unit(osc.mode_chi(k), "rad/s"),
            "detuning": _unit(osc.mode_detuning(k), "rad/s"),
        })
    return {
        "scattering": _unit(osc.s, "dimensionless"),
        "coupling_row": _unit(osc.l, "sqrt(rad/s)"),
        "hamiltonian": _unit(osc.h, "rad/s"),
        "modes": modes,
    }


def _sensitivity_block(ss, coupling, grid) -> tuple:
    selection = optimal_probe_mode(ss, coupling, grid)
    table = []
    notes = set()
    n_modes = ss.n_states // 2
    for mode in range(n_modes):
        for quadrature in ("amplitude", "phase"):
            rep = build_report(ss, mode, quadrature, coupling, grid)
            notes.update(rep.warnings)
            table.append({
                "mode": mode, "quadrature": quadrature,
                "sigma_nn": _unit(rep.sigma_nn, "photons^2"),
                "diverges": rep.diverges,
                "divergence_frequency": _unit(rep.divergence_frequency,
                                              "rad/s")
                if rep.divergence_frequency is not None else None,
            })
    block = {
        "table": table,
        "optimal_mode": selection.mode,
        "optimal_quadrature": selection.quadrature,
        "sigma_nn_optimal": _unit(selection.report.sigma_nn, "photons^2"),
        "divergent_probes": [
            {"mode": m, "quadrature": q} for m, q, _ in selection.divergent],
        "notes": sorted(notes),
    }
    return block, selection


def _render_text(report: dict) -> str:
    lines = [f"qldet report: {report['job']}"]

    def walk(obj, indent=0):
        pad = "  " * indent
        if isinstance(obj, dict):
            if set(obj) == {"value", "unit"}:
                return [f" {obj['value']} [{obj['unit']}]"]
            out = []
            for key, val in obj.items():
                sub = walk(val, indent + 1)
                if len(sub) == 1 and not sub[0].startswith("  "):
                    out.append(f"{pad}{key}:{sub[0]}")
                else:
                    out.append(f"{pad}{key}:")
                    out.extend(sub)
            return out
        if isinstance(obj, list):
            out = []
            for val in obj:
                sub = walk(val, indent + 1)
                if len(sub) == 1 and not sub[0].startswith("  "):
                    out.append(f"{pad}-{sub[0]}")
                else:
                    out.append(f"{pad}-")
                    out.extend(sub)
            return out
        return [f" {obj}"]

    for key, val in report.items():
        if key == "job":
            continue
        sub = walk(val, 1)
        if len(sub) == 1 and not sub[0].startswith("  "):
            lines.append(f"{key}:{sub[0]}")
        else:
            lines.append(f"{key}:")
            lines.extend(sub)
    return "\n".join(lines) + "\n"


def _emit_report(out_dir: str, report: dict) -> None:
    _atomic_write(os.path.join(out_dir, "report.json"),
                  json.dumps(_jsonify(report), indent=2) + "\n")
    _atomic_write(os.path.join(out_dir, "report.txt"), _render_text(report))


def run_synth(config: dict, out_dir: str, args=None) -> int:
    spec = config["system"].get("tf")
    if spec is None:
        raise InputError("synth requires a transfer-function system spec")
    tf = build_tf(spec)
    ss = make_physically_realizable(tf)
    cert = verify_physical(ss)
    osc = extract_open_oscillator(ss)
    grid = build_grid(config, args, rates=[abs(r) for r in tf.all_roots()])
    coupling = build_coupling(config)
    warnings_list = [NORMALIZATION_NOTE]
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        sens_block, _ = _sensitivity_block(ss, coupling, grid)
        report = {
            "job": "synth",
            "input": config["system"],
            "certificate": {
                "residual1": cert.residual1,
                "residual2": cert.residual2,
                "passes": cert.passes(1e-9),
            },
            "state_space": _matrix_block(ss),
            "oscillator": _oscillator_block(osc),
        }
        if ss.n_states == 4:
            dec = decompose_network(ss)
            report["network"] = {
                "direct_hamiltonian": _unit(dec.direct_hamiltonian, "rad/s"),
                "wiring": list(dec.wiring),
                "oscillators": [_oscillator_block(o) for o in dec.oscillators],
            }
        report["sensitivity"] = sens_block
    warnings_list.extend(sorted({str(w.message) for w in caught}))
    report["warnings"] = warnings_list
    _emit_report(out_dir, report)
    return 0


def run_check(config: dict, out_dir: str, args=None) -> int:
    spec = config["system"].get("tf")
    if spec is None:
        raise InputError("check requires a transfer-function system spec")
    tf = build_tf(spec, validate=False)
    grid = build_grid(config, args, rates=[abs(r) for r in tf.all_roots()])
    sym = check_symplectic_realizability(tf, grid, config.get("tolerance", 1e-9))
    realness = check_realness(tf)
    ss = minimal_realization(canonical_realization(tf))
    hurwitz = is_hurwitz(ss.a)
    notes = []
    if spec["kind"] == "second_order":
        dc = abs(evaluate_rational(tf.g11, 0.0))
        if abs(dc - 1.0) > 1e-9:
            notes.append(
                f"warning: |g11(0)| = {dc:.6g} (gain at DC; the lossless "
                "coupled-cavity family needs alpha1*beta1 = alpha2*beta2)")
    report = {
        "job": "check",
        "input": config["system"],
        "symplectic": {"passes": sym.passed,
                       "max_residual": sym.max_residual},
        "realness": realness,
        "hurwitz": hurwitz,
        "free_parameters": free_parameter_count(max(1, tf.order)),
        "warnings": notes,
    }
    _emit_report(out_dir, report)
    if not (sym.passed and realness):
        failing = []
        if not sym.passed:
            failing.append("symplectic condition")
        if not realness:
            failing.append("realness condition")
        print(f"check failed: {', '.join(failing)}", file=sys.stderr)
        return 2
    return 0


def _system_for_sensitivity(config: dict):
    system = config["system"]
    if "tf" in system:
        tf = build_tf(system["tf"])
        return make_physically_realizable(tf), [abs(r) for r in tf.all_roots()]
    net = build_network(system["network"])
    rates = [net.gamma] + [abs(net.g_bdag), abs(net.g_c), abs(net.g_b),
                           abs(net.g_cdag)]
    return network_state_space(net), [r for r in rates if r > 0] or [net.gamma]


def run_sensitivity(config: dict, out_dir: str, args=None) -> int:
    ss, rates = _system_for_sensitivity(config)
    grid = build_grid(config, args, rates=rates)
    coupling = build_coupling(config)
    x_c = config.get("physical", {}).get("x_c", 1.0)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        block, selection = _sensitivity_block(ss, coupling, grid)
    rep = selection.report
    snr = (np.inf if not np.isfinite(rep.sigma_nn) else
           coupling.omega0 ** 2 * x_c ** 2 / coupling.length ** 2
           * rep.sigma_nn)
    report = {
        "job": "sens",
        "input": config["system"],
        "sensitivity": block,
        "snr_flat_signal": _unit(snr, "dimensionless"),
        "warnings": [NORMALIZATION_NOTE]
        + sorted({str(w.message) for w in caught}),
    }
    bound = qcrb_bound(rep.s_ff_samples, coupling)
    rows = [
        (omega, np.sqrt(s_ff), s_ff, qb)
        for omega, s_ff, qb in zip(grid.points, rep.s_ff_samples, bound)
    ]
    _write_csv(os.path.join(out_dir, "sensitivity.csv"),
               ["omega", "abs_G_uF", "S_FF", "qcrb_bound"], rows)
    _emit_report(out_dir, report)
    return 0


def run_hidden(config: dict, out_dir: str, args=None) -> int:
    spec = config["system"].get("network")
    if spec is None:
        raise InputError("hidden requires a mode-network system spec")
    net = build_network(spec)
    rates = [net.gamma, abs(net.g_bdag) or net.gamma]
    grid = build_grid(config, args, rates=rates)
    hidden_tol = config.get("tolerance", 1e-10)
    residual = max_invariance_residual(net, grid)
    observables = conserved_observables(net)
    commutators = []
    for i, w1 in enumerate(observables):
        for j, w2 in enumerate(observables):
            commutators.append({
                "pair": [i, j],
                "value": _jsonify(symplectic_commutator(w1, w2)),
            })
    rows = []
    peak_omega, peak_val = None, -1.0
    for omega in grid.points:
        try:
            signal = abs(y_minus_response(net, omega))
        except (OnResonance, QldetError):
            signal = np.inf
        try:
            h_s = full_network_io(net, omega)
            noise = abs(picture_convert(h_s, "sideband->quadrature")[1, 1])
        except (OnResonance, QldetError):
            noise = np.inf
        rows.append((omega, signal, noise))
        if np.isfinite(signal) and signal > peak_val:
            peak_omega, peak_val = omega, signal
    report = {
        "job": "hidden",
        "input": config["system"],
        "hidden": bool(residual < hidden_tol),
        "max_invariance_residual": residual,
        "conserved_observables": [
            _jsonify(w.coeffs) for w in observables],
        "commutator_table": commutators,
        "signal_peak": {"omega": _unit(peak_omega, "rad/s"),
                        "abs_response": peak_val},
        "warnings": [NORMALIZATION_NOTE],
    }
    _write_csv(os.path.join(out_dir, "hidden_sweep.csv"),
               ["omega", "abs_signal_tf", "abs_noise_tf"], rows)
    _emit_report(out_dir, report)
    return 0


def run_sweep(config: dict, out_dir: str, args=None) -> int:
    spec = config.get("sweep")
    if spec is None:
        raise InputError("sweep job requires a 'sweep' section")
    gamma = spec.get("gamma", 1.0)
    params = np.linspace(spec["min"], spec["max"], spec["points"])
    if spec["family"] == "internal_squeezer":
        factory = lambda chi: squeezer_state_space(gamma, chi)  # noqa: E731
    else:
        omega_s = spec.get("omega_s", 1.0)
        factory = lambda chi: expander_state_space(gamma, chi, omega_s)  # noqa: E731
    points = divergence_scan(factory, params)
    rows = [(pt.parameter, 1.0 if pt.diverges else 0.0,
             pt.divergence_frequency if pt.divergence_frequency is not None
             else float("nan"))
            for pt in points]
    lines = ["parameter,diverges,divergence_frequency"]
    for param, div, freq in rows:
        freq_txt = "" if np.isnan(freq) else _fmt(freq)
        lines.append(f"{_fmt(param)},{int(div)},{freq_txt}")
    _atomic_write(os.path.join(out_dir, "sweep.csv"), "\n".join(lines) + "\n")
    report = {
        "job": "sweep",
        "family": spec["family"],
        "divergences": [
            {"parameter": pt.parameter,
             "divergence_frequency": _unit(pt.divergence_frequency, "rad/s")}
            for pt in points if pt.diverges],
        "warnings": [],
    }
    _emit_report(out_dir, report)
    return 0


RUNNERS = {
    "synth": run_synth,
    "check": run_check,
    "sens": run_sensitivity,
    "hidden": run_hidden,
    "sweep": run_sweep,
}


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qldet",
        description="Synthesis and analysis of linear quantum detectors")
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb in RUNNERS:
        p = sub.add_parser(verb)
        p.add_argument("--config", required=True, help="YAML/JSON job config")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--grid-min", type=float, default=None)
        p.add_argument("--grid-max", type=float, default=None)
        p.add_argument("--grid-points", type=int, default=None)
        p.add_argument("--tol", type=float, default=None)
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        if args.tol is not None:
            config["tolerance"] = args.tol
        job = {"sensitivity": "sens"}.get(config["job"], config["job"])
        if job != args.verb:
            raise InputError(
                f"config is a {config['job']!r} job, invoked as {args.verb!r}")
        os.makedirs(args.out, exist_ok=True)
        return RUNNERS[args.verb](config, args.out, args)
    except (InputError, FileNotFoundError, yaml.YAMLError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except QldetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end: ``adaptvqe {ham,adapt,scan,noise-sweep,plan,circuit,rerun}``.

Every JSON output carries the full parsed configuration (including the
seed); CSV outputs start with a ``# config:`` comment line followed by a
header row.  Exit codes: 0 success, 2 usage/configuration error, 3 runtime
or numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import adapt as ad
from .circuits import circuit_unitary, depth_report, export_circuit, layers_circuit, optimize_orientations, peephole
from .hamiltonian import (
    FIXTURES,
    ActiveSpace,
    FCIDUMPError,
    build_effective_hamiltonian,
    exact_ground_energy,
    load_fixture,
    parse_fcidump,
    qubit_hamiltonian,
)
from .noise import MAX_QUBITS, NoiseModel, measure_energy_noisy
from .optimize import OptimizerConfig
from .planner import CalibrationSnapshot, job_split, layout_quality, select_layout
from .simulator import QuantumState, energy_and_gradient


class ConfigError(Exception):
    pass


def _index_list(text: str) -> list[int]:
    out = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part:
            a, b = part.split("-")
            out.extend(range(int(a), int(b) + 1))
        else:
            out.append(int(part))
    return out


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _add_ham_args(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--fixture", choices=sorted(FIXTURES), help="bundled integral set")
    src.add_argument("--fcidump", help="FCIDUMP path (.gz accepted)")
    p.add_argument("--core", type=_index_list, default=None, help="core orbitals, e.g. 0-18")
    p.add_argument("--active", type=_index_list, default=None, help="active orbitals, e.g. 19-22")
    p.add_argument("--threshold", type=float, default=None, help="compression threshold (Ha)")
    p.add_argument("--level", choices=("fermion", "qubit"), default="fermion")


def _load_hamiltonian(args):
    if args.fixture:
        ints, space = load_fixture(args.fixture)
    else:
        ints = parse_fcidump(args.fcidump)
        space = ActiveSpace((), range(ints.n_orbitals))
    if args.core is not None or args.active is not None:
        core = args.core if args.core is not None else []
        active = args.active if args.active is not None else [i for i in range(ints.n_orbitals) if i not in core]
        space = ActiveSpace(core, active)
    ham = build_effective_hamiltonian(ints, space)
    q, report = qubit_hamiltonian(ham, args.threshold, args.level)
    return ham, q, report


def _config(args) -> dict:
    # worker count does not change results, so it stays out of the recorded config
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "workers")}


def _dump(obj, path=None):
    text = json.dumps(obj, sort_keys=True, indent=1) + "\n"
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _write_csv(path, config, header, rows):
    buf = io.StringIO()
    buf.write("# config: " + json.dumps(config, sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])
    if path:
        Path(path).write_text(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())


def config_argv(config: dict) -> list[str]:
    """Rebuild the argument list that produced an embedded ``config``."""
    argv = [config["command"]]
    for key, value in sorted(config.items()):
        if key == "command" or value is None or value is False:
            continue
        flag = "--" + key.replace("_", "-")
        if value is True:
            argv.append(flag)
        elif isinstance(value, list):
            argv += [flag, ",".join(str(v) for v in value)]
        else:
            argv += [flag, str(value)]
    return argv


def read_config(path) -> dict:
    """Embedded config of a JSON, JSONL or CSV output file."""
    text = Path(path).read_text()
    first = text.split("\n", 1)[0]
    try:
        if first.startswith("# config: "):
            return json.loads(first[len("# config: "):])
        try:
            return json.loads(text)["config"]
        except json.JSONDecodeError:
            return json.loads(first)["config"]
    except (json.JSONDecodeError, KeyError, TypeError):
        raise ConfigError(f"{path} carries no embedded config") from None


def cmd_rerun(args):
    config = read_config(args.file)
    if config.get("command") == "rerun":
        raise ConfigError("refusing to rerun a rerun")
    return main(config_argv(config))


# ------------------------------------------------------------------- ham


def cmd_ham(args):
    ham, q, report = _load_hamiltonian(args)
    full_q, _ = qubit_hamiltonian(ham)
    out = {
        "config": _config(args),
        "n_qubits": ham.n_modes,
        "n_electrons": ham.n_electrons,
        "offset": ham.offset,
        "terms_full": len(ham.fermion),
        "terms_compressed": report.kept if report else len(ham.fermion),
        "qubit_terms": len(q),
        "compression": None if report is None else report.__dict__,
    }
    if args.level == "qubit":
        out["terms_full"] = len(full_q)
    if ham.n_modes <= 12:
        out["lambda_min"] = exact_ground_energy(q, ham.n_electrons, ham.ms2)
        out["lambda_min_full"] = exact_ground_energy(full_q, ham.n_electrons, ham.ms2)
    if args.out:
        Path(args.out).write_text(json.dumps(q.to_json(), sort_keys=True) + "\n")
    _dump(out, args.output)


# ----------------------------------------------------------------- adapt


def _pool(args, ham):
    pool = ad.build_fermionic_pool(ham.n_spatial, ham.n_electrons, args.variant)
    if not args.no_symmetry:
        pool = ad.filter_pool_by_symmetry(pool, ham.orbsym)
    if args.pool == "qubit":
        pool = ad.build_qubit_pool(pool, strip_z_chains=args.strip_z)
    return pool


def _adapt_config(args) -> ad.AdaptConfig:
    optimizer = {"mod": "mod_cobyla", "cobyla": "cobyla", "bfgs": "bfgs"}[args.optimizer]
    noise = NoiseModel(alpha=args.alpha) if args.backend == "noisy" else None
    return ad.AdaptConfig(
        backend=args.backend,
        optimizer=optimizer,
        eps_grad=args.eps_grad,
        eps_energy=args.eps_energy,
        max_iter=args.max_iter,
        shots=args.shots,
        opt=OptimizerConfig(tol=args.tol, rhobeg=args.rhobeg, max_evals=args.max_evals),
        noise=noise,
    )


def _adapt_replicate(args, r):
    ham, q, _ = _load_hamiltonian(args)
    pool = _pool(args, ham)
    ref = ad.reference_for(ham.n_modes, ham.n_electrons)
    seed = args.seed + r
    res = ad.adapt_run(q, pool, ref, _adapt_config(args), seed=seed)
    return {
        "replicate": r,
        "seed": seed,
        "stop_reason": res.stop_reason,
        "error": res.error,
        "final_energy": res.energy,
        "exact_energy": res.exact_energy(q),
        "iterations": len(res.trace),
        "cumulative_evals": res.trace[-1].cumulative_evals if res.trace else 0,
        "trace": [t.to_dict() for t in res.trace],
        "ansatz": json.loads(res.ansatz.to_json()),
    }


def cmd_adapt(args):
    if args.optimizer == "bfgs" and args.backend != "exact":
        raise ConfigError("--optimizer bfgs requires --backend exact")
    if args.backend == "exact" and args.replicates > 1:
        raise ConfigError("replicates of an exact run are identical; use --replicates 1")
    _adapt_config(args)
    workers = args.workers or int(os.environ.get("ADAPTVQE_WORKERS", "1"))
    reps = range(args.replicates)
    if workers > 1 and args.replicates > 1:
        with ProcessPoolExecutor(workers) as ex:
            runs = list(ex.map(_adapt_replicate, [args] * len(reps), reps))
    else:
        runs = [_adapt_replicate(args, r) for r in reps]
    runs.sort(key=lambda d: d["replicate"])
    max_it = max((d["iterations"] for d in runs), default=0)
    per_iter = []
    for it in range(1, max_it + 1):
        rows = [d["trace"][it - 1] for d in runs if len(d["trace"]) >= it]
        e = np.array([t["energy"] for t in rows])
        c = np.array([t["cumulative_evals"] for t in rows])
        per_iter.append({
            "iteration": it,
            "n_runs": len(rows),
            "mean_energy": float(e.mean()),
            "std_energy": float(e.std()),
            "mean_cumulative_evals": float(c.mean()),
            "std_cumulative_evals": float(c.std()),
        })
    config = _config(args)
    if args.trace_csv:
        header = ["replicate", "seed", "iteration", "selected", "label", "max_gradient", "energy",
                  "std_error", "n_evals", "cumulative_evals", "depth", "cnot_count", "effective_tol"]
        rows = [[d["replicate"], d["seed"]] + [t[h] for h in header[2:]] for d in runs for t in d["trace"]]
        _write_csv(args.trace_csv, config, header, rows)
    if args.trace_jsonl:
        with open(args.trace_jsonl, "w") as fh:
            fh.write(json.dumps({"config": config}, sort_keys=True) + "\n")
            for d in runs:
                for t in d["trace"]:
                    fh.write(json.dumps(dict(t, replicate=d["replicate"], seed=d["seed"]), sort_keys=True) + "\n")
    if args.ansatz_out:
        Path(args.ansatz_out).write_text(json.dumps(runs[0]["ansatz"], sort_keys=True, indent=1) + "\n")
    summary = {
        "config": config,
        "per_iteration": per_iter,
        "replicates": [{k: v for k, v in d.items() if k not in ("trace", "ansatz")} for d in runs],
    }
    if any(d["error"] for d in runs):
        _dump(summary, args.output)
        return 3
    _dump(summary, args.output)
    return 0


# ------------------------------------------------------------------ scan


def _load_ansatz(path) -> ad.Ansatz:
    try:
        return ad.Ansatz.from_json(Path(path).read_text())
    except (KeyError, TypeError, AttributeError, json.JSONDecodeError) as exc:
        raise ConfigError(f"malformed ansatz file {path}: {exc}") from None


def cmd_scan(args):
    ans = _load_ansatz(args.ansatz)
    _, q, _ = _load_hamiltonian(args)
    if q.n_qubits != ans.n_qubits:
        raise ConfigError("ansatz and Hamiltonian qubit counts differ")
    idx = args.param_index
    if not idx or len(idx) > 2 or any(not 0 <= i < len(ans.thetas) for i in idx):
        raise ConfigError(f"--param-index must name 1 or 2 of {len(ans.thetas)} parameters")
    grid = np.linspace(-np.pi, np.pi, args.points)
    base = np.array(ans.thetas, dtype=float)
    ref = QuantumState.from_occupations(ans.reference)
    gens = ans.generators()
    rows = []
    for vals in (np.array(np.meshgrid(*[grid] * len(idx), indexing="ij")).reshape(len(idx), -1).T):
        th = base.copy()
        th[idx] = vals
        rows.append(list(vals) + [energy_and_gradient(q, ref, gens, th)[0]])
    header = [f"theta_{i}" for i in idx] + ["energy"]
    _write_csv(args.output, _config(args), header, rows)


# ----------------------------------------------------------- noise sweep


def crossing_alpha(alphas, errors, target: float = 1e-3) -> float | None:
    """alpha where the error crosses ``target``, by log-log interpolation.

    Outside the grid the straight line through the last two (or first two)
    points is extended.  Returns ``None`` with fewer than two positive errors.
    """
    a = np.log(np.asarray(alphas, dtype=float))
    e = np.asarray(errors, dtype=float)
    pos = e > 0
    if pos.sum() < 2:
        return None
    a, e = a[pos], e[pos]
    le = np.log(e)
    lt = np.log(target)
    if le[0] <= lt:
        k = 0
    else:
        below = np.flatnonzero(le <= lt)
        k = int(below[0]) - 1 if below.size else len(le) - 2
    a0, a1, l0, l1 = a[k], a[k + 1], le[k], le[k + 1]
    if l1 == l0:
        return None
    return float(np.exp(a0 + (lt - l0) * (a1 - a0) / (l1 - l0)))


def noise_sweep(ansatz: ad.Ansatz, q, alphas, sizes, shots=None, replicates=1, seed=0):
    """Rows ``(alpha, n_ops, mean_error, std_error)`` and the 1 mHa crossing per size."""
    rows, crossings = [], {}
    for n_ops in sizes:
        sub = ad.Ansatz(ansatz.reference, ansatz.operators[:n_ops], ansatz.thetas[:n_ops])
        e0 = energy_and_gradient(q, QuantumState.from_occupations(sub.reference), sub.generators(), sub.thetas)[0]
        circ = peephole(sub.circuit())
        means = []
        for k, alpha in enumerate(alphas):
            model = NoiseModel(alpha=alpha)
            if shots is None:
                errs = [measure_energy_noisy(circ, q, model).value - e0]
            else:
                errs = [
                    measure_energy_noisy(circ, q, model, shots, seed=seed + 1000 * k + r).value - e0
                    for r in range(replicates)
                ]
            errs = np.array(errs)
            means.append(float(errs.mean()))
            rows.append([alpha, n_ops, float(errs.mean()), float(errs.std())])
        crossings[n_ops] = crossing_alpha(alphas, np.abs(means))
    return rows, crossings


def cmd_noise_sweep(args):
    ans = _load_ansatz(args.ansatz)
    if ans.n_qubits > MAX_QUBITS:
        raise ConfigError(f"noise simulation refused above {MAX_QUBITS} qubits")
    _, q, _ = _load_hamiltonian(args)
    alphas = args.alphas or list(np.geomspace(args.alpha_min, args.alpha_max, args.n_alphas))
    sizes = args.sizes or list(range(1, len(ans.operators) + 1))
    if any(not 1 <= s <= len(ans.operators) for s in sizes):
        raise ConfigError("ansatz sizes must lie between 1 and the number of operators")
    rows, cross = noise_sweep(ans, q, alphas, sizes, args.shots, args.replicates, args.seed)
    _write_csv(args.output, _config(args), ["alpha", "n_ops", "mean_error", "std_error"], rows)
    if args.crossing:
        _dump({"config": _config(args), "alpha_star": {str(k): v for k, v in cross.items()}}, args.crossing)


# ------------------------------------------------------------------ plan


def cmd_plan(args):
    if args.calibration:
        if args.n_qubits is None:
            raise ConfigError("--calibration needs --n-qubits")
        try:
            snap = CalibrationSnapshot.from_json(Path(args.calibration).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"calibration file is not JSON: {exc}") from None
        window = select_layout(args.n_qubits, snap)
        out = {"config": _config(args), "layout": window, "f_q": layout_quality(window, snap)}
    else:
        if args.depth is None or args.terms is None:
            raise ConfigError("give --calibration/--n-qubits or --depth/--terms")
        out = {"config": _config(args), "job_plan": job_split(args.depth, args.terms, args.limit).to_dict()}
    _dump(out, args.output)


# --------------------------------------------------------------- circuit


def cmd_circuit(args):
    ans = _load_ansatz(args.ansatz)
    layers = ans.layers()
    if not layers:
        raise ConfigError("ansatz has no non-identity layers")
    n = ans.n_qubits
    if args.orientation == "optimal":
        circ = optimize_orientations(layers, n, reference=ans.reference).circuit
    else:
        circ = peephole(layers_circuit(n, layers, args.orientation, reference=ans.reference))
    out = {"config": _config(args), "report": depth_report(circ).to_dict()}
    if args.check_unitary:
        if n > 4:
            raise ConfigError("--check-unitary is limited to 4 qubits")
        ref = layers_circuit(n, layers, "standard", reference=ans.reference)
        out["max_unitary_deviation"] = float(np.abs(circuit_unitary(circ) - circuit_unitary(ref)).max())
    if args.out:
        Path(args.out).write_bytes(export_circuit(circ, args.export))
    _dump(out, args.output)


# ------------------------------------------------------------------ main


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="adaptvqe", description="ADAPT-VQE toolkit command line")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ham", help="build, compress and report a qubit Hamiltonian")
    _add_ham_args(p)
    p.add_argument("--out", help="write the qubit Hamiltonian as JSON")
    p.add_argument("--output", help="report path (default stdout)")
    p.set_defaults(func=cmd_ham)

    p = sub.add_parser("adapt", help="run ADAPT-VQE")
    _add_ham_args(p)
    p.add_argument("--pool", choices=("fermion", "qubit"), default="fermion")
    p.add_argument("--variant", choices=("singlet_sd", "uccsd"), default="singlet_sd")
    p.add_argument("--no-symmetry", action="store_true", help="skip point-group filtering")
    p.add_argument("--strip-z", action="store_true", help="drop Z chains from qubit-pool strings")
    p.add_argument("--backend", choices=("exact", "sampled", "noisy"), default="exact")
    p.add_argument("--optimizer", choices=("bfgs", "cobyla", "mod"), default="bfgs")
    p.add_argument("--shots", type=int, default=1000)
    p.add_argument("--alpha", type=float, default=1.0, help="coherence scale for --backend noisy")
    p.add_argument("--tol", type=float, default=1e-3)
    p.add_argument("--rhobeg", type=float, default=0.1)
    p.add_argument("--max-evals", type=int, default=1000)
    p.add_argument("--max-iter", type=int, default=30)
    p.add_argument("--eps-grad", type=float, default=1e-3)
    p.add_argument("--eps-energy", type=float, default=1e-6)
    p.add_argument("--replicates", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=0, help="process count (default $ADAPTVQE_WORKERS or 1)")
    p.add_argument("--trace-csv")
    p.add_argument("--trace-jsonl")
    p.add_argument("--ansatz-out", help="write the first replicate's ansatz as JSON")
    p.add_argument("--output", help="summary path (default stdout)")
    p.set_defaults(func=cmd_adapt)

    p = sub.add_parser("scan", help="1-D or 2-D energy scan over ansatz parameters")
    _add_ham_args(p)
    p.add_argument("--ansatz", required=True)
    p.add_argument("--param-index", type=_index_list, required=True, help="one or two indices, e.g. 3 or 2,3")
    p.add_argument("--points", type=int, default=25)
    p.add_argument("--output", help="CSV path (default stdout)")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("noise-sweep", help="energy error versus coherence scale alpha")
    _add_ham_args(p)
    p.add_argument("--ansatz", required=True)
    p.add_argument("--alphas", type=_float_list)
    p.add_argument("--alpha-min", type=float, default=1.0)
    p.add_argument("--alpha-max", type=float, default=1e3)
    p.add_argument("--n-alphas", type=int, default=8)
    p.add_argument("--sizes", type=_index_list, help="ansatz prefix lengths (default all)")
    p.add_argument("--shots", type=int, default=None, help="omit for exact probabilities")
    p.add_argument("--replicates", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--crossing", help="write the 1 mHa crossing alphas as JSON")
    p.add_argument("--output", help="CSV path (default stdout)")
    p.set_defaults(func=cmd_noise_sweep)

    p = sub.add_parser("plan", help="qubit layout selection or job splitting")
    p.add_argument("--calibration")
    p.add_argument("--n-qubits", type=int)
    p.add_argument("--depth", type=int)
    p.add_argument("--terms", type=int)
    p.add_argument("--limit", type=int, default=33000)
    p.add_argument("--output")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("circuit", help="compile an ansatz and report depth")
    p.add_argument("--ansatz", required=True)
    p.add_argument("--orientation", choices=("standard", "reverse", "optimal"), default="optimal")
    p.add_argument("--export", choices=("text", "openqasm2"), default="text")
    p.add_argument("--out", help="circuit file")
    p.add_argument("--check-unitary", action="store_true")
    p.add_argument("--output")
    p.set_defaults(func=cmd_circuit)

    p = sub.add_parser("rerun", help="repeat a run from the config embedded in one of its outputs")
    p.add_argument("file")
    p.set_defaults(func=cmd_rerun)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        rc = args.func(args)
    except (ConfigError, FCIDUMPError, FileNotFoundError, KeyError, ValueError) as exc:
        print(f"adaptvqe {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        print(f"adaptvqe {args.command}: runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    return rc or 0


if __name__ == "__main__":
    sys.exit(main())

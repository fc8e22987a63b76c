"""Command-line pipeline: prepare, filter, tomo, reconstruct, fidelity, report.

Exit codes: 0 ok, 2 I/O or parse failure, 3 wrong kind of input,
4 invalid configuration, 5 inconsistent data.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import io
from .circuit import run_with_checkpoints, wwbar_circuit, wwbar_nmr_variant
from .filtration import CSV_HEADER, run_ensemble
from .marginals import InconsistentMarginals, reconstruct_from_marginals
from .metrics import fidelity
from .states import DensityMatrix, StateVector, as_density
from .tomography import depolarize, scheme_settings, tomograph

log = logging.getLogger("wwbar")

EXIT_OK, EXIT_IO, EXIT_KIND, EXIT_CONFIG, EXIT_INCONSISTENT = 0, 2, 3, 4, 5


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _load(path) -> tuple:
    try:
        return io.load_state(path)
    except io.StateFileError as ex:
        raise CliError(str(ex), EXIT_IO) from None


def _save(path, state, metadata) -> None:
    try:
        io.save_state(path, state, metadata)
    except OSError as ex:
        raise CliError(f"cannot write {path}: {ex}", EXIT_IO) from None


# --- commands ---------------------------------------------------------------


def cmd_prepare(args) -> int:
    prog = wwbar_circuit() if args.variant == "gate" else wwbar_nmr_variant()
    final, devs = run_with_checkpoints(prog)
    for pos, d in devs.items():
        log.info("checkpoint %s (%s): deviation %.3e", pos, prog.labels.get(pos, ""), d)
    meta = {
        "stage": "prepare",
        "variant": args.variant,
        "checkpoint_deviations": {prog.labels.get(p, str(p)): d for p, d in devs.items()},
    }
    _save(args.out, final, meta)
    return EXIT_OK


def cmd_filter(args) -> int:
    if args.trials < 1:
        raise CliError("--trials must be >= 1", EXIT_CONFIG)
    state, _ = _load(args.inp)
    if not isinstance(state, StateVector):
        raise CliError("filtration needs a pure state file", EXIT_KIND)
    if state.n_qubits != 3:
        raise CliError("filtration needs a three-qubit state", EXIT_KIND)
    stats = run_ensemble(state, args.trials, args.seed, mode=args.mode)
    log.info(
        "retained %d of %d (%.6f; exact %.6f)",
        stats.retained, stats.trials, stats.retained_fraction, stats.success_probability,
    )
    try:
        io.write_csv(args.out, CSV_HEADER, [stats.csv_row()])
    except OSError as ex:
        raise CliError(f"cannot write {args.out}: {ex}", EXIT_IO) from None
    return EXIT_OK


def _records_path(out: str, records: str | None) -> Path:
    if records:
        return Path(records)
    p = Path(out)
    return p.with_name(p.stem + ".records.json")


def cmd_tomo(args) -> int:
    try:
        settings, keep = scheme_settings(args.scheme)
    except ValueError as ex:
        raise CliError(str(ex), EXIT_CONFIG) from None
    if not 0.0 <= args.noise_p <= 1.0:
        raise CliError("--noise-p must lie in [0, 1]", EXIT_CONFIG)
    if args.sigma < 0:
        raise CliError("--sigma must be >= 0", EXIT_CONFIG)
    state, _ = _load(args.inp)
    rho = as_density(state)
    if rho.n_qubits != 3:
        raise CliError("tomography schemes are defined for three-qubit inputs", EXIT_KIND)
    rho = depolarize(rho, args.noise_p)
    if keep is not None:
        rho = rho.partial_trace(keep)
    run = tomograph(rho, settings, args.sigma, args.seed, label=f"readout:{args.scheme.lower()}")
    res = run.result
    log.info("scheme %s: design rank %d of %d, residual %.3e", args.scheme, res.rank, 4**rho.n_qubits - 1, res.residual)
    if run.augmented:
        log.warning("settings augmented with %s to reach full rank", ",".join(run.augmented))
    meta = {
        "stage": f"tomo-{args.scheme.lower()}",
        "scheme": args.scheme.lower(),
        "keep": keep or [1, 2, 3],
        "rank": res.rank,
        "residual": res.residual,
        "noise_p": args.noise_p,
        "sigma": args.sigma,
        "seed": args.seed,
        "settings": [s.label for s in run.settings],
        "augmented": run.augmented,
    }
    _save(args.out, res.density, meta)
    rec_path = _records_path(args.out, args.records)
    try:
        io.write_json(rec_path, [r.to_dict() for r in run.records])
    except OSError as ex:
        raise CliError(f"cannot write {rec_path}: {ex}", EXIT_IO) from None
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    ab, _ = _load(args.rho_ab)
    bc, _ = _load(args.rho_bc)
    for name, s in (("rho_ab", ab), ("rho_bc", bc)):
        if not isinstance(s, DensityMatrix) or s.n_qubits != 2:
            raise CliError(f"{name} must be a two-qubit density state file", EXIT_KIND)
    try:
        res = reconstruct_from_marginals(ab, bc, exact=args.exact, tol=args.tol)
    except InconsistentMarginals as ex:
        raise CliError(f"{ex} (deviation {ex.deviation:.6g})", EXIT_INCONSISTENT) from None
    log.info("reconstructed: residual %.3e, unique %s", res.residual, res.unique)
    _save(args.out, res.state, {"stage": "reconstruct", **res.metadata()})
    return EXIT_OK


def cmd_fidelity(args) -> int:
    a, _ = _load(args.a)
    b, _ = _load(args.b)
    if a.n_qubits != b.n_qubits:
        raise CliError(f"states have {a.n_qubits} and {b.n_qubits} qubits", EXIT_KIND)
    print(f"{fidelity(a, b).value:.6f}")
    return EXIT_OK


def _reference_for(ref, meta: dict, n_qubits: int):
    if n_qubits == ref.n_qubits:
        return ref
    keep = meta.get("keep")
    if keep and len(keep) == n_qubits:
        return as_density(ref).partial_trace(keep)
    return None


def build_report(directory) -> list[dict]:
    """One row per artifact: stage, fidelity to the prepared state, residual, rank."""
    directory = Path(directory)
    files = sorted(directory.glob("*.json"))
    states = {}
    for f in files:
        raw = io.read_json(f)
        if isinstance(raw, dict) and "kind" in raw:
            states[f] = io.state_from_dict(raw)
    refs = [f for f, (_, m) in states.items() if m.get("stage") == "prepare"]
    ref = states[refs[0]][0] if refs else None

    def fmt(x):
        return "" if x is None else f"{x:.6f}" if isinstance(x, float) else str(x)

    rows = []
    for f, (s, m) in states.items():
        target = _reference_for(ref, m, s.n_qubits) if ref is not None else None
        fid = fidelity(s, target).value if target is not None else None
        rows.append({
            "stage": f"{m.get('stage', 'unknown')} ({f.name})",
            "fidelity": fmt(fid),
            "residual": fmt(m.get("residual")),
            "rank": fmt(m.get("rank")),
        })

    # reconstruction from marginals compared with full tomography
    full = [f for f, (_, m) in states.items() if m.get("stage") == "tomo-3q"]
    recon = [f for f, (_, m) in states.items() if m.get("stage") == "reconstruct"]
    for fr in recon:
        for ft in full:
            rows.append({
                "stage": f"reconstruct vs tomo-3q ({fr.name} / {ft.name})",
                "fidelity": fmt(fidelity(states[fr][0], states[ft][0]).value),
                "residual": fmt(states[fr][1].get("residual")),
                "rank": fmt(states[ft][1].get("rank")),
            })

    for f in sorted(directory.glob("*.csv")):
        if f.name.startswith("report"):
            continue
        for r in io.read_csv(f):
            if set(CSV_HEADER) <= set(r):
                mf = float(r["mean_fidelity"])
                rows.append({
                    "stage": f"filter ({f.name}, retained {r['retained']}/{r['trials']})",
                    "fidelity": "" if np.isnan(mf) else f"{mf:.6f}",
                    "residual": "",
                    "rank": "",
                })
    return rows


def cmd_report(args) -> int:
    directory = Path(args.dir)
    if not directory.is_dir():
        raise CliError(f"{directory} is not a directory", EXIT_IO)
    try:
        rows = build_report(directory)
    except io.StateFileError as ex:
        raise CliError(str(ex), EXIT_IO) from None
    cols = ["stage", "fidelity", "residual", "rank"]
    lines = ["| " + " | ".join(cols) + " |", "|" + "---|" * len(cols)]
    lines += ["| " + " | ".join(r[c] for c in cols) + " |" for r in rows]
    table = "\n".join(lines) + "\n"
    print(table, end="")
    try:
        io.write_csv(directory / "report.csv", cols, [[r[c] for c in cols] for r in rows])
        (directory / "report.md").write_text(table, encoding="utf-8")
    except OSError as ex:
        raise CliError(f"cannot write report: {ex}", EXIT_IO) from None
    return EXIT_OK


# --- argument parsing -------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wwbar", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("prepare", help="run the preparation circuit and write the WWbar state")
    s.add_argument("--variant", choices=["gate", "nmr"], default="gate")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_prepare)

    s = sub.add_parser("filter", help="filtration ensemble statistics to CSV")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--trials", type=int, default=100_000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--mode", choices=["fast", "faithful"], default="fast")
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_filter)

    s = sub.add_parser("tomo", help="simulate tomography and reconstruct a density matrix")
    s.add_argument("--in", dest="inp", required=True)
    s.add_argument("--scheme", default="3q", help="3q, 2q-AB or 2q-BC")
    s.add_argument("--noise-p", type=float, default=0.0)
    s.add_argument("--sigma", type=float, default=0.0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.add_argument("--records", help="measurement records path (default: <out>.records.json)")
    s.set_defaults(func=cmd_tomo)

    s = sub.add_parser("reconstruct", help="rebuild the three-qubit state from AB and BC marginals")
    s.add_argument("--rho-ab", required=True)
    s.add_argument("--rho-bc", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--exact", action="store_true", help="use exact-data tolerances")
    s.add_argument("--tol", type=float, default=None, help="override the rho_B consistency tolerance")
    s.set_defaults(func=cmd_reconstruct)

    s = sub.add_parser("fidelity", help="print the fidelity of two state files")
    s.add_argument("a")
    s.add_argument("b")
    s.set_defaults(func=cmd_fidelity)

    s = sub.add_parser("report", help="summarize all artifacts in a directory")
    s.add_argument("--dir", required=True)
    s.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except CliError as ex:
        print(f"error: {ex}", file=sys.stderr)
        return ex.code


if __name__ == "__main__":
    sys.exit(main())

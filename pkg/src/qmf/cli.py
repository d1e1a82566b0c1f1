"""Command-line frontend.

One process per command; stochastic subcommands require an explicit
seed and re-running any command with the same configuration and seed
produces byte-identical data rows.  Exit codes: 0 success, 2 input
error, 3 resource cap exceeded, 4 numeric validation failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import amplify, bank, cw, dsp, io, pipeline, qsim
from .errors import CapExceededError, InputError, ValidationError

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_CAP = 3
EXIT_VALIDATION = 4


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from None


def _config_echo(args: argparse.Namespace) -> dict:
    skip = {"func", "command"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _derived_path(out: str, tag: str) -> str:
    p = Path(out)
    return str(p.with_name(p.stem + f".{tag}" + (p.suffix or ".csv")))


# ---------------------------------------------------------------------------
# subcommands

def cmd_mf_snr(args) -> None:
    ts = io.read_time_series(args.data)
    spec = bank.BankSpec.from_config(_load_json(args.bank_config))
    if ts.m != spec.m_samples:
        raise ValidationError(
            f"data has {ts.m} samples but the bank expects {spec.m_samples}"
        )
    if args.psd is not None:
        psd = dsp.interpolate_psd(io.read_psd(args.psd), ts.m, ts.dt)
    else:
        seg = args.seg_len or max(256, min(ts.m // 8, 4096))
        seg = min(seg, ts.m // 2)
        psd = dsp.interpolate_psd(dsp.estimate_psd(ts, seg_len=seg), ts.m, ts.dt)
    params = bank.index_to_params(spec, args.index)
    qc = dsp.complex_template(params, spec.fs, spec.m_samples, psd)
    snr = dsp.snr_series(dsp.forward_fft(ts), qc, psd)
    rho_max, j_max = dsp.max_snr(snr)
    prov = io.provenance_line("mf-snr", _config_echo(args), seed=None)
    io.write_snr(args.out, snr, prov, t0=ts.t0)
    summary = args.summary_out or _derived_path(args.out, "summary").replace(".csv", ".json")
    io.write_json(summary, {"rho_max": rho_max, "t_max": ts.t0 + j_max * snr.dt,
                            "j_max": j_max}, prov)
    print(f"rho_max={rho_max:.6g} at t={ts.t0 + j_max * snr.dt:.6g}s -> {args.out}")


def cmd_count_dist(args) -> None:
    p = args.p if args.p is not None else amplify.choose_p(args.n_templates)
    dist = amplify.counting_distribution(args.n_templates, args.matches, p)
    prov = io.provenance_line("count-dist", _config_echo(args), seed=None)
    # outcomes killed by exactly destructive interference are omitted
    rows = ((b, repr(float(v))) for b, v in enumerate(dist.probs) if v > 0.0)
    io.write_csv(args.out, "b,probability", rows, prov)
    print(f"p={p}, {dist.probs.size} outcomes -> {args.out}")


def _write_shot_files(args, result: qsim.ShotResult, marginal: np.ndarray,
                      command: str) -> None:
    prov = io.provenance_line(command, _config_echo(args), seed=args.seed)
    rows = (
        (bits, c, repr(c / result.shots))
        for bits, c in sorted(result.counts.items())
    )
    io.write_csv(args.out, "outcome_bits,count,probability", rows, prov)
    marg_out = args.marginal_out or _derived_path(args.out, "marginal")
    io.write_csv(marg_out, "outcome_int,probability",
                 ((i, repr(float(v))) for i, v in enumerate(marginal)), prov)
    mode = max(result.counts, key=result.counts.get)
    print(f"{result.shots} shots, modal outcome {mode} -> {args.out}")


def cmd_qsim_count(args) -> None:
    n = len(args.data_bits)
    state, layout = qsim.counting_state(n, args.ignored, args.data_bits,
                                        args.p, cap=args.cap)
    marginal = qsim.marginal_probs(state, layout.counting)
    rng = np.random.default_rng(args.seed)
    result = qsim.measure(state, layout.counting, args.shots, rng)
    _write_shot_files(args, result, marginal, "qsim-count")


def cmd_qsim_search(args) -> None:
    n = len(args.data_bits)
    state, layout = qsim.search_state(n, args.ignored, args.data_bits,
                                      args.iterations, cap=args.cap)
    marginal = qsim.marginal_probs(state, layout.template)
    rng = np.random.default_rng(args.seed)
    result = qsim.measure(state, layout.template, args.shots, rng)
    _write_shot_files(args, result, marginal, "qsim-search")


def _scenario_args(args) -> tuple[pipeline.Scenario, dict, int]:
    cfg = _load_json(args.config)
    seed = args.seed if args.seed is not None else cfg.get("seed")
    if seed is None:
        raise ValidationError("a seed is required (flag --seed or config key)")
    return pipeline.scenario_from_config(cfg), cfg, int(seed)


def cmd_mc_bench(args) -> None:
    scenario, cfg, seed = _scenario_args(args)
    trials = args.trials if args.trials is not None else int(cfg.get("trials", 0))
    if trials < 1:
        raise ValidationError(f"trials must be >= 1, got {trials}")
    summary, _ = pipeline.monte_carlo(scenario, trials, seed)
    prov = io.provenance_line("mc-bench", {**_config_echo(args), "scenario": cfg},
                              seed=seed)
    io.write_json(args.out, summary.to_dict(), prov)
    hist_out = args.hist_out or _derived_path(args.out, "hist").replace(".json", ".csv")
    io.write_csv(hist_out, "evals,count",
                 summary.histogram, prov)
    print(f"{trials} trials: mean={summary.mean:.1f} evals "
          f"(classical {summary.classical_evals}) -> {args.out}")


def cmd_fail_bound(args) -> None:
    if args.r_max < 1:
        raise ValidationError(f"r-max must be >= 1, got {args.r_max}")
    prov = io.provenance_line("fail-bound", _config_echo(args), seed=None)
    rows = []
    for r in range(1, args.r_max + 1):
        eps, bound = amplify.max_fail_bound_argmax(r)
        rows.append((r, repr(eps), repr(bound)))
    io.write_csv(args.out, "r,eps_p_argmax,max_bound", rows, prov)
    print(f"bounds for r=1..{args.r_max} -> {args.out}")


def cmd_cw_cost(args) -> None:
    cfg = _load_json(args.config) if args.config else {}
    spec = cw.CwSearchSpec.from_config(cfg)
    report = cw.quantum_cost(spec)
    prov = io.provenance_line("cw-cost", {**_config_echo(args), "spec": cfg}, seed=None)
    io.write_json(args.out, report, prov)
    print(f"speedup {report['speedup']:.3g} -> {args.out}")


def cmd_detect(args) -> None:
    scenario, cfg, seed = _scenario_args(args)
    counter = pipeline.OracleCounter()
    rng = np.random.default_rng(seed)
    outcome = pipeline.signal_detection(scenario.n, scenario.r_true, scenario.p,
                                        rng, counter)
    prov = io.provenance_line("detect", {**_config_echo(args), "scenario": cfg},
                              seed=seed)
    io.write_json(args.out, {
        "b": outcome.b, "r_star": outcome.r_star, "k_star": outcome.k_star,
        "detected": outcome.detected, "oracle_evals": counter.evaluations,
        "setup_evals": scenario.setup_evals,
    }, prov)
    print(f"detected={outcome.detected} (b={outcome.b}, r*={outcome.r_star}) "
          f"-> {args.out}")


def cmd_retrieve(args) -> None:
    scenario, cfg, seed = _scenario_args(args)
    if scenario.r_true < 1:
        raise ValidationError("retrieval scenario has no matching templates")
    record = pipeline.run_trial(scenario, np.random.default_rng(seed))
    prov = io.provenance_line("retrieve", {**_config_echo(args), "scenario": cfg},
                              seed=seed)
    io.write_json(args.out, {
        "succeeded": record.succeeded, "returned_index": record.returned_index,
        "attempts": record.attempts, "oracle_evals": record.oracle_evals,
        "setup_evals": scenario.setup_evals,
    }, prov)
    print(f"succeeded={record.succeeded} index={record.returned_index} "
          f"evals={record.oracle_evals} -> {args.out}")


# ---------------------------------------------------------------------------
# parser

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="qmf",
        description="Grover-accelerated matched filtering toolkit",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mf-snr", help="matched-filter SNR series for one template")
    p.add_argument("--data", required=True, help="strain CSV or raw float64 file")
    p.add_argument("--bank-config", required=True, help="bank lattice JSON")
    p.add_argument("--index", type=int, required=True, help="template index")
    p.add_argument("--psd", help="PSD CSV (estimated from the data if omitted)")
    p.add_argument("--seg-len", type=int, help="Welch segment length")
    p.add_argument("--out", required=True, help="output SNR CSV")
    p.add_argument("--summary-out", help="summary JSON (derived from --out if omitted)")
    p.set_defaults(func=cmd_mf_snr)

    p = sub.add_parser("count-dist", help="exact counting-register distribution")
    p.add_argument("--n-templates", type=int, required=True)
    p.add_argument("--matches", type=int, required=True)
    p.add_argument("--p", type=int, help="counting qubits (auto if omitted)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_count_dist)

    p = sub.add_parser("qsim-count", help="state-vector quantum counting run")
    p.add_argument("--data-bits", required=True, help="n-bit 0/1 data string")
    p.add_argument("--ignored", type=int, default=0, help="low-order bits ignored")
    p.add_argument("--p", type=int, required=True, help="counting qubits")
    p.add_argument("--shots", type=int, default=2048)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--cap", type=int, default=qsim.DEFAULT_QUBIT_CAP)
    p.add_argument("--out", required=True)
    p.add_argument("--marginal-out")
    p.set_defaults(func=cmd_qsim_count)

    p = sub.add_parser("qsim-search", help="state-vector Grover search run")
    p.add_argument("--data-bits", required=True)
    p.add_argument("--ignored", type=int, default=0)
    p.add_argument("--iterations", type=int, required=True, help="Grover iterations")
    p.add_argument("--shots", type=int, default=2048)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--cap", type=int, default=qsim.DEFAULT_QUBIT_CAP)
    p.add_argument("--out", required=True)
    p.add_argument("--marginal-out")
    p.set_defaults(func=cmd_qsim_search)

    p = sub.add_parser("mc-bench", help="Monte Carlo oracle-cost benchmark")
    p.add_argument("--config", required=True, help="scenario JSON")
    p.add_argument("--trials", type=int, help="override config trials")
    p.add_argument("--seed", type=int, help="override config seed")
    p.add_argument("--out", required=True, help="summary JSON")
    p.add_argument("--hist-out", help="histogram CSV (derived if omitted)")
    p.set_defaults(func=cmd_mc_bench)

    p = sub.add_parser("fail-bound", help="retrieval failure bound sweep")
    p.add_argument("--r-max", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fail_bound)

    p = sub.add_parser("cw-cost", help="continuous-wave search cost report")
    p.add_argument("--config", help="CW spec JSON (defaults if omitted)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_cw_cost)

    p = sub.add_parser("detect", help="one distribution-level detection run")
    p.add_argument("--config", required=True, help="scenario JSON")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("retrieve", help="retrieve one matching template index")
    p.add_argument("--config", required=True, help="scenario JSON")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_retrieve)

    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (FileNotFoundError, InputError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except CapExceededError as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return EXIT_CAP
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

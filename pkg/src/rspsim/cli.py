"""Command-line front end: run, sweep, verify, tomo.

Exit codes: 0 success (including a probabilistic failure branch, which is
a valid experimental outcome), 1 configuration error, 2 verification or
internal invariant failure, 3 reserved.

Complex lists are colon-separated entries, each "re" or "re,im", e.g.
``--lambda 0.6,0:0.8,0``.  A config file holds flat ``key = value`` lines
with the same keys as the long flags; explicit flags win on conflict.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass

import numpy as np

from .errors import SimulationError
from .protocols import (
    MODES,
    PROTOCOLS,
    SUCCESS_TOL,
    ChannelSpec,
    TargetState,
    Transcript,
    run_protocol,
)
from .register import DensityMatrix, StateRegister, derive_rng
from .sweep import rows_to_csv, sweep_rows, theta_grid, write_csv
from .tomography import (
    exact_bloch,
    fidelity_mixed,
    reconstruct_qubit,
    sample_pauli_expectations,
    trace_distance,
)
from .verify import format_report, run_suite


class ConfigError(Exception):
    """Invalid command line or config file; mapped to exit code 1."""


@dataclass
class RunConfig:
    command: str
    protocol: str | None = None
    mode: str = "repaired"
    d: int | None = None
    lambdas: tuple[complex, ...] | None = None
    target: tuple[complex, ...] | None = None
    trials: int = 10_000
    shots: int = 100_000
    seed: int = 0
    theta_min: float = 0.0
    theta_max: float = float(np.pi / 4)
    points: int = 21
    out: str | None = None
    tolerance: float = SUCCESS_TOL
    suite: str = "all"


def parse_complex_list(text: str, name: str) -> tuple[complex, ...]:
    """Parse "re,im:re,im:..." (imaginary parts optional)."""
    out = []
    for tok in text.split(":"):
        parts = tok.split(",")
        if not 1 <= len(parts) <= 2:
            raise ConfigError(f"{name}: entry {tok!r} is not 're' or 're,im'")
        try:
            re_part = float(parts[0])
            im_part = float(parts[1]) if len(parts) == 2 else 0.0
        except ValueError:
            raise ConfigError(f"{name}: cannot parse {tok!r} as a complex number") from None
        out.append(complex(re_part, im_part))
    return tuple(out)


def _renormalized(values: tuple[complex, ...], name: str) -> tuple[complex, ...]:
    v = np.asarray(values, dtype=complex)
    norm = float(np.linalg.norm(v))
    if not 0.999999 <= norm <= 1.000001:
        raise ConfigError(f"{name}: norm {norm:.9f} deviates from 1 by more than 1e-6")
    return tuple(v / norm)


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse exits with 2 by default; we want 1
        raise ConfigError(message)


def build_parser() -> _Parser:
    parser = _Parser(prog="rspsim", description=__doc__, add_help=True)
    sub = parser.add_subparsers(dest="command")

    def add_common(p):
        p.add_argument("--protocol", choices=PROTOCOLS)
        p.add_argument("--mode", choices=MODES)
        p.add_argument("--d", type=int)
        p.add_argument("--lambda", dest="lambdas", metavar="LIST")
        p.add_argument("--target", metavar="LIST")
        p.add_argument("--trials", type=int)
        p.add_argument("--shots", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--theta-min", dest="theta_min", type=float)
        p.add_argument("--theta-max", dest="theta_max", type=float)
        p.add_argument("--points", type=int)
        p.add_argument("--out")
        p.add_argument("--config")
        p.add_argument("--tolerance", type=float)

    add_common(sub.add_parser("run", help="execute one protocol instance"))
    add_common(sub.add_parser("sweep", help="reproduce the success-probability curves"))
    p_verify = sub.add_parser("verify", help="run the invariant and oracle suites")
    p_verify.add_argument("suite", nargs="?", default="all",
                          choices=("all", "gates", "protocols", "oracle", "tomo"))
    p_verify.add_argument("--seed", type=int)
    p_verify.add_argument("--trials", type=int, help="Monte Carlo trials for the oracle gate")
    p_verify.add_argument("--config")
    add_common(sub.add_parser("tomo", help="tomograph the receiver state of one run"))
    return parser


def _read_config_file(path: str) -> dict[str, str]:
    keymap = {
        "protocol": "protocol", "mode": "mode", "d": "d", "lambda": "lambdas",
        "target": "target", "trials": "trials", "shots": "shots", "seed": "seed",
        "theta-min": "theta_min", "theta-max": "theta_max", "points": "points",
        "out": "out", "tolerance": "tolerance", "suite": "suite",
    }
    values: dict[str, str] = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for ln, raw in enumerate(fh, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{ln}: expected 'key = value', got {raw.strip()!r}")
                key, value = (part.strip() for part in line.split("=", 1))
                if key not in keymap:
                    raise ConfigError(f"{path}:{ln}: unknown key {key!r}")
                values[keymap[key]] = value
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    return values


_CASTS = {
    "d": int, "trials": int, "shots": int, "seed": int, "points": int,
    "theta_min": float, "theta_max": float, "tolerance": float,
}


def parse_config(argv: list[str]) -> RunConfig:
    """Merge flags over config-file values over defaults; validate."""
    parser = build_parser()
    ns = parser.parse_args(argv)
    if ns.command is None:
        raise ConfigError("missing subcommand; expected run, sweep, verify or tomo")
    cfg = RunConfig(command=ns.command)
    file_values = _read_config_file(ns.config) if getattr(ns, "config", None) else {}
    for name, raw in file_values.items():
        setattr(cfg, name, _CASTS[name](raw) if name in _CASTS else raw)
    for name in vars(ns):
        if name in ("command", "config"):
            continue
        value = getattr(ns, name)
        if value is not None:
            setattr(cfg, name, value)
    if isinstance(cfg.lambdas, str):
        cfg.lambdas = parse_complex_list(cfg.lambdas, "lambda")
    if isinstance(cfg.target, str):
        cfg.target = parse_complex_list(cfg.target, "target")
    return _validated(cfg)


def _validated(cfg: RunConfig) -> RunConfig:
    if cfg.command == "verify":
        if cfg.trials < 100:
            raise ConfigError("verify needs trials >= 100 for the sampled oracle gate")
        return cfg
    if cfg.protocol is None and cfg.command in ("run", "sweep"):
        raise ConfigError("missing required field: protocol")
    if cfg.command == "tomo" and cfg.protocol is None:
        cfg.protocol = "deterministic"
    if cfg.target is None:
        raise ConfigError("missing required field: target")
    cfg.target = _renormalized(cfg.target, "target")
    if cfg.lambdas is not None:
        cfg.lambdas = _renormalized(cfg.lambdas, "lambda")
    if cfg.d is None:
        cfg.d = len(cfg.lambdas) if cfg.lambdas is not None else len(cfg.target)
    if len(cfg.target) != cfg.d:
        raise ConfigError(f"target has {len(cfg.target)} entries but d = {cfg.d}")
    if cfg.lambdas is not None and len(cfg.lambdas) != cfg.d:
        raise ConfigError(f"lambda has {len(cfg.lambdas)} entries but d = {cfg.d}")
    if cfg.protocol == "probabilistic" and cfg.d != 2:
        raise ConfigError("the probabilistic baseline needs d = 2")
    if cfg.protocol == "nguyen" and cfg.d != 2:
        raise ConfigError("the nguyen baseline needs d = 2")
    if cfg.mode == "literal" and cfg.d != 2:
        raise ConfigError("literal mode is defined only for d = 2")
    if cfg.command == "run" and cfg.protocol in ("deterministic", "probabilistic") \
            and cfg.lambdas is None:
        raise ConfigError("missing required field: lambda")
    if cfg.command in ("sweep", "tomo") and cfg.d != 2:
        raise ConfigError(f"{cfg.command} parametrizes qubit channels; needs d = 2")
    if cfg.command == "sweep" and cfg.trials < 1:
        raise ConfigError("sweep needs trials >= 1")
    if cfg.command == "tomo" and cfg.shots < 3:
        raise ConfigError("tomo needs shots >= 3")
    return cfg


def _fmt_complex(z: complex) -> str:
    if z.imag == 0.0:
        return f"{z.real:.10g}"
    return f"{z.real:.10g}{z.imag:+.10g}j"


def render_transcript(tr: Transcript) -> str:
    lines = [
        f"protocol: {tr.protocol}" + (f" (mode={tr.mode})" if tr.mode else ""),
        "channel lambdas: " + ", ".join(_fmt_complex(z) for z in tr.channel.lambdas),
        "target amplitudes: " + ", ".join(_fmt_complex(z) for z in tr.target.amplitudes),
        "steps:",
    ]
    for i, s in enumerate(tr.steps, start=1):
        flag = "  [NON-UNITARY STEP]" if s.non_unitary else ""
        lines.append(f"  {i}. {s.name} on {s.targets}  defect={s.defect:.3e}{flag}")
    if tr.raw_norm is not None:
        lines.append(f"raw pre-measurement norm: {tr.raw_norm:.15g}")
    for rec in tr.measurements:
        lines.append(
            f"measurement {rec.subsystems} -> {rec.outcome}  (p={rec.probability:.12g})"
        )
    for msg in tr.messages:
        lines.append(f"classical message {msg.subsystems}: {msg.outcome}")
    lines.append(f"correction: {tr.correction}")
    lines.append("receiver state: " + ", ".join(_fmt_complex(z) for z in tr.bob_state))
    lines.append(f"fidelity: {tr.fidelity:.15g}")
    lines.append(f"success: {str(tr.success).lower()}")
    return "\n".join(lines)


def _summary_line(tr: Transcript, seed: int) -> str:
    outcome = ",".join(str(i) for m in tr.messages for i in m.outcome)
    return (
        f"RESULT protocol={tr.protocol} mode={tr.mode or '-'} d={tr.target.d} "
        f"outcome=({outcome}) fidelity={tr.fidelity:.12g} "
        f"success={str(tr.success).lower()} seed={seed}"
    )


def cmd_run(cfg: RunConfig) -> int:
    channel = ChannelSpec.of(cfg.lambdas) if cfg.lambdas is not None else None
    target = TargetState.of(cfg.target)
    tr = run_protocol(
        cfg.protocol, channel, target, cfg.mode, derive_rng(cfg.seed), cfg.tolerance
    )
    print(render_transcript(tr))
    print(_summary_line(tr, cfg.seed))
    return 0


def cmd_sweep(cfg: RunConfig) -> int:
    grid = theta_grid(cfg.theta_min, cfg.theta_max, cfg.points)
    rows = sweep_rows(
        [cfg.protocol], TargetState.of(cfg.target), grid,
        cfg.trials, cfg.seed, cfg.mode, cfg.tolerance,
    )
    if cfg.out:
        try:
            write_csv(rows, cfg.out)
        except OSError as exc:
            raise ConfigError(f"cannot write {cfg.out}: {exc}") from None
        print(f"wrote {len(rows)} rows to {cfg.out}")
    else:
        sys.stdout.write(rows_to_csv(rows))
    return 0


def cmd_verify(cfg: RunConfig) -> int:
    results = run_suite(cfg.suite, seed=cfg.seed, oracle_trials=cfg.trials)
    sys.stdout.write(format_report(results))
    return 0 if all(r.passed for r in results) else 2


def cmd_tomo(cfg: RunConfig) -> int:
    channel = ChannelSpec.of(cfg.lambdas) if cfg.lambdas is not None else ChannelSpec.maximal(2)
    target = TargetState.of(cfg.target)
    tr = run_protocol("deterministic", channel, target, cfg.mode, derive_rng(cfg.seed),
                      cfg.tolerance)
    bob = StateRegister((2,), tr.bob_state)
    est = sample_pauli_expectations(bob, cfg.shots, derive_rng(cfg.seed, 1))
    rho = reconstruct_qubit(est)
    exact_rho = DensityMatrix.build(np.outer(bob.amplitudes, bob.amplitudes.conj()))
    fid = fidelity_mixed(rho, target.vector())
    dist = trace_distance(rho, exact_rho)
    rx, ry, rz = exact_bloch(bob)
    print(f"deterministic run outcome: {tuple(i for m in tr.messages for i in m.outcome)}")
    print(f"exact bloch vector:     ({rx:+.6f}, {ry:+.6f}, {rz:+.6f})")
    print(f"estimated bloch vector: ({est.rx:+.6f}, {est.ry:+.6f}, {est.rz:+.6f})")
    print(f"shots: {cfg.shots} (per axis {est.shots_per_axis})")
    print(f"fidelity_mixed to target: {fid:.6f}")
    print(f"trace distance to exact receiver state: {dist:.6f}")
    return 0


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    try:
        cfg = parse_config(argv)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        if cfg.command == "run":
            return cmd_run(cfg)
        if cfg.command == "sweep":
            return cmd_sweep(cfg)
        if cfg.command == "verify":
            return cmd_verify(cfg)
        if cfg.command == "tomo":
            return cmd_tomo(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SimulationError as exc:
        print(f"invariant failure: {exc}", file=sys.stderr)
        return 2
    raise AssertionError("unreachable")


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()

"""Command-line entry point.

Subcommands: synth-send, synth-receive, simulate, transfer, entangle, swap,
sensitivity.  All physical defaults reproduce the reference configuration
(g = 1.6e10 m^(1/2)/s, c = 1.5e8 m/s, Gaussian width a = 0.3 m, P = 100,
tau = 0), so a bare `plasmon-interface transfer` regenerates the headline
transfer numbers.

Configuration may come from a JSON file (--config); explicit flags win over
config values, which win over the built-in defaults.  Exit codes: 0 success,
1 configuration error, 2 physically unrealizable request, 3 numerical
failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .core import (
    ComplexSignal,
    FIELD,
    PhysicalParams,
    QubitAmplitudes,
)
from .dynamics import InitialState, simulate
from .errors import ConfigurationError, NumericsError, PhysicsError
from .network import TransferSpec, run_entangle, run_transfer, transfer
from .sensitivity import ErrorSpec, build_table, default_error_specs
from .synthesis import synth_receive, synth_send
from .wavepacket import GaussianSpec, gaussian_packet, load_packet, standard_grid

DEFAULTS = {
    "g": 1.6e10,
    "c": 1.5e8,
    "P": 100.0,
    "gamma_prime": None,
    "a": 0.3,
    "center": 0.0,
    "packet_file": None,
    "s": None,
    "tau": 0.0,
    "alpha_g": "0.7071067811865476",
    "alpha_s": "0.7071067811865476",
    "alpha_g2": "0.7071067811865476",
    "alpha_s2": "0.7071067811865476",
    "grid_span": 6.0,
    "grid_n": 8192,
    "out": ".",
    "format": "both",
    "errors": None,
    "error_size": 0.10,
    "omega_file": None,
    "e_in_file": None,
    "init_beta_e": "0",
    "init_beta_s": "1",
}

CSV_COLUMNS_HELP = """\
CSV columns:
  synth-send / synth-receive / per-node transfer & entangle CSVs:
    t            sample time (s)
    re_omega     Re Omega(t), control pulse (1/s)
    im_omega     Im Omega(t) (1/s)
    abs_beta_e   |beta_e(t)|, excited-state amplitude
    abs_beta_s   |beta_s(t)|, storage-state amplitude
  simulate CSV:
    t, re_beta_e, im_beta_e, re_beta_s, im_beta_s, re_e_out, im_e_out
    (amplitudes dimensionless, e_out in m^(-1/2))
  sensitivity CSV:
    node         0 for the baseline row, else 1 or 2
    parameter    baseline | g | gamma_p | gamma_prime | omega
    relative_error
    fidelity     overlap fidelity, or NA if the row failed
All JSON files follow the signal/result schemas of the library types.
"""


class _Parser(argparse.ArgumentParser):
    """argparse that exits 1 (configuration error) instead of 2 on bad usage."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(1)


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        cfg = _merge_config(ns)
        return ns.handler(cfg)
    except (ConfigurationError, ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except PhysicsError as exc:
        print(f"unrealizable: {exc}", file=sys.stderr)
        return 2
    except NumericsError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="plasmon-interface",
        description="Synthesize and verify emitter-plasmon photon interface pulses.",
        epilog=CSV_COLUMNS_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, handler, help_text, packet=True, qubit=False, extra=None):
        p = sub.add_parser(
            name,
            help=help_text,
            epilog=CSV_COLUMNS_HELP,
            formatter_class=argparse.RawDescriptionHelpFormatter,
        )
        p.add_argument("--g", type=float, help="coupling strength, m^(1/2)/s")
        p.add_argument("--c", type=float, help="plasmon group velocity, m/s")
        p.add_argument("--P", type=float, dest="P", help="Purcell factor (exclusive with --gamma-prime)")
        p.add_argument("--gamma-prime", type=float, help="loss rate into other channels, 1/s")
        if packet:
            p.add_argument("--a", type=float, help="Gaussian packet width, m")
            p.add_argument("--center", type=float, help="packet center time, s")
            p.add_argument("--packet-file", help="custom packet (ComplexSignal JSON) instead of a Gaussian")
            p.add_argument("--grid-span", type=float, help="grid half-span in units of a/c")
            p.add_argument("--grid-n", type=int, help="number of grid samples")
        p.add_argument("--s", type=float, help="emitted photon number (default: full transfer)")
        p.add_argument("--tau", type=float, help="channel propagation delay, s (rounded to grid steps)")
        if qubit:
            p.add_argument("--alpha-g", help="qubit amplitude on |g> (complex; pair is normalized)")
            p.add_argument("--alpha-s", help="qubit amplitude on |s>")
        for args, kwargs in extra or []:
            p.add_argument(*args, **kwargs)
        p.add_argument("--config", help="JSON config file; flags override its values")
        p.add_argument("--out", help="output directory (default: current)")
        p.add_argument("--format", choices=("json", "csv", "both"), help="which files to write")
        p.set_defaults(handler=handler)
        return p

    add("synth-send", cmd_synth_send, "design the emitting control pulse")
    add("synth-receive", cmd_synth_receive, "design the absorbing control pulse")
    add(
        "simulate",
        cmd_simulate,
        "forward-integrate given control/input files",
        packet=False,
        extra=[
            (("--omega-file",), {"help": "control pulse, ComplexSignal JSON (unit rate)"}),
            (("--e-in-file",), {"help": "input field, ComplexSignal JSON (unit field)"}),
            (("--init-beta-e",), {"help": "initial beta_e (complex, default 0)"}),
            (("--init-beta-s",), {"help": "initial beta_s (complex, default 1)"}),
        ],
    )
    add("transfer", cmd_transfer, "transfer a qubit from node 1 to node 2", qubit=True)
    add("entangle", cmd_entangle, "entangle the two nodes via a partial send (s defaults to 0.5)")
    add(
        "swap",
        cmd_swap,
        "two opposite-direction transfers",
        qubit=True,
        extra=[
            (("--alpha-g2",), {"help": "reverse-direction qubit amplitude on |g>"}),
            (("--alpha-s2",), {"help": "reverse-direction qubit amplitude on |s>"}),
        ],
    )
    add(
        "sensitivity",
        cmd_sensitivity,
        "fidelity under parameter errors (defaults to the eight standard cells)",
        extra=[
            (
                ("--errors",),
                {"help": "comma list of parameter:node cells, e.g. 'g:1,omega:2'; '' = baseline only"},
            ),
            (("--error-size",), {"type": float, "help": "relative error for every cell (default 0.10)"}),
        ],
    )
    return parser


# --------------------------------------------------------------------------
# configuration plumbing


def _merge_config(ns: argparse.Namespace) -> dict:
    """Defaults < config file < explicit flags, with unknown keys rejected."""
    cfg = dict(DEFAULTS)
    file_cfg = {}
    if getattr(ns, "config", None):
        with open(ns.config, encoding="utf-8") as fh:
            file_cfg = json.load(fh)
        if not isinstance(file_cfg, dict):
            raise ConfigurationError("config file must hold a JSON object")
        unknown = set(file_cfg) - set(DEFAULTS)
        if unknown:
            raise ConfigurationError(f"unknown config keys: {sorted(unknown)}")
        if "P" in file_cfg and "gamma_prime" in file_cfg:
            raise ConfigurationError("config must set exactly one of P / gamma_prime")
        cfg.update(file_cfg)
        if "gamma_prime" in file_cfg:
            cfg["P"] = None

    flags = {
        key: value
        for key, value in vars(ns).items()
        if key in DEFAULTS and value is not None
    }
    if "P" in flags and "gamma_prime" in flags:
        raise ConfigurationError("pass exactly one of --P / --gamma-prime")
    if "gamma_prime" in flags:
        cfg["P"] = None
    elif "P" in flags:
        cfg["gamma_prime"] = None
    cfg.update(flags)

    for key in ("packet_file", "omega_file", "e_in_file"):
        if cfg.get(key) and not Path(cfg[key]).is_file():
            raise ConfigurationError(f"{key.replace('_', '-')} does not exist: {cfg[key]}")
    return cfg


def _params(cfg: dict) -> PhysicalParams:
    if cfg["gamma_prime"] is not None:
        return PhysicalParams(g=cfg["g"], c=cfg["c"], gamma_prime=float(cfg["gamma_prime"]))
    return PhysicalParams.from_purcell(g=cfg["g"], c=cfg["c"], purcell=float(cfg["P"]))


def _packet(cfg: dict, params: PhysicalParams) -> ComplexSignal:
    """Unit-photon-number envelope from the config (Gaussian or file)."""
    if cfg["packet_file"]:
        return load_packet(cfg["packet_file"])
    grid = standard_grid(
        cfg["a"], params.c, span_widths=cfg["grid_span"], n=int(cfg["grid_n"]),
        center=cfg["center"],
    )
    return gaussian_packet(GaussianSpec(a=cfg["a"]), params, grid, center=cfg["center"])


def _qubit(cfg: dict, g_key="alpha_g", s_key="alpha_s") -> QubitAmplitudes:
    return QubitAmplitudes.normalized(
        complex(str(cfg[g_key])), complex(str(cfg[s_key]))
    )


def _round_tau(tau: float, dt: float) -> float:
    return round(tau / dt) * dt


def _out_dir(cfg: dict) -> Path:
    out = Path(cfg["out"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(cfg: dict, name: str, payload: dict) -> None:
    if cfg["format"] in ("json", "both"):
        path = _out_dir(cfg) / name
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, sort_keys=True)
            fh.write("\n")


def _write_csv(cfg: dict, name: str, header: list[str], columns: list[np.ndarray]) -> None:
    if cfg["format"] in ("csv", "both"):
        path = _out_dir(cfg) / name
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(",".join(header) + "\n")
            for row in zip(*columns):
                fh.write(",".join(repr(float(value)) for value in row) + "\n")


def _write_pulse_csv(cfg: dict, name: str, omega, beta_e, beta_s) -> None:
    t = omega.grid.times()
    _write_csv(
        cfg,
        name,
        ["t", "re_omega", "im_omega", "abs_beta_e", "abs_beta_s"],
        [
            t,
            omega.samples.real,
            omega.samples.imag,
            np.abs(beta_e.samples),
            np.abs(beta_s.samples),
        ],
    )


# --------------------------------------------------------------------------
# subcommands


def cmd_synth_send(cfg: dict) -> int:
    params = _params(cfg)
    target = _packet(cfg, params)
    result = synth_send(params, target, cfg["s"])
    _write_json(cfg, "synth_send.json", result.to_dict())
    _write_pulse_csv(cfg, "synth_send.csv", result.omega, result.beta_e, result.beta_s)
    print(f"final_abs_beta_s={abs(result.beta_s.samples[-1]):.6f}")
    return 0


def cmd_synth_receive(cfg: dict) -> int:
    params = _params(cfg)
    incoming = _packet(cfg, params)
    result = synth_receive(params, incoming)
    _write_json(cfg, "synth_receive.json", result.to_dict())
    _write_pulse_csv(cfg, "synth_receive.csv", result.omega, result.beta_e, result.beta_s)
    print(f"final_abs_beta_s={abs(result.beta_s.samples[-1]):.6f}")
    return 0


def cmd_simulate(cfg: dict) -> int:
    params = _params(cfg)
    if not cfg["omega_file"] and not cfg["e_in_file"]:
        raise ConfigurationError("simulate needs --omega-file and/or --e-in-file")
    omega = e_in = None
    if cfg["omega_file"]:
        with open(cfg["omega_file"], encoding="utf-8") as fh:
            omega = ComplexSignal.from_dict(json.load(fh))
    if cfg["e_in_file"]:
        with open(cfg["e_in_file"], encoding="utf-8") as fh:
            e_in = ComplexSignal.from_dict(json.load(fh))
    if omega is None:
        omega = ComplexSignal.zeros(e_in.grid, "rate")
    if e_in is None:
        e_in = ComplexSignal.zeros(omega.grid, FIELD)
    init = InitialState(
        beta_e0=complex(str(cfg["init_beta_e"])),
        beta_s0=complex(str(cfg["init_beta_s"])),
    )
    traj = simulate(params, omega, e_in, init)
    _write_json(cfg, "trajectory.json", traj.to_dict())
    t = traj.beta_e.grid.times()
    _write_csv(
        cfg,
        "trajectory.csv",
        ["t", "re_beta_e", "im_beta_e", "re_beta_s", "im_beta_s", "re_e_out", "im_e_out"],
        [
            t,
            traj.beta_e.samples.real,
            traj.beta_e.samples.imag,
            traj.beta_s.samples.real,
            traj.beta_s.samples.imag,
            traj.e_out.samples.real,
            traj.e_out.samples.imag,
        ],
    )
    print(f"conservation_residual={traj.conservation_residual:.3e}")
    return 0


def _transfer_spec(cfg: dict, qubit: QubitAmplitudes) -> TransferSpec:
    params = _params(cfg)
    target = _packet(cfg, params)
    tau = _round_tau(cfg["tau"], target.grid.dt)
    return TransferSpec(
        qubit=qubit,
        packet=target,
        node1=params,
        node2=params,
        tau=tau,
        s=cfg["s"],
    )


def cmd_transfer(cfg: dict) -> int:
    run = run_transfer(_transfer_spec(cfg, _qubit(cfg)))
    result = run.result
    _write_json(cfg, "transfer.json", result.to_dict())
    _write_pulse_csv(cfg, "transfer_node1.csv", run.synth1.omega, run.traj1.beta_e, run.traj1.beta_s)
    _write_pulse_csv(cfg, "transfer_node2.csv", run.synth2.omega, run.traj2.beta_e, run.traj2.beta_s)
    print(f"F_overlap={result.fidelity_overlap:.6f}")
    print(f"F_renormalized={result.fidelity_renormalized:.6f}")
    return 0


def cmd_entangle(cfg: dict) -> int:
    params = _params(cfg)
    target = _packet(cfg, params)
    s = 0.5 if cfg["s"] is None else cfg["s"]
    tau = _round_tau(cfg["tau"], target.grid.dt)
    run = run_entangle(params, params, target, tau=tau, s=s)
    result = run.result
    _write_json(cfg, "entangle.json", result.to_dict())
    _write_pulse_csv(cfg, "entangle_node1.csv", run.synth1.omega, run.traj1.beta_e, run.traj1.beta_s)
    _write_pulse_csv(cfg, "entangle_node2.csv", run.synth2.omega, run.traj2.beta_e, run.traj2.beta_s)
    print(f"a_sg={abs(result.a_sg):.6f}")
    print(f"a_gs={abs(result.a_gs):.6f}")
    print(f"F_overlap={result.fidelity_overlap:.6f}")
    return 0


def cmd_swap(cfg: dict) -> int:
    spec1 = _transfer_spec(cfg, _qubit(cfg))
    spec2 = _transfer_spec(cfg, _qubit(cfg, "alpha_g2", "alpha_s2"))
    result1 = transfer(spec1)
    result2 = transfer(spec2)
    _write_json(cfg, "swap_12.json", result1.to_dict())
    _write_json(cfg, "swap_21.json", result2.to_dict())
    print(f"F_overlap_12={result1.fidelity_overlap:.6f}")
    print(f"F_overlap_21={result2.fidelity_overlap:.6f}")
    return 0


def cmd_sensitivity(cfg: dict) -> int:
    spec = _transfer_spec(cfg, _qubit(cfg))
    errors = _parse_errors(cfg)
    table = build_table(spec, errors)
    out = _out_dir(cfg)
    if cfg["format"] in ("csv", "both"):
        (out / "sensitivity.csv").write_text(table.to_csv_text(), encoding="utf-8")
    _write_json(cfg, "sensitivity.json", table.to_dict())
    failed = [err for err, fidelity in table.rows if fidelity is None]
    for err in failed:
        print(f"row failed: node {err.node} {err.parameter}", file=sys.stderr)
    print(f"baseline={table.baseline:.6f}")
    if errors and len(failed) == len(errors):
        print("numerical failure: every sensitivity row failed", file=sys.stderr)
        return 3
    return 0


def _parse_errors(cfg: dict) -> list[ErrorSpec]:
    size = float(cfg["error_size"])
    if cfg["errors"] is None:
        return default_error_specs(size)
    text = str(cfg["errors"]).strip()
    if not text:
        return []
    specs = []
    for cell in text.split(","):
        try:
            parameter, node = cell.strip().split(":")
            specs.append(ErrorSpec(parameter.strip(), size, int(node)))
        except ValueError as exc:
            raise ConfigurationError(
                f"bad --errors cell {cell!r}; expected parameter:node"
            ) from exc
    return specs


if __name__ == "__main__":
    sys.exit(main())

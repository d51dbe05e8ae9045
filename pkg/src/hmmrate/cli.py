"""Command-line front end.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .analyticity import (
    check_analytic_ball,
    check_comparability,
    check_dominance,
    check_equicontinuity,
    check_integrability,
    check_positivity,
    check_real_domination,
    derivative_scan,
    nonanalyticity_scan,
    parameter_vector,
    winding_probe,
)
from .entropy import convergence_scan
from .filtering import fit_log_gap, forgetting_bound, forgetting_curve, run_filter
from .hilbert import (
    adversarial_ratio_search,
    birkhoff_coefficient,
    complex_perturbed_pairs,
    contraction_ratio_sample,
    random_pairs,
)
from .io import (
    ConfigError,
    config_hash,
    header_line,
    load_model,
    render_csv,
    trajectory_rows,
    write_text,
)
from .model import ChannelKind, ModelError, sample_trajectory, perturb_transition
from .quadrature import QuadratureError

log = logging.getLogger("hmmrate")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


@dataclass
class RunConfig:
    command: str
    model_path: str | None
    params: dict
    out: str | None
    seed: int | None = None
    model_doc: dict | None = field(default=None, repr=False)

    @property
    def hash(self) -> str:
        return config_hash({"command": self.command, "model": self.model_doc, "params": self.params})

    def header(self) -> str:
        return header_line(self.command, self.hash, self.seed)


def _config(args, command: str, keys: list[str]) -> tuple[RunConfig, object, object]:
    model = channel = None
    doc = None
    if getattr(args, "model", None):
        model, channel, doc = load_model(args.model)
    params = {k: getattr(args, k) for k in keys}
    cfg = RunConfig(command, getattr(args, "model", None), params, args.out, getattr(args, "seed", None), doc)
    return cfg, model, channel


def _require_model(model, command):
    if model is None:
        raise ConfigError(f"{command} needs --model")


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------


def cmd_entropy(args) -> int:
    cfg, model, channel = _config(args, "entropy", ["n", "samples", "seed"])
    _require_model(model, "entropy")
    rec = convergence_scan(model, channel, args.n, args.samples, args.seed)
    text = render_csv(cfg.header(), ["n", "H_n", "std_error", "delta", "rho_hat"], rec.rows())
    write_text(cfg.out, text)
    print(
        f"H_{args.n} = {rec.estimates[-1].value:.6f} +- {rec.estimates[-1].std_error:.1e} nats; "
        f"L_hat = {rec.L_hat:.6g}, rho_hat = {rec.rho_hat:.6g} "
        f"(R^2 = {rec.r_squared:.3f}, {rec.fit_points} points); verdict: {rec.verdict}",
        file=sys.stderr,
    )
    return EXIT_OK


def cmd_contraction(args) -> int:
    cfg, model, channel = _config(args, "contraction", ["pairs", "seed", "perturbation", "n"])
    _require_model(model, "contraction")
    rng = np.random.default_rng(args.seed)
    P = model.transition
    l = model.size
    tau = birkhoff_coefficient(P)
    real = contraction_ratio_sample(P, random_pairs(rng, l, args.pairs))
    rows = [("birkhoff_tau", tau), ("real_max_ratio", real.max_ratio), ("real_pairs", real.pairs_used)]
    if l == 2:
        rows.append(("adversarial_max_ratio", adversarial_ratio_search(P)))
    Pc = perturb_transition(P, args.perturbation, args.seed)
    cpx = contraction_ratio_sample(Pc, complex_perturbed_pairs(rng, l, args.pairs, 0.05), metric="complex")
    rows += [("complex_perturbation", args.perturbation), ("complex_max_ratio", cpx.max_ratio)]
    z = sample_trajectory(model, channel, args.n, args.seed).outputs
    a = np.zeros(l)
    a[0] = 1.0
    b = np.zeros(l)
    b[-1] = 1.0
    fit = fit_log_gap(forgetting_curve(model, channel, z, a, b))
    rows += [("forgetting_slope", fit.slope), ("log_tau_bound", forgetting_bound(model))]
    write_text(cfg.out, render_csv(cfg.header(), ["quantity", "value"], rows))
    return EXIT_OK


def cmd_forgetting(args) -> int:
    cfg, model, channel = _config(args, "forgetting", ["n", "seed"])
    _require_model(model, "forgetting")
    l = model.size
    z = sample_trajectory(model, channel, args.n, args.seed).outputs
    a = np.zeros(l)
    a[0] = 1.0
    b = np.zeros(l)
    b[-1] = 1.0
    curve = forgetting_curve(model, channel, z, a, b)
    write_text(cfg.out, render_csv(cfg.header(), ["step", "gap"], curve))
    if args.states_out:
        states = run_filter(model, channel, z).states
        cols = ["step"] + [f"state_{k + 1}" for k in range(l)]
        write_text(args.states_out, render_csv(cfg.header(), cols, trajectory_rows(states)))
    fit = fit_log_gap(curve)
    print(f"log-gap slope {fit.slope:.6g} (bound log tau = {forgetting_bound(model):.6g})", file=sys.stderr)
    return EXIT_OK


def cmd_conditions(args) -> int:
    cfg, model, channel = _config(args, "conditions", ["r2", "delta", "epsilon", "dominant"])
    _require_model(model, "conditions")
    I = args.dominant or int(np.argmax(channel.scale)) + 1
    reports = list(check_positivity(model, channel))
    reports += check_analytic_ball(channel, args.r2)
    if channel.kind is not ChannelKind.SLOW_TAIL:
        reports.append(check_comparability(channel))
        reports.append(check_dominance(channel, I, args.epsilon))
        reports.append(check_real_domination(channel, args.r2, args.delta))
        reports.append(check_equicontinuity(channel, I, args.r2))
    reports.append(check_integrability(channel, args.r2, I))
    rows = [(r.condition, r.verdict, r.margins, r.witness) for r in reports]
    write_text(cfg.out, render_csv(cfg.header(), ["condition", "verdict", "margin", "witness"], rows))
    return EXIT_OK


def _parameter_directions(model, channel):
    """Unit directions: each free transition entry pi_ij (j < l, balanced by pi_il),
    then every mu_k and scale_k."""
    l = model.size
    dim = parameter_vector(model, channel).size
    out = []
    for i in range(l):
        for j in range(l - 1):
            d = np.zeros(dim)
            d[i * l + j] = 1.0
            d[i * l + l - 1] = -1.0
            out.append((f"pi_{i + 1}_{j + 1}", d))
    for k in range(l):
        d = np.zeros(dim)
        d[l * l + k] = 1.0
        out.append((f"mu_{k + 1}", d))
    for k in range(l):
        d = np.zeros(dim)
        d[l * l + l + k] = 1.0
        out.append((f"scale_{k + 1}", d))
    return out


def cmd_scan(args) -> int:
    cfg, model, channel = _config(args, "scan", ["n", "samples", "seed", "h_cs", "h_fd"])
    _require_model(model, "scan")
    named = _parameter_directions(model, channel)
    est = derivative_scan(
        model, channel, [d for _, d in named], args.n, args.samples, args.h_cs, args.h_fd, args.seed
    )
    rows = [(name, e.complex_step, e.central_difference, e.gap) for (name, _), e in zip(named, est)]
    write_text(cfg.out, render_csv(cfg.header(), ["param", "cs_value", "fd_value", "gap"], rows))
    return EXIT_OK


def cmd_winding(args) -> int:
    cfg, _, _ = _config(args, "winding", ["sigma", "r", "z", "alpha_samples", "width", "points"])
    rows = []
    for z in args.z:
        rep = winding_probe(args.sigma, args.r, z, args.alpha_samples)
        rows.append((z, args.r, rep.winding if rep.winding is not None else "singular"))
    write_text(cfg.out, render_csv(cfg.header(), ["z", "r", "k"], rows))
    if args.table_out:
        tab = nonanalyticity_scan(args.sigma, args.width, args.points)
        cols = ["sigma2", "H"] + [f"dd{k + 1}" for k in range(len(tab.divided))]
        write_text(args.table_out, render_csv(cfg.header(), cols, tab.rows()))
    return EXIT_OK


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hmmrate", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seed=True):
        sp.add_argument("--model", help="model JSON file (see README for the schema)")
        sp.add_argument("--out", default="-", help="output CSV path ('-' for stdout, the default)")
        if seed:
            sp.add_argument("--seed", type=int, default=0, help="random seed (default 0)")

    s = sub.add_parser("entropy", help="H_n scan with geometric-rate fit")
    common(s)
    s.add_argument("--n", type=int, default=10, help="largest window n_max (default 10)")
    s.add_argument("--samples", type=int, default=20000, help="Monte Carlo paths (default 20000)")
    s.set_defaults(func=cmd_entropy)

    s = sub.add_parser("contraction", help="Birkhoff coefficient and sampled contraction ratios")
    common(s)
    s.add_argument("--pairs", type=int, default=1000, help="random pairs per metric (default 1000)")
    s.add_argument("--perturbation", type=float, default=0.01, help="complex perturbation size of Pi (default 0.01)")
    s.add_argument("--n", type=int, default=200, help="observations for the forgetting fit (default 200)")
    s.set_defaults(func=cmd_contraction)

    s = sub.add_parser("forgetting", help="gap between filters started at opposite vertices")
    common(s)
    s.add_argument("--n", type=int, default=200, help="number of observations (default 200)")
    s.add_argument("--states-out", help="also write the filter states from the stationary start")
    s.set_defaults(func=cmd_forgetting)

    s = sub.add_parser("conditions", help="regularity condition checks on the channel")
    common(s, seed=False)
    s.add_argument("--r2", type=float, default=0.01, help="complex parameter ball radius (default 0.01)")
    s.add_argument("--delta", type=float, default=0.05, help="real-domination tolerance (default 0.05)")
    s.add_argument("--epsilon", type=float, default=0.01, help="dominance ratio bound (default 0.01)")
    s.add_argument("--dominant", type=int, help="dominant symbol I, 1-based (default: largest scale)")
    s.set_defaults(func=cmd_conditions)

    s = sub.add_parser("scan", help="complex-step vs central-difference derivatives of H_n")
    common(s)
    s.add_argument("--n", type=int, default=3, help="window n (default 3)")
    s.add_argument("--samples", type=int, default=20000, help="Monte Carlo paths (default 20000)")
    s.add_argument("--h-cs", type=float, default=1e-20, help="complex step (default 1e-20)")
    s.add_argument("--h-fd", type=float, default=1e-5, help="finite-difference step (default 1e-5)")
    s.set_defaults(func=cmd_scan)

    s = sub.add_parser("winding", help="winding counts and the H(Z) table for equal Gaussian scales")
    common(s, seed=False)
    s.add_argument("--sigma", type=float, default=1.0, help="base scale sigma (default 1)")
    s.add_argument("--r", type=float, default=0.05, help="circle radius (default 0.05)")
    s.add_argument("--z", type=float, nargs="+", default=[0.0, 0.5, 1.0, 50.0], help="output values z")
    s.add_argument("--alpha-samples", type=int, default=512, help="initial samples on the circle (default 512)")
    s.add_argument("--table-out", help="also write the sigma2 / H / divided-difference table here")
    s.add_argument("--width", type=float, default=0.2, help="relative half-width of the sigma2 grid (default 0.2)")
    s.add_argument("--points", type=int, default=21, help="sigma2 grid points (default 21)")
    s.set_defaults(func=cmd_winding)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (ConfigError, ModelError, ValueError) as exc:
        print(f"hmmrate: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ArithmeticError, QuadratureError, np.linalg.LinAlgError) as exc:
        print(f"hmmrate: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Exit codes: 0 success (every checked bound holds), 1 a bound or experiment
check failed, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import sys

from . import bounds as bd
from . import complexity as cx
from . import divergences as dv
from . import experiments as ex
from . import formats
from .core import RngSpec
from .errors import ICMError
from .estimators import gibbs_posterior, mdl_objectives, mdl_select

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _seed(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return v


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="icmde", description="Information-complexity density estimation on finite sample spaces.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    s = sub.add_parser("divergence", help="divergence between two densities of a family")
    s.add_argument("--family", required=True)
    s.add_argument("--kind", required=True, choices=["kl", "rho", "renyi", "hellinger"])
    s.add_argument("--rho", type=float)
    s.add_argument("--from", dest="src", required=True, help="model id or 'truth'")
    s.add_argument("--to", dest="dst", required=True, help="model id or 'truth'")

    s = sub.add_parser("fit-mdl", help="two-part code MDL selection")
    s.add_argument("--family", required=True)
    s.add_argument("--data", required=True)
    s.add_argument("--lambda", dest="lam", type=float, default=1.0)

    s = sub.add_parser("fit-gibbs", help="tempered Bayesian posterior")
    s.add_argument("--family", required=True)
    s.add_argument("--data", required=True)
    s.add_argument("--gamma", type=float, default=1.0)

    s = sub.add_parser("resolvability", help="resolvability functionals against the family's truth")
    s.add_argument("--family", required=True)
    s.add_argument("--lambda", dest="lam", type=float, required=True)
    s.add_argument("--n", type=int, required=True)
    for flag in ("bayesian", "index", "prior-mass", "critical", "localized"):
        s.add_argument(f"--{flag}", action="store_true")
    s.add_argument("--rho", type=float)
    s.add_argument("--k", help="model id for the localized entropy term")
    s.add_argument("--shrink", type=float, default=0.5)

    s = sub.add_parser("verify", help="check one bound")
    s.add_argument("--family", required=True)
    s.add_argument("--bound", required=True, choices=bd.BOUND_IDS)
    s.add_argument("--lambda", dest="lam", type=float)
    s.add_argument("--lambda-prime", dest="lambda_prime", type=float)
    s.add_argument("--rho", type=float)
    s.add_argument("--gamma", type=float)
    s.add_argument("--alpha", type=float, default=1.0)
    s.add_argument("--beta", type=float, default=1.0)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--t", type=float, default=1.0)
    s.add_argument("--delta", type=float, default=0.2)
    s.add_argument("--shrink", type=float, default=0.5)
    s.add_argument("--estimator", choices=["mdl", "gibbs"])
    s.add_argument("--cover")
    s.add_argument("--reps", type=int, default=1000)
    s.add_argument("--seed", type=_seed, required=True)
    s.add_argument("--exact", action="store_true", help="force exact enumeration")
    s.add_argument("--out")

    s = sub.add_parser("counterexample", help="slow convergence of standard MDL")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--reps", type=int, required=True)
    s.add_argument("--seed", type=_seed, required=True)
    s.add_argument("--out")

    s = sub.add_parser("rate-demo", help="global vs localized entropy on a Bernoulli net")
    s.add_argument("--ns", type=_int_list, required=True)
    s.add_argument("--reps", type=int, default=200)
    s.add_argument("--seed", type=_seed, required=True)
    s.add_argument("--out")

    s = sub.add_parser("sweep", help="verify bounds over a parameter grid")
    s.add_argument("--family", required=True)
    s.add_argument("--bounds", required=True)
    s.add_argument("--grid", required=True)
    s.add_argument("--cover")
    s.add_argument("--reps", type=int, default=1000)
    s.add_argument("--seed", type=_seed, required=True)
    s.add_argument("--exact", action="store_true")
    s.add_argument("--out")
    return p


def _write(data: bytes, out: str | None):
    if out:
        with open(out, "wb") as fh:
            fh.write(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()


def _density(family, name: str):
    if name == "truth":
        if family.truth is None:
            raise ICMError("family file has no truth")
        return family.truth
    return family.probs[family.index(name)]


def _truth(family):
    if family.truth is None:
        raise ICMError("family file must contain a truth density for this command")
    return family.truth


def cmd_divergence(a) -> int:
    fam = formats.read_family(a.family)
    val = dv.divergence(_density(fam, a.src), _density(fam, a.dst), a.kind, a.rho)
    _write((formats.format_value(val) + "\n").encode(), None)
    return EXIT_OK


def cmd_fit_mdl(a) -> int:
    fam = formats.read_family(a.family)
    data = formats.read_dataset(a.data, fam.space_size)
    k = mdl_select(fam, data, a.lam)
    obj = mdl_objectives(fam, data, a.lam)[k]
    _write(formats.emit_rows(("id", "objective"), [(fam.ids[k], float(obj))]), None)
    return EXIT_OK


def cmd_fit_gibbs(a) -> int:
    fam = formats.read_family(a.family)
    data = formats.read_dataset(a.data, fam.space_size)
    mu = gibbs_posterior(fam, data, a.gamma)
    _write(formats.emit_rows(("id", "mass"), zip(fam.ids, map(float, mu))), None)
    return EXIT_OK


def cmd_resolvability(a) -> int:
    fam = formats.read_family(a.family)
    q = _truth(fam)
    wanted = [f for f in ("bayesian", "index", "prior_mass", "critical") if getattr(a, f)]
    if not wanted and not a.localized:
        wanted = ["index", "bayesian", "prior_mass", "critical"]
    rows = []
    for w in wanted:
        if w == "index":
            rows.append(("index_of_resolvability", cx.index_of_resolvability(fam, q, a.lam, a.n)))
        elif w == "bayesian":
            rows.append(("bayesian_resolvability", cx.bayesian_resolvability(fam, q, a.lam, a.n)[0]))
        elif w == "prior_mass":
            rows.append(("prior_mass_bound", cx.prior_mass_resolvability_bound(fam, q, a.lam, a.n)))
        else:
            r = cx.critical_prior_mass_radius(fam, q, a.lam, a.n)
            rows.append(("critical_radius", r.value))
    if a.localized:
        if a.rho is None or a.k is None:
            raise ICMError("--localized needs --rho and --k")
        rows.append(("localized_entropy", cx.localized_entropy_term(fam, q, a.rho, a.n, fam.index(a.k), a.shrink)))
    _write(formats.emit_rows(("quantity", "value"), rows), None)
    return EXIT_OK


def cmd_verify(a) -> int:
    fam = formats.read_family(a.family)
    q = _truth(fam)
    cover = formats.read_cover(a.cover, fam) if a.cover else None
    spec = bd.BoundSpec(
        a.bound, a.n, lam=a.lam, rho=a.rho, gamma=a.gamma, alpha=a.alpha, beta=a.beta, t=a.t,
        delta=a.delta, lambda_prime=a.lambda_prime, shrink=a.shrink, feasible_set=a.estimator, cover=cover,
    )
    rep = bd.verify(spec, fam, q, a.reps, RngSpec(a.seed), bd.EXACT if a.exact else "auto")
    _write(formats.emit_report([rep]), a.out)
    return EXIT_OK if rep.ok else EXIT_VIOLATION


def cmd_counterexample(a) -> int:
    cfg = ex.CounterexampleConfig(a.n, a.m, a.reps, RngSpec(a.seed))
    r = ex.run_counterexample(cfg)
    header = ("n", "m", "replicates", "p_correct", "se", "bound", "resolvability", "exact_probability", "within_bound")
    row = (r.n, r.m, r.replicates, r.p_correct, r.se, r.bound, r.resolvability, r.exact_probability, r.within_bound)
    _write(formats.emit_rows(header, [row]), a.out)
    return EXIT_OK if r.within_bound and r.survivor_agreement else EXIT_VIOLATION


def cmd_rate_demo(a) -> int:
    if not a.ns:
        raise ICMError("--ns needs at least one sample size")
    rep = ex.run_parametric_rate_demo(a.ns, RngSpec(a.seed), replicates=a.reps)
    header = ("n", "N", "global_entropy", "localized_entropy", "mdl_risk", "mdl_risk_se", "c1", "c2")
    rows = [(r.n, r.N, r.global_entropy, r.localized_entropy, r.mdl_risk, r.mdl_risk_se, r.c1, r.c2) for r in rep.rows]
    _write(formats.emit_rows(header, rows), a.out)
    if len(rep.rows) > 1 and not (rep.localized_bounded and rep.global_grows):
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_sweep(a) -> int:
    fam = formats.read_family(a.family)
    q = _truth(fam)
    ids = [b.strip() for b in a.bounds.split(",") if b.strip()]
    unknown = [b for b in ids if b not in bd.BOUND_IDS]
    if unknown:
        raise ICMError(f"unknown bound ids {unknown}")
    grid = formats.read_grid(a.grid)
    cover = formats.read_cover(a.cover, fam) if a.cover else None
    reps = ex.run_sweep(fam, q, ids, grid, RngSpec(a.seed), a.reps, bd.EXACT if a.exact else "auto", cover)
    _write(formats.emit_report(reps), a.out)
    return EXIT_OK if all(r.ok for r in reps) else EXIT_VIOLATION


COMMANDS = {
    "divergence": cmd_divergence,
    "fit-mdl": cmd_fit_mdl,
    "fit-gibbs": cmd_fit_gibbs,
    "resolvability": cmd_resolvability,
    "verify": cmd_verify,
    "counterexample": cmd_counterexample,
    "rate-demo": cmd_rate_demo,
    "sweep": cmd_sweep,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except (ICMError, KeyError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"icmde {args.command}: error: {msg}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

"""Command-line entry point.

Exit codes: 0 success, 1 an ASSERTED check failed, 2 usage or input error.
All JSON is emitted with sorted keys and rationals as canonical strings.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction

from . import __version__
from .constructions import (
    CmsnParams,
    build_cmsn,
    build_h_approx,
    cmsn_table,
    optimal_params,
    solve_bound_constants,
)
from .core import (
    Configuration,
    ConfigurationError,
    as_rational,
    dumps_configuration,
    load_configuration,
)
from .oracles import NotACounterexample, lemma1_suite, proof_inspect
from .profile import (
    EndpointStats,
    all_endpoint_stats,
    density_profile,
    is_counterexample,
    quarter_point,
)


class UsageError(Exception):
    pass


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2)


def input_hash(C: Configuration) -> str:
    return hashlib.sha256(dumps_configuration(C).encode()).hexdigest()


@dataclass
class AnalysisReport:
    configuration: Configuration
    delta_star: Fraction
    endpoints: list[dict]
    delta: Fraction | None = None
    witnesses: dict | None = None
    version: str = __version__
    input_hash: str = ""
    is_counterexample: bool | None = None
    extra: dict = field(default_factory=dict)

    @classmethod
    def build(cls, C: Configuration, delta=None) -> "AnalysisReport":
        stats = all_endpoint_stats(C)
        ds = 1 - min(st.escape for st in stats)
        rep = cls(C, ds, [st.to_json_dict() for st in stats], input_hash=input_hash(C))
        if delta is not None:
            dec = is_counterexample(C, delta)
            rep.delta = dec.delta
            rep.is_counterexample = dec.is_counterexample
            rep.witnesses = {
                str(k): (None if v is None else str(v)) for k, v in dec.witnesses.items()
            }
        return rep

    def to_json_dict(self) -> dict:
        out = {
            "configuration": self.configuration.to_json_dict(),
            "delta_star": str(self.delta_star),
            "delta_star_dec": float(self.delta_star),
            "endpoints": self.endpoints,
            "version": self.version,
            "input_hash": self.input_hash,
        }
        if self.delta is not None:
            out["delta"] = str(self.delta)
            out["is_counterexample"] = self.is_counterexample
            out["witnesses"] = self.witnesses
        return out

    @classmethod
    def from_json_dict(cls, data: dict) -> "AnalysisReport":
        rep = cls(
            Configuration.from_json_dict(data["configuration"]),
            Fraction(data["delta_star"]),
            data["endpoints"],
            version=data["version"],
            input_hash=data["input_hash"],
        )
        if "delta" in data:
            rep.delta = Fraction(data["delta"])
            rep.is_counterexample = data["is_counterexample"]
            rep.witnesses = data["witnesses"]
        return rep


# ------------------------------------------------------------- commands


def cmd_analyze(args) -> int:
    C = load_configuration(args.file)
    rep = AnalysisReport.build(C, args.delta)
    if args.profiles:
        os.makedirs(args.profiles, exist_ok=True)
        for k, ep in enumerate(C.endpoints):
            prof = density_profile(C, ep)
            path = os.path.join(args.profiles, f"endpoint_{k:04d}.csv")
            with open(path, "w") as fh:
                fh.write(prof.to_csv(args.samples))
    print(_dump(rep.to_json_dict()))
    return 0


def cmd_construct(args) -> int:
    if args.what == "cmsn":
        if args.optimal:
            m, s = optimal_params(args.max_denominator)
        else:
            if args.m is None or args.s is None:
                raise UsageError("construct cmsn needs --m and --s, or --optimal")
            m, s = as_rational(args.m), as_rational(args.s)
        params = CmsnParams(m, s, args.N)
        if args.table:
            print(_dump({"m": str(m), "s": str(s), "N": args.N,
                         "rows": [r.to_json_dict() for r in cmsn_table(params)]}))
        else:
            print(dumps_configuration(build_cmsn(params)))
        return 0
    if args.base is None:
        raise UsageError("construct h-approx needs --base")
    h = build_h_approx(load_configuration(args.base), args.eps, args.depth)
    print(_dump({
        "epsilon": str(h.epsilon),
        "depth": h.depth,
        "base": h.base.to_json_dict(),
        "levels": [[[str(iv.lo), str(iv.hi)] for iv in lev] for lev in h.levels],
    }))
    return 0


_WHICH = {"upper": "delta_upper", "lower": "delta_lower", "kolyada": "kolyada_upper",
          "conjecture": "conjecture"}


def cmd_solve_cubic(args) -> int:
    root = getattr(solve_bound_constants(), _WHICH[args.which])
    if args.json:
        print(_dump({"which": args.which, "value": root.digits(15),
                     "residual": root.residual, "bracket": [str(root.lo), str(root.hi)]}))
    else:
        print(f"{root.digits(15)}  residual={root.residual:.3e}")
    return 0


def cmd_optimize(args) -> int:
    from .optimizer import search

    init = load_configuration(args.init) if args.init else None
    res = search(args.intervals, args.restarts, args.iters, args.seed, init=init,
                 workers=args.workers)
    out = res.to_json_dict()
    out["configuration"] = res.configuration.to_json_dict()
    if args.trace:
        res.write_trace(args.trace)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(dumps_configuration(res.configuration) + "\n")
    print(_dump(out))
    return 0


def cmd_inspect(args) -> int:
    from .oracles import final_inequality_chain

    C = load_configuration(args.file)
    ins = proof_inspect(C, args.delta)
    out = ins.to_json_dict()
    out["chain"] = final_inequality_chain(ins).to_json_dict()
    print(_dump(out))
    return 0 if ins.asserted_ok else 1


def cmd_check_lemma1(args) -> int:
    suite = lemma1_suite(args.trials, args.delta, args.seed, args.workers)
    print(_dump(suite.to_json_dict()))
    return 0 if suite.violations == 0 else 1


def cmd_quarter_point(args) -> int:
    from .profile import profile_extrema

    C = load_configuration(args.file)
    p = quarter_point(C)
    st: EndpointStats = profile_extrema(C, p)
    ok = st.inf_density >= Fraction(1, 4) and st.sup_density <= Fraction(3, 4)
    print(_dump({"endpoint": str(p.value), "stats": st.to_json_dict(), "bound_holds": ok}))
    return 0 if ok else 1


# --------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="force machine-readable output")

    ap = argparse.ArgumentParser(prog="densitylab", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common], help="delta_star and endpoint statistics")
    p.add_argument("file", help="configuration JSON, or - for stdin")
    p.add_argument("--delta", type=as_rational)
    p.add_argument("--profiles", help="directory for per-endpoint profile CSVs")
    p.add_argument("--samples", type=int, default=0, help="interior samples per profile piece")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("construct", parents=[common], help="build C(m,s,N) or H(eps) levels")
    p.add_argument("what", choices=["cmsn", "h-approx"])
    p.add_argument("--m")
    p.add_argument("--s")
    p.add_argument("--N", type=int, default=100)
    p.add_argument("--optimal", action="store_true", help="use the equalizing (m, s)")
    p.add_argument("--max-denominator", type=int, default=10**6)
    p.add_argument("--table", action="store_true", help="emit the endpoint/radius table instead")
    p.add_argument("--eps", type=as_rational, default=Fraction(1, 100))
    p.add_argument("--depth", type=int, default=3)
    p.add_argument("--base")
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("solve-cubic", parents=[common], help="bound constants")
    p.add_argument("which", choices=sorted(_WHICH))
    p.set_defaults(func=cmd_solve_cubic)

    p = sub.add_parser("optimize", parents=[common], help="simplex search for small delta_star")
    p.add_argument("--intervals", type=int, required=True)
    p.add_argument("--restarts", type=int, default=4)
    p.add_argument("--iters", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--init")
    p.add_argument("--trace")
    p.add_argument("--out", help="write the best configuration JSON here")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("inspect", parents=[common], help="proof machinery for a counterexample")
    p.add_argument("file")
    p.add_argument("--delta", type=as_rational, required=True)
    p.set_defaults(func=cmd_inspect)

    p = sub.add_parser("check-lemma1", parents=[common], help="randomized overlap-bound trials")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--delta", type=as_rational, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_check_lemma1)

    p = sub.add_parser("quarter-point", parents=[common], help="minimizer of d(x) + x/2")
    p.add_argument("file")
    p.set_defaults(func=cmd_quarter_point)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        code = args.func(args)
        sys.stdout.flush()
        return code
    except BrokenPipeError:
        # reader went away (e.g. piped into head); silence the flush at exit
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return 1
    except (ConfigurationError, NotACounterexample, UsageError, ValueError, OSError) as exc:
        print(f"densitylab: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

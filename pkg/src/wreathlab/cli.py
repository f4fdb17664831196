"""Command-line experiment runner.

Subcommands: fixtures, ball, agreement, schreier, search-markings, lift,
profile, compare, sequence.  Exit codes: 0 success, 1 fixture assertion
failure, 2 budget exhaustion, 3 invalid configuration.

Config may come from a flat "key: value" text file (--config) with flag
overrides; unknown keys are rejected.  All artifacts embed the resolved
config, package version, and seed, and rerunning with the same config and
seed reproduces them byte for byte.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

from . import __version__
from .errors import BudgetExceededError, InvalidConfigError, WreathlabError
from .marked import (
    DEFAULT_BALL_BUDGET,
    FGGroupMarked,
    FreeGroupMarked,
    GammaNMarked,
    MarkingSearchResult,
    _certify_generation,
    agreement_radius,
    ball,
    lift_marking,
    parse_group_spec,
    search_markings,
)
from .schreier import build_schreier, far_pair, schreier_distance
from .walkstats import (
    convolution_profile,
    entropy_profile,
    fundamental_inequality_report,
    growth_profile,
    kernel_conditional_measure,
    make_step_distribution,
    quotient_comparison_report,
    spectral_radius_profile,
)
from .words import fp_abelianize, fp_text
from .wreath import eval_word_in_gamma, gamma_generators


class FixtureFailure(WreathlabError):
    pass


def _emit(text: str, out_path):
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json_artifact(config: dict, results) -> str:
    doc = {"version": __version__, "config": config, "results": results}
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _config_dict(args, keys) -> dict:
    return {k: getattr(args, k) for k in keys if getattr(args, k, None) is not None}


def _load_config_file(path: str) -> dict:
    values = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if ":" not in line:
                raise InvalidConfigError(f"{path}:{lineno}: expected 'key: value'")
            key, _, val = line.partition(":")
            values[key.strip().replace("-", "_")] = val.strip()
    return values


# --- fixtures ---------------------------------------------------------------


def lemma_virtual_fixture() -> dict:
    """The level-1 commutator computation and both conjugation directions."""
    a1, b1 = gamma_generators(1)
    u = eval_word_in_gamma("bAba", 1)
    v = eval_word_in_gamma("abAb", 1)
    c = u.mul(v).mul(u.inv()).mul(v.inv())
    checks = {
        "c_nontrivial": not c.is_identity(),
        "c_quotient_trivial": c.portrait.is_identity(),
        "c_values_in_commutator_subgroup": all(
            fp_abelianize(x) == (0, 0) for x in c.config.values()
        ),
    }
    return {
        "suite": "lemma-virtual",
        "commutator_word": "[bAba, abAb]",
        "commutator": c.to_json(),
        "conjugate_a_b_ainv": a1.mul(b1).mul(a1.inv()).to_json(),
        "conjugate_ainv_b_a": a1.inv().mul(b1).mul(a1).to_json(),
        "checks": checks,
    }


def cmd_fixtures(args) -> str:
    suites = ["lemma-virtual"] if args.suite != "all" else ["lemma-virtual"]
    results = []
    for name in suites:
        if name == "lemma-virtual":
            report = lemma_virtual_fixture()
        else:
            raise InvalidConfigError(f"unknown fixture suite {name!r}")
        for check, ok in report["checks"].items():
            if not ok:
                raise FixtureFailure(f"fixture {name}: check {check} failed")
        results.append(report)
    return _json_artifact(_config_dict(args, ["suite"]), results)


# --- simple subcommands -----------------------------------------------------


def cmd_ball(args) -> str:
    _require(args, "group", "radius")
    G = parse_group_spec(args.group)
    b = ball(G, args.radius, args.budget)
    vols = b.volumes()
    results = {
        "group": G.spec(),
        "radius": args.radius,
        "size": b.size,
        "volumes": vols,
    }
    if args.format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["r", "V"])
        for r, v in enumerate(vols):
            writer.writerow([r, v])
        return buf.getvalue()
    return _json_artifact(_config_dict(args, ["group", "radius", "budget"]), results)


def cmd_agreement(args) -> str:
    _require(args, "left", "right", "cap")
    G1 = parse_group_spec(args.left)
    G2 = parse_group_spec(args.right)
    res = agreement_radius(G1, G2, args.cap, args.budget)
    results = {
        "left": G1.spec(),
        "right": G2.spec(),
        "cap": args.cap,
        "agreement": int(res),
        "exact": res.exact,
        "first_discrepancy": res.discrepancy,
    }
    if not args.out:
        return f"{int(res)}\n"
    return _json_artifact(
        _config_dict(args, ["left", "right", "cap", "budget"]), results
    )


def cmd_schreier(args) -> str:
    _require(args, "level")
    g = build_schreier(args.level)
    u = args.src or far_pair(args.level)[0]
    v = args.dst or far_pair(args.level)[1]
    d = schreier_distance(g, u, v)
    results = {
        "level": args.level,
        "from": u,
        "to": v,
        "distance": d,
        "vertices": g.size,
        "connected": g.is_connected(),
    }
    if args.edges:
        with open(args.edges, "w") as fh:
            writer = csv.writer(fh)
            writer.writerow(["from", "to"])
            for x, y in g.edges():
                writer.writerow([x, y])
    if not args.out:
        return f"{d}\n"
    return _json_artifact(_config_dict(args, ["level", "src", "dst"]), results)


def cmd_search_markings(args) -> str:
    _require(args, "lmax")
    group = parse_group_spec(args.group) if args.group else None
    results = search_markings(
        args.target_agreement,
        args.lmax,
        budget=args.budget,
        group=group,
        cert_radius=args.cert_radius,
        max_results=args.max_results,
    )
    return _json_artifact(
        _config_dict(
            args, ["target_agreement", "lmax", "group", "cert_radius", "max_results"]
        ),
        [r.to_json() for r in results],
    )


def _certified_marking(words, cert_radius: int, budget: int) -> MarkingSearchResult:
    base = FGGroupMarked(("a", "b"))
    marked = FGGroupMarked(words)
    cert = _certify_generation(base, marked, cert_radius, budget)
    if cert is None:
        raise WreathlabError(
            f"could not certify that {words} generates the group "
            f"(certificate radius {cert_radius})"
        )
    agreement = agreement_radius(marked, FreeGroupMarked(2), 8, budget)
    return MarkingSearchResult(marked.marking, agreement, cert[0], cert[1])


def cmd_lift(args) -> str:
    _require(args, "marking", "level")
    words = tuple(args.marking.split(","))
    T = _certified_marking(words, args.cert_radius, args.budget)
    lifted = lift_marking(T, args.level)
    results = {
        "marking": T.to_json(),
        "level": args.level,
        "lifted_spec": lifted.spec(),
        "generators": [g.to_json() for g in [lifted.generator(i) for i in (1, 2)]],
    }
    return _json_artifact(
        _config_dict(args, ["marking", "level", "cert_radius"]), results
    )


# --- profile ----------------------------------------------------------------


def walk_profile(G, mu, t_max, r_max, budget):
    tables = convolution_profile(G, mu, t_max, budget)
    ent = entropy_profile(G, mu, t_max, tables=tables)
    spec = spectral_radius_profile(G, mu, t_max, tables=tables)
    max_len = max((len(w) for w, _ in mu.support), default=1)
    length_ball = ball(G, max(r_max, t_max * max_len), budget)
    per_t = []
    for t in range(1, t_max + 1):
        speed = float(tables[t].expected_word_length(length_ball)) / t
        row = dict(ent[t])
        row["speed"] = speed
        row["return_prob"] = float(spec[t - 1]["return_prob"])
        row["rho_hat"] = spec[t - 1]["rho_hat"]
        per_t.append(row)
    per_r = growth_profile(G, r_max, budget, growth_ball=length_ball)
    matched = min(t_max, r_max)
    slack = None
    if matched >= 1:
        h_hat = ent[matched]["H"] - ent[matched - 1]["H"]
        v_hat = per_r[matched]["v_hat"]
        l_hat = per_t[matched - 1]["speed"]
        slack = v_hat * l_hat - h_hat
    return {"per_t": per_t, "per_r": per_r, "matched_scale_slack": slack}


T_COLUMNS = ["t", "H", "H_over_t", "H_increment", "speed", "return_prob", "rho_hat"]
R_COLUMNS = ["r", "V", "v_hat"]


def profile_csv(report: dict) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(T_COLUMNS)
    for row in report["per_t"]:
        writer.writerow([repr(row[c]) if isinstance(row[c], float) else row[c] for c in T_COLUMNS])
    writer.writerow([])
    writer.writerow(R_COLUMNS)
    for row in report["per_r"]:
        writer.writerow([repr(row[c]) if isinstance(row[c], float) else row[c] for c in R_COLUMNS])
    return buf.getvalue()


def cmd_profile(args) -> str:
    _require(args, "group")
    G = parse_group_spec(args.group)
    mu = make_step_distribution(args.measure, d=G.d, rational=args.rational)
    report = walk_profile(G, mu, args.tmax, args.rmax, args.budget)
    config = _config_dict(
        args, ["group", "measure", "tmax", "rmax", "rational", "seed", "threads"]
    )
    if args.format == "csv":
        return profile_csv(report)
    if args.log2:
        for row in report["per_t"]:
            for col in ("H", "H_over_t", "H_increment"):
                row[col + "_base2"] = row[col] / math.log(2)
    return _json_artifact(config, report)


def cmd_compare(args) -> str:
    _require(args, "src", "quo")
    G_src = parse_group_spec(args.src)
    G_quo = parse_group_spec(args.quo)
    mu = make_step_distribution(args.measure, d=G_src.d, rational=args.rational)
    report = quotient_comparison_report(
        G_src, G_quo, mu, args.tmax, horizon=args.horizon, budget=args.budget
    )
    for row in report["rows"]:
        row["return_src"] = float(row["return_src"])
        row["return_quo"] = float(row["return_quo"])
    config = _config_dict(
        args, ["src", "quo", "measure", "tmax", "horizon", "rational"]
    )
    return _json_artifact(config, report)


# --- sequence pipeline ------------------------------------------------------


def _parse_stages(text: str):
    stages = []
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        words, _, level = part.rpartition(":")
        if not words:
            raise InvalidConfigError(f"bad stage {part!r}; expected w1,w2:n")
        stages.append((tuple(words.split(",")), int(level)))
    if not stages:
        raise InvalidConfigError("no stages given")
    return stages


def run_sequence_pipeline(config: dict) -> dict:
    """End-to-end: certify marking, lift to the level-n extension, certify
    the agreement radius, and profile growth and entropy per stage."""
    stages = _parse_stages(config["stages"])
    budget = config.get("budget", DEFAULT_BALL_BUDGET)
    t_max = config.get("tmax", 8)
    cert_radius = config.get("cert_radius", 6)
    mu = make_step_distribution(config.get("measure", "srw"), d=2)
    free = FreeGroupMarked(2)
    free_rows = entropy_profile(free, mu, t_max)
    stage_rows = []
    for words, n in stages:
        row = {"marking": list(words), "level": n}
        try:
            T = _certified_marking(words, cert_radius, budget)
        except WreathlabError as exc:
            row["skipped"] = str(exc)
            stage_rows.append(row)
            continue
        row["ell"] = T.ell
        row["q"] = T.q
        if n <= T.ell * T.q:
            row["skipped"] = f"level {n} does not exceed ell*q = {T.ell * T.q}"
            stage_rows.append(row)
            continue
        lifted = lift_marking(T, n)
        base = FGGroupMarked(T.marking)
        cap = 2 ** (n - 1)
        agreement = agreement_radius(lifted, base, cap, budget)
        claim_min = 2 * (2 ** (n - 3) // max(T.ell, 1)) if n >= 3 else 0
        row["agreement_with_base"] = int(agreement)
        row["agreement_exact"] = agreement.exact
        row["claim_min_agreement"] = claim_min
        row["claim_certified"] = int(agreement) >= claim_min
        row["agreement_with_free"] = int(
            agreement_radius(lifted, FreeGroupMarked(2), cap, budget)
        )
        radius = max(int(agreement) // 2, 1)
        row["certified_radius"] = radius
        row["growth"] = growth_profile(lifted, radius, budget)
        ent = entropy_profile(lifted, mu, t_max, budget)
        row["entropy"] = ent
        row["H_over_t_final"] = ent[t_max]["H_over_t"]
        row["fundamental_slack"] = fundamental_inequality_report(
            lifted, mu, min(t_max, radius), min(t_max, radius), budget
        )["slack_speed"]
        stage_rows.append(row)
    done = [r for r in stage_rows if "skipped" not in r]
    matched_radius = min((r["certified_radius"] for r in done), default=0)
    for r in done:
        r["v_hat_at_matched_radius"] = (
            r["growth"][matched_radius]["v_hat"] if matched_radius else 0.0
        )
    return {
        "stages": stage_rows,
        "matched_radius": matched_radius,
        "free_H_over_t_final": free_rows[t_max]["H_over_t"],
    }


def cmd_sequence(args) -> str:
    config = _config_dict(
        args, ["stages", "tmax", "budget", "cert_radius", "measure", "seed"]
    )
    report = run_sequence_pipeline(config)
    return _json_artifact(config, report)


# --- argument parsing -------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InvalidConfigError(message)


def _require(args, *names):
    for name in names:
        if getattr(args, name, None) is None:
            raise InvalidConfigError(f"missing required option --{name.replace('_', '-')}")


def build_parser():
    parser = _Parser(prog="wreathlab", description=__doc__)
    sub = parser.add_subparsers(dest="command")
    parser.set_defaults(func=None)
    subparsers = {}

    def common(p):
        p.add_argument("--out", help="artifact path (default: stdout)")
        p.add_argument("--config", help="flat key: value config file")
        p.add_argument("--budget", type=int, default=DEFAULT_BALL_BUDGET)

    p = subparsers["fixtures"] = sub.add_parser("fixtures", help="run fixture suites")
    p.add_argument("--suite", default="all")
    common(p)
    p.set_defaults(func=cmd_fixtures)

    p = subparsers["ball"] = sub.add_parser("ball", help="enumerate a Cayley ball")
    p.add_argument("--group")
    p.add_argument("--radius", type=int)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    common(p)
    p.set_defaults(func=cmd_ball)

    p = subparsers["agreement"] = sub.add_parser("agreement", help="relation agreement of two marked groups")
    p.add_argument("--left")
    p.add_argument("--right")
    p.add_argument("--cap", type=int)
    common(p)
    p.set_defaults(func=cmd_agreement)

    p = subparsers["schreier"] = sub.add_parser("schreier", help="orbit-graph distances")
    p.add_argument("--level", type=int)
    p.add_argument("--from", dest="src")
    p.add_argument("--to", dest="dst")
    p.add_argument("--edges", help="write edge list CSV here")
    common(p)
    p.set_defaults(func=cmd_schreier)

    p = subparsers["search-markings"] = sub.add_parser("search-markings", help="search certified 2-markings")
    p.add_argument("--lmax", type=int)
    p.add_argument("--target-agreement", type=int, default=8)
    p.add_argument("--group")
    p.add_argument("--cert-radius", type=int, default=6)
    p.add_argument("--max-results", type=int, default=10)
    common(p)
    p.set_defaults(func=cmd_search_markings)

    p = subparsers["lift"] = sub.add_parser("lift", help="lift a marking to a level-n extension")
    p.add_argument("--marking", help="w1,w2 over a/A/b/B")
    p.add_argument("--level", type=int)
    p.add_argument("--cert-radius", type=int, default=6)
    common(p)
    p.set_defaults(func=cmd_lift)

    p = subparsers["profile"] = sub.add_parser("profile", help="random-walk statistics profile")
    p.add_argument("--group")
    p.add_argument("--measure", default="srw")
    p.add_argument("--tmax", type=int, default=6)
    p.add_argument("--rmax", type=int, default=6)
    p.add_argument("--rational", action="store_true")
    p.add_argument("--log2", action="store_true", help="also report base-2 entropy")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--format", choices=["json", "csv"], default="csv")
    common(p)
    p.set_defaults(func=cmd_profile)

    p = subparsers["compare"] = sub.add_parser("compare", help="quotient comparison report")
    p.add_argument("--src")
    p.add_argument("--quo")
    p.add_argument("--measure", default="srw")
    p.add_argument("--tmax", type=int, default=6)
    p.add_argument("--horizon", type=int, default=8)
    p.add_argument("--rational", action="store_true")
    common(p)
    p.set_defaults(func=cmd_compare)

    p = subparsers["sequence"] = sub.add_parser("sequence", help="marking/lift/profile pipeline")
    p.add_argument("--stages", default="a,b:4;a,b:5", help="w1,w2:n;...")
    p.add_argument("--tmax", type=int, default=8)
    p.add_argument("--cert-radius", type=int, default=6)
    p.add_argument("--measure", default="srw")
    p.add_argument("--seed", type=int, default=0)
    common(p)
    p.set_defaults(func=cmd_sequence)

    return parser, subparsers


def _apply_config_defaults(argv, subparsers) -> None:
    """Load a --config file (if given) as subcommand defaults.

    Flags on the command line still override the file; unknown keys in the
    file are rejected."""
    if "--config" not in argv:
        return
    i = argv.index("--config")
    if i + 1 >= len(argv):
        raise InvalidConfigError("--config needs a path")
    command = next((a for a in argv if not a.startswith("-")), None)
    if command not in subparsers:
        raise InvalidConfigError(f"unknown subcommand {command!r}")
    sp = subparsers[command]
    dests = {action.dest: action for action in sp._actions}
    defaults = {}
    for key, val in _load_config_file(argv[i + 1]).items():
        if key not in dests:
            raise InvalidConfigError(f"unknown config key {key!r}")
        action = dests[key]
        if isinstance(action, argparse._StoreTrueAction):
            defaults[key] = val.lower() in ("1", "true", "yes")
        elif action.type is int:
            defaults[key] = int(val)
        else:
            defaults[key] = val
    sp.set_defaults(**defaults)


def run_cli(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    try:
        parser, subparsers = build_parser()
        _apply_config_defaults(argv, subparsers)
        args = parser.parse_args(argv)
        if args.func is None:
            raise InvalidConfigError("missing subcommand")
        if getattr(args, "budget", 1) <= 0 or getattr(args, "tmax", 1) < 0:
            raise InvalidConfigError("budgets must be positive")
        text = args.func(args)
        _emit(text, args.out)
        return 0
    except FixtureFailure as exc:
        print(f"fixture failure: {exc}", file=sys.stderr)
        return 1
    except BudgetExceededError as exc:
        print(f"budget exhausted: {exc}", file=sys.stderr)
        return 2
    except InvalidConfigError as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return 3


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()

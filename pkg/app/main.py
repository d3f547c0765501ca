"""
Colander toolkit command line
JSON on stdout (or --out), prose and --verbose tables on stderr, figures via --svg.
Exit codes: 0 success, 1 runtime or I/O failure, 2 usage error.

    python -m app.main construct --radius 0.5 --epsilon 1.41421356 --side 1
"""
import argparse
import logging
import math
import sys
from typing import Any, Callable, Dict, List, Optional

import pandas as pd
from pydantic import ValidationError

from app.core.bounds import (
    audit_bounds,
    strong_lower_bound,
    uniform_anchor_estimate,
    vc_shape_lower_bound,
    weak_density_bound,
    weak_lower_bound,
)
from app.core.colander import (
    ColanderLocalizer,
    construct_grid_colander,
    grid_index_sets,
    verify_both_scopes,
    verify_colander,
)
from app.core.exceptions import ColanderError, SpecInvalid
from app.core.experiments import (
    export_trials_csv,
    fit_scaling,
    grid_epsilon_estimate,
    required_anchors_for_epsilon,
    run_trials,
    summarize_trials,
    uniform_grid,
)
from app.core.vc_analysis import (
    distinct_signature_count,
    is_shattered,
    sauer_g,
    vc_dimension_estimate,
)
from app.geometry.arrangement import arrangement_to_dict, build_arrangement, point_signature
from app.models.schemas import (
    AnchorSet,
    DomainSquare,
    Point,
    RangeFamily,
    RangeKind,
    RunConfig,
    Signature,
    VerificationMethod,
    VerificationScope,
)
from app.utils.io_utils import jsonable, read_anchors_csv, write_anchors_csv, write_json
from app.utils.logging_setup import configure_logging
from app.utils.svg_render import render_svg

logger = logging.getLogger("app.main")

VC_LABEL = "estimated (lower bound certified, upper bound by exhaustion up to n_max)"


def _floats(text: str) -> List[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _ints(text: str) -> List[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _print_table(payload: Dict[str, Any]) -> None:
    """Top-level scalars of a report as a two-column table on stderr"""
    rows = [(k, v) for k, v in jsonable(payload).items() if not isinstance(v, (dict, list))]
    if rows:
        frame = pd.DataFrame(rows, columns=["field", "value"])
        print(frame.to_string(index=False), file=sys.stderr)


def _anchors_or_grid(cfg: RunConfig) -> AnchorSet:
    if cfg.anchors_path:
        return read_anchors_csv(cfg.anchors_path, cfg.R)
    logger.info("🔷 No --anchors given: using the grid construction")
    return construct_grid_colander(cfg.spec())


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_construct(cfg: RunConfig) -> Dict[str, Any]:
    spec = cfg.spec()
    S = construct_grid_colander(spec)
    write_anchors_csv(S, cfg.options["csv"])
    K, J = grid_index_sets(spec)
    payload = {
        "anchors_path": cfg.options["csv"],
        "size": len(S),
        "K": len(K),
        "J": len(J),
        "density": len(S) / spec.domain.area,
        "density_upper": 8.0 / (spec.R * spec.epsilon),
        "strong_lower": strong_lower_bound(spec.side, spec.R, spec.epsilon) if spec.R < spec.side / 2.0 else None,
        "weak_lower": weak_lower_bound(spec.domain.area, spec.epsilon),
    }
    if cfg.svg_path:
        render_svg(cfg.svg_path, S, spec.R, spec.side, title=f"grid colander |S|={len(S)}")
    return payload


def cmd_verify(cfg: RunConfig) -> Dict[str, Any]:
    spec = cfg.spec()
    S = read_anchors_csv(cfg.anchors_path, spec.R)
    scope = cfg.options["scope"]
    if scope == "both":
        report = verify_both_scopes(S, spec, cfg.method, cfg.resolution)
    elif scope == VerificationScope.INTERIOR.value:
        report = verify_colander(
            S, spec, cfg.method, cfg.resolution,
            region=spec.domain.interior(spec.R), scope=VerificationScope.INTERIOR,
        )
    else:
        report = verify_colander(S, spec, cfg.method, cfg.resolution)
    if cfg.svg_path:
        render_svg(cfg.svg_path, S, spec.R, spec.side, title=f"is_colander={report.is_colander}")
    return report.model_dump()


def cmd_localize(cfg: RunConfig) -> Dict[str, Any]:
    spec = cfg.spec()
    S = _anchors_or_grid(cfg)
    point: Optional[Point] = None
    if cfg.options.get("point"):
        point = Point.of(_floats(cfg.options["point"]))
        sig = point_signature(point, S, spec.R)
    elif cfg.options.get("signature") is not None:
        sig = Signature.of(_ints(cfg.options["signature"]))
    else:
        raise SpecInvalid("localize needs --signature or --point")

    estimate = ColanderLocalizer(S, spec, cfg.resolution).localize(sig)
    payload = estimate.model_dump()
    if point is not None:
        payload["true_point"] = point.model_dump()
        payload["error"] = math.hypot(point.x - estimate.representative.x, point.y - estimate.representative.y)
    if cfg.svg_path:
        render_svg(cfg.svg_path, S, spec.R, spec.side, representatives=[(estimate.representative, sig)])
    return payload


def cmd_arrange(cfg: RunConfig) -> Dict[str, Any]:
    S = read_anchors_csv(cfg.anchors_path, cfg.R)
    domain = DomainSquare(side=cfg.side) if cfg.side else None
    arr = build_arrangement(S, cfg.R, domain, compute_diameters=not cfg.options["no_diameters"])
    n = len(S)
    payload = arrangement_to_dict(arr)
    payload["clipped"] = domain is not None
    payload["face_ceiling"] = n * n - n + 2 if n else 1
    payload["sauer_bound"] = sauer_g(n, 3)
    if cfg.svg_path:
        reps = [(face.representative, face.signature) for face in arr.faces]
        side = cfg.side or max(1.0, float(S.as_array().max()) if n else 1.0)
        render_svg(cfg.svg_path, S, cfg.R, side, representatives=reps, title=f"{arr.face_count} faces")
    return payload


def _family(cfg: RunConfig) -> RangeFamily:
    kind = RangeKind(cfg.options["family"])
    if kind == RangeKind.EQUAL_DISKS:
        return RangeFamily.equal_disks(cfg.R)
    if kind == RangeKind.SQUARE_TRANSLATES:
        return RangeFamily.square_translates(cfg.options["square_side"])
    return RangeFamily.all_disks()


def cmd_vc(cfg: RunConfig) -> Dict[str, Any]:
    fam = _family(cfg)
    if cfg.anchors_path:
        A = read_anchors_csv(cfg.anchors_path)
        result = is_shattered(A, fam)
        return {
            "family": fam.kind.value,
            "points": len(A),
            "shattered": result.shattered,
            "missing_subset": result.missing_subset,
            "distinct_patterns": distinct_signature_count(A, fam),
            "sauer_bound": sauer_g(len(A), 3),
        }
    estimate = vc_dimension_estimate(fam, cfg.options["nmax"], cfg.options["trials"], cfg.seed)
    return {"family": fam.kind.value, "vc_dimension_estimate": estimate, "label": VC_LABEL}


def cmd_bounds(cfg: RunConfig) -> Dict[str, Any]:
    spec = cfg.spec()
    a, R, eps = spec.side, spec.R, spec.epsilon
    payload: Dict[str, Any] = {
        "weak_lower": weak_lower_bound(spec.domain.area, eps),
        "strong_lower": strong_lower_bound(a, R, eps),
        "vc_shape_lower": vc_shape_lower_bound(R, eps, 3),
        "weak_density": weak_density_bound(a, eps),
        "uniform_anchor_estimate": uniform_anchor_estimate(eps),
    }
    S = _anchors_or_grid(cfg)
    payload["construction_size"] = len(S)
    payload["density"] = len(S) / spec.domain.area
    if cfg.options["verify"]:
        report = verify_colander(S, spec, cfg.method, cfg.resolution)
        payload["audit"] = audit_bounds(S, spec, report)
    return payload


def cmd_montecarlo(cfg: RunConfig) -> Dict[str, Any]:
    R, a = cfg.R, cfg.side
    r_values = _ints(cfg.options["r_values"])
    trials = cfg.options["trials"]
    results = run_trials(r_values, trials, R, a, cfg.seed)
    payload: Dict[str, Any] = summarize_trials(results)
    if cfg.options.get("csv"):
        payload["csv"] = str(export_trials_csv(results, cfg.options["csv"]))
    if len(set(r_values)) >= 3 and trials >= 10:
        payload["fit"] = fit_scaling(results)
    else:
        payload["fit"] = None
        logger.warning("⚠️ Scaling fit skipped: needs >= 3 distinct r values and >= 10 trials")
    if cfg.epsilon:
        payload["required_anchors"] = required_anchors_for_epsilon(
            cfg.epsilon, R, a, trials, cfg.seed, cfg.options.get("r_cap")
        )
        payload["uniform_anchor_estimate"] = uniform_anchor_estimate(cfg.epsilon)
    return payload


def cmd_gridscan(cfg: RunConfig) -> Dict[str, Any]:
    rows = []
    for delta in _floats(cfg.options["deltas"]):
        estimate = grid_epsilon_estimate(delta, cfg.R, cfg.side, cfg.resolution, interior=not cfg.options["full"])
        rows.append({"delta": delta, "anchors": len(uniform_grid(delta, cfg.side)), "epsilon_estimate": estimate})
    return {"R": cfg.R, "side": cfg.side, "scope": "full" if cfg.options["full"] else "interior", "scan": rows}


COMMANDS: Dict[str, Callable[[RunConfig], Dict[str, Any]]] = {
    "construct": cmd_construct,
    "verify": cmd_verify,
    "localize": cmd_localize,
    "arrange": cmd_arrange,
    "vc": cmd_vc,
    "bounds": cmd_bounds,
    "montecarlo": cmd_montecarlo,
    "gridscan": cmd_gridscan,
}


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="colander", description="(R, epsilon)-colander toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name: str, help_text: str, spec: str = "required") -> argparse.ArgumentParser:
        """spec: 'required', 'optional' or 'none' for the --radius/--epsilon/--side trio"""
        p = sub.add_parser(name, help=help_text)
        if spec != "none":
            needed = spec == "required"
            p.add_argument("--radius", "-R", type=float, required=needed, help="transmission radius R")
            p.add_argument("--epsilon", "-e", type=float, required=needed, help="target uncertainty epsilon")
            p.add_argument("--side", "-a", type=float, required=needed, help="domain side a")
        p.add_argument("--out", help="write the JSON report here instead of stdout")
        p.add_argument("--svg", help="write an SVG figure here")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--verbose", "-v", action="store_true", help="debug logging and a summary table on stderr")
        return p

    p = command("construct", "build the grid colander and write it as CSV")
    p.add_argument("--csv", default="anchors.csv", help="anchor CSV output path")

    p = command("verify", "check the colander property of an anchor file")
    p.add_argument("--anchors", required=True)
    p.add_argument("--method", choices=[m.value for m in VerificationMethod], default="sampling")
    p.add_argument("--resolution", type=float)
    p.add_argument("--scope", choices=["full", "interior", "both"], default="both")

    p = command("localize", "decode a signature (or a point's signature) to a region")
    p.add_argument("--anchors", help="anchor CSV; the grid construction when omitted")
    p.add_argument("--signature", help="comma separated anchor indices, '' for the empty signature")
    p.add_argument("--point", help="x,y of a transmitter whose signature is decoded")
    p.add_argument("--resolution", type=float, help="sampling pitch of the localizer")

    p = command("arrange", "enumerate the signature classes of an anchor file", spec="none")
    p.add_argument("--anchors", required=True)
    p.add_argument("--radius", "-R", type=float, required=True)
    p.add_argument("--side", "-a", type=float, help="clip to [0, a]^2")
    p.add_argument("--no-diameters", action="store_true", help="count faces only")

    p = command("vc", "VC-dimension estimate or shattering test", spec="none")
    p.add_argument("--family", choices=[k.value for k in RangeKind], default="all-disks")
    p.add_argument("--radius", "-R", type=float, help="radius for equal-disks")
    p.add_argument("--square-side", type=float, help="side for square-translates")
    p.add_argument("--nmax", type=int, default=5)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--anchors", help="test this point set instead of estimating")

    p = command("bounds", "lower-bound formulas and an audit of a colander")
    p.add_argument("--anchors", help="anchor CSV; the grid construction when omitted")
    p.add_argument("--verify", action="store_true", help="verify the set and audit it against the bounds")
    p.add_argument("--method", choices=[m.value for m in VerificationMethod], default="sampling")
    p.add_argument("--resolution", type=float)

    p = command("montecarlo", "uniform deployment trials", spec="none")
    p.add_argument("--radius", "-R", type=float, required=True)
    p.add_argument("--side", "-a", type=float, required=True)
    p.add_argument("--r-values", default="8,16,32,64")
    p.add_argument("--trials", type=int, default=30)
    p.add_argument("--csv", help="per-trial CSV output path")
    p.add_argument("--epsilon", "-e", type=float, help="also search the anchors needed for this epsilon")
    p.add_argument("--r-cap", type=int, help="cap for the anchor search")

    p = command("gridscan", "epsilon estimates for uniform delta-grids", spec="none")
    p.add_argument("--radius", "-R", type=float, required=True)
    p.add_argument("--side", "-a", type=float, required=True)
    p.add_argument("--deltas", required=True, help="comma separated grid pitches")
    p.add_argument("--resolution", type=float)
    p.add_argument("--full", action="store_true", help="measure over the whole domain")

    return parser


def to_config(args: argparse.Namespace) -> RunConfig:
    """Validate the parsed flags before any computation"""
    fields = {"radius", "epsilon", "side", "anchors", "out", "svg", "seed", "method", "resolution", "verbose", "command"}
    options = {k: v for k, v in vars(args).items() if k not in fields}
    if args.command == "vc":
        if args.family == RangeKind.EQUAL_DISKS.value and not args.radius:
            raise SpecInvalid("equal-disks needs --radius")
        if args.family == RangeKind.SQUARE_TRANSLATES.value and not args.square_side:
            raise SpecInvalid("square-translates needs --square-side")
    return RunConfig(
        subcommand=args.command,
        R=getattr(args, "radius", None),
        epsilon=getattr(args, "epsilon", None),
        side=getattr(args, "side", None),
        anchors_path=getattr(args, "anchors", None),
        out_path=args.out,
        svg_path=args.svg,
        seed=args.seed,
        method=getattr(args, "method", VerificationMethod.SAMPLING.value),
        resolution=getattr(args, "resolution", None),
        verbose=args.verbose,
        options=options,
    )


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        configure_logging(verbose=args.verbose)
        cfg = to_config(args)
        payload = COMMANDS[cfg.subcommand](cfg)
        write_json(payload, cfg.out_path)
        if cfg.verbose:
            _print_table(payload)
        return 0
    except ColanderError as exc:
        logger.error(f"❌ {type(exc).__name__}: {exc.message}")
        return exc.exit_code
    except (ValidationError, ValueError) as exc:
        logger.error(f"❌ Invalid input: {exc}")
        return 2
    except OSError as exc:
        logger.error(f"❌ I/O failure: {exc}")
        return 1


if __name__ == "__main__":
    sys.exit(main())

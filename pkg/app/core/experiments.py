"""
Monte Carlo experiments on uniformly deployed anchors and the uniform-grid scan
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Dict, Iterable, List, Optional

import numpy as np
import pandas as pd

from app.config.settings import Settings, get_settings
from app.core.exceptions import DegenerateFit, SearchExhausted
from app.geometry.arrangement import ArrangementBuilder, signatures_via_sampling
from app.geometry.hull import diameter
from app.models.schemas import Box, DomainSquare, ScalingFit, TrialResult
from app.utils.seeding import stream

logger = logging.getLogger(__name__)

TRIAL_COLUMNS = [
    "r", "R", "a", "seed", "trial", "face_count", "domain_face_count",
    "max_diam", "mean_diam", "achieved_epsilon",
]


def deploy_uniform(r: int, a: float, seed: int, trial_index: int = 0) -> np.ndarray:
    """r i.i.d. uniform points on [0, a]^2 from the stream (seed, r, trial_index)"""
    if r < 0:
        raise ValueError("anchor count r must be >= 0")
    return stream(seed, r, trial_index).uniform(0.0, a, size=(r, 2))


def measure_deployment(anchors: np.ndarray, R: float, a: float, resolution: Optional[float] = None) -> Dict:
    """
    Sample the signature classes of a deployment over [0, a]^2 (corners included).

    achieved_epsilon is the largest diameter among classes that reach the interior [R, a-R]^2,
    or among all classes when the interior is empty.
    """
    domain = DomainSquare(side=a)
    resolution = resolution or min(R, a) / Settings.TRIAL_PITCH_DIVISOR
    table = signatures_via_sampling(anchors, R, domain, resolution, include_corners=True)
    interior = domain.interior(R)

    diameters = []
    achieved = 0.0
    for pts in table.samples.values():
        d = diameter(pts)
        diameters.append(d)
        if interior is None or np.any(interior.contains_array(pts)):
            achieved = max(achieved, d)
    return {
        "domain_face_count": len(table),
        "max_diam": max(diameters),
        "mean_diam": float(np.mean(diameters)),
        "achieved_epsilon": achieved,
    }


def run_uniform_trial(
    r: int, R: float, a: float, seed: int, trial_index: int = 0, measure_diameters: bool = True
) -> TrialResult:
    """
    One deployment. Face counts come from the arrangement, whole-plane and clipped to [0, a]^2;
    region diameters come from sampling at pitch min(R, a)/100 unless measure_diameters is False.
    """
    if R <= 0 or a <= 0:
        raise ValueError("R and a must be positive")
    anchors = deploy_uniform(r, a, seed, trial_index)
    builder = ArrangementBuilder(R)
    whole = builder.build(anchors, compute_diameters=False)
    clipped = builder.build(anchors, DomainSquare(side=a), compute_diameters=False)
    measured = measure_deployment(anchors, R, a) if measure_diameters else {}
    return TrialResult(
        r=r,
        R=R,
        a=a,
        seed=seed,
        trial_index=trial_index,
        face_count=whole.face_count,
        domain_face_count=clipped.face_count,
        max_region_diameter=measured.get("max_diam"),
        mean_region_diameter=measured.get("mean_diam"),
        achieved_epsilon=measured.get("achieved_epsilon"),
    )


def run_trials(
    r_values: Iterable[int], trials: int, R: float, a: float, seed: int, measure_diameters: bool = True
) -> List[TrialResult]:
    """Every (r, trial) pair, run on up to `threads` workers; results sorted by (r, trial_index)"""
    jobs = [(r, t) for r in sorted(set(r_values)) for t in range(trials)]
    threads = get_settings().threads
    logger.info(f"🎲 Running {len(jobs)} uniform trials on {threads} thread(s)")

    def one(job) -> TrialResult:
        return run_uniform_trial(job[0], R, a, seed, job[1], measure_diameters)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, jobs))
    else:
        results = [one(job) for job in jobs]
    return sorted(results, key=lambda res: (res.r, res.trial_index))


def fit_scaling(results: List[TrialResult]) -> ScalingFit:
    """Least squares fit of log(mean face_count) against log(r)"""
    frame = pd.DataFrame([{"r": res.r, "face_count": res.face_count} for res in results])
    if frame.empty:
        raise DegenerateFit("no trials to fit")
    grouped = frame.groupby("r")["face_count"].agg(["mean", "count"]).sort_index()
    if len(grouped) < 3 or grouped.index.min() < 1:
        raise DegenerateFit(
            "scaling fit needs at least 3 distinct positive r values",
            {"r_values": [int(r) for r in grouped.index]},
        )
    exponent, intercept = np.polyfit(np.log(grouped.index.to_numpy(dtype=float)), np.log(grouped["mean"].to_numpy()), 1)
    return ScalingFit(
        exponent=float(exponent),
        intercept=float(intercept),
        r_values=[int(r) for r in grouped.index],
        mean_face_counts=[float(m) for m in grouped["mean"]],
        trials_per_r=int(grouped["count"].min()),
    )


def expected_region_scaling(r_values: List[int], trials: int, R: float, a: float, seed: int) -> ScalingFit:
    if len(set(r_values)) < 3:
        raise DegenerateFit("scaling fit needs at least 3 distinct r values", {"r_values": list(r_values)})
    if trials < 10:
        raise DegenerateFit("scaling fit needs at least 10 trials per r", {"trials": trials})
    # the fit only needs face counts
    fit = fit_scaling(run_trials(r_values, trials, R, a, seed, measure_diameters=False))
    logger.info(f"🎲 Face count ~ r^{fit.exponent:.3f} over r={fit.r_values} ({trials} trials each)")
    return fit


def required_anchors_for_epsilon(
    epsilon: float,
    R: float,
    a: float,
    trials: int,
    seed: int,
    r_cap: Optional[int] = None,
) -> int:
    """
    Smallest r (found by doubling then bisection) such that at least success_threshold of the trials
    reach achieved_epsilon <= epsilon.

    Raises:
        SearchExhausted: r_cap anchors are not enough
    """
    if epsilon <= 0 or R <= 0 or a <= 0:
        raise ValueError("epsilon, R and a must be positive")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    cfg = get_settings()
    r_cap = r_cap or cfg.search_cap
    if epsilon >= a * math.sqrt(2.0):
        logger.info("🎲 epsilon covers the whole domain diameter: no anchors needed")
        return 0

    cache: Dict[int, bool] = {}

    def succeeds(r: int) -> bool:
        if r not in cache:
            hits = sum(
                measure_deployment(deploy_uniform(r, a, seed, t), R, a)["achieved_epsilon"] <= epsilon
                for t in range(trials)
            )
            cache[r] = hits >= cfg.success_threshold * trials
            logger.debug(f"🎲 r={r}: {hits}/{trials} trials reach epsilon={epsilon:.4g}")
        return cache[r]

    if succeeds(0):
        return 0
    lo, hi = 0, 1
    while not succeeds(hi):
        if hi >= r_cap:
            raise SearchExhausted(
                f"no r <= {r_cap} reaches epsilon={epsilon} in {cfg.success_threshold:.0%} of trials",
                {"epsilon": epsilon, "cap": r_cap},
            )
        lo, hi = hi, min(2 * hi, r_cap)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if succeeds(mid):
            hi = mid
        else:
            lo = mid
    logger.info(
        f"🎲 {hi} uniform anchors reach epsilon={epsilon:.4g} in "
        f"{cfg.success_threshold:.0%} of {trials} trials (R={R}, a={a})"
    )
    return hi


def uniform_grid(delta: float, a: float) -> np.ndarray:
    """{(i delta, j delta) : 0 <= i, j <= a/delta + 1}"""
    if delta <= 0 or a <= 0:
        raise ValueError("delta and a must be positive")
    m = int(math.floor(a / delta + 1.0 + 1e-9))
    ticks = delta * np.arange(m + 1, dtype=float)
    gx, gy = np.meshgrid(ticks, ticks, indexing="ij")
    return np.column_stack([gx.ravel(), gy.ravel()])


def grid_epsilon_estimate(
    delta: float,
    R: float,
    a: float,
    resolution: Optional[float] = None,
    interior: bool = True,
) -> float:
    """
    Measured max confusable-region diameter of the uniform delta-grid, an empirical upper estimate
    of the smallest epsilon for which the grid is an (R, epsilon)-colander.

    Pairs are measured inside [R, a-R]^2 by default, or over the whole domain with interior=False.
    """
    if R <= 0:
        raise ValueError("R must be positive")
    resolution = resolution or min(delta, R) / 10.0
    if resolution > delta / 10.0:
        logger.warning(f"⚠️ Scan pitch {resolution:.4g} is coarser than delta/10={delta / 10.0:.4g}")

    anchors = uniform_grid(delta, a)
    domain = DomainSquare(side=a)
    region: Box = (domain.interior(R) if interior else None) or domain.as_box()
    table = signatures_via_sampling(anchors, R, region, resolution, include_corners=True)
    estimate = max(diameter(pts) for pts in table.samples.values())
    logger.info(f"🧮 Uniform grid delta={delta:.4g} ({len(anchors)} anchors): epsilon estimate {estimate:.6g}")
    return estimate


def trials_frame(results: List[TrialResult]) -> pd.DataFrame:
    """One row per trial; unmeasured diameters are NaN"""
    frame = pd.DataFrame(
        [
            (res.r, res.R, res.a, res.seed, res.trial_index, res.face_count, res.domain_face_count,
             res.max_region_diameter, res.mean_region_diameter, res.achieved_epsilon)
            for res in results
        ],
        columns=TRIAL_COLUMNS,
    )
    diameters = ["max_diam", "mean_diam", "achieved_epsilon"]
    frame[diameters] = frame[diameters].astype(float)
    return frame


def export_trials_csv(results: List[TrialResult], path: str) -> Path:
    """One CSV row per trial, floats with 17 significant digits"""
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    trials_frame(results).to_csv(out, index=False, float_format="%.17g")
    logger.info(f"✅ Wrote {len(results)} trial rows to {out}")
    return out


def summarize_trials(results: List[TrialResult]) -> Dict[str, List[Dict]]:
    """Per-r means for the JSON summary"""
    frame = trials_frame(results)
    if frame.empty:
        return {"per_r": []}
    grouped = frame.groupby("r").agg(
        trials=("trial", "count"),
        mean_face_count=("face_count", "mean"),
        mean_domain_face_count=("domain_face_count", "mean"),
        mean_max_diam=("max_diam", "mean"),
        mean_achieved_epsilon=("achieved_epsilon", "mean"),
    )
    rows: List[Dict] = []
    for r, row in grouped.iterrows():
        r = int(r)
        rows.append({
            "r": r,
            "trials": int(row["trials"]),
            "mean_face_count": float(row["mean_face_count"]),
            "face_count_ceiling": r * r - r + 2,
            "mean_domain_face_count": float(row["mean_domain_face_count"]),
            "mean_max_diam": float(row["mean_max_diam"]),
            "mean_achieved_epsilon": float(row["mean_achieved_epsilon"]),
        })
    return {"per_r": rows}

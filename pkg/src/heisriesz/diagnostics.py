"""Quantitative probes: regularity ratios, cone mass, transform growth.

These functions turn the package's geometric machinery into numerical
verdicts on discrete measures: whether ball masses scale like rho^a,
how much mass escapes every cone around a subgroup, whether truncated
singular integrals blow up or stay bounded as the cutoff shrinks, and
whether zoomed-in copies of a measure reproduce its structure.  All
sampling is seeded and every report records enough of its inputs to be
reproduced exactly.

Ball and annulus statistics respect a resolution floor: radii below
4x the atom spacing are rejected (or trimmed with a warning, for the
divergence schedule), since below that scale discretization noise
dominates and verdicts become meaningless.  The one deliberate
exception is the subgroup boundedness probe, which pushes the cutoff
below the grid scale on purpose: its statistic measures cancellation,
and saturation below the atom spacing is exactly the bounded behavior
being tested.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import _coords, blowup_map, dist, koranyi_norm
from .measure import DiscreteMeasure, chunk_slices
from .riesz import RieszParams, growth_profile
from .subgroups import SubgroupSpec, haar_sample, in_cone

__all__ = [
    "AdRegularityReport",
    "ad_regularity_report",
    "cone_deficiency",
    "GrowthReport",
    "divergence_probe",
    "BoundednessReport",
    "subgroup_boundedness_probe",
    "HorestReport",
    "horest_check",
    "blowup_measure",
    "discrepancy_to_haar",
]


def _fit_slope(y: np.ndarray) -> float:
    """Least-squares slope of y against its index."""
    x = np.arange(len(y), dtype=float)
    xc = x - x.mean()
    denom = float(np.sum(xc * xc))
    if denom == 0.0:
        return 0.0
    return float(np.sum(xc * (y - y.mean())) / denom)


def _resolution_floor(mu: DiscreteMeasure) -> float:
    return 4.0 * mu.spacing if mu.spacing is not None else 0.0


def _center_coords(mu: DiscreteMeasure, centers, seed: int) -> np.ndarray:
    if isinstance(centers, (int, np.integer)):
        rng = np.random.default_rng(seed)
        take = min(int(centers), len(mu))
        idx = rng.choice(len(mu), size=take, replace=False)
        return mu.points[np.sort(idx)]
    out = []
    for c in centers:
        arr, _, _ = _coords(c, mu.n)
        out.append(arr)
    return np.asarray(out)


@dataclass(frozen=True)
class AdRegularityReport:
    """Ball-mass scaling ratios mu(B(x, rho)) / rho^a over a sample grid."""

    a: float
    centers: np.ndarray
    radii: np.ndarray
    ratios: np.ndarray
    min_ratio: float
    max_ratio: float
    implied_c: float
    c_cap: float
    seed: int

    @property
    def regular(self) -> bool:
        return math.isfinite(self.implied_c) and self.implied_c <= self.c_cap


def ad_regularity_report(mu: DiscreteMeasure, a: float, centers=64,
                         radii=(0.25, 0.0625, 0.015625, 0.00390625),
                         seed: int = 0, c_cap: float = 50.0) -> AdRegularityReport:
    """Measure how uniformly ball masses scale like rho^a.

    `centers` is either a count (that many atoms drawn from the support
    without replacement) or an explicit list of points.  The implied
    constant is max(max_ratio, 1/min_ratio), so `regular` means every
    sampled ratio lies in [1/c_cap, c_cap].  Radii below 4x the atom
    spacing or above the support diameter are rejected outright.
    """
    rad = np.asarray(radii, dtype=float)
    if rad.size == 0 or np.any(rad <= 0.0):
        raise ValueError("radii must be a nonempty list of positive numbers")
    floor = _resolution_floor(mu)
    if np.any(rad < floor):
        raise ValueError(
            f"radius below the resolution floor {floor:g} "
            "(4x atom spacing); the ratio would be discretization noise"
        )
    diam = mu.diameter_bound()
    if np.any(rad > diam):
        raise ValueError(f"radius above the support diameter bound {diam:g}")

    pts = _center_coords(mu, centers, seed)
    ratios = np.empty((len(pts), rad.size))
    for i, c in enumerate(pts):
        ratios[i] = mu.ball_mass(c, rad) / rad ** a
    min_ratio = float(np.min(ratios))
    max_ratio = float(np.max(ratios))
    implied = max(max_ratio, 1.0 / min_ratio) if min_ratio > 0.0 else math.inf
    return AdRegularityReport(
        a=a, centers=pts, radii=rad, ratios=ratios,
        min_ratio=min_ratio, max_ratio=max_ratio,
        implied_c=implied, c_cap=c_cap, seed=seed,
    )


def cone_deficiency(mu: DiscreteMeasure, a: float, k, G: SubgroupSpec,
                    delta: float, radii) -> np.ndarray:
    """Mass near k but outside the cone X(k, G, delta), scaled by r^a.

    For each radius r this returns mu(B(k, r) \\ X(k, G, delta)) / r^a.
    Shrinking delta narrows the cone, so the ratios can only grow.
    Strictly positive values across radii witness that no piece of the
    measure around k flattens onto the subgroup.
    """
    if not (0.0 < delta < 1.0):
        raise ValueError(f"cone aperture must lie in (0, 1), got {delta}")
    rad = np.asarray(radii, dtype=float)
    if rad.size == 0 or np.any(rad <= 0.0):
        raise ValueError("radii must be a nonempty list of positive numbers")
    floor = _resolution_floor(mu)
    if np.any(rad < floor):
        raise ValueError(
            f"radius below the resolution floor {floor:g} (4x atom spacing)"
        )
    c, _, _ = _coords(k, mu.n)
    masses = np.zeros(rad.size)
    for sl in chunk_slices(len(mu)):
        pts = mu.points[sl]
        d = dist(c, pts)
        outside = ~in_cone(c, pts, G, delta)
        for i, r in enumerate(rad):
            sel = outside & (d <= r)
            if np.any(sel):
                masses[i] += float(np.sum(mu.weights[sl][sel]))
    return masses / rad ** a


@dataclass(frozen=True)
class GrowthReport:
    """Per-point profile of annulus-transform magnitudes over a cutoff ladder.

    `magnitudes[j, i]` is the absolute i-th coordinate of the transform
    over the annulus (eps[j], 1].  Slopes are least-squares fits of
    magnitude against the ladder index (eps decreasing, so a positive
    slope means growth as the cutoff shrinks).
    """

    point: np.ndarray
    eps: tuple
    magnitudes: np.ndarray
    slopes: np.ndarray
    verdict: str
    threshold: float

    def __post_init__(self) -> None:
        e = np.asarray(self.eps)
        if e.size >= 2 and np.any(np.diff(e) >= 0.0):
            raise ValueError("eps ladder must be strictly decreasing")

    @property
    def max_magnitudes(self) -> np.ndarray:
        """Largest coordinate magnitude per ladder level."""
        return self.magnitudes.max(axis=1)


def _growth_verdict(max_mag: np.ndarray, c: float) -> str:
    half = max_mag[len(max_mag) - max(2, (len(max_mag) + 1) // 2):]
    steps = np.diff(half)
    if np.all(steps > 0.0) and float(np.mean(steps)) >= c:
        return "diverging"
    if abs(_fit_slope(max_mag)) < c:
        return "bounded"
    return "inconclusive"


def divergence_probe(mu: DiscreteMeasure, params: RieszParams, points,
                     eps_schedule, c: float = 0.05,
                     threads: int = 1) -> list:
    """Growth profiles of the annulus transform at several support points.

    The schedule is trimmed at the measure's resolution floor (with a
    warning) because annuli thinner than the atom spacing sample noise.
    A point is judged "diverging" when the max-coordinate magnitude
    rises by at least `c` per level, strictly, over the last half of
    the ladder; "bounded" when the overall fitted slope stays within
    `c`; anything else is "inconclusive".
    """
    eps = [float(e) for e in eps_schedule]
    floor = _resolution_floor(mu)
    kept = [e for e in eps if e >= floor]
    if len(kept) < len(eps):
        warnings.warn(
            f"dropped {len(eps) - len(kept)} cutoff(s) below the resolution "
            f"floor {floor:g}",
            stacklevel=2,
        )
    if len(kept) < 2:
        raise ValueError("need at least two usable cutoffs above the floor")

    coords = [(_coords(p, mu.n)[0], p) for p in points]

    def probe(entry):
        arr, original = entry
        profile = growth_profile(mu, params, arr, kept)
        mags = np.abs(np.stack([value for _, value in profile]))
        slopes = np.array([_fit_slope(mags[:, i]) for i in range(mags.shape[1])])
        return GrowthReport(
            point=arr,
            eps=tuple(kept),
            magnitudes=mags,
            slopes=slopes,
            verdict=_growth_verdict(mags.max(axis=1), c),
            threshold=c,
        )

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(probe, coords))
    return [probe(entry) for entry in coords]


@dataclass(frozen=True)
class BoundednessReport:
    """Cutoff-ladder statistics of the transform on a subgroup Haar sample."""

    kind: str
    s: float
    window: float
    resolution: int
    eps: tuple
    points: np.ndarray
    per_point_max: np.ndarray
    per_eps_max: np.ndarray
    bound: float
    slope: float
    verdict: str
    seed: int


def subgroup_boundedness_probe(V: SubgroupSpec, s: float, eps_grid,
                               window: float = 2.0, resolution: int = 2048,
                               points: int = 8, seed: int = 0,
                               slope_tol: float = 0.01) -> BoundednessReport:
    """Check that truncations of the transform stay bounded on a subgroup.

    Builds the Haar sample of V, picks `points` atoms well inside the
    window, and tabulates the max-coordinate magnitude of the annulus
    transform (eps, 1] down the cutoff ladder.  The kernel is odd and
    the sample symmetric, so the sums cancel instead of growing; the
    verdict is "bounded" when the fitted slope of the per-cutoff max
    stays within slope_tol.  Cutoffs below the grid spacing are kept on
    purpose: past that scale the annulus content freezes, which is the
    flat tail the statistic is meant to show.
    """
    if abs(s - V.hausdorff_dimension) > 1e-12:
        raise ValueError(
            f"kernel degree {s} must match the subgroup dimension "
            f"{V.hausdorff_dimension}"
        )
    haar = haar_sample(V, window, resolution)
    params = RieszParams(s=s, n=V.n)
    rng = np.random.default_rng(seed)
    norms = koranyi_norm(haar.points)
    eligible = np.nonzero(norms <= window / 2.0)[0]
    if eligible.size == 0:
        raise ValueError("no Haar atoms inside half the window")
    take = min(points, eligible.size)
    chosen = np.sort(rng.choice(eligible, size=take, replace=False))
    sample_pts = haar.points[chosen]

    eps = [float(e) for e in eps_grid]
    per_point = np.empty((take, len(eps)))
    for i, p in enumerate(sample_pts):
        profile = growth_profile(haar, params, p, eps)
        mags = np.abs(np.stack([value for _, value in profile]))
        per_point[i] = mags.max(axis=1)
    per_eps = per_point.max(axis=0)
    slope = _fit_slope(per_eps)
    return BoundednessReport(
        kind=V.kind,
        s=s,
        window=window,
        resolution=resolution,
        eps=tuple(eps),
        points=sample_pts,
        per_point_max=per_point,
        per_eps_max=per_eps,
        bound=float(np.max(per_eps)),
        slope=slope,
        verdict="bounded" if abs(slope) < slope_tol else "inconclusive",
        seed=seed,
    )


@dataclass(frozen=True)
class HorestReport:
    """Outcome of the vertical-coordinate lower-bound trials."""

    n: int
    delta: float
    trials: int
    violations: int
    hypothesis_rejections: int
    min_margin: float
    seed: int

    @property
    def passed(self) -> bool:
        return self.violations == 0


def horest_check(n: int, delta: float, trials: int = 1_000_000,
                 seed: int = 0) -> HorestReport:
    """Test the lower bound y_{2n+1} >= delta^2 ||x||^2 / 2 by sampling.

    Draws x with positive vertical part satisfying sqrt(x_v) >
    delta ||x||, then perturbs it by gauge-ball elements of radius
    delta^2 ||x|| / (100 n) and checks the image's vertical coordinate.
    Draws failing the hypothesis are discarded and counted separately.
    The margin reported is the worst observed y_v minus the bound.
    """
    if not (0.0 < delta < 1.0):
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    if trials < 1:
        raise ValueError("trials must be positive")
    rng = np.random.default_rng(seed)
    dim = 2 * n + 1

    done = 0
    rejected = 0
    violations = 0
    min_margin = math.inf
    while done < trials:
        batch = min(131072, 2 * (trials - done) + 64)
        x = np.empty((batch, dim))
        x[:, :-1] = rng.uniform(-1.0, 1.0, size=(batch, 2 * n))
        x[:, -1] = rng.uniform(0.0, 2.0, size=batch)
        norm = koranyi_norm(x)
        ok = x[:, -1] > (delta * norm) ** 2
        ok &= x[:, -1] > 0.0
        rejected += int(batch - np.count_nonzero(ok))
        x = x[ok][: trials - done]
        if x.shape[0] == 0:
            continue
        norm = norm[ok][: trials - done]
        m = x.shape[0]

        rho = delta * delta * norm / (100.0 * n)
        u = np.empty((m, dim))
        u[:, :-1] = rng.uniform(-1.0, 1.0, size=(m, 2 * n)) * rho[:, None]
        u[:, -1] = rng.uniform(-1.0, 1.0, size=m) * rho * rho
        unorm = koranyi_norm(u)
        scale = np.where(unorm > rho, rho / np.where(unorm == 0, 1, unorm), 1.0)
        u[:, :-1] *= scale[:, None]
        u[:, -1] *= scale * scale

        # y = x . u; only the vertical coordinate matters
        twist = -2.0 * np.sum(
            x[:, :n] * u[:, n:2 * n] - x[:, n:2 * n] * u[:, :n], axis=-1
        )
        yv = x[:, -1] + u[:, -1] + twist
        bound = 0.5 * (delta * norm) ** 2
        margin = yv - bound
        violations += int(np.count_nonzero(margin < 0.0))
        min_margin = min(min_margin, float(np.min(margin)))
        done += m

    return HorestReport(
        n=n, delta=delta, trials=trials, violations=violations,
        hypothesis_rejections=rejected, min_margin=min_margin, seed=seed,
    )


def blowup_measure(mu: DiscreteMeasure, a, r: float, s: float | None = None,
                   normalization: str = "power") -> DiscreteMeasure:
    """Zoom of scale r at the point a, with renormalized weights.

    Atoms move through the blow-up map delta_{1/r}(a^{-1} . q).  With
    "power" normalization the weights gain a factor r^(-s); with
    "ball-mass" they are divided by mu(B(a, r)), which must be positive.
    Atom spacing scales by 1/r along with all distances.
    """
    c, _, _ = _coords(a, mu.n)
    if normalization == "power":
        if s is None:
            raise ValueError("power normalization needs the exponent s")
        factor = float(r) ** (-s)
    elif normalization == "ball-mass":
        mass = mu.ball_mass(c, r)
        if mass <= 0.0:
            raise ValueError(f"ball of radius {r:g} at the center carries no mass")
        factor = 1.0 / mass
    else:
        raise ValueError(f"unknown normalization {normalization!r}")
    pts = blowup_map(c, r, mu.points)
    spacing = mu.spacing / r if mu.spacing is not None else None
    return DiscreteMeasure(
        n=mu.n,
        points=pts,
        weights=mu.weights * factor,
        label=f"blowup r={r:g} norm={normalization} of [{mu.label}]",
        spacing=spacing,
    )


def discrepancy_to_haar(nu: DiscreteMeasure, V: SubgroupSpec, test_balls,
                        window: float | None = None,
                        resolution: int = 512) -> float:
    """Worst relative ball-mass disagreement between nu and Haar on V.

    Compares nu(B)/haar(B) over the given (center, radius) family
    against the fixed Lebesgue normalization of the Haar sample; 0
    means the family cannot tell them apart.  The reference window is
    auto-sized to cover every test ball unless given explicitly.
    """
    balls = [(np.asarray(_coords(c, nu.n)[0], dtype=float), float(r))
             for c, r in test_balls]
    if not balls:
        raise ValueError("the test family must contain at least one ball")
    if window is None:
        window = 1.25 * max(float(koranyi_norm(c)) + r for c, r in balls)
    haar = haar_sample(V, window, resolution)
    worst = 0.0
    for c, r in balls:
        reference = haar.ball_mass(c, r)
        if reference <= 0.0:
            raise ValueError(
                f"test ball at radius {r:g} misses the Haar sample; "
                "use a finer resolution or larger window"
            )
        worst = max(worst, abs(nu.ball_mass(c, r) - reference) / reference)
    return worst

"""Self-similar sets in H^n built from translated dilations.

A similarity S = tau_q . delta_r contracts the gauge metric by exactly r,
so a finite family of them generates Cantor-type invariant sets whose
similarity dimension solves sum_i r_i^a = 1.  The corner family on the
unit horizontal cube (2^{2n+2} maps: horizontal corner translations in
{0, 1-r}^{2n} crossed with vertical offsets {0, 1/4, 1/2, 3/4}) is the
workhorse: its pieces separate cleanly once r < 1/2, which this module
certifies through an explicitly constructed invariant region.

The region construction hinges on a tilt function phi on Q = [0,1]^{2n}
satisfying, on each corner cell Q_j = z_j + r Q,

    phi(w) = r^2 phi((w - z_j) / r) + h_j(w),
    h_j(w) = -2 sum_i (z_{j,i} w_{i+n} - z_{j,i+n} w_i),

which is the fixed point of a contraction with ratio r^2 and is found
here by iterating that operator on a grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import HPoint, _coords, ambient_dim, dilate, translate
from .measure import DEFAULT_ATOM_CAP, AtomCapExceeded, DiscreteMeasure

__all__ = [
    "Similarity",
    "StrichartzMeta",
    "Ifs",
    "make_strichartz_ifs",
    "similarity_dimension",
    "apply_word",
    "cylinder_measure",
    "cycle_atom_indices",
    "GridFunction",
    "phi_fixed_point",
    "RegionReport",
    "verify_invariant_region",
    "min_piece_separation",
]


@dataclass(frozen=True)
class Similarity:
    """A contracting similarity tau_q . delta_r of H^n."""

    n: int
    q: np.ndarray
    r: float

    def __post_init__(self) -> None:
        q = np.ascontiguousarray(np.asarray(self.q, dtype=float))
        if q.shape != (ambient_dim(self.n),):
            raise ValueError(
                f"translation must have {ambient_dim(self.n)} coordinates, "
                f"got shape {q.shape}"
            )
        if not np.all(np.isfinite(q)):
            raise ValueError("translation coordinates must be finite")
        if not (0.0 < self.r < 1.0):
            raise ValueError(f"contraction ratio must lie in (0, 1), got {self.r}")
        q.flags.writeable = False
        object.__setattr__(self, "q", q)

    def apply(self, p):
        return translate(self.q, dilate(self.r, p))

    def fixed_point(self) -> HPoint:
        """The unique point with S(p) = p, in closed form.

        Horizontally p' = q'/(1-r); the vertical twist A(q', p') then
        vanishes because p' is parallel to q', leaving
        p_v = q_v / (1 - r^2).
        """
        out = np.empty_like(self.q)
        out[:-1] = self.q[:-1] / (1.0 - self.r)
        out[-1] = self.q[-1] / (1.0 - self.r * self.r)
        return HPoint(self.n, out)


@dataclass(frozen=True)
class StrichartzMeta:
    """Corner-family parameters: ratio, corner translations, offsets."""

    n: int
    r: float
    corners: np.ndarray
    offsets: np.ndarray


@dataclass(frozen=True)
class Ifs:
    """A finite system of similarities with a common group index.

    Maps are stored sorted by ascending ratio (stable, so equal-ratio
    families keep their given order).  Word indices refer to this
    sorted order and are 0-based.
    """

    n: int
    maps: tuple
    strichartz: StrichartzMeta | None = None

    def __post_init__(self) -> None:
        maps = tuple(self.maps)
        if not maps:
            raise ValueError("an iterated function system needs at least one map")
        for s in maps:
            if s.n != self.n:
                raise ValueError(
                    f"map group index {s.n} does not match system index {self.n}"
                )
        maps = tuple(sorted(maps, key=lambda s: s.r))
        object.__setattr__(self, "maps", maps)
        if self.strichartz is not None:
            if len(maps) != 2 ** (2 * self.n + 2):
                raise ValueError(
                    "corner-family metadata requires exactly "
                    f"{2 ** (2 * self.n + 2)} maps, got {len(maps)}"
                )
            if not (0.0 < self.strichartz.r < 0.5):
                raise ValueError("corner-family ratio must lie in (0, 1/2)")

    @property
    def ratios(self) -> np.ndarray:
        return np.array([s.r for s in self.maps])


def _strichartz_corners(n: int, r: float) -> np.ndarray:
    """Corner translations {0, 1-r}^{2n}, bit i of the index driving axis i."""
    count = 2 ** (2 * n)
    corners = np.zeros((count, 2 * n))
    for j in range(count):
        for axis in range(2 * n):
            if (j >> axis) & 1:
                corners[j, axis] = 1.0 - r
    return corners


def make_strichartz_ifs(n: int, r: float) -> Ifs:
    """The 2^{2n+2} corner-family similarities on the unit cube.

    Maps are ordered offset-major: the block with vertical offset 0
    comes first, inside each block the corners run in binary order, so
    map 0 is the pure dilation delta_r fixing the origin.
    """
    if not (0.0 < r < 0.5):
        raise ValueError(f"corner family requires r in (0, 1/2), got {r}")
    corners = _strichartz_corners(n, r)
    offsets = np.array([0.0, 0.25, 0.5, 0.75])
    dim = ambient_dim(n)
    maps = []
    for t in offsets:
        for z in corners:
            q = np.zeros(dim)
            q[:-1] = z
            q[-1] = t
            maps.append(Similarity(n=n, q=q, r=r))
    meta = StrichartzMeta(n=n, r=r, corners=corners, offsets=offsets)
    return Ifs(n=n, maps=tuple(maps), strichartz=meta)


def similarity_dimension(ifs: Ifs, residual_tol: float = 1e-12) -> float:
    """The unique a >= 0 with sum_i r_i^a = 1, by bisection.

    The map a -> sum r_i^a is strictly decreasing from N at a = 0, so
    the root exists and bisection cannot stall.  A single map gives 0.
    """
    ratios = ifs.ratios

    def excess(a: float) -> float:
        return float(np.sum(ratios ** a)) - 1.0

    if len(ratios) == 1:
        return 0.0
    hi = 1.0
    while excess(hi) > 0.0:
        hi *= 2.0
        if hi > 1e6:
            raise RuntimeError("dimension bracket failed to close")
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if excess(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    a = 0.5 * (lo + hi)
    if abs(excess(a)) > residual_tol:
        raise RuntimeError(f"dimension residual {excess(a):.3e} above tolerance")
    return a


def apply_word(ifs: Ifs, word, p):
    """Left-to-right composition S_{w_0}(S_{w_1}(... S_{w_{k-1}}(p)))."""
    n_maps = len(ifs.maps)
    letters = list(word)
    for idx in letters:
        if not (0 <= int(idx) < n_maps):
            raise IndexError(f"word letter {idx} outside [0, {n_maps})")
    out = p
    for idx in reversed(letters):
        out = ifs.maps[int(idx)].apply(out)
    return out


def cylinder_measure(ifs: Ifs, level: int, base=None,
                     atom_cap: int = DEFAULT_ATOM_CAP) -> DiscreteMeasure:
    """The natural measure at cylinder resolution `level`.

    One atom per word of length `level`, placed at the word applied to
    `base` (default: the fixed point of the first map, which lies in
    the invariant set and makes each level's atoms a subset of the
    next).  Equal-ratio systems get exact weights N^(-level); otherwise
    the weight of a word is the product of r_i^a over its letters.

    Atom index encodes the word with the first letter most significant,
    so the children of parent index p occupy p*N .. p*N + N - 1.
    """
    if level < 0:
        raise ValueError(f"level must be >= 0, got {level}")
    n, maps = ifs.n, ifs.maps
    N = len(maps)
    count = N ** level
    if count > atom_cap:
        raise AtomCapExceeded(
            f"level {level} needs {count} atoms, over the cap of {atom_cap}"
        )
    if base is None:
        base = maps[0].fixed_point()
    b, _, _ = _coords(base, n)
    dim = ambient_dim(n)

    pts = np.empty((count, dim))
    pts[0] = b
    size = 1
    for _ in range(level):
        prev = pts[:size].copy()
        for m, s in enumerate(maps):
            pts[m * size:(m + 1) * size] = s.apply(prev)
        size *= N

    ratios = ifs.ratios
    if np.all(ratios == ratios[0]):
        weights = np.full(count, float(N) ** (-level))
    else:
        a = similarity_dimension(ifs)
        weights = np.empty(count)
        weights[0] = 1.0
        size = 1
        factors = ratios ** a
        for _ in range(level):
            prev = weights[:size].copy()
            for m in range(N):
                weights[m * size:(m + 1) * size] = factors[m] * prev
            size *= N

    spacing = float(np.max(ratios)) ** level
    return DiscreteMeasure(
        n=n,
        points=pts,
        weights=weights,
        label=f"cylinder level={level} maps={N} n={n}",
        spacing=spacing,
    )


def cycle_atom_indices(num_maps: int, level: int, count: int,
                       seed: int = 0) -> np.ndarray:
    """Atom indices of short-cycle words: i,i,i,... and i,j,i,j,...

    At an atom whose word repeats with period one or two, successive
    distance annuli see (nearly) the same rescaled picture, so transform
    growth there is scale-periodic instead of fluctuating; these are the
    natural probe points for divergence experiments.  All single-letter
    cycles come first, then a seeded sample of two-letter cycles, up to
    `count` distinct indices.
    """
    if num_maps < 1 or level < 1:
        raise ValueError("need at least one map and level >= 1")
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    place = num_maps ** np.arange(level - 1, -1, -1, dtype=np.int64)
    odd_sum = int(place[0::2].sum())
    even_sum = int(place[1::2].sum())
    singles = [i * int(place.sum()) for i in range(num_maps)]
    out = singles[:count]
    if len(out) < count and num_maps > 1:
        pairs = [(i, j) for i in range(num_maps) for j in range(num_maps)
                 if i != j]
        rng = np.random.default_rng(seed)
        take = min(count - len(out), len(pairs))
        sel = rng.choice(len(pairs), size=take, replace=False, shuffle=False)
        out += [pairs[k][0] * odd_sum + pairs[k][1] * even_sum
                for k in sorted(sel)]
    return np.array(sorted(out), dtype=np.int64)


def _twist(n: int, z: np.ndarray, w: np.ndarray) -> np.ndarray:
    """h(w) = -2 sum_i (z_i w_{i+n} - z_{i+n} w_i) on horizontal vectors."""
    return -2.0 * (w[..., n:2 * n] @ z[:n] - w[..., :n] @ z[n:2 * n])


@dataclass(frozen=True)
class GridFunction:
    """Real function on Q = [0,1]^{2n} given by values on a uniform grid.

    `resolution` counts cells per axis, so values has resolution + 1
    nodes per axis.  Evaluation between nodes is multilinear, which
    preserves sup-norm bounds.  Instances produced by the fixed-point
    solver also carry the iteration's sup-update history and the
    measured self-consistency residual at cell nodes.
    """

    n: int
    r: float
    resolution: int
    values: np.ndarray
    history: tuple = ()
    residual: float | None = None

    def __post_init__(self) -> None:
        axes = 2 * self.n
        values = np.ascontiguousarray(np.asarray(self.values, dtype=float))
        if values.shape != (self.resolution + 1,) * axes:
            raise ValueError(
                f"values must have shape {(self.resolution + 1,) * axes}, "
                f"got {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("grid values must be finite")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    def evaluate(self, pts) -> np.ndarray:
        """Multilinear interpolation at horizontal points (..., 2n)."""
        axes = 2 * self.n
        w = np.asarray(pts, dtype=float)
        if w.shape[-1] != axes:
            raise ValueError(f"points must have {axes} coordinates")
        u = np.clip(w, 0.0, 1.0) * self.resolution
        i0 = np.minimum(u.astype(np.int64), self.resolution - 1)
        i0 = np.maximum(i0, 0)
        frac = u - i0
        flat = self.values.ravel()
        out = np.zeros(w.shape[:-1])
        for corner in range(2 ** axes):
            idx = []
            weight = np.ones(w.shape[:-1])
            for axis in range(axes):
                if (corner >> axis) & 1:
                    idx.append(i0[..., axis] + 1)
                    weight = weight * frac[..., axis]
                else:
                    idx.append(i0[..., axis])
                    weight = weight * (1.0 - frac[..., axis])
            flat_idx = np.ravel_multi_index(tuple(idx), self.values.shape)
            out = out + weight * flat[flat_idx]
        return out

    def contraction_ratios(self) -> np.ndarray:
        """Successive sup-update ratios of the producing iteration."""
        h = np.asarray(self.history)
        if h.size < 2:
            return np.zeros(0)
        return h[1:] / h[:-1]


class _TiltOperator:
    """Precomputed grid form of the tilt-function contraction.

    Every node gets a taper factor theta, a pull-back position inside
    Q (through the nearest corner-cell point when the node lies in the
    gap region), and the twist value there.  One application is then
    new = theta * (r^2 * interp(f, pullback) + twist), an affine map
    whose linear part has sup-norm at most r^2.

    Ties in the nearest-point lookup are broken toward the
    lexicographically smallest candidate point.
    """

    def __init__(self, n: int, r: float, resolution: int) -> None:
        self.n, self.r, self.resolution = n, r, resolution
        axes = 2 * n
        M = resolution
        corners = _strichartz_corners(n, r)
        shape = (M + 1,) * axes
        nodes = np.indices(shape, dtype=float).reshape(axes, -1).T / M
        count = nodes.shape[0]

        best_d = np.full(count, np.inf)
        best_pt = np.zeros_like(nodes)
        best_corner = np.zeros(count, dtype=np.int64)
        for j, z in enumerate(corners):
            clipped = np.clip(nodes, z, z + r)
            d = np.sqrt(np.sum((nodes - clipped) ** 2, axis=-1))
            closer = d < best_d
            tie = d == best_d
            if np.any(tie):
                lex = np.zeros(count, dtype=bool)
                undecided = tie.copy()
                for axis in range(axes):
                    less = undecided & (clipped[:, axis] < best_pt[:, axis])
                    lex |= less
                    undecided &= clipped[:, axis] == best_pt[:, axis]
                closer = closer | (tie & lex)
            best_d = np.where(closer, d, best_d)
            best_pt[closer] = clipped[closer]
            best_corner = np.where(closer, j, best_corner)

        eps = 0.5 * (1.0 - 2.0 * r)
        self.theta = np.clip((eps - best_d) / eps, 0.0, 1.0)
        z = corners[best_corner]
        pull = (best_pt - z) / r
        self.twist = np.empty(count)
        for j in range(corners.shape[0]):
            sel = best_corner == j
            self.twist[sel] = _twist(n, corners[j], best_pt[sel])

        u = np.clip(pull, 0.0, 1.0) * M
        i0 = np.minimum(u.astype(np.int64), M - 1)
        i0 = np.maximum(i0, 0)
        frac = u - i0
        idx_list, w_list = [], []
        for corner in range(2 ** axes):
            idx = []
            weight = np.ones(count)
            for axis in range(axes):
                if (corner >> axis) & 1:
                    idx.append(i0[:, axis] + 1)
                    weight = weight * frac[:, axis]
                else:
                    idx.append(i0[:, axis])
                    weight = weight * (1.0 - frac[:, axis])
            idx_list.append(np.ravel_multi_index(tuple(idx), shape))
            w_list.append(weight)
        self.gather_idx = np.stack(idx_list)
        self.gather_w = np.stack(w_list)
        self.in_cell = best_d == 0.0
        self.shape = shape

    def apply(self, flat_values: np.ndarray) -> np.ndarray:
        interp = np.sum(self.gather_w * flat_values[self.gather_idx], axis=0)
        return self.theta * (self.r * self.r * interp + self.twist)


def phi_fixed_point(n: int, r: float, resolution: int,
                    tol: float = 1e-10, max_iter: int = 200) -> GridFunction:
    """Solve the tilt self-consistency equation on a grid.

    Iterates the contraction from zero until the sup-norm update drops
    below tol.  The update ratios must stay below r^2 once past the
    first step; anything larger signals a bug and raises RuntimeError.
    Beyond the taper distance from the corner cells the function is
    identically zero.  When 1/r divides the resolution the pull-backs
    land on exact grid nodes and the returned residual reflects pure
    iteration error; otherwise it also carries interpolation error.
    """
    if not (0.0 < r < 0.5):
        raise ValueError(f"tilt construction requires r in (0, 1/2), got {r}")
    if resolution * r < 2.0:
        raise ValueError(
            f"resolution {resolution} leaves corner cells under 2 cells wide"
        )
    op = _TiltOperator(n, r, resolution)
    f = np.zeros(len(op.theta))
    history = []
    ratio_cap = r * r + 0.01
    for _ in range(max_iter):
        new = op.apply(f)
        update = float(np.max(np.abs(new - f)))
        history.append(update)
        if len(history) >= 2 and history[-2] > 0.0:
            ratio = update / history[-2]
            if ratio > ratio_cap:
                raise RuntimeError(
                    f"contraction violated: update ratio {ratio:.6f} exceeds "
                    f"{ratio_cap:.6f}"
                )
        f = new
        if update < tol:
            break
    else:
        raise RuntimeError(f"no convergence within {max_iter} iterations")

    final = op.apply(f)
    residual = float(np.max(np.abs((final - f)[op.in_cell])))
    return GridFunction(
        n=n,
        r=r,
        resolution=resolution,
        values=f.reshape(op.shape),
        history=tuple(history),
        residual=residual,
    )


def _ss2_residual_sup(phi: GridFunction, corners: np.ndarray) -> float:
    """Exact sup of the grid self-consistency defect over the corner cells.

    On each cell the defect is piecewise multilinear on the sublattice
    z_j + (r/M) Z^{2n} (for M divisible by 1/r that lattice refines the
    node grid), so its maximum is attained at sublattice points and a
    finite scan is exact.  For other resolutions the scan is still a
    dense probe; callers add a safety factor in that case.
    """
    M, r, n = phi.resolution, phi.r, phi.n
    axes = 2 * n
    sup = 0.0
    grid = np.indices((M + 1,) * axes, dtype=float).reshape(axes, -1).T / M
    for z in corners:
        w = z + r * grid
        u = grid
        resid = phi.evaluate(w) - (r * r * phi.evaluate(u) + _twist(n, z, w))
        sup = max(sup, float(np.max(np.abs(resid))))
    return sup


@dataclass(frozen=True)
class RegionReport:
    """Outcome of the invariant-region check.

    Containment is sampled; violations count samples whose image falls
    outside the region by more than `slack`, which is sized from the
    grid's own self-consistency defect (`discretization_sup`) so that
    discretization noise never masquerades as a genuine violation.
    Disjointness of the image slabs is arithmetic, not sampled: slabs
    over one corner share the same base curve, so consecutive vertical
    offsets separate them by exactly 1/4 - r^2, and distinct corners
    are 1 - 2r apart horizontally.
    """

    sample_count: int
    violations: int
    witness: np.ndarray | None
    min_lower_margin: float
    min_upper_margin: float
    slack: float
    discretization_sup: float
    slab_thickness: float
    offset_spacing: float
    vertical_separation: float
    horizontal_gap: float
    disjoint_certified: bool

    @property
    def certified(self) -> bool:
        return (
            self.violations == 0
            and self.disjoint_certified
            and self.slack <= self.vertical_separation / 10.0
        )


def verify_invariant_region(ifs: Ifs, phi: GridFunction,
                            sample_count: int = 100_000,
                            seed: int = 0) -> RegionReport:
    """Check S_j(R) subset R and slab disjointness for the corner family.

    R is the unit-height band over Q between phi and phi + 1.  Sampled
    points of R are pushed through every map; the image must land back
    between phi and phi + 1 over its corner cell, with margins reported.
    """
    if ifs.strichartz is None:
        raise ValueError("invariant-region check requires a corner-family system")
    meta = ifs.strichartz
    if phi.n != ifs.n or phi.r != meta.r:
        raise ValueError("tilt grid was built for different parameters")
    n, r = ifs.n, meta.r
    rng = np.random.default_rng(seed)

    sup_resid = _ss2_residual_sup(phi, meta.corners)
    exact_lattice = abs(phi.resolution * r - round(phi.resolution * r)) < 1e-9
    safety = 1.000001 if exact_lattice else 2.0
    slack = safety * sup_resid + 1e-15

    qh = rng.random((sample_count, 2 * n))
    qv = phi.evaluate(qh) + rng.random(sample_count)

    violations = 0
    witness = None
    min_lower = math.inf
    min_upper = math.inf
    for t in meta.offsets:
        for z in meta.corners:
            w = z + r * qh
            image_v = t + r * r * qv + _twist(n, z, w)
            base = phi.evaluate(w)
            lower = image_v - base
            upper = base + 1.0 - image_v
            min_lower = min(min_lower, float(np.min(lower)))
            min_upper = min(min_upper, float(np.min(upper)))
            bad = (lower < -slack) | (upper < -slack)
            count = int(np.count_nonzero(bad))
            if count and witness is None:
                k = int(np.argmax(bad))
                witness = np.concatenate([qh[k], [qv[k]]])
            violations += count

    thickness = r * r
    spacing = float(np.min(np.diff(np.sort(meta.offsets))))
    vertical_sep = spacing - thickness
    horizontal_gap = 1.0 - 2.0 * r
    return RegionReport(
        sample_count=sample_count,
        violations=violations,
        witness=witness,
        min_lower_margin=min_lower,
        min_upper_margin=min_upper,
        slack=slack,
        discretization_sup=sup_resid,
        slab_thickness=thickness,
        offset_spacing=spacing,
        vertical_separation=vertical_sep,
        horizontal_gap=horizontal_gap,
        disjoint_certified=vertical_sep > 0.0 and horizontal_gap > 0.0,
    )


def _gauge_dist(a: np.ndarray, b: np.ndarray, n: int) -> np.ndarray:
    """Gauge distance between broadcastable coordinate arrays."""
    dh = b[..., :-1] - a[..., :-1]
    twist = -2.0 * (
        a[..., :n] * b[..., n:2 * n] - a[..., n:2 * n] * b[..., :n]
    ).sum(axis=-1)
    dv = b[..., -1] - a[..., -1] - twist
    sq = np.sum(dh * dh, axis=-1)
    return (sq * sq + dv * dv) ** 0.25


def _compose_after(q: np.ndarray, rw: np.ndarray, s: Similarity, n: int):
    """Composite of a word transform (q, rw) followed by the map s.

    tau_q delta_rw . tau_{q_s} delta_{r_s} = tau_{q . delta_rw(q_s)}
    delta_{rw r_s}, so appending a letter at the end of a word only
    needs the parent's composite, never the whole word.
    """
    shifted = np.empty_like(q)
    shifted[..., :-1] = rw[..., None] * s.q[:-1]
    shifted[..., -1] = rw * rw * s.q[-1]
    return _left_mul(q, shifted, n), rw * s.r


def _compose_before(s: Similarity, q: np.ndarray, rw: np.ndarray, n: int):
    """Composite of the map s followed by word transforms (q, rw)."""
    shifted = np.empty_like(q)
    shifted[..., :-1] = s.r * q[..., :-1]
    shifted[..., -1] = (s.r * s.r) * q[..., -1]
    return _left_mul(np.broadcast_to(s.q, q.shape), shifted, n), s.r * rw


def _left_mul(a: np.ndarray, b: np.ndarray, n: int) -> np.ndarray:
    """Group product on coordinate arrays (broadcasting)."""
    out = np.empty(np.broadcast_shapes(a.shape, b.shape))
    out[..., :-1] = a[..., :-1] + b[..., :-1]
    twist = -2.0 * (
        a[..., :n] * b[..., n:2 * n] - a[..., n:2 * n] * b[..., :n]
    ).sum(axis=-1)
    out[..., -1] = a[..., -1] + b[..., -1] + twist
    return out


def min_piece_separation(ifs: Ifs, level: int, base=None,
                         sample: int = 4096) -> float:
    """Exact minimal gauge distance across distinct first-letter cylinders.

    Runs a dense pass at the deepest level whose atom count stays within
    `sample`, then refines only candidate pairs whose descendants could
    still contain the minimum, using the drift bound

        d(atom, level-l ancestor) <= r^l rho0 (1 - r^(L-l)) / (1 - r)

    (r the largest ratio, rho0 the largest one-step displacement of the
    base).  The refinement keeps every ancestor of the true minimum, so
    the result is exact and `sample` affects runtime only.  A one-map
    system has no cross pairs and returns +inf.
    """
    if level < 1:
        raise ValueError(f"level must be >= 1, got {level}")
    n, maps = ifs.n, ifs.maps
    N = len(maps)
    if N == 1:
        return math.inf
    if base is None:
        base = maps[0].fixed_point()
    b, _, _ = _coords(base, n)
    dim = ambient_dim(n)

    r_max = float(np.max(ifs.ratios))
    rho0 = max(float(_gauge_dist(b, _coords(s.apply(b), n)[0], n)) for s in maps)

    coarse = 1
    while coarse < level and N ** (coarse + 1) <= max(sample, N):
        coarse += 1

    def drift(lvl: int) -> float:
        return r_max ** lvl * rho0 * (1.0 - r_max ** (level - lvl)) / (1.0 - r_max)

    def positions(qc: np.ndarray, rc: np.ndarray) -> np.ndarray:
        scaled = np.empty_like(qc)
        scaled[:, :-1] = rc[:, None] * b[:-1]
        scaled[:, -1] = rc * rc * b[-1]
        return _left_mul(qc, scaled, n)

    # composites (q, rw) for every coarse-level word, first letter most
    # significant so the first-letter group is index // N^(coarse-1)
    q = np.stack([s.q for s in maps])
    rw = ifs.ratios.copy()
    for _ in range(coarse - 1):
        blocks = [_compose_before(s, q, rw, n) for s in maps]
        q = np.concatenate([blk[0] for blk in blocks])
        rw = np.concatenate([blk[1] for blk in blocks])

    pos = positions(q, rw)
    total = pos.shape[0]
    group = np.arange(total) // (N ** (coarse - 1))
    row_chunk = max(1, 4_000_000 // max(total, 1))

    def cross_pass(threshold: float | None):
        """Min cross-group distance; also the pairs within threshold."""
        found = math.inf
        pairs_i, pairs_j = [], []
        for start in range(0, total, row_chunk):
            stop = min(start + row_chunk, total)
            d = _gauge_dist(pos[start:stop, None, :], pos[None, :, :], n)
            mask = group[start:stop, None] != group[None, :]
            mask &= (start + np.arange(stop - start))[:, None] < np.arange(total)
            if not np.any(mask):
                continue
            found = min(found, float(np.min(np.where(mask, d, np.inf))))
            if threshold is not None:
                ii, jj = np.nonzero(mask & (d <= threshold))
                pairs_i.append(start + ii)
                pairs_j.append(jj)
        return found, pairs_i, pairs_j

    best, _, _ = cross_pass(None)
    if not math.isfinite(best):
        return math.inf
    if coarse == level:
        return best

    upper_bound = best + 2.0 * drift(coarse)
    _, pairs_i, pairs_j = cross_pass(upper_bound + 2.0 * drift(coarse) + 1e-12)
    ii = np.concatenate(pairs_i)
    jj = np.concatenate(pairs_j)
    qi, ri = q[ii], rw[ii]
    qj, rj = q[jj], rw[jj]

    for lvl in range(coarse, level):
        # children append one letter on each side of every surviving pair
        if len(ri) * N * N > 60_000_000:
            raise RuntimeError(
                "candidate refinement grew past 6e7 pairs; raise `sample` "
                "or lower the level"
            )
        pair_count = len(ri)
        qi = np.repeat(qi, N * N, axis=0)
        ri = np.repeat(ri, N * N)
        qj = np.repeat(qj, N * N, axis=0)
        rj = np.repeat(rj, N * N)
        letters_i = np.tile(np.repeat(np.arange(N), N), pair_count)
        letters_j = np.tile(np.tile(np.arange(N), N), pair_count)
        new_qi = np.empty_like(qi)
        new_qj = np.empty_like(qj)
        new_ri = np.empty_like(ri)
        new_rj = np.empty_like(rj)
        for m, s in enumerate(maps):
            sel = letters_i == m
            new_qi[sel], new_ri[sel] = _compose_after(qi[sel], ri[sel], s, n)
            sel = letters_j == m
            new_qj[sel], new_rj[sel] = _compose_after(qj[sel], rj[sel], s, n)
        qi, ri, qj, rj = new_qi, new_ri, new_qj, new_rj

        d = _gauge_dist(positions(qi, ri), positions(qj, rj), n)
        best = float(np.min(d))
        upper_bound = min(upper_bound, best + 2.0 * drift(lvl + 1))
        keep = d <= upper_bound + 2.0 * drift(lvl + 1) + 1e-12
        qi, ri, qj, rj = qi[keep], ri[keep], qj[keep], rj[keep]

    return best

"""The nested-subshift tower: stage planning, assembly and verification.

Each stage replaces the ambient shift X_n by a renewal subshift X_{n+1}
built from a separated word set of a measure-targeted subsystem Y, glued
through connecting words and a low-self-overlap word from a disjoint
subsystem Z.  Every inequality the construction relies on is evaluated
numerically and reported; a stage that fails verification raises with the
failing window identified.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, replace

import numpy as np

from .codes import (
    Code,
    find_low_overlap_word,
    is_uniquely_decipherable,
    max_self_overlap,
    renewal_to_sft,
)
from .errors import (
    CapacityError,
    InfeasibleTargetError,
    NotUniquelyDecipherableError,
    StageVerificationError,
    SubsystemSearchError,
)
from .measures import (
    MetricConfig,
    katok_separated_set,
    pigeonhole_refine,
    weak_star_distance,
)
from .spectral import (
    MarkovMeasure,
    RoofFunction,
    abramov,
    markov_entropy,
    parry_measure,
    random_markov_measure,
    roof_integral,
    topological_entropy,
)
from .words import (
    DEFAULT_WORD_BUDGET,
    VertexShift,
    connecting_word,
    higher_block,
    induced_subshift,
    is_admissible,
    is_irreducible,
    is_label_admissible,
    label_word,
    label_language,
    languages_disjoint,
    longest_window_avoiding,
)


@dataclass(frozen=True)
class Target:
    """Construction goal: normalized entropy c for the suspension of `base`."""

    c: float
    rho: RoofFunction
    base: VertexShift
    base_measure: MarkovMeasure

    def __post_init__(self):
        if self.c < 0:
            raise InfeasibleTargetError(f"target entropy must be >= 0, got {self.c}")
        if not is_irreducible(self.base):
            raise InfeasibleTargetError("base shift must be irreducible")
        hstar = self.normalized_base_entropy
        if self.c >= hstar:
            raise InfeasibleTargetError(
                f"target c={self.c:.6g} is not below h*={hstar:.6g}"
            )

    @property
    def base_entropy(self):
        return markov_entropy(self.base_measure)

    @property
    def base_roof_integral(self):
        return roof_integral(self.base_measure, self.rho)

    @property
    def normalized_base_entropy(self):
        return abramov(self.base_entropy, self.base_roof_integral)


DELTA_CAP = 0.5


@dataclass(frozen=True)
class StageParams:
    """Per-stage knobs: window slack delta, proximity kappa, word lengths.

    radius defaults to kappa; entropy_target optionally redirects the
    subsystem search away from the naive midpoint (finite word lengths
    inflate the code length k relative to n, so the subsystem carrying the
    separated set must run hotter than the midpoint by roughly k/n).
    """

    delta: float
    kappa: float
    word_length: int
    overlap_length: int = 1
    metric: MetricConfig = MetricConfig(2)
    radius: float = None
    block_depth: int = 2
    entropy_target: float = None

    def __post_init__(self):
        if not (0 < self.delta < 1):
            raise ValueError("delta must lie in (0, 1)")
        if self.kappa <= 0:
            raise ValueError("kappa must be positive")
        if self.word_length < 1 or self.overlap_length < 1:
            raise ValueError("word lengths must be >= 1")
        if self.radius is not None and self.radius <= 0:
            raise ValueError("radius must be positive")
        if self.block_depth < 1:
            raise ValueError("block depth must be >= 1")

    @property
    def effective_radius(self):
        return self.kappa if self.radius is None else self.radius


def validate_schedule(schedule):
    """Hard decay constraints between consecutive stage parameters."""
    for a, b in zip(schedule, schedule[1:]):
        if not (1 + b.delta) ** 2 < (1 + a.delta):
            raise ValueError(
                f"(1+{b.delta})^2 must stay below 1+{a.delta} between stages"
            )
        if not b.kappa < a.kappa / 2:
            raise ValueError(f"kappa must at least halve: {b.kappa} vs {a.kappa}")


def next_params(prev, **overrides):
    """Default decayed parameters for the following stage.

    delta and kappa shrink inside the hard decay constraints; the
    per-stage calibration knobs (radius, entropy_target) reset to their
    defaults rather than inheriting stale values.
    """
    delta = 0.9 * (math.sqrt(1 + prev.delta) - 1)
    kappa = 0.49 * prev.kappa
    base = replace(prev, delta=delta, kappa=kappa, radius=None, entropy_target=None)
    return replace(base, **overrides) if overrides else base


def plan_initial_params(
    target,
    word_length=12,
    overlap_length=1,
    metric=None,
):
    """First-stage parameters from the feasibility gap.

    delta_1 is half the supremum of admissible slacks (the largest delta
    with (1+3 delta) c integral(rho) < h), capped at 1/2 so the window
    stays ordered; kappa_1 follows the displayed quarter-integral bound.
    """
    h = target.base_entropy
    ri = target.base_roof_integral
    c = target.c
    if metric is None:
        metric = MetricConfig(max(target.rho.depth, 2))
    if c > 0:
        sup = (h / (c * ri) - 1.0) / 3.0
        if sup <= 0:
            raise InfeasibleTargetError("no positive delta satisfies the window")
        delta = min(sup / 2.0, DELTA_CAP)
    else:
        delta = DELTA_CAP
    terms = [delta / 2.0]
    if c > 0:
        terms.append(c * abs((1 + delta) ** 2 - (1 + 3 * delta)))
    kappa = (ri / 4.0) * min(terms)
    return StageParams(
        delta=delta,
        kappa=kappa,
        word_length=word_length,
        overlap_length=overlap_length,
        metric=metric,
    )


def derive_c1(target, params, stage_measure):
    """Midpoint entropy target between the two window edges."""
    ri = roof_integral(stage_measure, target.rho)
    d = params.delta
    return target.c * ri * (((1 + d) ** 2) + (1 + 3 * d)) / 2.0


@dataclass(frozen=True)
class SubsystemPair:
    Y: VertexShift
    Z: VertexShift
    K1: int


def _irreducible_induced(shift, states):
    sub = induced_subshift(shift, states)
    return sub if is_irreducible(sub) else None


def _subset_candidates(shift, m, c1, kappa, cfg, target_h, roof_score, positive_h, budget):
    """Exhaustively scored strongly connected induced subgraphs."""
    n = shift.num_states
    out = []
    for mask in range(1, 1 << n):
        states = [i for i in range(n) if mask >> i & 1]
        sub = _irreducible_induced(shift, states)
        if sub is None:
            continue
        h = topological_entropy(sub)
        if positive_h and h <= 1e-9:
            continue  # a positive-entropy target needs carrier subsystems
        if abs(h - c1) > kappa:
            continue
        pm = parry_measure(sub)
        d = weak_star_distance(pm, m, cfg)
        if d > kappa:
            continue
        out.append((abs(h - target_h), abs(h - c1), roof_score(pm), d, mask, sub, h))
    out.sort(key=lambda t: t[:5])
    return out


def _zed_candidates(shift, y_mask, k1_cap, y_shift, budget):
    """Positive-entropy subsystems language-disjoint from Y, smallest K1 first."""
    n = shift.num_states
    rest = [i for i in range(n) if not (y_mask >> i & 1)]
    found = []
    for mask in range(1, 1 << len(rest)):
        states = [rest[i] for i in range(len(rest)) if mask >> i & 1]
        sub = _irreducible_induced(shift, states)
        if sub is None:
            continue
        if topological_entropy(sub) <= 1e-9:
            continue
        for k in range(1, k1_cap + 1):
            if languages_disjoint(y_shift, sub, k, budget=budget):
                found.append((k, -topological_entropy(sub), mask, sub))
                break
    found.sort(key=lambda t: t[:3])
    return found


def select_disjoint_subsystems(
    shift,
    m,
    c1,
    kappa,
    cfg,
    block_depth=2,
    max_block_depth=3,
    entropy_target=None,
    roof=None,
    roof_target=None,
    subset_cap=16,
    k1_cap=None,
    budget=DEFAULT_WORD_BUDGET,
):
    """Irreducible sub-SFT pair (Y, Z) with disjoint depth-K1 languages.

    Y tracks the entropy midpoint c1 within kappa and its maximal measure
    stays kappa-close to m in the surrogate metric; Z only needs positive
    entropy.  Small presentations are searched exhaustively over induced
    subgraphs of higher-block recodings (block depth escalating on
    failure); positional renewal presentations restrict to sub-codes, the
    induced subgraphs their structure supports.

    Ranking among admissible candidates prefers entropy closest to
    `entropy_target` (default c1) and, as a tiebreak, a maximal measure
    whose roof integral is closest to `roof_target`: the following stage
    must squeeze every invariant measure's roof integral into a window
    around the previous one, so subsystems with matching roof statistics
    are the useful ones.
    """
    target_h = c1 if entropy_target is None else entropy_target
    if roof is not None and roof_target is not None:
        def roof_score(pm):
            return abs(roof_integral(pm, roof) - roof_target)
    else:
        def roof_score(pm):
            return 0.0
    diagnostics = {}
    renewal = getattr(shift, "renewal", None)
    if renewal is not None and shift.num_states > subset_cap:
        return _select_in_renewal(
            shift, m, c1, kappa, cfg, renewal, target_h, k1_cap, budget, diagnostics
        )
    depth = block_depth
    while depth <= max_block_depth:
        h = higher_block(shift, depth, budget=budget) if depth > 1 else shift
        if h.num_states > subset_cap:
            diagnostics[f"block_{depth}"] = (
                f"{h.num_states} block states exceed the exhaustive-search cap"
            )
            break
        cap = k1_cap if k1_cap is not None else max(2 * depth, 6)
        ys = _subset_candidates(
            h, m, c1, kappa, cfg, target_h, roof_score, c1 > 1e-12, budget
        )
        diagnostics[f"block_{depth}_y_candidates"] = len(ys)
        for _, _, _, _, y_mask, y_sub, y_h in ys:
            zs = _zed_candidates(h, y_mask, cap, y_sub, budget)
            if zs:
                k1, _, _, z_sub = zs[0]
                return SubsystemPair(Y=y_sub, Z=z_sub, K1=k1)
        depth += 1
    raise SubsystemSearchError(
        "no (Y, Z) pair met the entropy/measure/disjointness constraints; "
        "raise the block depth or relax kappa",
        diagnostics=diagnostics,
    )


def _select_in_renewal(
    shift, m, c1, kappa, cfg, renewal, target_h, k1_cap, budget, diagnostics
):
    k = renewal.k
    t_total = len(renewal.code)
    if t_total < 3:
        raise SubsystemSearchError(
            "renewal presentation has too few code words for a disjoint pair",
            diagnostics={"code_words": t_total},
        )
    lo_t = max(2 if c1 > 1e-12 else 1, math.ceil(math.exp((c1 - kappa) * k)))
    hi_t = min(t_total - 2, math.floor(math.exp((c1 + kappa) * k)))
    if lo_t > hi_t:
        raise SubsystemSearchError(
            f"no sub-code size realizes entropy {c1:.4g} within {kappa:.4g}",
            diagnostics={"code_words": t_total, "k": k},
        )
    t_best = min(max(lo_t, round(math.exp(target_h * k))), hi_t)
    cap = k1_cap if k1_cap is not None else 6 * k

    def sub_states(lo, hi):
        return [a * k + p for a in range(lo, hi) for p in range(k)]

    tried = []
    for off in range(hi_t - lo_t + 1):
        for t in ([t_best + off, t_best - off] if off else [t_best]):
            if not (lo_t <= t <= hi_t):
                continue
            y_sub = induced_subshift(shift, sub_states(0, t))
            d = weak_star_distance(parry_measure(y_sub), m, cfg)
            tried.append((t, math.log(t) / k, d))
            if d > kappa:
                continue
            z_sub = induced_subshift(shift, sub_states(t, t + 2))
            for kk in range(1, cap + 1):
                if languages_disjoint(y_sub, z_sub, kk, budget=budget):
                    return SubsystemPair(Y=y_sub, Z=z_sub, K1=kk)
            diagnostics["k1_cap"] = f"languages still meet at depth {cap}"
    diagnostics["tried"] = tried[:16]
    raise SubsystemSearchError(
        "no sub-code satisfied the entropy/measure constraints",
        diagnostics=diagnostics,
    )


@dataclass
class Stage:
    """One level of the tower: the shift, its maximal measure, provenance."""

    index: int
    shift: VertexShift
    measure: MarkovMeasure
    code: Code = None
    sync_depth: int = 1
    sync_depths: tuple = (1,)
    params: StageParams = None


@dataclass(frozen=True)
class CheckItem:
    name: str
    ok: bool
    detail: str


@dataclass
class StageReport:
    """Verified inequality values for one built stage."""

    index: int
    k: int
    gamma_size: int
    h_top: float
    entropy_identity: tuple  # (value, k-th root target, abs diff)
    entropy_window: tuple  # (lower, value, upper)
    roof_window: tuple  # (lower, min over eta, max over eta, upper)
    roof_integral_next: float
    measure_distance: tuple  # (max over eta, threshold)
    distance_to_prev: float  # parry(next) vs prev measure
    ud_ok: bool
    overlap: dict  # l, border, M, K1
    nesting: tuple  # ((depth, ok), ...)
    language_sync: tuple  # ((depth, ok, note), ...)
    saturation: tuple  # ((depth_from, depth_to, ok, note), ...)
    normalized_entropy: float
    bracket: tuple  # (lower, upper)
    eta_count: int
    artifacts: object = None  # BuildArtifacts, attached by build_stage

    def items(self):
        lo, v, hi = self.entropy_window
        rlo, rmin, rmax, rhi = self.roof_window
        dmax, thr = self.measure_distance
        out = [
            CheckItem(
                "entropy_identity",
                self.entropy_identity[2] < 1e-9,
                f"|h_top - log(gamma)/k| = {self.entropy_identity[2]:.3e}",
            ),
            CheckItem(
                "entropy_window",
                lo <= v <= hi,
                f"{lo:.6g} <= {v:.6g} <= {hi:.6g}",
            ),
            CheckItem(
                "roof_window",
                rlo < rmin and rmax < rhi,
                f"{rlo:.6g} < [{rmin:.6g}, {rmax:.6g}] < {rhi:.6g}",
            ),
            CheckItem(
                "measure_distance",
                dmax <= thr,
                f"max eta distance {dmax:.6g} <= {thr:.6g}",
            ),
            CheckItem("unique_decipherability", self.ud_ok, "sardinas-patterson"),
            CheckItem(
                "overlap_structure",
                self.overlap["ok"],
                f"l={self.overlap['l']} > 4(M+K1)={4 * (self.overlap['M'] + self.overlap['K1'])}, "
                f"border={self.overlap['border']} < l/4",
            ),
            CheckItem(
                "bracket",
                self.bracket[0] <= self.normalized_entropy <= self.bracket[1],
                f"{self.bracket[0]:.6g} <= {self.normalized_entropy:.6g} <= {self.bracket[1]:.6g}",
            ),
        ]
        for depth, ok in self.nesting:
            out.append(CheckItem(f"nesting_depth_{depth}", ok, "language containment"))
        for depth, ok, note in self.language_sync:
            out.append(CheckItem(f"language_sync_{depth}", ok, note))
        for d_from, d_to, ok, note in self.saturation:
            out.append(CheckItem(f"saturation_{d_from}_in_{d_to}", ok, note))
        return out

    @property
    def all_pass(self):
        return all(item.ok for item in self.items())

    def failing(self):
        return [item for item in self.items() if not item.ok]


@dataclass(frozen=True)
class RunSettings:
    """Run-wide verification knobs."""

    seed: int = 0
    samples: int = 32
    nesting_depths: tuple = (1, 2, 3, 4)
    sync_cap: int = 4096
    budget: int = DEFAULT_WORD_BUDGET
    check_extreme_cycles: bool = True


class _CyclicTable:
    """Cylinder tables of the periodic-orbit measure of one code word."""

    def __init__(self, word, ambient_size):
        self.word = tuple(word)
        self.ambient_size = ambient_size

    def cylinder_table(self, depth, budget=DEFAULT_WORD_BUDGET):
        w, n = self.word, len(self.word)
        ext = w + w[: depth - 1]
        counts = {}
        for i in range(n):
            key = ext[i : i + depth]
            counts[key] = counts.get(key, 0) + 1
        return {kk: c / n for kk, c in counts.items()}


def _cycle_roof_average(word, rho):
    ext = word + word[: rho.depth - 1]
    return sum(rho(ext[i : i + rho.depth]) for i in range(len(word))) / len(word)


@dataclass
class BuildArtifacts:
    """Intermediate objects kept for inspection and tests."""

    Y: VertexShift = None
    Z: VertexShift = None
    gamma: tuple = ()
    low_overlap_word: tuple = ()
    connector_in: tuple = ()
    connector_out: tuple = ()
    c1: float = 0.0


def build_stage(prev, target, params, settings=None, code_hook=None):
    """Assemble stage prev.index + 1 and verify every inequality.

    Raises StageVerificationError (with the report attached) when any
    verified window fails; sub-operation errors propagate.
    """
    settings = settings or RunSettings()
    art = BuildArtifacts()
    c1 = derive_c1(target, params, prev.measure)
    art.c1 = c1
    pair = select_disjoint_subsystems(
        prev.shift,
        prev.measure,
        c1,
        params.kappa,
        params.metric,
        block_depth=params.block_depth,
        entropy_target=params.entropy_target,
        roof=target.rho,
        roof_target=roof_integral(prev.measure, target.rho),
        budget=settings.budget,
    )
    art.Y, art.Z = pair.Y, pair.Z

    katok = katok_separated_set(
        pair.Y,
        parry_measure(pair.Y),
        params.word_length,
        params.kappa,
        params.effective_radius,
        params.metric,
        budget=settings.budget,
    )
    gamma, start_state, end_state = pigeonhole_refine(katok.words, pair.Y)

    def prev_word_of(sub, word, with_tail):
        sw = sub.state_words
        out = [sw[s][0] for s in word]
        if with_tail:
            out.extend(sw[word[-1]][1:])
        return tuple(out)

    start_prev = pair.Y.state_words[start_state][0]
    end_prev = pair.Y.state_words[end_state][-1]

    # connection-time bound over every state the low-overlap word may touch
    z_prev_states = sorted({sw[0] for sw in pair.Z.state_words})
    times_out = _bfs_times(prev.shift, end_prev, reverse=False)
    times_in = _bfs_times(prev.shift, start_prev, reverse=True)
    M = 1
    for z in z_prev_states:
        if times_out.get(z) is None or times_in.get(z) is None:
            raise SubsystemSearchError(
                f"state {z} of Z is not connected to the separated set"
            )
        M = max(M, times_out[z], times_in[z])

    l_eff = max(params.overlap_length, 4 * (M + pair.K1) + 1)
    w_internal = find_low_overlap_word(pair.Z, l_eff, budget=settings.budget)
    w_prev = prev_word_of(pair.Z, w_internal, with_tail=False)
    art.low_overlap_word = w_prev

    c_u = connecting_word(prev.shift, end_prev, w_prev[0])
    c_v = connecting_word(prev.shift, w_prev[-1], start_prev)
    glue_in, glue_out = c_u[1:-1], c_v[1:-1]
    art.connector_in, art.connector_out = glue_in, glue_out

    label_words = {}
    for g in gamma:
        internal = glue_out + prev_word_of(pair.Y, g, with_tail=True) + glue_in + w_prev
        if not is_admissible(prev.shift, internal):
            raise StageVerificationError(
                f"assembled word is not admissible in stage {prev.index}"
            )
        lw = label_word(prev.shift, internal)
        label_words.setdefault(lw, internal)
    # cyclic splice: end of the low-overlap word back into the next block
    first_internal = next(iter(label_words.values()))
    if not is_admissible(prev.shift, (w_prev[-1],) + first_internal[:1]):
        raise StageVerificationError("cyclic splice is not admissible")
    art.gamma = tuple(sorted(label_words))

    code = Code(tuple(label_words))
    if code_hook is not None:
        code = code_hook(code)
    if not is_uniquely_decipherable(code):
        raise NotUniquelyDecipherableError(
            "assembled code failed the unique-decipherability assertion"
        )

    next_shift = renewal_to_sft(code, ambient_size=target.base.ambient_size)
    next_measure = parry_measure(next_shift)
    sync_depth = _sync_depth(next_shift, prev.sync_depth, settings)
    stage = Stage(
        index=prev.index + 1,
        shift=next_shift,
        measure=next_measure,
        code=code,
        sync_depth=sync_depth,
        sync_depths=prev.sync_depths + (sync_depth,),
        params=params,
    )
    report = verify_stage(
        prev,
        stage,
        target,
        params,
        settings=settings,
        overlap_data={
            "l": l_eff,
            "border": max_self_overlap(label_word(prev.shift, w_prev)),
            "M": M,
            "K1": pair.K1,
            "disjoint": languages_disjoint(pair.Y, pair.Z, pair.K1, budget=settings.budget),
        },
    )
    report.artifacts = art
    if not report.all_pass:
        names = ", ".join(i.name for i in report.failing())
        raise StageVerificationError(
            f"stage {stage.index} failed verification: {names}",
            stage=stage,
            report=report,
        )
    return stage, report


def _bfs_times(shift, origin, reverse):
    """Connection times (>= 1 edge) from/to origin for every state."""
    nbrs = shift.predecessors if reverse else shift.successors
    dist = {}
    queue = deque()
    for s in nbrs(origin):
        if s not in dist:
            dist[s] = 1
            queue.append(s)
    while queue:
        u = queue.popleft()
        for v in nbrs(u):
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def _sync_depth(shift, prev_depth, settings):
    """Smallest depth whose words contain every prev-depth word, or None."""
    try:
        patterns = label_language(shift, prev_depth, budget=settings.budget)
    except CapacityError:
        return None
    worst = 0
    for v in patterns:
        m = longest_window_avoiding(shift, v)
        if m is None:
            return None
        worst = max(worst, m)
    s = worst + 1
    return s if s <= settings.sync_cap else None


def verify_stage(prev, stage, target, params, settings=None, overlap_data=None):
    """Evaluate every stage inequality; failures are data, not exceptions."""
    settings = settings or RunSettings()
    rng = np.random.default_rng([settings.seed, stage.index])
    c, rho = target.c, target.rho
    d = params.delta
    ri_prev = roof_integral(prev.measure, rho)
    h_top = topological_entropy(stage.shift)
    k = stage.code.uniform_length if stage.code else None
    gamma_size = len(stage.code) if stage.code else 0
    if k:
        ident_target = math.log(gamma_size) / k
    else:
        ident_target = h_top
    lo_e, hi_e = (1 + d) ** 2 * c * ri_prev, (1 + 3 * d) * c * ri_prev

    etas = [("parry", stage.measure)]
    if settings.check_extreme_cycles and stage.code is not None:
        for idx, wd in enumerate(stage.code.words):
            etas.append((f"cycle_{idx}", _CyclicTable(wd, stage.shift.ambient_size)))
    for i in range(settings.samples):
        etas.append((f"sample_{i}", random_markov_measure(stage.shift, rng)))

    roof_vals = []
    dists = []
    for name, eta in etas:
        if isinstance(eta, _CyclicTable):
            roof_vals.append(_cycle_roof_average(eta.word, rho))
        else:
            roof_vals.append(roof_integral(eta, rho))
        dists.append(weak_star_distance(eta, prev.measure, params.metric))
    ri_next = roof_vals[0]
    dist_prev = dists[0]

    nesting = []
    for depth in settings.nesting_depths:
        ok = all(
            is_label_admissible(prev.shift, w)
            for w in label_language(stage.shift, depth, budget=settings.budget)
        )
        nesting.append((depth, ok))

    sync_checks = []
    for j, s_j in enumerate(prev.sync_depths):
        if s_j is None:
            sync_checks.append((0, False, f"stage {j} sync depth uncertified"))
            continue
        ok, note = _languages_agree(stage.shift, prev.shift, s_j, settings.budget)
        sync_checks.append((s_j, ok, note))

    saturation = []
    if stage.sync_depth is None:
        saturation.append((prev.sync_depth or 0, 0, False, "sync depth search capped"))
    else:
        for j, s_j in enumerate(stage.sync_depths[:-1]):
            if s_j is None:
                saturation.append((0, stage.sync_depth, False, "uncertified"))
                continue
            ok, note = _saturated(stage.shift, s_j, stage.sync_depth, settings)
            saturation.append((s_j, stage.sync_depth, ok, note))

    norm = abramov(h_top, ri_next)
    bracket = (c * (1 + d) ** 2 / (1 + d), c * (1 + 3 * d) / (1 - d))

    report = StageReport(
        index=stage.index,
        k=k or 0,
        gamma_size=gamma_size,
        h_top=h_top,
        entropy_identity=(h_top, ident_target, abs(h_top - ident_target)),
        entropy_window=(lo_e, h_top, hi_e),
        roof_window=((1 - d) * ri_prev, min(roof_vals), max(roof_vals), (1 + d) * ri_prev),
        roof_integral_next=ri_next,
        measure_distance=(max(dists), 2 * params.kappa),
        distance_to_prev=dist_prev,
        ud_ok=(stage.code is None or is_uniquely_decipherable(stage.code)),
        overlap=dict(
            ok=(
                overlap_data is not None
                and overlap_data["l"] > 4 * (overlap_data["M"] + overlap_data["K1"])
                and overlap_data["border"] < overlap_data["l"] / 4
                and overlap_data["disjoint"]
            ),
            **(overlap_data or dict(l=0, border=0, M=0, K1=0, disjoint=False)),
        ),
        nesting=tuple(nesting),
        language_sync=tuple(sync_checks),
        saturation=tuple(saturation),
        normalized_entropy=norm,
        bracket=bracket,
        eta_count=len(etas),
    )
    return report


def _languages_agree(a, b, depth, budget):
    """Equality of label languages at the given depth, with early exit."""
    try:
        for w in label_language(a, depth, budget=budget):
            if not is_label_admissible(b, w):
                return False, f"word of stage language missing upstream at depth {depth}"
        missing = _first_missing(b, a, depth)
        if missing is not None:
            return False, "upstream language strictly larger"
        return True, f"languages agree at depth {depth}"
    except CapacityError:
        return False, f"depth {depth} beyond enumeration budget"


def _first_missing(src, dst, depth):
    """First label word of src (lexicographic) that dst does not admit."""
    lab = np.asarray(src.labels)
    masks = [lab == x for x in range(src.ambient_size)]
    matT = src.matrix.T.tocsr().astype(np.float32)

    def rec(prefix, cur):
        if len(prefix) == depth:
            return None if is_label_admissible(dst, prefix) else prefix
        nxt = (matT @ cur) > 0
        for x in range(src.ambient_size):
            step = nxt & masks[x]
            if step.any():
                hit = rec(prefix + (x,), step)
                if hit is not None:
                    return hit
        return None

    for x in range(src.ambient_size):
        if masks[x].any():
            hit = rec((x,), masks[x].copy())
            if hit is not None:
                return hit
    return None


def _saturated(shift, depth_from, depth_to, settings):
    """Every depth_from word occurs inside every depth_to word."""
    try:
        patterns = label_language(shift, depth_from, budget=settings.budget)
    except CapacityError:
        return False, f"depth {depth_from} beyond enumeration budget"
    for v in patterns:
        m = longest_window_avoiding(shift, v)
        if m is None or m >= depth_to:
            return False, f"window of length {m} avoids a depth-{depth_from} word"
    return True, f"all depth-{depth_from} words occur in every depth-{depth_to} word"


def normalized_entropy(stage, rho):
    """Suspension entropy of the stage under its own maximal measure."""
    return abramov(
        topological_entropy(stage.shift), roof_integral(stage.measure, rho)
    )


@dataclass
class TowerResult:
    stages: list
    reports: list  # aligned with stages; None for the base
    error: Exception = None

    @property
    def ok(self):
        return self.error is None and all(
            r is None or r.all_pass for r in self.reports
        )


def base_stage(target):
    return Stage(
        index=0,
        shift=target.base,
        measure=target.base_measure,
        code=None,
        sync_depth=1,
        sync_depths=(1,),
        params=None,
    )


def iterate(target, stages, schedule, settings=None):
    """Build the nested tower stage by stage.

    Returns the partial tower with the error attached when a stage fails;
    the schedule must satisfy the delta/kappa decay constraints.
    """
    settings = settings or RunSettings()
    schedule = list(schedule)
    if len(schedule) < stages:
        raise ValueError(f"schedule provides {len(schedule)} of {stages} stages")
    validate_schedule(schedule[:stages])
    tower = TowerResult(stages=[base_stage(target)], reports=[None])
    for i in range(stages):
        try:
            stage, report = build_stage(
                tower.stages[-1], target, schedule[i], settings=settings
            )
        except StageVerificationError as exc:
            tower.error = exc
            if exc.stage is not None:
                tower.stages.append(exc.stage)
                tower.reports.append(exc.report)
            return tower
        except Exception as exc:  # noqa: BLE001 - partial tower per contract
            tower.error = exc
            return tower
        tower.stages.append(stage)
        tower.reports.append(report)
    return tower

"""Reproducible desk-scale experiment scenarios and their result records.

Every metric a scenario emits is tagged with the claim it probes, drawn
from a fixed per-scenario registry; a run fails if a registered claim ends
up with no executed check (coverage guard).  Identical config + seed gives
a byte-identical metrics payload.
"""

from __future__ import annotations

import csv
import json
import platform
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .corpus import (boundedness_corpus, rng_for, random_band_limited_field,
                     random_sparse_symbol, lacunary_stack, standard_ching)
from .errors import ConfigError
from .lp import dyadic_block, make_modulation, make_partition
from .operators import (apply, compose_multiplier, modulated_apply,
                        modulation_limit, para_split, spectral_support_bound,
                        support_inclusions)
from .pointwise import (MaxParams, check_factorization, hl_max, mihlin_bound,
                        paraterm_pointwise_check, peetre_max, symbol_factor,
                        yamazaki_check)
from .spaces import (NormSpec, fefferman_stein_check, marschall_check,
                     space_norm)
from .symbols import ChingProfile, DiscreteSymbol, LocalizationCutoff, localize
from .torus import TorusGrid

SCENARIOS = ("boundedness_sweep", "ching_study", "modulation_study",
             "inequality_suite")

#: Claims each scenario must cover with at least one executed metric.
CLAIM_REGISTRY = {
    "boundedness_sweep": {
        "lacunary_growth_below_threshold",
        "stability_in_smooth_region",
        "refinement_stability",
    },
    "ching_study": {
        "zero_order_moves_threshold",
        "adjoint_seminorm_blowup",
    },
    "modulation_study": {
        "modulation_independence",
        "divergence_indicator",
    },
    "inequality_suite": {
        "factorization_inequality",
        "mihlin_type_symbol_factor_bound",
        "paradifferential_reconstruction",
        "corona_ball_inclusions",
        "tdc_diagonal_corona",
        "paraterm_pointwise_estimates",
        "cumulative_sum_inequality",
        "peetre_hardy_littlewood_domination",
        "fefferman_stein_chain",
        "marschall_inequality",
        "multiplier_composition_domain",
        "spectral_support_rule",
    },
}

#: Regression margins frozen from seeded calibration sweeps.
FROZEN_THRESHOLDS = {
    "factorization_ratio": 1.0 + 1e-6,
    "mihlin_margin": 2.0,
    "reconstruction_abs": 1e-10,
    "paraterm_max_ratio": 1.0 + 1e-6,
    "paraterm_slope": 0.5,
    "peetre_hl_constant": 3.0,
    "fs_chain_ratio": 4.0,
    "marschall_constant": 1.5,
    "composition_rel": 1e-10,
}


@dataclass
class ExperimentConfig:
    """Validated description of one scenario run."""

    scenario: str
    grid_n: int = 1
    grid_sizes: tuple = (256,)
    partition_r: float = 1.0
    partition_R: float = 2.0
    symbol_family: str = "ching"
    symbol_params: dict = field(default_factory=dict)
    norm_specs: tuple = ()
    modulations: tuple = ((1.0, 2.0), (1.5, 2.5), (0.75, 1.75))
    seed: int = 0
    corpus_size: int = 3
    max_matrix_dim: int = 256
    out_dir: str | None = None

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        doc = json.loads(Path(path).read_text())
        known = {f for f in cls.__dataclass_fields__}
        extra = set(doc) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        cfg = cls(**{k: v for k, v in doc.items()})
        return cfg.normalized()

    def normalized(self) -> "ExperimentConfig":
        self.grid_sizes = tuple(int(N) for N in self.grid_sizes)
        self.modulations = tuple((float(r), float(R)) for r, R in self.modulations)
        self.norm_specs = tuple(
            (str(t[0]), float(t[1]), float(t[2]), float(t[3]))
            for t in self.norm_specs)
        self.validate()
        return self

    def validate(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}; "
                              f"choose one of {SCENARIOS}")
        if self.grid_n not in (1, 2):
            raise ConfigError("grid_n must be 1 or 2")
        for N in self.grid_sizes:
            if N < 16 or (N & (N - 1)) != 0:
                raise ConfigError(f"grid size {N} must be a power of two >= 16")
        if not (0 < self.partition_r < self.partition_R):
            raise ConfigError("partition radii must satisfy 0 < r < R")
        if self.partition_R >= min(self.grid_sizes) / 2:
            raise ConfigError("partition support exceeds the smallest nyquist")
        for r, R in self.modulations:
            if not (0 < r < R):
                raise ConfigError("modulation radii must satisfy 0 < r < R")
        if self.symbol_family not in ("ching", "multiplier", "identity",
                                      "random", "custom"):
            raise ConfigError(f"unknown symbol family {self.symbol_family!r}")
        if self.scenario in ("boundedness_sweep", "ching_study") \
                and self.symbol_family != "ching":
            raise ConfigError(f"{self.scenario} sweeps the lacunary family; "
                              f"set symbol_family='ching'")


@dataclass
class ResultRecord:
    """Scenario outcome; ``metrics`` is the deterministic payload."""

    scenario: str
    params: dict
    metrics: dict
    wall_time_s: float
    tool_version: str = __version__

    def metrics_payload(self) -> bytes:
        """Canonical bytes of the metrics block (used by determinism checks)."""
        return json.dumps(self.metrics, sort_keys=True,
                          separators=(",", ":")).encode()

    def covered_claims(self) -> set:
        return {m.get("claim") for m in self.metrics.values()
                if isinstance(m, dict) and "claim" in m}


def _f(x) -> float:
    return float(x)


def _grid_gain(a: DiscreteSymbol, items, spec_src: NormSpec,
               spec_dst: NormSpec, part) -> dict:
    """Squared quasi-norm amplification sup_u ||a#u||^2 / ||u||^2 over the
    corpus (the energy gain; the plain ratio is its square root)."""
    best, best_name = 0.0, None
    for name, u in items:
        src = space_norm(u, spec_src, part)
        if src == 0.0:
            continue
        dst = space_norm(apply(a, u), spec_dst, part)
        g = (dst / src) ** 2
        if g > best:
            best, best_name = g, name
    return {"gain": _f(best), "argmax": best_name}


def run_boundedness_sweep(cfg: ExperimentConfig) -> ResultRecord:
    """Norm-ratio sweep over truncation levels and grid sizes.

    For each admissible (J, N) the energy gain of the lacunary symbol is
    estimated over an adversarial-plus-random corpus, for every requested
    (s, p, q).  Growth across J at the unbounded smoothness and stability
    in the bounded region are summarized per grid size.
    """
    t0 = time.monotonic()
    params = cfg.symbol_params
    d = float(params.get("d", 0.0))
    zero_order = int(params.get("zero_order", 0))
    J_values = tuple(int(j) for j in params.get("J_values", (3, 4, 5, 6, 7, 8)))
    specs = cfg.norm_specs or (("F", 0.0, 2.0, 2.0), ("F", 1.0, 2.0, 2.0))
    theta = (1,) + (0,) * (cfg.grid_n - 1)
    profile = ChingProfile(zero_order=zero_order,
                           theta_hat=tuple(float(t) for t in theta))
    rows, norm_rows = [], []
    for N in cfg.grid_sizes:
        grid = TorusGrid(cfg.grid_n, N)
        part = make_partition(make_modulation(cfg.partition_r,
                                              cfg.partition_R), grid)
        ref = lacunary_stack(grid, theta, min(J_values),
                             np.ones(min(J_values) + 1))
        for scale, s, p, q in specs:
            norm_rows.append({"scale": scale, "s": _f(s), "p": _f(p),
                              "q": _f(q), "N": N,
                              "value": _f(space_norm(
                                  ref, NormSpec(scale, s, p, q), part))})
        for J in J_values:
            if 5 * 2 ** (J - 2) >= grid.nyquist:
                continue  # lacunary truncation not representable on this grid
            a = standard_ching(grid, d, J, zero_order)
            for scale, s, p, q in specs:
                corp = boundedness_corpus(grid, theta, J, s + d, cfg.seed,
                                          profile=profile,
                                          n_random=cfg.corpus_size)
                res = _grid_gain(a, corp, NormSpec(scale, s + d, p, q),
                                 NormSpec(scale, s, p, q), part)
                rows.append({"N": N, "J": J, "scale": scale, "s": _f(s),
                             "p": _f(p), "q": _f(q), "gain": res["gain"],
                             "argmax": res["argmax"]})
    growth, stability = {}, {}
    for scale, s, p, q in specs:
        key = f"{scale}_s{s}_p{p}_q{q}"
        sub = [r for r in rows if (r["scale"], r["s"], r["p"], r["q"])
               == (scale, _f(s), _f(p), _f(q))]
        per_N = {}
        for N in cfg.grid_sizes:
            js = sorted(r["J"] for r in sub if r["N"] == N)
            if len(js) < 2:
                continue
            lo = next(r for r in sub if r["N"] == N and r["J"] == js[0])
            hi = next(r for r in sub if r["N"] == N and r["J"] == js[-1])
            per_N[str(N)] = {"J_lo": js[0], "J_hi": js[-1],
                             "gain_lo": lo["gain"], "gain_hi": hi["gain"],
                             "factor": _f(hi["gain"] / lo["gain"])
                             if lo["gain"] > 0 else 0.0}
        gains = [r["gain"] for r in sub if r["gain"] > 0]
        span = _f(max(gains) / min(gains) - 1.0) if gains else 0.0
        growth[key] = per_N
        stability[key] = {"relative_span": span}
    # refinement stability: at the smallest J present everywhere, the gain
    # must not drift across N (band-limited content is grid-exact)
    drift = {}
    for scale, s, p, q in specs:
        sub = [r for r in rows if (r["scale"], r["s"], r["p"], r["q"])
               == (scale, _f(s), _f(p), _f(q)) and r["J"] == min(J_values)]
        gains = [r["gain"] for r in sub]
        if gains:
            drift[f"{scale}_s{s}"] = _f(max(gains) / min(gains) - 1.0) \
                if min(gains) > 0 else 0.0
    metrics = {
        "gain_table": {"claim": "lacunary_growth_below_threshold",
                       "rows": rows},
        "norm_table": {"claim": "refinement_stability", "rows": norm_rows},
        "growth_factors": {"claim": "lacunary_growth_below_threshold",
                           "per_spec": growth},
        "stability_spans": {"claim": "stability_in_smooth_region",
                            "per_spec": stability},
        "refinement_drift": {"claim": "refinement_stability",
                             "per_spec": drift},
    }
    return _finish(cfg, metrics, t0)


def run_ching_study(cfg: ExperimentConfig) -> ResultRecord:
    """Gain curves over smoothness s for profile zero orders 0, 1, 2.

    The empirical stability threshold (smallest s on the grid whose gain
    curve stays within 20% across truncations) must move down as the zero
    order increases; only this monotonicity is asserted, not the exact
    threshold location.
    """
    t0 = time.monotonic()
    params = cfg.symbol_params
    d = float(params.get("d", 0.0))
    J_values = tuple(int(j) for j in params.get("J_values", (3, 5, 6)))
    s_values = tuple(float(s) for s in params.get(
        "s_values", (-2.0, -1.5, -1.0, -0.5, 0.0, 0.5, 1.0)))
    zero_orders = tuple(int(z) for z in params.get("zero_orders", (0, 1, 2)))
    # off-ray coherent probes sharpen the threshold location for zero
    # orders >= 1 but deliberately chase the slowly-converging extremal
    # direction; off by default so stability verdicts reflect the
    # grid-stable corpus
    probe_offsets = bool(params.get("probe_offsets", False))
    N = max(cfg.grid_sizes)
    grid = TorusGrid(cfg.grid_n, N)
    part = make_partition(make_modulation(cfg.partition_r, cfg.partition_R),
                          grid)
    theta = (1,) + (0,) * (cfg.grid_n - 1)
    curves, thresholds = {}, {}
    for rho in zero_orders:
        profile = ChingProfile(zero_order=rho,
                               theta_hat=tuple(float(t) for t in theta))
        per_s = {}
        for s in s_values:
            gains = []
            for J in J_values:
                if 5 * 2 ** (J - 2) >= grid.nyquist:
                    continue
                a = standard_ching(grid, d, J, rho)
                corp = boundedness_corpus(grid, theta, J, s + d, cfg.seed,
                                          profile=profile if probe_offsets else None,
                                          n_random=cfg.corpus_size)
                res = _grid_gain(a, corp, NormSpec("F", s + d, 2.0, 2.0),
                                 NormSpec("F", s, 2.0, 2.0), part)
                gains.append({"J": J, "gain": res["gain"]})
            pos = [g["gain"] for g in gains if g["gain"] > 0]
            variation = _f(max(pos) / min(pos) - 1.0) if pos else 0.0
            verdict = "stable" if variation < 0.2 else (
                "growth" if gains and gains[-1]["gain"]
                >= 2.0 * gains[0]["gain"] * (1.0 - 1e-9)
                else "indeterminate")
            per_s[f"{s}"] = {"gains": gains, "variation": variation,
                             "verdict": verdict}
        curves[f"rho{rho}"] = per_s
        stable_s = [float(s) for s in s_values
                    if per_s[f"{s}"]["verdict"] == "stable"]
        thresholds[f"rho{rho}"] = _f(min(stable_s)) if stable_s else np.inf
    ordered = [thresholds[f"rho{rho}"] for rho in zero_orders]
    # dense-matrix probe of the adjoint symbol: its seminorms grow with the
    # truncation when the profile does not vanish on the ray
    probe_N = min(cfg.max_matrix_dim, 256)
    probe = {}
    if probe_N >= 16:
        pgrid = TorusGrid(1, probe_N)
        from .operators import discrete_adjoint_probe
        for J in (2, 4):
            if 5 * 2 ** (J - 2) >= pgrid.nyquist:
                continue
            rep = discrete_adjoint_probe(standard_ching(pgrid, d, J),
                                         max_dim=cfg.max_matrix_dim)
            probe[f"J{J}"] = {k: v["adjoint"]
                              for k, v in rep["seminorms"].items()}
    metrics = {
        "gain_curves": {"claim": "zero_order_moves_threshold",
                        "curves": curves},
        "stability_thresholds": {"claim": "zero_order_moves_threshold",
                                 "thresholds": thresholds,
                                 "monotone": bool(all(
                                     a >= b for a, b in zip(ordered, ordered[1:])))},
        "adjoint_probe": {"claim": "adjoint_seminorm_blowup",
                          "seminorms_by_J": probe,
                          "max_matrix_dim": cfg.max_matrix_dim},
    }
    return _finish(cfg, metrics, t0)


def build_symbol(cfg: ExperimentConfig, grid: TorusGrid) -> DiscreteSymbol:
    """Materialize the configured symbol family on a grid."""
    params = cfg.symbol_params
    d = float(params.get("d", 0.0))
    family = cfg.symbol_family
    if family == "ching":
        J = params.get("J")
        if J is None:
            J = int(np.floor(np.log2(grid.nyquist / 1.25))) - 1
        return standard_ching(grid, d, int(J),
                              int(params.get("zero_order", 0)),
                              one_sided=bool(params.get("one_sided", True)))
    if family == "identity":
        return DiscreteSymbol.identity(grid)
    if family == "multiplier":
        return DiscreteSymbol.multiplier(
            grid, lambda *k: (1.0 + sum(x**2 for x in k)) ** (d / 2.0), d=d)
    if family == "random":
        return random_sparse_symbol(grid, rng_for(cfg.seed, 2), d=d,
                                    x_band=grid.nyquist / 8,
                                    eta_band=grid.nyquist / 4)
    table = Path(params["table"]).read_text()
    return DiscreteSymbol.from_json(grid, table)


def run_modulation_study(cfg: ExperimentConfig) -> ResultRecord:
    """Vanishing-modulation limits across cutoffs, inputs, and refinements.

    Band-limited inputs must converge with cutoff-independent limits; the
    default one-sided lacunary symbol applied to its adversarial stack shows
    a non-decaying difference profile that persists under grid refinement
    (the divergence indicator; never reported as a proof)."""
    t0 = time.monotonic()
    if len(cfg.modulations) < 3:
        raise ConfigError("modulation_study needs >= 3 cutoffs")
    psis = [make_modulation(r, R) for r, R in cfg.modulations]
    tail_by_N = {}
    conv_rows = []
    for N in cfg.grid_sizes:
        grid = TorusGrid(cfg.grid_n, N)
        J = int(np.floor(np.log2(grid.nyquist / 1.25))) - 1
        a = build_symbol(cfg, grid)
        # nice corpus: random band-limited inputs
        for i in range(cfg.corpus_size):
            u = random_band_limited_field(grid, rng_for(cfg.seed, 3, i), 10.0)
            rep = modulation_limit(a, u, psis, tol=1e-10)
            conv_rows.append({"N": N, "input": f"random_{i}",
                              "converged": rep.converged,
                              "verdict": "converged" if rep.converged
                              else "divergence_indicator",
                              "stabilization_m": rep.stabilization_m,
                              "psi_discrepancy": _f(rep.psi_discrepancy),
                              "profile": [_f(x) for x in rep.cauchy_profile[0]]})
        # adversarial stack riding the lacunary ray
        theta = (1,) + (0,) * (cfg.grid_n - 1)
        u_bad = lacunary_stack(grid, theta, J, np.ones(J + 1))
        rep = modulation_limit(a, u_bad, psis, tol=1e-10)
        profile = rep.cauchy_profile[0]
        # last difference before the exact saturation tail
        nonzero = [x for x in profile if x > 1e-13]
        tail_by_N[N] = _f(nonzero[-1]) if nonzero else 0.0
        conv_rows.append({"N": N, "input": "lacunary_stack",
                          "converged": rep.converged,
                          "verdict": "converged" if rep.converged
                          else "divergence_indicator",
                          "stabilization_m": rep.stabilization_m,
                          "psi_discrepancy": _f(rep.psi_discrepancy),
                          "profile": [_f(x) for x in profile]})
    Ns = sorted(tail_by_N)
    tails = [tail_by_N[N] for N in Ns]
    non_decaying = bool(all(b >= 0.5 * a for a, b in zip(tails, tails[1:]))
                        and tails[-1] > 1e-6) if len(tails) > 1 else False
    metrics = {
        "limits": {"claim": "modulation_independence", "rows": conv_rows},
        "divergence_indicator": {
            "claim": "divergence_indicator",
            "pre_saturation_tail_by_N": {str(N): tail_by_N[N] for N in Ns},
            "flag": non_decaying,
        },
    }
    return _finish(cfg, metrics, t0)


def run_inequality_suite(cfg: ExperimentConfig) -> ResultRecord:
    """Every pointwise and summed inequality checker over a seeded corpus,
    with one pass/fail line per check against the frozen thresholds."""
    t0 = time.monotonic()
    N = max(cfg.grid_sizes)
    grid = TorusGrid(cfg.grid_n, N)
    psi = make_modulation(cfg.partition_r, cfg.partition_R)
    part = make_partition(psi, grid)
    checks = []

    def add(name, claim, max_ratio, threshold, extra=None, params=None):
        entry = {"name": name, "claim": claim,
                 "params": params or {"N": N, "seed": cfg.seed},
                 "max_ratio": _f(max_ratio), "threshold": _f(threshold),
                 "pass": bool(max_ratio <= threshold)}
        if extra:
            entry.update(extra)
        checks.append(entry)

    symbols = [
        ("identity", DiscreteSymbol.identity(grid)),
        ("ching", standard_ching(grid, 0.0, 4)),
        ("bessel_multiplier",
         DiscreteSymbol.multiplier(grid, lambda *k: (1.0 + sum(x**2 for x in k)) ** 0.5,
                                   d=1.0)),
    ]
    for i in range(cfg.corpus_size):
        symbols.append((f"random_{i}",
                        random_sparse_symbol(grid, rng_for(cfg.seed, 11, i),
                                             d=0.0, x_band=grid.nyquist / 8,
                                             eta_band=grid.nyquist / 8)))
    fields = [random_band_limited_field(grid, rng_for(cfg.seed, 13, i), 12.0)
              for i in range(max(cfg.corpus_size, 2))]

    # factorization inequality
    p_fact = MaxParams(N=2.0, R=16.0)
    worst = 0.0
    for _, a in symbols:
        for u in fields:
            worst = max(worst,
                        check_factorization(a, u, p_fact)["max_ratio"])
    add("factorization", "factorization_inequality", worst,
        FROZEN_THRESHOLDS["factorization_ratio"])

    # Mihlin-type bound on the symbol factor
    p_m = MaxParams(N=1.0, R=8.0)
    worst = 0.0
    for _, a in symbols:
        Fa = symbol_factor(a, p_m, psi)
        rhs = mihlin_bound(a, p_m, psi)
        mask = rhs > 0
        if mask.any():
            worst = max(worst, float(np.max(Fa[mask] / rhs[mask])))
    add("mihlin_symbol_factor", "mihlin_type_symbol_factor_bound", worst,
        FROZEN_THRESHOLDS["mihlin_margin"])

    # paradifferential reconstruction + corona/ball inclusions + pointwise;
    # one wide-band input keeps the upper dyadic levels active so the
    # scale-constant trend diagnostic has data
    u_wide = random_band_limited_field(grid, rng_for(cfg.seed, 29),
                                       0.8 * part.r * 2**part.J_max, modes=40)
    worst_rec, worst_viol, worst_ratio, worst_slope = 0.0, 0, 0.0, 0.0
    m = part.J_max
    for _, a in symbols:
        for u in (fields[0], u_wide):
            split = para_split(a, u, part, m)
            ref = modulated_apply(a, u, psi, m)
            err = float(np.max(np.abs(split.total().values - ref.values)))
            scale = max(ref.norm_inf(), 1.0)
            worst_rec = max(worst_rec, err / scale)
            rep = support_inclusions(split)
            worst_viol = max(worst_viol, len(rep.violations))
            prep = paraterm_pointwise_check(split, a, u, MaxParams(2.0, part.R))
            worst_ratio = max(worst_ratio, prep.max_factorization_ratio)
            worst_slope = max(worst_slope, max(prep.growth_slopes.values()))
    add("reconstruction", "paradifferential_reconstruction", worst_rec,
        FROZEN_THRESHOLDS["reconstruction_abs"])
    add("corona_ball_inclusions", "corona_ball_inclusions", worst_viol, 0)
    slope_ok = worst_slope <= FROZEN_THRESHOLDS["paraterm_slope"]
    add("paraterm_pointwise", "paraterm_pointwise_estimates",
        worst_ratio if slope_ok else np.inf,
        FROZEN_THRESHOLDS["paraterm_max_ratio"],
        {"max_scale_slope": _f(worst_slope),
         "slope_threshold": FROZEN_THRESHOLDS["paraterm_slope"]})

    # twisted-diagonal enforced symbol: near-diagonal terms gain a corona
    eps = 0.25
    chi = LocalizationCutoff()
    ching = standard_ching(grid, 0.0, 4)
    a_tdc = ching - localize(ching, chi, eps)
    B = 2.0 / eps
    split = para_split(a_tdc, fields[0], part, m)
    rep = support_inclusions(split, tdc_B=B)
    add("tdc_diagonal_corona", "tdc_diagonal_corona",
        len(rep.violations), 0, {"B": _f(B)})

    # cumulative-sum inequality
    rng = rng_for(cfg.seed, 17)
    worst = 0.0
    for s in (-1.0, -0.5):
        for q in (1.0, 2.0, np.inf):
            for _ in range(200):
                b = rng.random(24)
                res = yamazaki_check(b, s, q)
                if res["rhs"] > 0:
                    worst = max(worst, res["lhs"] / (res["rhs_const"] * res["rhs"]))
    add("cumulative_sum_inequality", "cumulative_sum_inequality", worst,
        1.0 + 1e-12)

    # Peetre max dominated by the Hardy-Littlewood variant
    t_exp = 0.9
    worst = 0.0
    for u in fields:
        for k in (2, 3):
            uk = dyadic_block(u, k, part)
            if uk.norm_inf() == 0.0:
                continue
            star = peetre_max(uk, MaxParams(grid.n / t_exp, part.R * 2**k),
                              exact=True)
            mt = hl_max(uk, t_exp)
            mask = mt > 0
            if mask.any():
                worst = max(worst, float(np.max(star[mask] / mt[mask])))
    add("peetre_hl_domination", "peetre_hardy_littlewood_domination", worst,
        FROZEN_THRESHOLDS["peetre_hl_constant"])

    # Fefferman-Stein chain on the blocks of a corpus field
    blocks = [dyadic_block(fields[0], k, part) for k in range(part.J_max + 1)]
    fs = fefferman_stein_check(blocks, NormSpec("F", 1.0, 2.0, 2.0),
                               t=t_exp, N_decay=2.0, R=part.R)
    add("fefferman_stein_chain", "fefferman_stein_chain",
        max(fs["ratio_star_hl"], fs["ratio_hl_blocks"]),
        FROZEN_THRESHOLDS["fs_chain_ratio"], {k: _f(v) for k, v in fs.items()})

    # Marschall inequality (rows must carry no zero-frequency mass, which the
    # homogeneous norm quotients out)
    k_m = int(np.log2(grid.nyquist))
    marschall_symbols = [("ching", standard_ching(grid, 0.0, 4))]
    for i in range(2):
        marschall_symbols.append(
            (f"random_{i}", random_sparse_symbol(
                grid, rng_for(cfg.seed, 23, i), d=0.0,
                x_band=grid.nyquist / 8, eta_band=grid.nyquist / 4,
                eta_min=2.0)))
    worst = 0.0
    for name, a in marschall_symbols:
        res = marschall_check(a, fields[0], k_m, t=1.0)
        worst = max(worst, res["max_ratio"])
    add("marschall", "marschall_inequality", worst,
        FROZEN_THRESHOLDS["marschall_constant"])

    # multiplier composition: same output, and modulation levels match too
    # (the composed and the chained operator share their whole limit profile)
    b = DiscreteSymbol.multiplier(grid, lambda *k: (1.0 + sum(x**2 for x in k)) ** -0.5,
                                  d=-1.0)
    worst = 0.0
    for _, a in symbols[:3]:
        c = compose_multiplier(a, b)
        for u in fields[:2]:
            lhs = apply(c, u)
            rhs = apply(a, apply(b, u))
            denom = max(u.norm_inf(), 1e-300)
            worst = max(worst, float(np.max(np.abs(lhs.values - rhs.values)))
                        / denom)
            for mm in (1, part.J_max):
                lm = modulated_apply(c, u, psi, mm)
                rm = modulated_apply(a, apply(b, u), psi, mm)
                worst = max(worst, float(np.max(np.abs(lm.values - rm.values)))
                            / denom)
    add("composition_domain", "multiplier_composition_domain", worst,
        FROZEN_THRESHOLDS["composition_rel"])

    # spectral support rule over sparse pairs
    ok_pairs, total_pairs = 0, 0
    for i in range(10):
        rng_i = rng_for(cfg.seed, 19, i)
        a = random_sparse_symbol(grid, rng_i, d=0.0,
                                 x_band=grid.nyquist / 8,
                                 eta_band=grid.nyquist / 8)
        u = random_band_limited_field(grid, rng_i, grid.nyquist / 8)
        bound = spectral_support_bound(a, u)
        out = apply(a, u).support()
        total_pairs += 1
        ok_pairs += int(out.issubset(bound))
    add("spectral_support_rule", "spectral_support_rule",
        total_pairs - ok_pairs, 0, {"pairs": total_pairs})

    all_pass = all(c["pass"] for c in checks)
    metrics = {c["name"]: {"claim": c["claim"], **{k: v for k, v in c.items()
                                                   if k != "name"}}
               for c in checks}
    metrics["summary"] = {"claim": "spectral_support_rule",
                          "all_pass": all_pass,
                          "n_checks": len(checks)}
    return _finish(cfg, metrics, t0)


RUNNERS = {
    "boundedness_sweep": run_boundedness_sweep,
    "ching_study": run_ching_study,
    "modulation_study": run_modulation_study,
    "inequality_suite": run_inequality_suite,
}


def _finish(cfg: ExperimentConfig, metrics: dict, t0: float) -> ResultRecord:
    partition_header = {"r": cfg.partition_r, "R": cfg.partition_R}
    for N in cfg.grid_sizes:
        part = make_partition(make_modulation(cfg.partition_r,
                                              cfg.partition_R),
                              TorusGrid(cfg.grid_n, N))
        partition_header[f"N{N}"] = {"h": part.h, "J_max": part.J_max}
    record = ResultRecord(
        scenario=cfg.scenario,
        params={"grid_n": cfg.grid_n, "grid_sizes": list(cfg.grid_sizes),
                "partition": partition_header,
                "symbol_family": cfg.symbol_family,
                "symbol_params": cfg.symbol_params,
                "modulations": [list(m) for m in cfg.modulations],
                "seed": cfg.seed, "corpus_size": cfg.corpus_size},
        metrics=metrics,
        wall_time_s=time.monotonic() - t0,
    )
    missing = CLAIM_REGISTRY[cfg.scenario] - record.covered_claims()
    if missing:
        raise ConfigError(f"coverage guard: claims with no executed check: "
                          f"{sorted(missing)}")
    return record


def run_scenario(cfg: ExperimentConfig) -> ResultRecord:
    cfg.validate()
    return RUNNERS[cfg.scenario](cfg)


# -- output writing ---------------------------------------------------------


def write_outputs(record: ResultRecord, out_dir) -> dict:
    """results.json, tables/*.csv, and manifest.json under ``out_dir``."""
    out = Path(out_dir)
    (out / "tables").mkdir(parents=True, exist_ok=True)
    results_path = out / "results.json"
    results_path.write_text(json.dumps(asdict(record), sort_keys=True,
                                       indent=2, default=_json_default))
    tables = _write_tables(record, out / "tables")
    manifest = {
        "tool": "paradiff-lab",
        "version": record.tool_version,
        "scenario": record.scenario,
        "seed": record.params.get("seed"),
        "claims_covered": sorted(record.covered_claims()),
        "python": platform.python_version(),
        "numpy": np.__version__,
        "grids": record.params.get("grid_sizes"),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, sort_keys=True,
                                                  indent=2))
    return {"results": str(results_path), "tables": tables,
            "manifest": str(out / "manifest.json")}


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not serializable: {type(obj)}")


def _write_tables(record: ResultRecord, table_dir: Path) -> list:
    written = []

    def write(name, header, rows):
        path = table_dir / name
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            w.writerows(rows)
        written.append(str(path))

    if record.scenario == "boundedness_sweep":
        rows = record.metrics["gain_table"]["rows"]
        write("norm_ratios.csv",
              ["scale", "s", "p", "q", "N", "J", "gain", "argmax"],
              [[r["scale"], r["s"], r["p"], r["q"], r["N"], r["J"],
                r["gain"], r["argmax"]] for r in rows])
        nrows = record.metrics["norm_table"]["rows"]
        write("norms.csv", ["scale", "s", "p", "q", "N", "value"],
              [[r["scale"], r["s"], r["p"], r["q"], r["N"], r["value"]]
               for r in nrows])
    elif record.scenario == "ching_study":
        curves = record.metrics["gain_curves"]["curves"]
        rows = []
        for rho_key, per_s in sorted(curves.items()):
            for s_key, entry in sorted(per_s.items(), key=lambda kv: float(kv[0])):
                for g in entry["gains"]:
                    rows.append([rho_key, s_key, g["J"], g["gain"],
                                 entry["verdict"]])
        write("gain_curves.csv", ["zero_order", "s", "J", "gain", "verdict"],
              rows)
    elif record.scenario == "modulation_study":
        rows = []
        for r in record.metrics["limits"]["rows"]:
            rows.append([r["N"], r["input"], r["converged"],
                         r["stabilization_m"], r["psi_discrepancy"]])
        write("limits.csv",
              ["N", "input", "converged", "stabilization_m",
               "psi_discrepancy"], rows)
    elif record.scenario == "inequality_suite":
        rows = [[name, m.get("max_ratio"), m.get("threshold"), m.get("pass")]
                for name, m in sorted(record.metrics.items())
                if name != "summary"]
        write("checks.csv", ["check", "max_ratio", "threshold", "pass"], rows)
    return written

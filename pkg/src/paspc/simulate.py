"""AWGN channel, Monte Carlo block-error measurement, and operating-point
search.

Reproducibility contract: every frame owns a generator derived from the
master seed as ``SeedSequence(entropy=seed, spawn_key=(snr_key, frame))``
with ``snr_key = round(snr_db * 1000)``, driving a Philox counter-based
stream (information bits first, then noise; Gaussians via numpy's ziggurat
``standard_normal``). Frames are processed in fixed batches of
``FRAMES_PER_BATCH`` and the stop rule is evaluated only at batch
boundaries in index order, so serial and parallel runs count exactly the
same frames and the full result is a pure function of the configuration.

Wall-clock times are reported for convenience but excluded from the
canonical JSON serialization, which is byte-identical across worker counts.
"""

from __future__ import annotations

import hashlib
import json
import multiprocessing
import os
import time
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.stats import beta as beta_dist

from .analysis import CrossingNotFoundError, OperatingPoint, crossing_point, optimize_lambda, spectral_efficiency
from .bch import build_bch
from .pipeline import PasFrameCodec, PasParams, UniformCmCodec, derive_frame_params
from .product import DEFAULT_CR_WEIGHTS, DecoderConfig, ProductCode
from .shaping import mb_pmf

FRAMES_PER_BATCH = 32
WORKERS_ENV_VAR = "PASPC_WORKERS"
SNR_RESOLUTION_DB = 0.05


class ConfigError(ValueError):
    """Malformed simulation configuration."""


class BudgetExceededError(RuntimeError):
    """The stop rule cannot resolve the target at the bracket edges."""


@dataclass(frozen=True)
class SimConfig:
    """Full description of one measurement run."""

    v: int
    t: int
    s: int
    m: int
    mode: str = "ibdd"
    max_iterations: int = 8
    weights: tuple[float, ...] | None = None
    signaling: str = "shaped"
    snr_db: tuple[float, ...] | None = None
    snr_bracket_db: tuple[float, float] | None = None
    target_pe: float = 1e-3
    min_block_errors: int = 100
    max_frames: int = 100_000
    seed: int = 0
    noise_disabled: bool = False
    output_json: str | None = None
    output_csv: str | None = None
    output_plot: str | None = None

    def __post_init__(self):
        if self.signaling not in ("shaped", "uniform"):
            raise ConfigError(f"unknown signaling {self.signaling!r}")
        if not 0.0 < self.target_pe < 1.0:
            raise ConfigError(f"target_pe {self.target_pe} outside (0, 1)")
        if self.min_block_errors < 1:
            raise ConfigError("min_block_errors must be at least 1")
        if self.max_frames < 1:
            raise ConfigError("max_frames must be at least 1")
        # decoder parameters are validated by DecoderConfig
        self.decoder_config()

    def decoder_config(self) -> DecoderConfig:
        weights = self.weights
        if self.mode == "ibdd_cr" and weights is None:
            weights = tuple(DEFAULT_CR_WEIGHTS[: 2 * self.max_iterations])
            if len(weights) < 2 * self.max_iterations:
                weights = weights + (weights[-1],) * (2 * self.max_iterations - len(weights))
        return DecoderConfig(self.mode, self.max_iterations, weights)

    @classmethod
    def from_json(cls, text: str) -> "SimConfig":
        """Parse a config file; unknown keys are rejected."""
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        known = set(cls.__dataclass_fields__)
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        for key in ("weights", "snr_db", "snr_bracket_db"):
            if raw.get(key) is not None:
                raw[key] = tuple(raw[key])
        try:
            return cls(**raw)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    def canonical_json(self) -> str:
        out = asdict(self)
        return json.dumps(out, sort_keys=True, indent=2)

    def digest(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()


@dataclass
class SnrPoint:
    """Measurement at one SNR."""

    snr_db: float
    frames: int
    block_errors: int
    pe: float
    ci_low: float
    ci_high: float
    pre_fec_ber: float
    dematch_failures: int
    converged_frames: int
    wall_time_s: float = field(default=0.0)


@dataclass
class SimResult:
    """Monte Carlo outcome; a pure function of the configuration."""

    config_digest: str
    seed: int
    signaling: str
    mode: str
    points: list[SnrPoint]

    def to_json(self, include_timing: bool = False) -> str:
        points = []
        for p in self.points:
            d = asdict(p)
            if not include_timing:
                d.pop("wall_time_s")
            points.append(d)
        payload = {
            "config_digest": self.config_digest,
            "seed": self.seed,
            "signaling": self.signaling,
            "mode": self.mode,
            "points": points,
        }
        return json.dumps(payload, sort_keys=True, indent=2)


SIM_CSV_COLUMNS = [
    "snr_db", "frames", "block_errors", "pe", "ci_low", "ci_high",
    "pre_fec_ber", "dematch_failures", "converged_frames",
]


def write_sim_csv(result: SimResult, fp) -> None:
    """One CSV row per SNR point."""
    fp.write(",".join(SIM_CSV_COLUMNS) + "\n")
    for p in result.points:
        fp.write(
            f"{p.snr_db:.6g},{p.frames},{p.block_errors},{p.pe:.8g},"
            f"{p.ci_low:.8g},{p.ci_high:.8g},{p.pre_fec_ber:.8g},"
            f"{p.dematch_failures},{p.converged_frames}\n"
        )


def clopper_pearson(errors: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    """Exact binomial confidence interval for the block error probability."""
    if trials == 0:
        return 0.0, 1.0
    alpha = 1.0 - confidence
    lo = 0.0 if errors == 0 else float(beta_dist.ppf(alpha / 2, errors, trials - errors + 1))
    hi = 1.0 if errors == trials else float(beta_dist.ppf(1 - alpha / 2, errors + 1, trials - errors))
    return lo, hi


def frame_seed_sequence(master_seed: int, snr_db: float, frame_index: int) -> np.random.SeedSequence:
    """Deterministic per-frame seed derivation (stable across worker counts)."""
    snr_key = int(round(snr_db * 1000.0))
    return np.random.SeedSequence(entropy=master_seed, spawn_key=(snr_key, frame_index))


def awgn_transmit(x: np.ndarray, noise_seed) -> np.ndarray:
    """Add unit-variance white Gaussian noise from a seeded Philox stream.

    ``noise_seed`` may be an int, a SeedSequence, or an existing Generator
    (the power/SNR relationship lives in the symbol scaling, never here).
    """
    x = np.asarray(x, dtype=np.float64)
    if isinstance(noise_seed, np.random.Generator):
        rng = noise_seed
    else:
        rng = np.random.Generator(np.random.Philox(noise_seed))
    return x + rng.standard_normal(x.shape)


def num_workers() -> int:
    value = os.environ.get(WORKERS_ENV_VAR)
    if value:
        try:
            n = int(value)
        except ValueError as exc:
            raise ConfigError(f"{WORKERS_ENV_VAR}={value!r} is not an integer") from exc
        if n < 1:
            raise ConfigError(f"{WORKERS_ENV_VAR} must be positive")
        return n
    return os.cpu_count() or 1


def build_codec(cfg: SimConfig, snr_db: float):
    """Frame codec for one SNR: shaped runs at the rate-optimal shaping
    parameter for that SNR, uniform at the flat distribution."""
    params = derive_frame_params(cfg.v, cfg.t, cfg.s, cfg.m, seed=cfg.seed)
    pc = ProductCode(build_bch(cfg.v, cfg.t, cfg.s))
    if cfg.signaling == "shaped":
        lam, _ = optimize_lambda(snr_db, cfg.m)
        dist = mb_pmf(lam, cfg.m).scaled_to_snr(snr_db)
        return PasFrameCodec(params, pc, dist)
    dist = mb_pmf(0.0, cfg.m).scaled_to_snr(snr_db)
    return UniformCmCodec(params, pc, dist)


def _simulate_frames(codec, decoder_cfg, cfg: SimConfig, snr_db: float, start: int, stop: int):
    """Simulate frames [start, stop); returns summed statistics."""
    block_errors = 0
    bit_errors = 0
    bits_total = 0
    dematch_failures = 0
    converged = 0
    for idx in range(start, stop):
        rng = np.random.Generator(np.random.Philox(frame_seed_sequence(cfg.seed, snr_db, idx)))
        u = rng.integers(0, 2, codec.u_len).astype(np.uint8)
        frame = codec.encode(u)
        y = frame.x if cfg.noise_disabled else awgn_transmit(frame.x, rng)
        demapped = codec.map_demap(y)
        bit_errors += int(np.count_nonzero(demapped.bit_array != frame.array))
        bits_total += frame.array.size
        u_hat, report = codec.decode_demapped(demapped, decoder_cfg)
        if report.dematch_failed or not np.array_equal(u_hat, u):
            block_errors += 1
        if report.dematch_failed:
            dematch_failures += 1
        if report.converged:
            converged += 1
    return block_errors, bit_errors, bits_total, dematch_failures, converged


_WORKER_STATE: dict = {}


def _worker_init(cfg: SimConfig, snr_db: float, lam: float | None) -> None:
    params = derive_frame_params(cfg.v, cfg.t, cfg.s, cfg.m, seed=cfg.seed)
    pc = ProductCode(build_bch(cfg.v, cfg.t, cfg.s))
    if cfg.signaling == "shaped":
        dist = mb_pmf(lam, cfg.m).scaled_to_snr(snr_db)
        codec = PasFrameCodec(params, pc, dist)
    else:
        dist = mb_pmf(0.0, cfg.m).scaled_to_snr(snr_db)
        codec = UniformCmCodec(params, pc, dist)
    _WORKER_STATE["codec"] = codec
    _WORKER_STATE["decoder_cfg"] = cfg.decoder_config()
    _WORKER_STATE["cfg"] = cfg
    _WORKER_STATE["snr_db"] = snr_db


def _worker_batch(bounds: tuple[int, int]):
    return _simulate_frames(
        _WORKER_STATE["codec"],
        _WORKER_STATE["decoder_cfg"],
        _WORKER_STATE["cfg"],
        _WORKER_STATE["snr_db"],
        bounds[0],
        bounds[1],
    )


def _batch_bounds(max_frames: int):
    start = 0
    while start < max_frames:
        stop = min(start + FRAMES_PER_BATCH, max_frames)
        yield start, stop
        start = stop


def _measure_point(
    cfg: SimConfig,
    snr_db: float,
    workers: int,
    resolve_target: float | None = None,
) -> SnrPoint:
    """Run one SNR until the stop rule fires.

    With ``resolve_target`` set, the run additionally stops as soon as the
    confidence interval falls entirely on one side of the target (used by
    the operating-point bisection); the check happens at the same batch
    boundaries, so it stays deterministic.
    """
    t0 = time.monotonic()
    totals = [0, 0, 0, 0, 0]
    frames_done = 0

    def should_stop() -> bool:
        if totals[0] >= cfg.min_block_errors or frames_done >= cfg.max_frames:
            return True
        if resolve_target is not None and frames_done > 0:
            lo, hi = clopper_pearson(totals[0], frames_done)
            if hi <= resolve_target or lo > resolve_target:
                return True
        return False

    if workers == 1:
        lam = optimize_lambda(snr_db, cfg.m)[0] if cfg.signaling == "shaped" else None
        _worker_init(cfg, snr_db, lam)
        for start, stop in _batch_bounds(cfg.max_frames):
            res = _worker_batch((start, stop))
            for i, val in enumerate(res):
                totals[i] += val
            frames_done = stop
            if should_stop():
                break
    else:
        lam = optimize_lambda(snr_db, cfg.m)[0] if cfg.signaling == "shaped" else None
        ctx = multiprocessing.get_context("fork")
        with ctx.Pool(workers, initializer=_worker_init, initargs=(cfg, snr_db, lam)) as pool:
            bounds = list(_batch_bounds(cfg.max_frames))
            for (start, stop), res in zip(bounds, pool.imap(_worker_batch, bounds)):
                for i, val in enumerate(res):
                    totals[i] += val
                frames_done = stop
                if should_stop():
                    pool.terminate()
                    break

    block_errors, bit_errors, bits_total, dematch_failures, converged = totals
    pe = block_errors / frames_done
    lo, hi = clopper_pearson(block_errors, frames_done)
    return SnrPoint(
        snr_db=float(snr_db),
        frames=frames_done,
        block_errors=block_errors,
        pe=pe,
        ci_low=lo,
        ci_high=hi,
        pre_fec_ber=bit_errors / bits_total if bits_total else 0.0,
        dematch_failures=dematch_failures,
        converged_frames=converged,
        wall_time_s=time.monotonic() - t0,
    )


def run_montecarlo(cfg: SimConfig, workers: int | None = None) -> SimResult:
    """Measure the block error probability at every configured SNR.

    Frames are independent; the result is identical for any worker count
    because per-frame seeds derive from (master seed, snr, frame index) and
    the stop rule is evaluated at fixed batch boundaries in index order.
    """
    if not cfg.snr_db:
        raise ConfigError("run_montecarlo requires an snr_db list")
    if workers is None:
        workers = num_workers()
    points = [_measure_point(cfg, snr, workers) for snr in cfg.snr_db]
    return SimResult(
        config_digest=cfg.digest(),
        seed=cfg.seed,
        signaling=cfg.signaling,
        mode=cfg.mode,
        points=points,
    )


def _certified(point: SnrPoint, target: float) -> bool:
    return point.ci_high <= target


def find_operating_point(
    cfg: SimConfig,
    params: PasParams | None = None,
    workers: int | None = None,
    snr_scan: tuple[float, float] = (15.0, 30.0),
) -> OperatingPoint:
    """Smallest SNR (0.05 dB grid) whose upper-confidence Pe meets the target.

    The search bracket is clipped from below to the crossing point when one
    exists (shaped signaling), and the reported back-off is measured against
    it. Raises ``BudgetExceededError`` when the stop rule cannot certify the
    target even at the upper bracket edge.
    """
    if not cfg.snr_bracket_db:
        raise ConfigError("find_operating_point requires snr_bracket_db")
    if workers is None:
        workers = num_workers()
    if params is None:
        params = derive_frame_params(cfg.v, cfg.t, cfg.s, cfg.m, seed=cfg.seed)

    lo, hi = cfg.snr_bracket_db
    crossing = None
    if cfg.signaling == "shaped":
        try:
            crossing = crossing_point(params, snr_lo=snr_scan[0], snr_hi=snr_scan[1])
            lo = max(lo, crossing)
        except CrossingNotFoundError as exc:
            if not exc.below_everywhere:
                raise
    if hi < lo:
        raise ConfigError(f"bracket upper edge {hi} below feasible region start {lo:.2f}")

    def snap(x: float) -> float:
        return round(x / SNR_RESOLUTION_DB) * SNR_RESOLUTION_DB

    lo, hi = snap(lo), snap(hi)
    probe_cache: dict[float, SnrPoint] = {}

    def probe(snr: float) -> SnrPoint:
        if snr not in probe_cache:
            probe_cache[snr] = _measure_point(cfg, snr, workers, resolve_target=cfg.target_pe)
        return probe_cache[snr]

    if not _certified(probe(hi), cfg.target_pe):
        raise BudgetExceededError(
            f"target Pe={cfg.target_pe} not certified at the upper bracket edge {hi} dB "
            f"(estimate {probe(hi).pe:.3g}, upper bound {probe(hi).ci_high:.3g})"
        )
    if _certified(probe(lo), cfg.target_pe):
        best = lo
    else:
        # invariant: lo fails certification, hi is certified
        while hi - lo > SNR_RESOLUTION_DB + 1e-9:
            mid = snap(0.5 * (lo + hi))
            if mid in (lo, hi):
                break
            if _certified(probe(mid), cfg.target_pe):
                hi = mid
            else:
                lo = mid
        best = hi

    se = spectral_efficiency(params, best)
    return OperatingPoint(
        s=params.s,
        gamma=params.gamma,
        snr_op_db=best,
        se=se.asymptotic if cfg.signaling == "shaped" else 2.0 * params.m * params.rate,
        backoff_db=None if crossing is None else best - crossing,
        target_pe=cfg.target_pe,
    )


def operating_point_json(op: OperatingPoint) -> str:
    return json.dumps(asdict(op), sort_keys=True, indent=2)

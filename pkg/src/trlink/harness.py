"""Scenario-driven experiment engine: focusing maps, BER sweeps, CSV output.

Scenarios are versioned UTF-8 JSON files (schema below); unknown keys are
rejected so typos fail fast. All randomness derives from one master seed
through a documented counter scheme, so identical scenario + seed produce
byte-identical CSV artifacts regardless of how the work is split up:

* ensemble for trial ``t``      <- seed_of(master, 0, t)
* BER cell (scheme s, spacing d, SNR point q, trial t)
                                <- cell = seed_of(master, 1, s, d_index, q, t)
  with sub-streams ``[cell, 0]`` for payload bits, ``[cell, 1, n]`` for
  receiver-``n`` noise and ``[cell, 2, n]`` for pilot noise
* sounding noise for trial ``t``, target ``j`` <- seed_of(master, 2, t, j)

where ``seed_of`` feeds its arguments to ``numpy.random.SeedSequence`` and
scheme indices are fixed (RASK=0, ERASK=1). The SNR axis is the inverse
noise power: a grid point of ``q`` dB means per-sample noise variance
``sigma^2 = 10**(-q/10)`` against the unit per-pulse emitted energy of the
precoder.

Scenario JSON schema (version 1)::

    {
      "version": 1,
      "cavity": {"num_taps": .., "bandwidth_hz": .., "carrier_freq_hz": ..,
                 "decay_time_s": .. (optional)},
      "grid_mm": {"start": .., "stop": .., "step": ..}   # or "positions_mm": [..]
                                                         # or "ensemble_file": "path"
      "targets_mm": [..],                # receive-antenna positions, on the grid
      "rsm": {"scheme": "rask"|"erask"|"both", "num_rx": 2,
              "threshold": {"policy": "fixed", "value": ..} |
                           {"policy": "pilot", "num_pilots": ..} (optional)},
      "d_values": [..],                  # pulse spacings in taps
      "snr_grid_db": [..],
      "bits_per_point": ..,
      "trials": ..,
      "sounding": "genie" | {"duration_s": .., "snr_db": .. (optional)},
      "master_seed": ..
    }

BER CSV columns are fixed: ``scheme,D,snr_db,bits_sent,bit_errors,ber,seed``
with one file per (scheme, spacing) and one row per (SNR point, trial).
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable

import numpy as np

from .channel import (
    CavityParams,
    Cir,
    SoundingConfig,
    SpatialChannelEnsemble,
    load_ensemble,
    sound_cir,
    sounding_chirp,
    synth_cavity_ensemble,
)
from .dsp import NUMERIC_RTOL, ComplexBasebandSignal, convolve, xcorr
from .errors import ConfigurationError, DomainError
from .modem import (
    FixedThreshold,
    PilotThreshold,
    RsmConfig,
    Scheme,
    calibrate_threshold,
    detection_windows,
    erask_modulate,
    power_detect,
    rask_modulate,
)
from .precoding import (
    FocusingReport,
    SymbolStream,
    focusing_report,
    focusing_report_to_csv,
    propagate,
    tr_kernel,
    tr_precode,
)

_STREAM_ENSEMBLE = 0
_STREAM_CELL = 1
_STREAM_SOUNDING = 2

_SCHEME_INDEX = {Scheme.RASK: 0, Scheme.ERASK: 1}

BER_CSV_HEADER = ["scheme", "D", "snr_db", "bits_sent", "bit_errors", "ber", "seed"]


def derive_seed(master_seed: int, *path: int) -> int:
    """Deterministic child seed for a counter path under the master seed."""
    seq = np.random.SeedSequence([int(master_seed), *(int(p) for p in path)])
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def grid_positions(start_mm: float, stop_mm: float, step_mm: float) -> np.ndarray:
    """Regular position grid ``start, start+step, ...`` up to ``stop`` inclusive."""
    if step_mm <= 0:
        raise ConfigurationError(f"grid step must be > 0, got {step_mm}")
    if stop_mm < start_mm:
        raise ConfigurationError("grid stop must be >= start")
    count = int(math.floor((stop_mm - start_mm) / step_mm + 1e-9)) + 1
    return start_mm + step_mm * np.arange(count)


@dataclass(frozen=True)
class BerRecord:
    scheme: str
    d: int
    snr_db: float
    bits_sent: int
    bit_errors: int
    ber: float
    seed: int

    def __post_init__(self) -> None:
        if self.bits_sent < 1:
            raise DomainError("bits_sent must be >= 1")
        if not 0 <= self.bit_errors <= self.bits_sent:
            raise DomainError("bit_errors must lie in [0, bits_sent]")
        expected = self.bit_errors / self.bits_sent
        if not math.isclose(self.ber, expected, rel_tol=0, abs_tol=1e-12):
            raise DomainError("ber must equal bit_errors / bits_sent")


@dataclass(frozen=True, eq=False)
class Scenario:
    """Fully resolved experiment description (see module docstring)."""

    cavity: CavityParams
    positions_mm: np.ndarray
    target_indices: tuple[int, ...]
    rsm: RsmConfig
    schemes: tuple[Scheme, ...]
    d_values: tuple[int, ...]
    snr_grid_db: tuple[float, ...]
    bits_per_point: int
    trials: int
    sounding: SoundingConfig | None
    master_seed: int
    imported_ensemble: SpatialChannelEnsemble | None = None

    def __post_init__(self) -> None:
        positions = np.asarray(self.positions_mm, dtype=float)
        if positions.ndim != 1 or positions.size < 1:
            raise ConfigurationError("scenario needs at least one grid position")
        if len(set(self.target_indices)) != len(self.target_indices):
            raise ConfigurationError("targets must be distinct")
        for idx in self.target_indices:
            if not 0 <= idx < positions.size:
                raise ConfigurationError(f"target index {idx} is off the grid")
        if len(self.target_indices) != self.rsm.num_rx:
            raise ConfigurationError(
                f"{len(self.target_indices)} targets for num_rx={self.rsm.num_rx}"
            )
        if not self.schemes:
            raise ConfigurationError("scenario needs at least one scheme")
        if Scheme.ERASK in self.schemes and self.rsm.threshold_policy is None:
            raise ConfigurationError("ERASK runs need a threshold policy")
        if not self.d_values or any(d < 1 for d in self.d_values):
            raise ConfigurationError("d_values must be a non-empty list of taps >= 1")
        if not self.snr_grid_db:
            raise ConfigurationError("snr_grid_db must be non-empty")
        if self.bits_per_point < 1:
            raise ConfigurationError("bits_per_point must be >= 1")
        if self.trials < 1:
            raise ConfigurationError("trials must be >= 1")
        positions = positions.copy()
        positions.flags.writeable = False
        object.__setattr__(self, "positions_mm", positions)

    @property
    def target_positions_mm(self) -> tuple[float, ...]:
        return tuple(float(self.positions_mm[i]) for i in self.target_indices)

    def ensemble_for_trial(self, trial: int) -> SpatialChannelEnsemble:
        """Trial ``t``'s channel: imported (fixed) or freshly synthesised."""
        if self.imported_ensemble is not None:
            return self.imported_ensemble
        seed = derive_seed(self.master_seed, _STREAM_ENSEMBLE, trial)
        params = replace(self.cavity, rng_seed=seed)
        return synth_cavity_ensemble(params, self.positions_mm)


def _require_keys(obj: dict, allowed: set[str], required: set[str], where: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise ConfigurationError(f"unknown keys in {where}: {sorted(unknown)}")
    missing = required - set(obj)
    if missing:
        raise ConfigurationError(f"missing keys in {where}: {sorted(missing)}")


def _parse_threshold(obj) -> FixedThreshold | PilotThreshold:
    if not isinstance(obj, dict) or "policy" not in obj:
        raise ConfigurationError("rsm.threshold must be an object with a 'policy'")
    policy = obj["policy"]
    if policy == "fixed":
        _require_keys(obj, {"policy", "value"}, {"policy", "value"}, "rsm.threshold")
        return FixedThreshold(float(obj["value"]))
    if policy == "pilot":
        _require_keys(obj, {"policy", "num_pilots"}, {"policy"}, "rsm.threshold")
        return PilotThreshold(int(obj.get("num_pilots", 32)))
    raise ConfigurationError(f"unknown threshold policy {policy!r}")


def scenario_from_dict(data: dict, base_dir: Path | None = None) -> Scenario:
    """Build and validate a scenario from parsed JSON."""
    top_allowed = {
        "version",
        "cavity",
        "grid_mm",
        "positions_mm",
        "ensemble_file",
        "targets_mm",
        "rsm",
        "d_values",
        "snr_grid_db",
        "bits_per_point",
        "trials",
        "sounding",
        "master_seed",
    }
    _require_keys(
        data,
        top_allowed,
        {"version", "targets_mm", "rsm", "d_values", "snr_grid_db",
         "bits_per_point", "trials", "sounding", "master_seed"},
        "scenario",
    )
    if data["version"] != 1:
        raise ConfigurationError(f"unsupported scenario version {data['version']!r}")

    grid_keys = [k for k in ("grid_mm", "positions_mm", "ensemble_file") if k in data]
    if len(grid_keys) != 1:
        raise ConfigurationError(
            "scenario needs exactly one of grid_mm / positions_mm / ensemble_file"
        )

    imported = None
    if "ensemble_file" in data:
        if "cavity" in data:
            raise ConfigurationError("ensemble_file scenarios must not also define cavity")
        path = Path(data["ensemble_file"])
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        imported = load_ensemble(path)
        cavity = imported.params
        positions = np.asarray(imported.positions_mm, dtype=float)
    else:
        if "cavity" not in data:
            raise ConfigurationError("missing keys in scenario: ['cavity']")
        cav = data["cavity"]
        _require_keys(
            cav,
            {"num_taps", "bandwidth_hz", "carrier_freq_hz", "decay_time_s"},
            {"num_taps", "bandwidth_hz", "carrier_freq_hz"},
            "cavity",
        )
        cavity = CavityParams(
            num_taps=int(cav["num_taps"]),
            bandwidth_hz=float(cav["bandwidth_hz"]),
            carrier_freq_hz=float(cav["carrier_freq_hz"]),
            decay_time_s=float(cav.get("decay_time_s", math.nan)),
        )
        if "grid_mm" in data:
            grid = data["grid_mm"]
            _require_keys(grid, {"start", "stop", "step"}, {"start", "stop", "step"}, "grid_mm")
            positions = grid_positions(float(grid["start"]), float(grid["stop"]), float(grid["step"]))
        else:
            positions = np.asarray(data["positions_mm"], dtype=float)

    rsm_obj = data["rsm"]
    _require_keys(rsm_obj, {"scheme", "num_rx", "threshold"}, {"scheme"}, "rsm")
    scheme_name = str(rsm_obj["scheme"]).lower()
    if scheme_name == "both":
        schemes = (Scheme.RASK, Scheme.ERASK)
    else:
        try:
            schemes = (Scheme(scheme_name),)
        except ValueError:
            raise ConfigurationError(f"unknown rsm scheme {rsm_obj['scheme']!r}") from None
    threshold = _parse_threshold(rsm_obj["threshold"]) if "threshold" in rsm_obj else None
    rsm = RsmConfig(
        scheme=schemes[0],
        num_rx=int(rsm_obj.get("num_rx", 2)),
        spacing=max(1, int(data["d_values"][0])) if data["d_values"] else 1,
        threshold_policy=threshold,
    )

    target_indices = []
    for target_mm in data["targets_mm"]:
        deltas = np.abs(positions - float(target_mm))
        idx = int(np.argmin(deltas))
        if deltas[idx] > 1e-6:
            raise ConfigurationError(
                f"target {target_mm} mm is not on the position grid"
            )
        target_indices.append(idx)

    sounding_obj = data["sounding"]
    if sounding_obj == "genie":
        sounding = None
    elif isinstance(sounding_obj, dict):
        _require_keys(sounding_obj, {"duration_s", "snr_db"}, {"duration_s"}, "sounding")
        snr = sounding_obj.get("snr_db")
        sounding = SoundingConfig(
            duration_s=float(sounding_obj["duration_s"]),
            probe_snr_db=math.inf if snr is None else float(snr),
        )
    else:
        raise ConfigurationError("sounding must be \"genie\" or an object")

    return Scenario(
        cavity=cavity,
        positions_mm=positions,
        target_indices=tuple(target_indices),
        rsm=rsm,
        schemes=schemes,
        d_values=tuple(int(d) for d in data["d_values"]),
        snr_grid_db=tuple(float(s) for s in data["snr_grid_db"]),
        bits_per_point=int(data["bits_per_point"]),
        trials=int(data["trials"]),
        sounding=sounding,
        master_seed=int(data["master_seed"]),
        imported_ensemble=imported,
    )


def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigurationError(f"scenario file not found: {path}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"scenario JSON is invalid: {exc}") from None
    return scenario_from_dict(data, base_dir=path.parent)


def _known_target_cirs(
    scenario: Scenario, ensemble: SpatialChannelEnsemble, trial: int
) -> list[Cir]:
    """The precoder's channel knowledge: genie truth or sounded estimates."""
    true_cirs = [ensemble.cirs[i] for i in scenario.target_indices]
    if scenario.sounding is None:
        return true_cirs
    chirp = sounding_chirp(ensemble.params, scenario.sounding)
    estimates = []
    for j, cir in enumerate(true_cirs):
        cfg = replace(
            scenario.sounding,
            rng_seed=derive_seed(scenario.master_seed, _STREAM_SOUNDING, trial, j),
        )
        estimates.append(sound_cir(cir, cfg, chirp))
    return estimates


def _pilot_targets(num_rx: int, num_pilots: int) -> np.ndarray:
    """Deterministic pilot pattern cycling through all on/off combinations."""
    symbols = np.arange(num_pilots)
    combos = symbols % (1 << num_rx)
    return np.stack([(combos >> n) & 1 for n in range(num_rx)]).astype(bool)


def _erask_threshold(
    cfg: RsmConfig,
    true_cirs: list[Cir],
    known_cirs: list[Cir],
    sigma: float,
    cell_seed: int,
) -> float:
    policy = cfg.threshold_policy
    if policy is None:
        raise ConfigurationError("ERASK runs need a threshold policy")
    if isinstance(policy, FixedThreshold):
        return policy.value
    targeted = _pilot_targets(cfg.num_rx, policy.num_pilots)
    streams = [
        SymbolStream(targeted[n].astype(np.complex128), cfg.spacing)
        for n in range(cfg.num_rx)
    ]
    waveform = tr_precode(streams, known_cirs)
    received = [
        propagate(waveform, true_cirs[n], sigma, rng_seed=[cell_seed, 2, n])
        for n in range(cfg.num_rx)
    ]
    windows = detection_windows(policy.num_pilots, known_cirs[0].num_taps, cfg.spacing)
    return calibrate_threshold(received, windows, cfg, targeted)


def run_ber_point(
    scheme: Scheme,
    rsm: RsmConfig,
    true_cirs: list[Cir],
    known_cirs: list[Cir],
    spacing: int,
    snr_db: float,
    num_bits: int,
    cell_seed: int,
) -> tuple[int, int]:
    """One Monte-Carlo cell: returns (bits_sent, bit_errors).

    For ERASK the payload is rounded up to a whole number of symbols.
    """
    cfg = replace(rsm, scheme=scheme, spacing=spacing)
    rng_bits = np.random.default_rng([cell_seed, 0])
    if scheme is Scheme.RASK:
        bits = rng_bits.integers(0, 2, num_bits)
    else:
        num_symbols = -(-num_bits // cfg.num_rx)
        bits = rng_bits.integers(0, 2, num_symbols * cfg.num_rx)

    streams = rask_modulate(bits, cfg) if scheme is Scheme.RASK else erask_modulate(bits, cfg)
    waveform = tr_precode(streams, known_cirs)
    sigma = 10.0 ** (-snr_db / 20.0)
    received = [
        propagate(waveform, true_cirs[n], sigma, rng_seed=[cell_seed, 1, n])
        for n in range(cfg.num_rx)
    ]
    num_symbols = len(streams[0])
    windows = detection_windows(num_symbols, known_cirs[0].num_taps, spacing)

    threshold = None
    if scheme is Scheme.ERASK:
        threshold = _erask_threshold(cfg, true_cirs, known_cirs, sigma, cell_seed)
    detected = power_detect(received, windows, cfg, threshold)
    errors = int(np.sum(detected != bits))
    return bits.size, errors


def run_ber_sweep(
    scenario: Scenario,
    out_dir: str | Path | None = None,
    progress: Callable[[BerRecord], None] | None = None,
) -> list[BerRecord]:
    """Monte-Carlo BER over every (scheme, spacing, SNR, trial) cell.

    Records stream to one CSV per (scheme, spacing) as they complete when
    ``out_dir`` is given; cell order is fixed by indices, so output is
    deterministic for a given scenario and master seed.
    """
    out_path = Path(out_dir) if out_dir is not None else None
    if out_path is not None:
        out_path.mkdir(parents=True, exist_ok=True)

    ensembles: dict[int, tuple[list[Cir], list[Cir]]] = {}

    def cirs_for_trial(trial: int) -> tuple[list[Cir], list[Cir]]:
        if trial not in ensembles:
            ensemble = scenario.ensemble_for_trial(trial)
            true_cirs = [ensemble.cirs[i] for i in scenario.target_indices]
            ensembles[trial] = (true_cirs, _known_target_cirs(scenario, ensemble, trial))
        return ensembles[trial]

    records: list[BerRecord] = []
    for scheme in scenario.schemes:
        scheme_idx = _SCHEME_INDEX[scheme]
        for d_idx, spacing in enumerate(scenario.d_values):
            writer = None
            handle = None
            if out_path is not None:
                csv_file = out_path / f"ber_{scheme.value}_D{spacing}.csv"
                handle = open(csv_file, "w", newline="", encoding="utf-8")
                writer = csv.writer(handle)
                writer.writerow(BER_CSV_HEADER)
            try:
                for snr_idx, snr_db in enumerate(scenario.snr_grid_db):
                    for trial in range(scenario.trials):
                        true_cirs, known_cirs = cirs_for_trial(trial)
                        cell_seed = derive_seed(
                            scenario.master_seed, _STREAM_CELL,
                            scheme_idx, d_idx, snr_idx, trial,
                        )
                        bits_sent, errors = run_ber_point(
                            scheme, scenario.rsm, true_cirs, known_cirs,
                            spacing, snr_db, scenario.bits_per_point, cell_seed,
                        )
                        record = BerRecord(
                            scheme=scheme.value,
                            d=spacing,
                            snr_db=float(snr_db),
                            bits_sent=bits_sent,
                            bit_errors=errors,
                            ber=errors / bits_sent,
                            seed=cell_seed,
                        )
                        records.append(record)
                        if writer is not None:
                            writer.writerow([
                                record.scheme,
                                record.d,
                                repr(float(record.snr_db)),
                                record.bits_sent,
                                record.bit_errors,
                                repr(float(record.ber)),
                                record.seed,
                            ])
                        if progress is not None:
                            progress(record)
            finally:
                if handle is not None:
                    handle.close()
    return records


def run_focusing_experiment(
    scenario: Scenario, out_dir: str | Path | None = None
) -> list[FocusingReport]:
    """Single-user focusing map per target, plus the two-user decomposition.

    The single-user reports use the first configured pulse spacing; the
    two-user interference decomposition (first two targets, both roles) is
    produced for every spacing in ``d_values``. One CSV per report.
    """
    out_path = Path(out_dir) if out_dir is not None else None
    if out_path is not None:
        out_path.mkdir(parents=True, exist_ok=True)

    ensemble = scenario.ensemble_for_trial(0)
    reports: list[FocusingReport] = []

    def measure(target: int, other: int | None, spacing: int) -> FocusingReport:
        try:
            return focusing_report(ensemble, target, other, spacing)
        except (ConfigurationError, DomainError) as exc:
            raise type(exc)(
                f"focusing at target index {target} (spacing {spacing}): {exc}"
            ) from exc

    base_spacing = scenario.d_values[0]
    for k, target in enumerate(scenario.target_indices):
        report = measure(target, None, base_spacing)
        reports.append(report)
        if out_path is not None:
            focusing_report_to_csv(report, out_path / f"focus_single_t{k}.csv")

    if len(scenario.target_indices) >= 2:
        first, second = scenario.target_indices[:2]
        for spacing in scenario.d_values:
            for k, (tgt, other) in enumerate(((first, second), (second, first))):
                report = measure(tgt, other, spacing)
                reports.append(report)
                if out_path is not None:
                    focusing_report_to_csv(
                        report, out_path / f"focus_two_user_D{spacing}_t{k}.csv"
                    )
    return reports


def run_sounding_study(
    scenario: Scenario,
    out_dir: str | Path | None = None,
    tb_values: tuple[int, ...] = (100, 1000, 10000),
) -> list[tuple[int, float, float]]:
    """Channel-estimation error vs time-bandwidth product.

    For each TB value the probe chirp lasts ``TB / bandwidth`` seconds; the
    normalized error ``||est - true|| / ||true||`` toward the first target
    is reported as a median over the scenario's trials, once noiseless and
    once at the scenario's probe SNR (20 dB when sounding is "genie").
    Returns (tb, probe_snr_db, median_error) rows and writes
    ``sounding_error.csv`` when ``out_dir`` is given.
    """
    probe_snr = (
        scenario.sounding.probe_snr_db if scenario.sounding is not None else 20.0
    )
    snr_points = [math.inf]
    if not math.isinf(probe_snr):
        snr_points.append(probe_snr)
    target = scenario.target_indices[0]

    rows: list[tuple[int, float, float]] = []
    for tb in tb_values:
        duration = tb / scenario.cavity.bandwidth_hz
        for snr_db in snr_points:
            errors = []
            for trial in range(scenario.trials):
                ensemble = scenario.ensemble_for_trial(trial)
                cfg = SoundingConfig(
                    duration_s=duration,
                    probe_snr_db=snr_db,
                    rng_seed=derive_seed(scenario.master_seed, _STREAM_SOUNDING, trial, target),
                )
                chirp = sounding_chirp(ensemble.params, cfg)
                truth = ensemble.cirs[target]
                estimate = sound_cir(truth, cfg, chirp)
                errors.append(
                    float(np.linalg.norm(estimate.taps - truth.taps) / np.linalg.norm(truth.taps))
                )
            rows.append((tb, float(snr_db), float(np.median(errors))))

    if out_dir is not None:
        out_path = Path(out_dir)
        out_path.mkdir(parents=True, exist_ok=True)
        with open(out_path / "sounding_error.csv", "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(["tb", "probe_snr_db", "normalized_error"])
            for tb, snr_db, err in rows:
                writer.writerow([tb, repr(float(snr_db)), repr(float(err))])
    return rows


def _random_cir(rng: np.random.Generator, num_taps: int, tap_spacing: float) -> Cir:
    z = (rng.standard_normal(num_taps) + 1j * rng.standard_normal(num_taps)) / np.sqrt(2)
    return Cir(z / np.sqrt(num_taps), tap_spacing)


def run_validation_suite(seed: int = 0) -> list[tuple[str, bool, str]]:
    """Fast built-in invariant battery for the ``validate`` CLI command.

    Returns (name, passed, detail) triples. Each check is a cheap version
    of a contract the full test suite pins down harder.
    """
    rng = np.random.default_rng(seed)
    results: list[tuple[str, bool, str]] = []

    def check(name: str, passed: bool, detail: str) -> None:
        results.append((name, bool(passed), detail))

    # fast convolution / correlation against numpy's direct summation
    worst_conv = worst_corr = 0.0
    for _ in range(20):
        n, m = rng.integers(2, 257, 2)
        a = ComplexBasebandSignal(
            rng.standard_normal(n) + 1j * rng.standard_normal(n), 1.0
        )
        b = ComplexBasebandSignal(
            rng.standard_normal(m) + 1j * rng.standard_normal(m), 1.0
        )
        direct = np.convolve(a.samples, b.samples)
        err = np.max(np.abs(convolve(a, b).samples - direct)) / np.max(np.abs(direct))
        worst_conv = max(worst_conv, float(err))
        direct_corr = np.correlate(b.samples, a.samples, mode="full")
        err = np.max(np.abs(xcorr(a, b).samples - direct_corr)) / np.max(np.abs(direct_corr))
        worst_corr = max(worst_corr, float(err))
    check("convolution-direct-sum", worst_conv <= NUMERIC_RTOL, f"max rel err {worst_conv:.2e}")
    check("correlation-direct-sum", worst_corr <= NUMERIC_RTOL, f"max rel err {worst_corr:.2e}")

    # unit emitted energy per unit-amplitude pulse
    worst = 0.0
    pulse = np.ones(1, dtype=np.complex128)
    for _ in range(100):
        cir = _random_cir(rng, 128, 1.0)
        waveform = tr_precode([SymbolStream(pulse, 8)], [cir])
        worst = max(worst, abs(waveform.signal.energy - 1.0))
    check("precode-unit-energy", worst <= NUMERIC_RTOL, f"max |energy-1| {worst:.2e}")

    # noiseless matched peak: sqrt(channel energy) at the focusing lag
    worst = 0.0
    aligned = True
    for _ in range(100):
        cir = _random_cir(rng, 128, 1.0)
        waveform = tr_precode([SymbolStream(pulse, 8)], [cir])
        received = propagate(waveform, cir, 0.0)
        peak_idx = int(np.argmax(np.abs(received.samples)))
        aligned &= peak_idx == cir.num_taps - 1
        expected = math.sqrt(cir.energy)
        worst = max(worst, abs(abs(received.samples[peak_idx]) - expected) / expected)
    check("matched-peak-law", aligned and worst <= NUMERIC_RTOL, f"max rel err {worst:.2e}")

    # received field equals the kernel expansion, sample for sample
    worst = 0.0
    for _ in range(10):
        cirs = [_random_cir(rng, 64, 1.0) for _ in range(2)]
        spacing = 9
        streams = [
            SymbolStream(rng.standard_normal(4) + 1j * rng.standard_normal(4), spacing)
            for _ in range(2)
        ]
        waveform = tr_precode(streams, cirs)
        for j in range(2):
            received = propagate(waveform, cirs[j], 0.0).samples
            expansion = np.zeros_like(received)
            for i in range(2):
                kernel = tr_kernel(cirs[j], cirs[i]).values
                for l, amplitude in enumerate(streams[i].symbols):
                    start = l * spacing
                    expansion[start : start + kernel.size] += amplitude * kernel
            worst = max(worst, float(np.max(np.abs(received - expansion)) / np.max(np.abs(received))))
    check("kernel-expansion-consistency", worst <= NUMERIC_RTOL, f"max rel err {worst:.2e}")

    # autocorrelation dominance of the focusing kernel
    dominated = True
    for _ in range(50):
        cir = _random_cir(rng, 96, 1.0)
        kernel = tr_kernel(cir, cir)
        values = np.abs(kernel.values)
        dominated &= bool(np.all(values <= values[kernel.lag0_index] * (1 + 1e-12)))
    check("autocorrelation-dominance", dominated, "all lags below lag-0 peak")

    # bit-identical regeneration from the same seed
    params = CavityParams(num_taps=64, bandwidth_hz=4e9, rng_seed=int(rng.integers(2**31)))
    positions = grid_positions(-1.5, 1.5, 0.3)
    first = synth_cavity_ensemble(params, positions)
    second = synth_cavity_ensemble(params, positions)
    identical = all(
        np.array_equal(x.taps, y.taps) for x, y in zip(first.cirs, second.cirs)
    )
    check("ensemble-determinism", identical, "same seed reproduces taps bit-for-bit")

    # noiseless chirp sounding recovers the channel
    truth = first.cirs[0]
    cfg = SoundingConfig(duration_s=128 / params.bandwidth_hz)
    estimate = sound_cir(truth, cfg, sounding_chirp(params, cfg))
    err = float(np.linalg.norm(estimate.taps - truth.taps) / np.linalg.norm(truth.taps))
    check("noiseless-sounding-recovery", err <= 1e-9, f"normalized error {err:.2e}")

    return results

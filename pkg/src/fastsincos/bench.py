"""Throughput of the scalar kernel, the batch paths and a per-call libm loop."""

from __future__ import annotations

import math
import platform
import re
import statistics
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import kernel
from .accuracy import DEFAULT_SEED
from .batch import sincos_batch, sincos_batch_interleaved, simd_lanes
from .kernel import MagnitudeFix, PipelineConfig, Variant

PATHS = ("scalar", "batch", "interleaved", "libm-baseline")

# float64 add latency assumed by the cumulative-sum clock calibration
_ADD_LATENCY_CYCLES = 4


class BenchError(RuntimeError):
    pass


@dataclass(frozen=True)
class BenchSpec:
    batch_size: int = 65536
    repetitions: int = 9
    warmup_repetitions: int = 2
    paths: Sequence[str] = PATHS
    variant: Variant = Variant.NORMALIZED
    seed: int = DEFAULT_SEED
    # the pure-Python scalar kernel is slow; it is timed on a prefix this long
    scalar_pairs: int = 2048

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        object.__setattr__(self, "paths", tuple(self.paths))
        if self.repetitions < 3:
            raise ValueError(f"repetitions must be >= 3, got {self.repetitions}")
        if self.warmup_repetitions < 0:
            raise ValueError("warmup_repetitions must be >= 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.scalar_pairs < 1:
            raise ValueError("scalar_pairs must be >= 1")
        unknown = [p for p in self.paths if p not in PATHS]
        if unknown or not self.paths:
            raise ValueError(f"unknown paths {unknown}; choose from {', '.join(PATHS)}")


@dataclass
class PathTiming:
    path: str
    pairs: int
    ns_per_pair: float
    cycles_per_pair: Optional[float]
    checksum: float

    @property
    def pairs_per_second(self) -> float:
        return 1e9 / self.ns_per_pair


@dataclass
class BenchReport:
    machine: str
    clock_hz: Optional[float]
    clock_source: str
    timings: dict = field(default_factory=dict)
    # batch time with the reciprocal repair over batch time with the cheap one
    reciprocal_fix_ratio: Optional[float] = None

    def rows(self) -> list:
        return [
            {
                "path": t.path,
                "pairs": t.pairs,
                "ns_per_pair": t.ns_per_pair,
                "pairs_per_second": t.pairs_per_second,
                "cycles_per_pair": t.cycles_per_pair,
                "checksum": t.checksum,
            }
            for t in self.timings.values()
        ]

    def as_dict(self) -> dict:
        return {
            "machine": self.machine,
            "clock_hz": self.clock_hz,
            "clock_source": self.clock_source,
            "reciprocal_fix_ratio": self.reciprocal_fix_ratio,
            "paths": {row.pop("path"): row for row in self.rows()},
        }


def _cpuinfo():
    try:
        with open("/proc/cpuinfo") as f:
            return f.read()
    except OSError:
        return ""


def machine_descriptor() -> str:
    model = platform.processor()
    m = re.search(r"^model name\s*:\s*(.+)$", _cpuinfo(), re.MULTILINE)
    if m:
        model = m.group(1).strip()
    return (
        f"{model or platform.machine()}; {platform.system()} {platform.machine()}; "
        f"python {platform.python_version()}; numpy {np.__version__}; "
        f"{simd_lanes()} float32 lanes"
    )


def calibrate_clock_hz(n: int = 1 << 21, repetitions: int = 5) -> float:
    """Estimate the core clock from a serially dependent chain of adds."""
    a = np.ones(n)
    times = []
    for _ in range(repetitions):
        t0 = time.perf_counter()
        np.cumsum(a)
        times.append(time.perf_counter() - t0)
    return _ADD_LATENCY_CYCLES * n / min(times)


def clock_hz():
    """(frequency in Hz, source) from /proc/cpuinfo, else from calibration."""
    m = re.search(r"^cpu MHz\s*:\s*([0-9.]+)", _cpuinfo(), re.MULTILINE)
    if m and float(m.group(1)) > 0:
        return float(m.group(1)) * 1e6, "cpuinfo"
    return calibrate_clock_hz(), "calibrated"


def _check_resolution(elapsed: float):
    resolution = time.get_clock_info("perf_counter").resolution
    if elapsed < 1000 * resolution:
        raise BenchError(
            f"median run of {elapsed:.3g} s is too close to the timer resolution "
            f"({resolution:.3g} s); use a larger batch"
        )


def _time_round_robin(runs: dict, spec: BenchSpec) -> dict:
    """Per-repetition wall times of each runner.

    Every repetition runs each function once in turn, so slow drift in the
    machine's speed affects all of them alike instead of whichever happened
    to be timed last.
    """
    for _ in range(spec.warmup_repetitions):
        for fn in runs.values():
            fn()
    times = {name: [] for name in runs}
    for _ in range(spec.repetitions):
        for name, fn in runs.items():
            t0 = time.perf_counter()
            fn()
            times[name].append(time.perf_counter() - t0)
    for name, ts in times.items():
        _check_resolution(statistics.median(ts))
    return times


def _scalar_runner(theta: np.ndarray, cfg: PipelineConfig):
    angles = theta.tolist()
    sines = [0.0] * len(angles)
    cosines = [0.0] * len(angles)
    sincos = kernel.sincos

    def run():
        for i, t in enumerate(angles):
            p = sincos(t, cfg)
            sines[i] = p.s
            cosines[i] = p.c

    return run, lambda: math.fsum(sines) + math.fsum(cosines)


def _libm_runner(theta: np.ndarray):
    angles = theta.tolist()
    sines = [0.0] * len(angles)
    cosines = [0.0] * len(angles)
    sin, cos = math.sin, math.cos

    def run():
        for i, t in enumerate(angles):
            sines[i] = sin(t)
            cosines[i] = cos(t)

    return run, lambda: math.fsum(sines) + math.fsum(cosines)


def _batch_runner(fn, theta: np.ndarray, cfg: PipelineConfig):
    out = {}

    def run():
        out["r"] = fn(theta, cfg)

    def checksum():
        r = out["r"]
        return float(np.sum(r.sines, dtype=np.float64) + np.sum(r.cosines, dtype=np.float64))

    return run, checksum


def run_bench(spec: BenchSpec = BenchSpec()) -> BenchReport:
    """Median wall-clock time per pair for each requested path.

    Inputs are generated before timing; outputs are stored and checksummed so
    no path can be optimized away.
    """
    rng = np.random.default_rng(spec.seed)
    theta = rng.uniform(-math.pi, math.pi, spec.batch_size).astype(np.float32)
    cfg = PipelineConfig(spec.variant)
    hz, source = clock_hz()
    report = BenchReport(machine_descriptor(), hz, source)

    runs, checksums, pairs = {}, {}, {}
    for path in spec.paths:
        if path == "scalar":
            subset = theta[: spec.scalar_pairs]
            runs[path], checksums[path] = _scalar_runner(subset, cfg)
        elif path == "libm-baseline":
            subset = theta
            runs[path], checksums[path] = _libm_runner(subset)
        else:
            subset = theta
            fn = sincos_batch if path == "batch" else sincos_batch_interleaved
            runs[path], checksums[path] = _batch_runner(fn, subset, cfg)
        pairs[path] = len(subset)

    times = _time_round_robin(runs, spec)
    for path in spec.paths:
        ns = statistics.median(times[path]) * 1e9 / pairs[path]
        report.timings[path] = PathTiming(
            path=path,
            pairs=pairs[path],
            ns_per_pair=ns,
            cycles_per_pair=ns * hz * 1e-9 if hz else None,
            checksum=checksums[path](),
        )

    if "batch" in spec.paths:
        cheap = PipelineConfig(Variant.NORMALIZED, fix=MagnitudeFix.PENULTIMATE)
        recip = PipelineConfig(Variant.NORMALIZED, fix=MagnitudeFix.RECIPROCAL)
        t = _time_round_robin(
            {
                "cheap": _batch_runner(sincos_batch, theta, cheap)[0],
                "recip": _batch_runner(sincos_batch, theta, recip)[0],
            },
            spec,
        )
        report.reciprocal_fix_ratio = statistics.median(
            r / c for r, c in zip(t["recip"], t["cheap"])
        )
    return report

"""Batch pipeline: parse -> initial mapping -> route -> verify -> report."""

from __future__ import annotations

import csv
import io
import json
import logging
import random
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from .hardware import CalibrationError, DistanceBundle, HardwareModel, build_distance_bundle, load_calibration
from .initial import AnnealConfig, anneal_initial, random_mapping, sabre_initial
from .metrics import CSV_COLUMNS, MAX_SIM_QUBITS, MetricsReport, summarize, topology_compliant, verify_equivalence
from .qasm import Circuit, QasmError, build_dag, emit_qasm, parse_qasm
from .router import Mapping, RoutedCircuit, RouterConfig, route

logger = logging.getLogger(__name__)

ENGINES = ("random", "sabre", "hsa")
PROXY_NOTE = (
    "fidelity_proxy is an analytic estimate (product of CNOT and readout success "
    "probabilities), not a hardware-measured success rate"
)


@dataclass
class RunConfig:
    inputs: list[str] = field(default_factory=list)
    calibration: str = "valencia"
    alphas: tuple[float, float, float] = (0.5, 0.5, 0.0)
    W: float = 0.5
    extended_size: int = 20
    bridge: bool = True
    initial: str = "sabre"
    trials: int = 10
    budget: int = 100
    seed: int = 0
    out: str | None = None
    report: str = "json"
    timing: bool = False
    verify: bool = True
    jobs: int = 1

    def __post_init__(self) -> None:
        self.alphas = tuple(float(a) for a in self.alphas)
        if self.initial not in ENGINES:
            raise ValueError(f"initial must be one of {ENGINES}")
        if self.report not in ("json", "csv"):
            raise ValueError("report must be json or csv")
        if self.trials < 1 or self.budget < 1:
            raise ValueError("trials and budget must be positive")
        self.router_config()

    def router_config(self) -> RouterConfig:
        return RouterConfig(
            alphas=self.alphas, W=self.W, extended_size=self.extended_size,
            bridge_enabled=self.bridge, seed=self.seed,
        )


def collect_inputs(paths) -> list[Path]:
    files: list[Path] = []
    for p in map(Path, paths):
        if p.is_dir():
            files.extend(sorted(p.glob("*.qasm")))
        else:
            files.append(p)
    return files


def _trial_seed(seed: int, bench: str, trial: int) -> str:
    # str seeds hash deterministically, independent of PYTHONHASHSEED
    return f"{seed}:{bench}:{trial}"


def make_initial_mapping(
    engine: str,
    circuit: Circuit,
    dag,
    model: HardwareModel,
    bundle: DistanceBundle,
    router_config: RouterConfig,
    budget: int,
    seed: str | int,
) -> Mapping:
    rng = random.Random(seed)
    if engine == "random":
        return random_mapping(circuit.num_logical_qubits, model, rng)
    if engine == "sabre":
        return sabre_initial(circuit, dag, model, bundle, router_config, rng, budget)
    if engine == "hsa":
        cfg = AnnealConfig(mapping_call_budget=budget, seed=rng.getrandbits(63))
        return anneal_initial(circuit, dag, model, bundle, cfg, router_config)
    raise ValueError(f"unknown initial-mapping engine {engine!r}")


@dataclass
class _Job:
    bench: str
    trial: int
    circuit: Circuit
    model: HardwareModel
    config: RunConfig


def _run_trial(job: _Job) -> tuple[RoutedCircuit, bool | None, float]:
    t0 = time.perf_counter()
    circuit, model, cfg = job.circuit, job.model, job.config
    rc = cfg.router_config()
    bundle = build_distance_bundle(model, rc.alphas)
    dag = build_dag(circuit)
    start = make_initial_mapping(
        cfg.initial, circuit, dag, model, bundle, rc, cfg.budget, _trial_seed(cfg.seed, job.bench, job.trial)
    )
    routed = route(circuit, dag, model, bundle, start, rc)
    seconds = time.perf_counter() - t0
    if not topology_compliant(routed, model):
        return routed, False, seconds
    verified = None
    if cfg.verify and circuit.num_logical_qubits <= MAX_SIM_QUBITS:
        try:
            verified = verify_equivalence(circuit, routed)
        except ValueError as exc:
            logger.warning("%s trial %d: verification skipped (%s)", job.bench, job.trial, exc)
    return routed, verified, seconds


def _map(fn, jobs, workers: int):
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, jobs))
    return [fn(j) for j in jobs]


def _load_circuits(files: list[Path], model: HardwareModel) -> list[tuple[str, Circuit | None, str]]:
    out = []
    for f in files:
        bench = f.stem
        try:
            circuit = parse_qasm(f.read_text(encoding="utf-8"))
        except (OSError, UnicodeDecodeError) as exc:
            out.append((bench, None, f"cannot read {f}: {exc}"))
            continue
        except QasmError as exc:
            out.append((bench, None, f"{f}: {exc}"))
            continue
        if circuit.num_logical_qubits > model.num_qubits:
            out.append((bench, None, f"{f}: needs {circuit.num_logical_qubits} qubits, device has {model.num_qubits}"))
            continue
        out.append((bench, circuit, ""))
    return out


@dataclass
class RunResult:
    reports: list[MetricsReport]
    routed: dict[str, RoutedCircuit]
    exit_code: int
    text: str


def run(config: RunConfig) -> RunResult:
    """Route every input ``config.trials`` times and report the aggregate.

    The best trial's routed QASM is written to ``config.out`` when set. Exit
    code 1 flags a failed verification, 2 an input error.
    """
    try:
        model = load_calibration(config.calibration)
    except CalibrationError as exc:
        logger.error("%s", exc)
        return RunResult([], {}, 2, "")
    loaded = _load_circuits(collect_inputs(config.inputs), model)
    jobs = [
        _Job(bench, t, circuit, model, config)
        for bench, circuit, _ in loaded if circuit is not None
        for t in range(config.trials)
    ]
    results = iter(_map(_run_trial, jobs, config.jobs))

    reports: list[MetricsReport] = []
    best_routed: dict[str, RoutedCircuit] = {}
    exit_code = 0
    for bench, circuit, err in loaded:
        if circuit is None:
            logger.error("%s", err)
            reports.append(MetricsReport(bench, 0, 0, 0.0, 0, 0.0, 0.0, status="input-error", message=err))
            exit_code = exit_code or 2
            continue
        trial_results = [next(results) for _ in range(config.trials)]
        routed = [r for r, _, _ in trial_results]
        verified = [v for _, v, _ in trial_results]
        report, best = summarize(bench, circuit, routed, model, verified)
        if any(v is False for v in verified):
            report.status = "verification-failed"
            exit_code = 1
        if config.timing:
            # mapping + routing time, verification excluded
            report.runtime_s = sum(sec for _, _, sec in trial_results)
        reports.append(report)
        best_routed[bench] = routed[best]

    text = format_report(reports, config)
    if config.out:
        out = Path(config.out)
        out.mkdir(parents=True, exist_ok=True)
        for bench, r in best_routed.items():
            (out / f"{bench}.qasm").write_text(emit_qasm(r), encoding="utf-8")
        (out / f"report.{config.report}").write_text(text, encoding="utf-8")
    return RunResult(reports, best_routed, exit_code, text)


def _config_dict(config: RunConfig) -> dict:
    d = asdict(config)
    d.pop("out")
    d.pop("jobs")
    d["alphas"] = list(config.alphas)
    return d


def format_report(reports: list[MetricsReport], config: RunConfig) -> str:
    if config.report == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, CSV_COLUMNS + ["status"], lineterminator="\n")
        w.writeheader()
        for r in reports:
            w.writerow({**r.row(), "status": r.status})
        return buf.getvalue()
    doc = {"config": _config_dict(config), "note": PROXY_NOTE, "benchmarks": [r.to_dict() for r in reports]}
    return json.dumps(doc, indent=2) + "\n"


# ---------------------------------------------------------------------------
# baseline comparison


COMPARE_COLUMNS = ["benchmark", "n", "g_all", "g_ha", "g_min_ha", "g_base", "g_min_base", "dg_pct", "dg_min_pct"]


def percent_change(new: float, old: float) -> float | None:
    if old == 0:
        return 0.0 if new == 0 else None
    return 100.0 * (new - old) / old


def baseline_config(config: RunConfig) -> RouterConfig:
    """SWAP-only, hop-count-only router with the same look-ahead settings."""
    return replace(config.router_config(), alphas=(1.0, 0.0, 0.0), bridge_enabled=False)


def _compare_trial(job: _Job) -> tuple[int, int]:
    circuit, model, cfg = job.circuit, job.model, job.config
    ha_cfg = cfg.router_config()
    base_cfg = baseline_config(cfg)
    ha_bundle = build_distance_bundle(model, ha_cfg.alphas)
    base_bundle = build_distance_bundle(model, base_cfg.alphas)
    dag = build_dag(circuit)
    start = make_initial_mapping(
        cfg.initial, circuit, dag, model, ha_bundle, ha_cfg, cfg.budget, _trial_seed(cfg.seed, job.bench, job.trial)
    )
    ha = route(circuit, dag, model, ha_bundle, start, ha_cfg)
    base = route(circuit, dag, model, base_bundle, start, base_cfg)
    return ha.added_cnot_count, base.added_cnot_count


@dataclass
class CompareResult:
    rows: list[dict]
    exit_code: int
    text: str
    regressions: list[str]


def compare_baseline(config: RunConfig) -> CompareResult:
    """Added CNOTs of the configured router vs. the SWAP-only baseline.

    Both routers start from the same initial mappings. Circuits where the
    configured router is worse on average are listed in ``regressions`` and
    raise a warning; they do not fail the run.
    """
    try:
        model = load_calibration(config.calibration)
    except CalibrationError as exc:
        logger.error("%s", exc)
        return CompareResult([], 2, "", [])
    loaded = _load_circuits(collect_inputs(config.inputs), model)
    jobs = [
        _Job(bench, t, circuit, model, config)
        for bench, circuit, _ in loaded if circuit is not None
        for t in range(config.trials)
    ]
    results = iter(_map(_compare_trial, jobs, config.jobs))
    rows: list[dict] = []
    exit_code = 0
    regressions = []
    for bench, circuit, err in loaded:
        if circuit is None:
            logger.error("%s", err)
            exit_code = 2
            continue
        pairs = [next(results) for _ in range(config.trials)]
        ha = [p[0] for p in pairs]
        base = [p[1] for p in pairs]
        g_ha, g_base = sum(ha) / len(ha), sum(base) / len(base)
        rows.append({
            "benchmark": bench,
            "n": circuit.num_logical_qubits,
            "g_all": sum(1 for g in circuit.gates if g.name != "barrier"),
            "g_ha": g_ha,
            "g_min_ha": min(ha),
            "g_base": g_base,
            "g_min_base": min(base),
            "dg_pct": percent_change(g_ha, g_base),
            "dg_min_pct": percent_change(min(ha), min(base)),
        })
        if g_ha > g_base:
            regressions.append(bench)
    if regressions:
        warnings.warn(f"router adds more CNOTs than the SWAP-only baseline on: {', '.join(regressions)}",
                      stacklevel=2)
    if rows:
        mean_ha = sum(r["g_ha"] for r in rows) / len(rows)
        mean_base = sum(r["g_base"] for r in rows) / len(rows)
        if mean_ha > mean_base:
            warnings.warn(f"mean added CNOTs {mean_ha:.2f} exceeds baseline {mean_base:.2f}", stacklevel=2)

    if config.report == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, COMPARE_COLUMNS, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        text = buf.getvalue()
    else:
        text = json.dumps({"config": _config_dict(config), "rows": rows}, indent=2) + "\n"
    if config.out:
        out = Path(config.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"compare.{config.report}").write_text(text, encoding="utf-8")
    return CompareResult(rows, exit_code, text, regressions)

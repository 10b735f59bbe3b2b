"""实验流水线

每个 CLI 子命令对应一个 run_* 方法：由配置构造网格、算子、核与源项，
执行正问题或反问题，原子写出 CSV 与报告，最后写运行清单。
合成实验中同时保留历史部分的真值，供消去历史与误差评估使用。
"""

import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src import __version__
from src.core.executor.mode_executor import ModeExecutor
from src.core.forward.caputo import caputo_form
from src.core.forward.simulator import observe, simulate
from src.core.forward.sources import (
    build_profile,
    make_gap_source,
    make_partitioned_source,
)
from src.core.inverse.functional_recovery import recover_kernel_from_functional
from src.core.inverse.history_recovery import recover_history
from src.core.inverse.kernel_recovery import recover_kernel, recover_product
from src.core.inverse.measure_recovery import (
    recover_distributed_measure,
    recover_kernel_and_measure,
)
from src.core.kernels.memory_kernel import MemoryKernel, PowerLawKernel, build_kernel
from src.core.kernels.sonine import analytic_sonine_partner, sonine_partner
from src.core.laplace.contour import invert_relaxation
from src.core.laplace.mittag_leffler import mittag_leffler
from src.core.operators.functionals import build_functional, functional_coefficients
from src.core.operators.spectral_operator import (
    FractionalSpectrum,
    SpectralOperator,
    build_measure,
    build_operator,
    fractional_eigenvalues,
)
from src.core.reporter.csv_writer import (
    build_manifest,
    read_csv,
    write_csv,
    write_manifest,
    write_matrix,
)
from src.core.reporter.report_generator import ReportGenerator
from src.core.volterra.product_integration import kernel_hat_samples, solve_second_kind
from src.infrastructure.config.config_manager import ExperimentConfig
from src.infrastructure.errors.exceptions import InconsistencyError, PreconditionError
from src.infrastructure.logging.logger import get_logger
from src.infrastructure.monitoring.run_monitor import RunMonitor
from src.models.entities import (
    ObservationWindow,
    RecoveryReport,
    SimulationResult,
    SourceModel,
    TimeGrid,
)
from src.service.experiment.noise import inject_noise
from src.utils.numerics import FloatArray, relative_l2

SEPARATION_THRESHOLD = 1e-3


@dataclass
class RunOutcome:
    """一次子命令的产出"""

    command: str
    files: List[str] = field(default_factory=list)
    summary: Dict[str, Any] = field(default_factory=dict)
    report: Optional[RecoveryReport] = None
    manifest_path: Optional[str] = None


@dataclass
class SyntheticData:
    """合成观测：完整轨迹、历史部分真值与加噪后的数据"""

    simulation: SimulationResult
    history: Optional[SimulationResult]
    data: FloatArray
    source: SourceModel
    coefficients: FloatArray


def _pad(values: Sequence[float], size: int) -> FloatArray:
    padded = np.zeros(size)
    values = list(values)[:size]
    padded[: len(values)] = values
    return padded


def true_kernel_samples(kernel: MemoryKernel, times: FloatArray) -> FloatArray:
    """与反卷积未知量同口径的帽函数平均核值"""
    h = float(times[1] - times[0])
    return kernel_hat_samples(kernel, TimeGrid(T=times.size * h, N=times.size))


class ExperimentRunner:
    def __init__(
        self,
        config: ExperimentConfig,
        config_hash: str,
        out_dir: Optional[str] = None,
        threads: Optional[int] = None,
    ):
        self.config = config
        self.config_hash = config_hash
        self.out_dir = out_dir or config.output.directory
        self.threads = threads if threads is not None else config.app.threads
        self.monitor = RunMonitor()
        self.logger = get_logger()
        self.logger.attach_monitor(self.monitor)
        self.reporter = ReportGenerator()

    # ---- 构造 ----

    def grid(self) -> TimeGrid:
        g = self.config.grid
        return TimeGrid.from_times(float(g.T), int(g.N), g.t0, g.t1)

    def operator(self) -> SpectralOperator:
        return build_operator(self.config.operator.to_spec())

    def spectrum(
        self, operator: Optional[SpectralOperator] = None
    ) -> FractionalSpectrum:
        operator = operator or self.operator()
        measure = build_measure(self.config.measure.to_spec())
        shifted = operator.eigenvalues + float(self.config.measure.eta)
        if np.any(shifted <= 0.0):
            raise PreconditionError("平移后的基算子特征值必须为正")
        lam = fractional_eigenvalues(shifted, measure)
        return FractionalSpectrum(base=operator, measure=measure, eigenvalues=lam)

    def kernel(self) -> MemoryKernel:
        return build_kernel(self.config.kernel.to_spec(float(self.config.grid.T)))

    def initial_coefficients(self, mode_count: int) -> FloatArray:
        return _pad(self.config.initial.coefficients, mode_count)

    def _block_values(
        self, blocks: Sequence[Any], grid: TimeGrid, mode_count: int
    ) -> Optional[FloatArray]:
        if not blocks:
            return None
        values = np.zeros((mode_count, grid.N + 1))
        for block in blocks:
            profile = build_profile(grid, block.to_spec())
            values += np.outer(_pad(block.modes, mode_count), profile)
        return values

    def source(self, grid: TimeGrid, mode_count: int) -> SourceModel:
        config = self.config.source
        history = self._block_values(config.history, grid, mode_count)
        if not grid.has_markers:
            window = self._block_values(config.blocks, grid, mode_count)
            parts = [p for p in (history, window) if p is not None]
            total = sum(parts) if parts else np.zeros((mode_count, grid.N + 1))
            return SourceModel(grid, np.asarray(total, dtype=float))
        if config.structure == "partitioned" and config.blocks:
            blocks = [
                (build_profile(grid, block.to_spec()), _pad(block.modes, mode_count))
                for block in config.blocks
            ]
            return make_partitioned_source(blocks, grid, history)
        window = self._block_values(config.blocks, grid, mode_count)
        return make_gap_source(grid, history, window)

    def _known_zero_history(self, source: SourceModel, u0: FloatArray) -> bool:
        return not source.has_history() and not np.any(u0 != 0.0)

    # ---- 合成数据 ----

    def synthesize(
        self,
        kernel: Optional[MemoryKernel] = None,
        spectrum: Optional[FractionalSpectrum] = None,
        scalar: bool = False,
    ) -> SyntheticData:
        grid = self.grid()
        operator = spectrum.base if spectrum is not None else self.operator()
        spectrum = spectrum or self.spectrum(operator)
        kernel = kernel or self.kernel()
        mode_count = spectrum.eigenvalues.size
        source = self.source(grid, mode_count)
        u0 = self.initial_coefficients(mode_count)
        with self.logger.stage("正问题"):
            simulation = simulate(spectrum, kernel, u0, source, grid, self.threads)
            history = None
            if grid.has_markers:
                history_only = SourceModel(grid, source.history_part())
                history = simulate(
                    spectrum, kernel, u0, history_only, grid, self.threads
                )
        coefficients = functional_coefficients(
            operator, build_functional(self.config.functional.to_spec())
        )
        clean = observe(simulation, coefficients) if scalar else simulation.modes
        data = inject_noise(clean, float(self.config.noise.level), self.config.seed)
        return SyntheticData(simulation, history, data, source, coefficients)

    def window_from(
        self, synthetic: SyntheticData, scalar: bool = False
    ) -> ObservationWindow:
        if synthetic.history is None:
            raise PreconditionError("观测窗口需要带 t0/t1 标记的时间网格")
        history = synthetic.history.modes
        if scalar:
            history = observe(synthetic.history, synthetic.coefficients)
        u0 = synthetic.simulation.initial_coefficients
        return ObservationWindow(
            grid=synthetic.simulation.grid,
            data=synthetic.data,
            source=synthetic.source,
            history_trajectory=history,
            known_zero_history=self._known_zero_history(synthetic.source, u0),
        )

    def window_from_csv(self, path: str, scalar: bool = False) -> ObservationWindow:
        """读取 simulate 写出的 CSV；历史部分未知，按配置声明判断是否为零"""
        grid = self.grid()
        table = read_csv(path)
        if "t" not in table or table["t"].size != grid.N + 1:
            raise PreconditionError(f"数据文件 {path} 的时间列与配置网格不符")
        operator = self.operator()
        mode_count = operator.mode_count
        if scalar:
            if "value" not in table:
                raise PreconditionError(f"数据文件 {path} 缺少 value 列")
            data = table["value"]
        else:
            names = [f"mode_{k}" for k in range(1, mode_count + 1)]
            missing = [name for name in names if name not in table]
            if missing:
                raise PreconditionError(f"数据文件 {path} 缺少列: {missing}")
            data = np.vstack([table[name] for name in names])
        source = self.source(grid, mode_count)
        u0 = self.initial_coefficients(mode_count)
        return ObservationWindow(
            grid=grid,
            data=data,
            source=source,
            known_zero_history=self._known_zero_history(source, u0),
        )

    # ---- 输出 ----

    def _path(self, name: str) -> str:
        return os.path.join(self.out_dir, name)

    def _write_report(self, report: RecoveryReport, stem: str) -> List[str]:
        suffix = {"json": "json", "markdown": "md"}.get(
            self.config.output.report_format, "txt"
        )
        report_path = self.reporter.save_report(
            report,
            self._path(f"{stem}_report.{suffix}"),
            self.config.output.report_format,
        )
        samples_path = write_csv(
            self._path(f"{stem}_samples.csv"),
            {"t": report.times, "value": report.values},
        )
        return [report_path, samples_path]

    def finalize(self, outcome: RunOutcome) -> RunOutcome:
        manifest = build_manifest(
            outcome.command, self.config_hash, __version__, outcome.files, self.monitor
        )
        outcome.manifest_path = write_manifest(
            self._path(f"manifest_{outcome.command}.json"), manifest
        )
        outcome.summary.setdefault("peak_memory_mb", manifest.peak_memory_mb)
        self.logger.info(f"{outcome.command} 完成，写出 {len(outcome.files)} 个文件")
        return outcome

    # ---- 子命令 ----

    def run_simulate(self, caputo_check: bool = False) -> RunOutcome:
        synthetic = self.synthesize()
        simulation = synthetic.simulation
        grid = simulation.grid
        times = grid.times
        files = [
            write_matrix(self._path("modes.csv"), times, simulation.modes),
            write_csv(
                self._path("observation.csv"),
                {"t": times, "value": observe(simulation, synthetic.coefficients)},
            ),
        ]
        snapshot_times = self.config.output.snapshot_times
        if snapshot_times:
            x = np.linspace(
                0.0, simulation.operator.length, self.config.output.snapshot_points
            )
            indices = [int(round(t / grid.h)) for t in snapshot_times]
            snapshots = simulation.field(x, indices)
            columns: Dict[str, Sequence[float]] = {"x": x}
            for index, row in zip(indices, snapshots):
                columns[f"t_{times[index]:.6g}"] = row
            files.append(write_csv(self._path("field.csv"), columns))
        summary = {
            "modes": simulation.mode_count,
            "N": grid.N,
            "max_residual": float(np.max(simulation.residuals)),
            "u1(T)": float(simulation.modes[0, -1]),
        }
        if caputo_check:
            residuals = self.caputo_residuals(synthetic)
            summary["caputo_max_relative"] = max(residuals.values())
        return self.finalize(RunOutcome("simulate", files, summary))

    def run_sonine(self) -> RunOutcome:
        kernel = self.kernel()
        grid = TimeGrid(T=float(self.config.grid.T), N=int(self.config.grid.N))
        with self.logger.stage("Sonine 伴随核"):
            partner = sonine_partner(kernel, grid)
        midpoints = partner.kernel.times
        columns: Dict[str, Sequence[float]] = {"t": midpoints, "K": partner.cell_values}
        summary: Dict[str, Any] = {
            "family": kernel.family,
            "residual": partner.residual,
        }
        if isinstance(kernel, PowerLawKernel):
            exact = np.asarray(analytic_sonine_partner(kernel)(midpoints), dtype=float)
            columns["K_exact"] = exact
            late = midpoints >= 0.1 * midpoints[-1]
            summary["late_relative_error"] = float(
                np.max(np.abs(partner.cell_values[late] / exact[late] - 1.0))
            )
        files = [write_csv(self._path("sonine.csv"), columns)]
        return self.finalize(RunOutcome("sonine", files, summary))

    def run_ml(self, alpha: float, arguments: Sequence[float]) -> RunOutcome:
        values = [mittag_leffler(alpha, z) for z in arguments]
        path = self._path("mittag_leffler.csv")
        files = [write_csv(path, {"z": arguments, "E": values})]
        summary = {"alpha": alpha, "points": len(values)}
        return self.finalize(RunOutcome("ml", files, summary))

    def run_invert(self, samples: int = 16) -> RunOutcome:
        """围道反演的松弛函数与时间推进解逐点对比"""
        kernel = self.kernel()
        grid = TimeGrid(T=float(self.config.grid.T), N=int(self.config.grid.N))
        spectrum = self.spectrum()
        indices = np.unique(np.linspace(1, grid.N, samples).round().astype(int))
        times = grid.times[indices]
        ones = np.ones(grid.N + 1)

        def compare(lam: float) -> Tuple[FloatArray, FloatArray]:
            marching = solve_second_kind(kernel, lam, ones, grid).values[indices]
            contour = np.array(
                [invert_relaxation(kernel, lam, float(t)) for t in times]
            )
            return contour, marching

        with self.logger.stage("围道反演"):
            results = ModeExecutor(self.threads).map(
                compare, spectrum.eigenvalues.tolist(), "围道反演"
            )
        columns: Dict[str, Sequence[float]] = {"t": times}
        worst = 0.0
        for k, (contour, marching) in enumerate(results, start=1):
            columns[f"contour_{k}"] = contour
            columns[f"marching_{k}"] = marching
            worst = max(worst, float(np.max(np.abs(contour - marching))))
        files = [write_csv(self._path("relaxation.csv"), columns)]
        summary = {"modes": len(results), "max_abs_difference": worst}
        return self.finalize(RunOutcome("invert", files, summary))

    def _window(
        self, data_path: Optional[str], scalar: bool = False
    ) -> Tuple[ObservationWindow, Optional[SyntheticData]]:
        if data_path:
            return self.window_from_csv(data_path, scalar), None
        synthetic = self.synthesize(scalar=scalar)
        return self.window_from(synthetic, scalar), synthetic

    def run_recover_kernel(self, data_path: Optional[str] = None) -> RunOutcome:
        window, synthetic = self._window(data_path)
        spectrum = self.spectrum()
        settings = self.config.regularization.to_settings()
        with self.logger.stage("核恢复"):
            report = recover_kernel(
                window, spectrum.eigenvalues, settings, self.threads
            )
        summary: Dict[str, Any] = {"max_spread": report.diagnostics["max_spread"]}
        if synthetic is not None:
            truth = true_kernel_samples(self.kernel(), report.times)
            reliable = slice(max(report.unreliable_nodes) + 1, None)
            error = relative_l2(report.values[reliable], truth[reliable])
            summary["relative_error"] = error
            report.diagnostics["relative_error"] = error
        files = self._write_report(report, "kernel")
        return self.finalize(RunOutcome("recover-kernel", files, summary, report))

    def run_recover_product(self, data_path: Optional[str] = None) -> RunOutcome:
        window, synthetic = self._window(data_path)
        settings = self.config.regularization.to_settings()
        with self.logger.stage("乘积恢复"):
            report = recover_product(window, settings, self.threads)
        summary: Dict[str, Any] = {
            "gauge_constant": report.gauge_constant,
            "gauge_time": report.gauge_time,
        }
        if synthetic is not None:
            # 规范只确定 λ_k 到公共因子 M(t_g)，比较相对参考模态的比值
            lam = self.spectrum().eigenvalues
            recovered = {
                k: value
                for k, value in report.parameters["eigenvalues"].items()
                if value is not None
            }
            first = min(recovered)
            errors = [
                abs(value * lam[first - 1] / (recovered[first] * lam[k - 1]) - 1.0)
                for k, value in recovered.items()
            ]
            summary["eigenvalue_relative_error"] = max(errors)
        files = self._write_report(report, "product")
        eigen = report.parameters["eigenvalues"]
        modes = [k for k in sorted(eigen) if eigen[k] is not None]
        files.append(
            write_csv(
                self._path("product_eigenvalues.csv"),
                {"mode": modes, "lambda": [eigen[k] for k in modes]},
            )
        )
        return self.finalize(RunOutcome("recover-product", files, summary, report))

    def run_recover_history(self, data_path: Optional[str] = None) -> RunOutcome:
        window, synthetic = self._window(data_path)
        spectrum = self.spectrum()
        settings = self.config.regularization.to_settings()
        with self.logger.stage("历史恢复"):
            report = recover_history(
                self.kernel(), spectrum.eigenvalues, window, settings, self.threads
            )
        summary: Dict[str, Any] = {
            "initial_coefficients": report.parameters["initial_coefficients"]
        }
        files = self._write_report(report, "history")
        grid = window.grid
        i0, _ = grid.require_markers()
        values = np.atleast_2d(report.values)
        files.append(write_matrix(self._path("history.csv"), grid.times[:i0], values))
        if synthetic is not None:
            truth = synthetic.source.values[:, :i0]
            if np.any(truth != 0.0):
                summary["relative_error"] = relative_l2(values, truth)
        return self.finalize(RunOutcome("recover-history", files, summary, report))

    def run_recover_functional(
        self, family: Optional[str] = None, data_path: Optional[str] = None
    ) -> RunOutcome:
        family = family or self.config.kernel.family
        window, synthetic = self._window(data_path, scalar=True)
        operator = self.operator()
        coefficients = functional_coefficients(
            operator, build_functional(self.config.functional.to_spec())
        )
        spectrum = self.spectrum(operator)
        settings = self.config.regularization.to_settings()
        with self.logger.stage("参数族拟合"):
            report = recover_kernel_from_functional(
                window,
                coefficients,
                spectrum.eigenvalues,
                family,
                settings,
                self.threads,
            )
        summary: Dict[str, Any] = {
            name: report.parameters[name]
            for name in ("c", "alpha", "lambda", "misfit", "converged")
            if name in report.parameters
        }
        if synthetic is not None:
            truth = self.kernel().to_spec()
            for name in ("c", "alpha", "lambda"):
                if name in report.parameters and name in truth:
                    error = abs(report.parameters[name] / float(truth[name]) - 1.0)
                    summary[f"{name}_relative_error"] = error
        files = self._write_report(report, "functional")
        return self.finalize(RunOutcome("recover-functional", files, summary, report))

    def run_recover_measure(
        self,
        eigenvalue_path: Optional[str] = None,
        shift_search: bool = False,
        from_window: bool = False,
    ) -> RunOutcome:
        operator = self.operator()
        mu = operator.eigenvalues
        files: List[str] = []
        if from_window:
            spectrum = self.spectrum(operator)
            synthetic = self.synthesize(spectrum=spectrum)
            settings = self.config.regularization.to_settings()
            with self.logger.stage("核与测度联合恢复"):
                report = recover_kernel_and_measure(
                    self.window_from(synthetic),
                    mu,
                    settings,
                    self.threads,
                    shift_search,
                )
            atoms = report.parameters["atoms"]
            eta = report.parameters["eta"]
            files.extend(self._write_report(report, "kernel_measure"))
        else:
            if eigenvalue_path:
                table = read_csv(eigenvalue_path)
                if "lambda" not in table:
                    raise PreconditionError(f"{eigenvalue_path} 缺少 lambda 列")
                lam = table["lambda"]
                if "mu" in table:
                    mu = table["mu"]
                elif lam.size != mu.size:
                    raise PreconditionError("λ 的个数与算子模态数不符")
            else:
                lam = self.spectrum(operator).eigenvalues
            with self.logger.stage("测度剥离"):
                recovery = recover_distributed_measure(
                    lam, mu, shift_search=shift_search
                )
            atoms = [list(atom) for atom in recovery.atoms]
            eta = recovery.eta
            report = RecoveryReport(
                kind="measure",
                times=np.asarray(mu, dtype=float),
                values=np.asarray(lam, dtype=float),
                residuals={
                    index + 1: value
                    for index, value in enumerate(recovery.residual_history)
                },
                parameters={"atoms": atoms, "eta": eta},
            )
            files.extend(self._write_report(report, "measure"))
        files.append(
            write_csv(
                self._path("atoms.csv"),
                {"beta": [a[0] for a in atoms], "kappa": [a[1] for a in atoms]},
            )
        )
        summary = {"atoms": atoms, "eta": eta}
        return self.finalize(RunOutcome("recover-measure", files, summary, report))

    def run_demo_uniqueness(
        self, alphas: Sequence[float] = (0.4, 0.6)
    ) -> RunOutcome:
        """同一算子、源项与窗口下，不同核的观测与恢复结果彼此分离"""
        if len(alphas) < 2:
            raise PreconditionError("分离实验至少需要两个核")
        spectrum = self.spectrum()
        settings = self.config.regularization.to_settings()
        c = float(self.config.kernel.c)
        kernels = [PowerLawKernel(c, float(alpha)) for alpha in alphas]
        traces: List[FloatArray] = []
        recovered: List[RecoveryReport] = []
        errors: List[float] = []
        for kernel in kernels:
            synthetic = self.synthesize(kernel=kernel, spectrum=spectrum)
            traces.append(observe(synthetic.simulation, synthetic.coefficients))
            with self.logger.stage("核恢复"):
                report = recover_kernel(
                    self.window_from(synthetic),
                    spectrum.eigenvalues,
                    settings,
                    self.threads,
                )
            truth = true_kernel_samples(kernel, report.times)
            reliable = slice(max(report.unreliable_nodes) + 1, None)
            errors.append(relative_l2(report.values[reliable], truth[reliable]))
            recovered.append(report)

        grid = self.grid()
        _, i1 = grid.require_markers()
        trace_gap = min(
            float(np.max(np.abs(a[i1:] - b[i1:])))
            for i, a in enumerate(traces)
            for b in traces[i + 1 :]
        )
        length = min(report.values.size for report in recovered)
        reliable = slice(max(recovered[0].unreliable_nodes) + 1, length)
        kernel_gap = min(
            float(np.linalg.norm(a.values[reliable] - b.values[reliable]))
            / float(np.linalg.norm(b.values[reliable]))
            for i, a in enumerate(recovered)
            for b in recovered[i + 1 :]
        )
        worst_error = max(errors)
        ratio = kernel_gap / worst_error if worst_error > 0.0 else float("inf")
        summary = {
            "alphas": list(alphas),
            "min_trace_difference": trace_gap,
            "min_kernel_difference": kernel_gap,
            "max_recovery_error": worst_error,
            "separation_ratio": ratio,
        }
        if trace_gap < SEPARATION_THRESHOLD:
            raise InconsistencyError(
                f"观测迹差 {trace_gap:.3e} 低于 {SEPARATION_THRESHOLD}，未能区分核",
                summary,
            )
        columns: Dict[str, Sequence[float]] = {"t": recovered[0].times[:length]}
        for alpha, report in zip(alphas, recovered):
            columns[f"recovered_{alpha:g}"] = report.values[:length]
            columns[f"true_{alpha:g}"] = true_kernel_samples(
                PowerLawKernel(c, float(alpha)), report.times[:length]
            )
        files = [write_csv(self._path("uniqueness.csv"), columns)]
        trace_columns: Dict[str, Sequence[float]] = {"t": grid.times}
        for alpha, trace in zip(alphas, traces):
            trace_columns[f"trace_{alpha:g}"] = trace
        files.append(write_csv(self._path("uniqueness_traces.csv"), trace_columns))
        return self.finalize(RunOutcome("demo-uniqueness", files, summary))

    def caputo_residuals(self, synthetic: SyntheticData) -> Dict[int, float]:
        """通量形式与 Caputo 形式的逐模态一致性"""
        kernel = self.kernel()
        grid = synthetic.simulation.grid
        partner = sonine_partner(kernel, TimeGrid(T=grid.T, N=grid.N))
        return {
            k + 1: caputo_form(
                kernel,
                float(synthetic.simulation.eigenvalues[k]),
                synthetic.simulation.modes[k],
                synthetic.source.values[k],
                grid,
                partner,
            ).relative
            for k in range(synthetic.simulation.mode_count)
        }

from typing import Any, Callable, Optional, Tuple

import click

from src.infrastructure.config.config_manager import ConfigManager
from src.infrastructure.errors.error_handler import ErrorHandler
from src.infrastructure.logging.logger import get_logger
from src.service.experiment.experiment_runner import ExperimentRunner, RunOutcome
from src.ui.rich_console import RichConsole

DEFAULT_ML_ARGUMENTS = (-0.5, -1.0, -2.0, -5.0, -10.0)


@click.group()
@click.option("--config", "-c", default="config.yaml", help="配置文件路径")
@click.option("--verbose", "-v", is_flag=True, help="启用详细日志")
@click.option("--seed", type=int, default=None, help="覆盖配置中的随机种子")
@click.option("--out-dir", default=None, help="输出目录，覆盖 output.directory")
@click.option(
    "--override",
    "overrides",
    multiple=True,
    help="覆盖配置项，形如 grid.N=512，可重复",
)
@click.option(
    "--threads",
    type=int,
    default=None,
    envvar="FRACMEMORY_THREADS",
    help="并行线程数",
)
@click.pass_context
def cli(
    ctx: click.Context,
    config: str,
    verbose: bool,
    seed: Optional[int],
    out_dir: Optional[str],
    overrides: Tuple[str, ...],
    threads: Optional[int],
) -> None:
    """广义分数阶扩散：正问题模拟与反问题恢复"""
    ctx.ensure_object(dict)
    ctx.obj["config"] = config
    ctx.obj["verbose"] = verbose
    ctx.obj["seed"] = seed
    ctx.obj["out_dir"] = out_dir
    ctx.obj["overrides"] = list(overrides)
    ctx.obj["threads"] = threads
    ctx.obj["rich_console"] = RichConsole()

    if verbose:
        click.echo(f"使用配置文件: {config}")


def build_runner(ctx: click.Context) -> ExperimentRunner:
    """加载配置、配置日志并构造流水线"""
    overrides = list(ctx.obj["overrides"])
    if ctx.obj["seed"] is not None:
        overrides.append(f"seed={ctx.obj['seed']}")
    manager = ConfigManager(ctx.obj["config"])
    config = manager.load_config(overrides)
    level = "debug" if ctx.obj["verbose"] else config.app.log_level
    get_logger(log_file=config.app.log_file, log_level=level)
    return ExperimentRunner(
        config,
        ConfigManager.config_hash(config),
        out_dir=ctx.obj["out_dir"],
        threads=ctx.obj["threads"],
    )


def execute(
    ctx: click.Context, command: str, action: Callable[[ExperimentRunner], RunOutcome]
) -> None:
    """执行子命令；异常按类别映射为退出码"""
    rich_console: RichConsole = ctx.obj["rich_console"]
    try:
        runner = build_runner(ctx)
        outcome = action(runner)
    except Exception as e:
        info = ErrorHandler().handle_error(e, {"command": command})
        rich_console.print_error(f"[{info.category.value}] {info.message}")
        ctx.exit(info.exit_code)
        return

    rich_console.print_summary(command, outcome.summary)
    if outcome.report is not None:
        for warning in outcome.report.warnings:
            rich_console.print_warning(warning)
    files = list(outcome.files)
    if outcome.manifest_path:
        files.append(outcome.manifest_path)
    rich_console.print_files(files)


@cli.command()
@click.option("--caputo-check", is_flag=True, help="同时检查 Caputo 形式的残差")
@click.pass_context
def simulate(ctx: click.Context, caputo_check: bool) -> None:
    """正问题：写出模态轨迹与观测 CSV"""
    execute(ctx, "simulate", lambda runner: runner.run_simulate(caputo_check))


@cli.command()
@click.pass_context
def sonine(ctx: click.Context) -> None:
    """计算配置核的 Sonine 伴随核"""
    execute(ctx, "sonine", lambda runner: runner.run_sonine())


@cli.command()
@click.option("--alpha", type=float, default=None, help="阶数，缺省取 kernel.alpha")
@click.option("--z", "arguments", type=float, multiple=True, help="非正实参数，可重复")
@click.pass_context
def ml(
    ctx: click.Context, alpha: Optional[float], arguments: Tuple[float, ...]
) -> None:
    """计算 Mittag-Leffler 函数 E_α(z)"""

    def action(runner: ExperimentRunner) -> RunOutcome:
        order = alpha if alpha is not None else float(runner.config.kernel.alpha)
        return runner.run_ml(order, list(arguments or DEFAULT_ML_ARGUMENTS))

    execute(ctx, "ml", action)


@cli.command()
@click.option(
    "--samples", type=int, default=16, show_default=True, help="比较的时间点数"
)
@click.pass_context
def invert(ctx: click.Context, samples: int) -> None:
    """围道反演松弛函数并与时间推进解比较"""
    execute(ctx, "invert", lambda runner: runner.run_invert(samples))


def _data_option(function: Any) -> Any:
    return click.option(
        "--data",
        "data_path",
        type=click.Path(exists=True, dir_okay=False),
        default=None,
        help="观测数据 CSV；缺省时按配置合成",
    )(function)


@cli.command("recover-kernel")
@_data_option
@click.pass_context
def recover_kernel(ctx: click.Context, data_path: Optional[str]) -> None:
    """已知算子，由逐模态观测恢复记忆核"""
    execute(ctx, "recover-kernel", lambda runner: runner.run_recover_kernel(data_path))


@cli.command("recover-product")
@_data_option
@click.pass_context
def recover_product(ctx: click.Context, data_path: Optional[str]) -> None:
    """算子未知，恢复核-算子乘积并做规范化"""
    execute(
        ctx, "recover-product", lambda runner: runner.run_recover_product(data_path)
    )


@cli.command("recover-history")
@_data_option
@click.pass_context
def recover_history(ctx: click.Context, data_path: Optional[str]) -> None:
    """恢复初值与 t0 之前的源项历史"""
    execute(
        ctx, "recover-history", lambda runner: runner.run_recover_history(data_path)
    )


@cli.command("recover-functional")
@_data_option
@click.option(
    "--family",
    type=click.Choice(["power_law", "tempered"]),
    default=None,
    help="拟合的核族，缺省取 kernel.family",
)
@click.pass_context
def recover_functional(
    ctx: click.Context, data_path: Optional[str], family: Optional[str]
) -> None:
    """由标量泛函观测在参数族内恢复核"""
    execute(
        ctx,
        "recover-functional",
        lambda runner: runner.run_recover_functional(family, data_path),
    )


@cli.command("recover-measure")
@click.option(
    "--eigenvalues",
    "eigenvalue_path",
    type=click.Path(exists=True, dir_okay=False),
    default=None,
    help="含 lambda（可选 mu）列的 CSV；缺省时按配置合成",
)
@click.option("--shift-search", is_flag=True, help="同时搜索平移量 η")
@click.option("--from-window", is_flag=True, help="先由观测恢复核与特征值，再剥离测度")
@click.pass_context
def recover_measure(
    ctx: click.Context,
    eigenvalue_path: Optional[str],
    shift_search: bool,
    from_window: bool,
) -> None:
    """由特征值剥离分布阶测度的原子"""
    execute(
        ctx,
        "recover-measure",
        lambda runner: runner.run_recover_measure(
            eigenvalue_path, shift_search, from_window
        ),
    )


@cli.command("demo-uniqueness")
@click.option(
    "--alpha",
    "alphas",
    type=float,
    multiple=True,
    help="参与比较的幂律核阶数，可重复（缺省 0.4 与 0.6）",
)
@click.pass_context
def demo_uniqueness(ctx: click.Context, alphas: Tuple[float, ...]) -> None:
    """两核分离实验：观测迹与恢复的核都彼此可区分"""
    execute(
        ctx,
        "demo-uniqueness",
        lambda runner: runner.run_demo_uniqueness(list(alphas) or [0.4, 0.6]),
    )


def main() -> None:
    """主函数"""
    try:
        import trogon  # type: ignore

        cli_with_tui = trogon.tui()(cli)
        cli_with_tui()
    except ImportError:
        cli()


if __name__ == "__main__":
    main()

from src.infrastructure.monitoring.run_monitor import RunMonitor


# 测试阶段耗时累加
def test_record_stage_accumulates():
    monitor = RunMonitor()
    monitor.record_stage("正问题", 0.5)
    monitor.record_stage("正问题", 0.25)
    monitor.record_stage("反卷积", 1.0)

    timings = monitor.timings()
    assert timings["正问题"] == 0.75
    assert timings["反卷积"] == 1.0
    assert timings["total"] >= 0.0


# 测试内存峰值采样
def test_peak_memory_is_sampled(mocker):
    process = mocker.MagicMock()
    process.memory_info.return_value.rss = 64 * 1024 * 1024
    monitor = RunMonitor(_process=process)
    assert monitor.peak_rss_mb == 64.0

    process.memory_info.return_value.rss = 32 * 1024 * 1024
    monitor.record_stage("恢复", 0.1)
    assert monitor.peak_rss_mb == 64.0
    assert monitor.stages["恢复"].rss_mb == 32.0


# 测试真实进程上的采样
def test_real_process():
    monitor = RunMonitor()
    assert monitor.peak_rss_mb > 0.0

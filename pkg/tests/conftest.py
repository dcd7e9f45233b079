from hypothesis import HealthCheck, settings

# Several property tests exercise numpy-heavy code whose first call pays a
# one-off dispatch cost; wall-clock deadlines make them flaky, so rely on the
# example budget instead.
settings.register_profile(
    "sentbench", deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("sentbench")

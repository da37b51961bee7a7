from hypothesis import HealthCheck, settings

# keep property runs reproducible from one invocation to the next
settings.register_profile(
    "deterministic",
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("deterministic")

from hypothesis import HealthCheck, settings

# One CPU and a deterministic acceptance pipeline: no deadlines, no shrinking
# surprises between runs.
settings.register_profile(
    "repo",
    deadline=None,
    derandomize=True,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repo")

import hypothesis

hypothesis.settings.register_profile(
    "lab", max_examples=15, deadline=None, derandomize=True
)
hypothesis.settings.load_profile("lab")

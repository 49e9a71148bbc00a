"""Random instances, seeded trials and experiment reports."""

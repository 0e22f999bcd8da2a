# Experiment specs, presets, the trial engine and CSV output

# Experiment presets, runner and command-line entry point

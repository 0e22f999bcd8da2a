# Chart output for experiment results
